"""Label-aware dependency GCN encoder stack and representation fusion (NumPy, float64)."""

from gectree.depgcn.layers import (
    depgcn_stack,
    feed_forward,
    fuse,
    gcn_layer,
    layer_norm,
    sublayer_wrap,
)
from gectree.depgcn.params import (
    DEFAULT_BETA,
    DEFAULT_N2,
    GcnBlock,
    GcnParams,
    dump_params,
    init_params,
    load_params,
)
