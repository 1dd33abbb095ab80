"""Central-difference gradient checking for the DepGCN operations.

The scalar loss is the sum of all output entries. For each input and
parameter entry we compare the hand-derived gradient with

    (loss(x + eps) - loss(x - eps)) / (2 eps)

and report ``|analytic - numeric| / max(1, |analytic| + |numeric|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from gectree.depgcn import layers
from gectree.depgcn.params import GcnBlock, GcnParams, init_block
from gectree.errors import ContractError
from gectree.granularity import ArcMatrix

DEFAULT_EPS = 1e-5
# instances whose ReLU pre-activations fall this close to zero are redrawn
KINK_MARGIN = 1e-3


@dataclass
class GradReport:
    op: str
    max_rel_error: float
    worst: str  # "<tensor>[flat index]"
    n_checked: int


@dataclass
class GradCase:
    """A differentiable function of named arrays plus its analytic gradient."""

    op: str
    inputs: dict[str, np.ndarray]
    forward: Callable[[dict[str, np.ndarray]], np.ndarray]
    analytic: Callable[[dict[str, np.ndarray]], dict[str, np.ndarray]]
    kinks: Callable[[dict[str, np.ndarray]], list[np.ndarray]] = lambda _: []

    def min_kink_distance(self) -> float:
        pre = self.kinks(self.inputs)
        return min((float(np.abs(p).min()) for p in pre if p.size), default=np.inf)


def grad_check(case: GradCase, eps: float = DEFAULT_EPS) -> GradReport:
    grads = case.analytic(case.inputs)
    worst, worst_at, count = 0.0, "", 0
    for name, value in case.inputs.items():
        g = np.asarray(grads[name], dtype=float)
        if not np.all(np.isfinite(g)):
            raise ContractError(f"{case.op}: non-finite analytic gradient for {name}")
        if g.shape != value.shape:
            raise ContractError(f"{case.op}: gradient for {name} has shape {g.shape}, expected {value.shape}")
        flat = value.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            up = float(case.forward(case.inputs).sum())
            flat[k] = orig - eps
            down = float(case.forward(case.inputs).sum())
            flat[k] = orig
            numeric = (up - down) / (2 * eps)
            if not np.isfinite(numeric):
                raise ContractError(f"{case.op}: non-finite numeric gradient for {name}[{k}]")
            a = float(g.reshape(-1)[k])
            err = abs(a - numeric) / max(1.0, abs(a) + abs(numeric))
            count += 1
            if err > worst or not worst_at:
                worst, worst_at = err, f"{name}[{k}]"
    return GradReport(case.op, worst, worst_at, count)


# -- cases ----------------------------------------------------------------

def _random_arcs(rng, n, n_labels):
    A = rng.random((n, n))
    np.fill_diagonal(A, 0.0)
    A /= A.sum(axis=1, keepdims=True) + rng.random((n, 1))
    return A, [int(x) for x in rng.integers(0, n_labels, size=n)]


def gcn_case(rng: np.random.Generator, n: int = 3, d: int = 4, n_labels: int = 3) -> GradCase:
    A, ids = _random_arcs(rng, n, n_labels)
    inputs = {
        "H": rng.normal(size=(n, d)),
        "A": A,
        "W": rng.normal(size=(d, 2 * d)),
        "b": rng.normal(size=d),
        "label_table": rng.normal(size=(n_labels, d)),
    }

    def fwd(x):
        return layers.gcn_forward(x["H"], x["A"], ids, x["W"], x["b"], x["label_table"])[0]

    def grad(x):
        out, cache = layers.gcn_forward(x["H"], x["A"], ids, x["W"], x["b"], x["label_table"])
        return layers.gcn_backward(np.ones_like(out), cache)

    def kinks(x):
        return [layers.gcn_forward(x["H"], x["A"], ids, x["W"], x["b"], x["label_table"])[1][-1]]

    return GradCase("gcn_layer", inputs, fwd, grad, kinks)


def ff_case(rng: np.random.Generator, n: int = 3, d: int = 4, d_ff: int = 6) -> GradCase:
    inputs = {
        "H": rng.normal(size=(n, d)),
        "W1": rng.normal(size=(d_ff, d)),
        "b1": rng.normal(size=d_ff),
        "W2": rng.normal(size=(d, d_ff)),
        "b2": rng.normal(size=d),
    }

    def fwd(x):
        return layers.ff_forward(x["H"], x["W1"], x["b1"], x["W2"], x["b2"])[0]

    def grad(x):
        out, cache = layers.ff_forward(x["H"], x["W1"], x["b1"], x["W2"], x["b2"])
        return layers.ff_backward(np.ones_like(out), cache)

    def kinks(x):
        return [layers.ff_forward(x["H"], x["W1"], x["b1"], x["W2"], x["b2"])[1][3]]

    return GradCase("feed_forward", inputs, fwd, grad, kinks)


def wrap_case(rng: np.random.Generator, n: int = 3, d: int = 4, d_ff: int = 6) -> GradCase:
    """Residual + layer norm around the feed-forward sub-layer."""
    inputs = {
        "H": rng.normal(size=(n, d)),
        "W1": rng.normal(size=(d_ff, d)),
        "b1": rng.normal(size=d_ff),
        "W2": rng.normal(size=(d, d_ff)),
        "b2": rng.normal(size=d),
        "gain": rng.normal(size=d),
        "bias": rng.normal(size=d),
    }

    def run(x):
        return layers.wrap_forward(
            x["H"], lambda h: layers.ff_forward(h, x["W1"], x["b1"], x["W2"], x["b2"]), x["gain"], x["bias"]
        )

    def fwd(x):
        return run(x)[0]

    def grad(x):
        out, cache = run(x)
        return layers.wrap_backward(np.ones_like(out), cache, layers.ff_backward)

    def kinks(x):
        return [run(x)[1][0][3]]

    return GradCase("sublayer_wrap", inputs, fwd, grad, kinks)


def layer_norm_case(rng: np.random.Generator, n: int = 3, d: int = 5) -> GradCase:
    inputs = {"x": rng.normal(size=(n, d)), "gain": rng.normal(size=d), "bias": rng.normal(size=d)}

    def fwd(x):
        return layers.ln_forward(x["x"], x["gain"], x["bias"])[0]

    def grad(x):
        out, cache = layers.ln_forward(x["x"], x["gain"], x["bias"])
        return layers.ln_backward(np.ones_like(out), cache)

    return GradCase("layer_norm", inputs, fwd, grad)


def _params_from(inputs: dict[str, np.ndarray], n2: int, beta: float) -> GcnParams:
    blocks = []
    for l in range(n2):
        blocks.append(GcnBlock(**{
            name: inputs[f"blocks.{l}.{name}"]
            for name in ("W", "b", "W1", "b1", "W2", "b2", "ln1_gain", "ln1_bias", "ln2_gain", "ln2_bias")
        }))
    return GcnParams(inputs["label_table"], blocks, beta)


def stack_case(
    rng: np.random.Generator,
    n: int = 3,
    d: int = 4,
    n2: int = 2,
    n_labels: int = 3,
    params: GcnParams | None = None,
) -> GradCase:
    if params is None:
        table = rng.normal(size=(n_labels, d))
        blocks = []
        for _ in range(n2):
            blk = init_block(rng, d, 2 * d)
            # larger weights than the initialiser so ReLUs and norms are exercised
            for name, value in blk.tensors().items():
                value[...] = rng.normal(size=value.shape)
            blocks.append(blk)
        params = GcnParams(table, blocks)
    d, n2, n_labels = params.d, params.n2, params.label_table.shape[0]
    A, ids = _random_arcs(rng, n, n_labels)
    inputs = {"H": rng.normal(size=(n, d)), "A": A}
    inputs.update({k: v.copy() for k, v in params.tensors().items()})

    def run(x):
        return layers.stack_forward(x["H"], ArcMatrix(x["A"], ids), _params_from(x, n2, params.beta))

    def fwd(x):
        return run(x)[0]

    def grad(x):
        out, caches = run(x)
        return layers.stack_backward(np.ones_like(out), caches)

    def kinks(x):
        pre = []
        for c1, c2 in run(x)[1]:
            pre.append(c1[0][-1])  # GCN pre-activation
            pre.append(c2[0][3])  # FF hidden pre-activation
        return pre

    return GradCase(f"depgcn_stack(N2={n2})", inputs, fwd, grad, kinks)


def fuse_case(rng: np.random.Generator, n: int = 3, d: int = 4) -> GradCase:
    inputs = {
        "H_basic": rng.normal(size=(n, d)),
        "H_syn": rng.normal(size=(n, d)),
        "beta": np.array(rng.uniform(0.1, 0.9)),
    }

    def fwd(x):
        return layers.fuse(x["H_basic"], x["H_syn"], float(x["beta"]))

    def grad(x):
        return layers.fuse_backward(np.ones((n, d)), x["H_basic"], x["H_syn"], float(x["beta"]))

    return GradCase("fuse", inputs, fwd, grad)


def away_from_kinks(make: Callable[[np.random.Generator], GradCase], rng: np.random.Generator,
                    margin: float = KINK_MARGIN, tries: int = 100) -> GradCase:
    """Draw cases until every ReLU pre-activation is at least ``margin`` from zero."""
    for _ in range(tries):
        case = make(rng)
        if case.min_kink_distance() >= margin:
            return case
    raise ContractError(f"could not draw an instance clear of ReLU kinks after {tries} tries")
