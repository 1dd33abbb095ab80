"""Parameter containers, seeded initialisation and the plain-text parameter file."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from gectree.errors import ContractError

DEFAULT_N2 = 3
DEFAULT_BETA = 0.5
INIT_SCALE = 0.1


@dataclass
class GcnBlock:
    W: np.ndarray  # d x 2d
    b: np.ndarray  # d
    W1: np.ndarray  # d_ff x d
    b1: np.ndarray  # d_ff
    W2: np.ndarray  # d x d_ff
    b2: np.ndarray  # d
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray

    @property
    def d(self) -> int:
        return self.W.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class GcnParams:
    label_table: np.ndarray  # |L| x d
    blocks: list[GcnBlock] = field(default_factory=list)
    beta: float = DEFAULT_BETA

    @property
    def d(self) -> int:
        return self.label_table.shape[1]

    @property
    def n2(self) -> int:
        return len(self.blocks)

    def tensors(self) -> dict[str, np.ndarray]:
        out = {"label_table": self.label_table}
        for l, block in enumerate(self.blocks):
            for name, value in block.tensors().items():
                out[f"blocks.{l}.{name}"] = value
        return out

    def check(self) -> None:
        d = self.d
        if d < 2:
            raise ContractError(f"hidden size must be at least 2, got {d}")
        for name, value in self.tensors().items():
            if not np.all(np.isfinite(value)):
                raise ContractError(f"tensor {name} has non-finite entries")
        for l, blk in enumerate(self.blocks):
            d_ff = blk.W1.shape[0]
            expected = {
                "W": (d, 2 * d), "b": (d,), "W1": (d_ff, d), "b1": (d_ff,),
                "W2": (d, d_ff), "b2": (d,), "ln1_gain": (d,), "ln1_bias": (d,),
                "ln2_gain": (d,), "ln2_bias": (d,),
            }
            for name, shape in expected.items():
                got = getattr(blk, name).shape
                if got != shape:
                    raise ContractError(f"tensor blocks.{l}.{name} has shape {got}, expected {shape}")
        if not np.isfinite(self.beta):
            raise ContractError("beta is not finite")


def init_block(rng: np.random.Generator, d: int, d_ff: int) -> GcnBlock:
    def u(*shape):
        return rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)

    return GcnBlock(
        W=u(d, 2 * d), b=u(d), W1=u(d_ff, d), b1=u(d_ff), W2=u(d, d_ff), b2=u(d),
        ln1_gain=np.ones(d), ln1_bias=np.zeros(d), ln2_gain=np.ones(d), ln2_bias=np.zeros(d),
    )


def init_params(
    d: int,
    n_labels: int,
    n2: int = DEFAULT_N2,
    d_ff: int | None = None,
    beta: float = DEFAULT_BETA,
    seed: int = 0,
) -> GcnParams:
    """Seeded initialiser: weights and biases uniform in [-0.1, 0.1], layer norms at identity."""
    rng = np.random.default_rng(seed)
    d_ff = d_ff or 2 * d
    table = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(n_labels, d))
    return GcnParams(table, [init_block(rng, d, d_ff) for _ in range(n2)], beta)


def dump_params(params: GcnParams) -> str:
    """Serialise as text: a ``beta`` line, then per tensor a header and one line of values.

    Header format is ``tensor <name> <ndim> <dim>...``; values are written
    with ``repr`` so that a round trip is exact.
    """
    lines = [f"beta {params.beta!r}"]
    for name, value in params.tensors().items():
        lines.append(" ".join(["tensor", name, str(value.ndim), *map(str, value.shape)]))
        lines.append(" ".join(repr(float(v)) for v in value.ravel()))
    return "\n".join(lines) + "\n"


def load_params(text: str) -> GcnParams:
    lines = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    beta = DEFAULT_BETA
    tensors: dict[str, np.ndarray] = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] == "beta":
            beta = float(parts[1])
            i += 1
            continue
        if parts[0] != "tensor" or len(parts) < 3:
            raise ContractError(f"unexpected line in parameter file: {lines[i]!r}")
        name, ndim = parts[1], int(parts[2])
        shape = tuple(int(x) for x in parts[3:3 + ndim])
        if i + 1 >= len(lines):
            raise ContractError(f"tensor {name}: missing values")
        values = np.array([float(x) for x in lines[i + 1].split()])
        if values.size != int(np.prod(shape)):
            raise ContractError(f"tensor {name}: expected {int(np.prod(shape))} values, found {values.size}")
        tensors[name] = values.reshape(shape)
        i += 2

    if "label_table" not in tensors:
        raise ContractError("parameter file has no label_table")
    n_blocks = len({name.split(".")[1] for name in tensors if name.startswith("blocks.")})
    block_names = [f.name for f in fields(GcnBlock)]
    blocks = []
    for l in range(n_blocks):
        missing = [n for n in block_names if f"blocks.{l}.{n}" not in tensors]
        if missing:
            raise ContractError(f"block {l} is missing tensors {missing}")
        blocks.append(GcnBlock(**{n: tensors[f"blocks.{l}.{n}"] for n in block_names}))
    params = GcnParams(tensors["label_table"], blocks, beta)
    params.check()
    return params
