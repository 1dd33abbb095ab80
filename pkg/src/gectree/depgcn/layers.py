"""Label-aware dependency GCN blocks and representation fusion, with hand-written gradients.

Conventions: ``H`` is ``n x d`` with one row per token. ``arcs.weights[i, j]``
is the weight with which token ``j`` heads token ``i``, so row ``i`` of the
GCN aggregates over token ``i``'s (soft) heads. ``arcs.label_ids[j]`` selects
the label embedding concatenated to ``h_j``. No self-loops are added.

Each ``*_forward`` returns ``(output, cache)`` and the matching
``*_backward`` maps ``d loss / d output`` to a dict of gradients.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from gectree.depgcn.params import GcnBlock, GcnParams
from gectree.errors import ContractError

LN_EPS = 1e-5


def _check_hidden(H: np.ndarray, d: int | None = None) -> None:
    if H.ndim != 2:
        raise ContractError(f"hidden states must be a matrix, got shape {H.shape}")
    if d is not None and H.shape[1] != d:
        raise ContractError(f"hidden size {H.shape[1]} does not match parameters ({d})")
    if not np.all(np.isfinite(H)):
        raise ContractError("hidden states contain non-finite values")


def _check_arcs(weights: np.ndarray, label_ids, n: int, n_labels: int) -> None:
    if weights.shape != (n, n):
        raise ContractError(f"arc matrix is {weights.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(weights)):
        raise ContractError("arc matrix contains non-finite values")
    if len(label_ids) != n:
        raise ContractError(f"{len(label_ids)} label ids for {n} tokens")
    if n and (min(label_ids) < 0 or max(label_ids) >= n_labels):
        raise ContractError(f"label id outside [0, {n_labels})")


# -- GCN sub-layer ----------------------------------------------------------

def gcn_forward(H, weights, label_ids, W, b, label_table):
    d = H.shape[1]
    _check_hidden(H, label_table.shape[1])
    _check_arcs(weights, label_ids, H.shape[0], label_table.shape[0])
    if W.shape != (d, 2 * d) or b.shape != (d,):
        raise ContractError(f"GCN weight {W.shape} / bias {b.shape} do not fit d={d}")
    ids = np.asarray(label_ids, dtype=int)
    X = np.concatenate([H, label_table[ids]], axis=1)
    P = X @ W.T
    Z = weights @ P + b
    return np.maximum(Z, 0.0), (weights, ids, W, label_table, X, P, Z)


def gcn_backward(dout, cache):
    weights, ids, W, label_table, X, P, Z = cache
    d = W.shape[0]
    dZ = dout * (Z > 0)
    dP = weights.T @ dZ
    dX = dP @ W
    d_table = np.zeros_like(label_table)
    np.add.at(d_table, ids, dX[:, d:])
    return {
        "H": dX[:, :d],
        "A": dZ @ P.T,
        "W": dP.T @ X,
        "b": dZ.sum(axis=0),
        "label_table": d_table,
    }


def gcn_layer(H: np.ndarray, arcs, block: GcnBlock, label_table: np.ndarray) -> np.ndarray:
    return gcn_forward(H, arcs.weights, arcs.label_ids, block.W, block.b, label_table)[0]


# -- feed-forward sub-layer -------------------------------------------------

def ff_forward(H, W1, b1, W2, b2):
    _check_hidden(H)
    d = H.shape[1]
    d_ff = W1.shape[0]
    if W1.shape != (d_ff, d) or b1.shape != (d_ff,) or W2.shape != (d, d_ff) or b2.shape != (d,):
        raise ContractError("feed-forward parameter shapes do not fit the hidden size")
    U = H @ W1.T + b1
    R = np.maximum(U, 0.0)
    return R @ W2.T + b2, (H, W1, W2, U, R)


def ff_backward(dout, cache):
    H, W1, W2, U, R = cache
    dR = dout @ W2
    dU = dR * (U > 0)
    return {
        "H": dU @ W1,
        "W1": dU.T @ H,
        "b1": dU.sum(axis=0),
        "W2": dout.T @ R,
        "b2": dout.sum(axis=0),
    }


def feed_forward(H: np.ndarray, block: GcnBlock) -> np.ndarray:
    return ff_forward(H, block.W1, block.b1, block.W2, block.b2)[0]


# -- residual + layer norm ---------------------------------------------------

def ln_forward(x, gain, bias, eps=LN_EPS):
    d = x.shape[-1]
    if d < 2:
        raise ContractError("layer normalisation needs at least 2 features")
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv
    return xhat * gain + bias, (xhat, inv, gain)


def ln_backward(dout, cache):
    xhat, inv, gain = cache
    d = xhat.shape[-1]
    dxhat = dout * gain
    dx = inv / d * (
        d * dxhat
        - dxhat.sum(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True)
    )
    return {"x": dx, "gain": (dout * xhat).sum(axis=0), "bias": dout.sum(axis=0)}


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    return ln_forward(x, gain, bias)[0]


def wrap_forward(x, sublayer_forward, gain, bias):
    """``LayerNorm(x + f(x))`` where ``sublayer_forward(x)`` returns ``(f(x), cache)``."""
    if x.shape[-1] < 2:
        raise ContractError("layer normalisation needs at least 2 features")
    fx, f_cache = sublayer_forward(x)
    out, ln_cache = ln_forward(x + fx, gain, bias)
    return out, (f_cache, ln_cache)


def wrap_backward(dout, cache, sublayer_backward):
    f_cache, ln_cache = cache
    g_ln = ln_backward(dout, ln_cache)
    dz = g_ln["x"]
    g_f = sublayer_backward(dz, f_cache)
    grads = {k: v for k, v in g_f.items() if k != "H"}
    grads["H"] = dz + g_f["H"]
    grads["gain"] = g_ln["gain"]
    grads["bias"] = g_ln["bias"]
    return grads


def sublayer_wrap(
    x: np.ndarray,
    f: Callable[[np.ndarray], np.ndarray],
    gain: np.ndarray,
    bias: np.ndarray,
) -> np.ndarray:
    return wrap_forward(x, lambda h: (f(h), None), gain, bias)[0]


# -- full stack ---------------------------------------------------------------

def stack_forward(H, arcs, params: GcnParams):
    _check_hidden(H, params.d)
    weights = np.asarray(arcs.weights, dtype=float)
    ids = list(arcs.label_ids)
    _check_arcs(weights, ids, H.shape[0], params.label_table.shape[0])
    caches = []
    x = H
    for blk in params.blocks:
        x, c1 = wrap_forward(
            x, lambda h, blk=blk: gcn_forward(h, weights, ids, blk.W, blk.b, params.label_table),
            blk.ln1_gain, blk.ln1_bias,
        )
        x, c2 = wrap_forward(
            x, lambda h, blk=blk: ff_forward(h, blk.W1, blk.b1, blk.W2, blk.b2),
            blk.ln2_gain, blk.ln2_bias,
        )
        caches.append((c1, c2))
    return x, caches


def stack_backward(dout, caches):
    """Gradients keyed like ``GcnParams.tensors()`` plus ``H`` and ``A``."""
    grads: dict[str, np.ndarray] = {}
    dA = None
    d_table = None
    dx = dout
    for l in reversed(range(len(caches))):
        c1, c2 = caches[l]
        g2 = wrap_backward(dx, c2, ff_backward)
        g1 = wrap_backward(g2["H"], c1, gcn_backward)
        dx = g1["H"]
        for name in ("W1", "b1", "W2", "b2"):
            grads[f"blocks.{l}.{name}"] = g2[name]
        grads[f"blocks.{l}.ln2_gain"] = g2["gain"]
        grads[f"blocks.{l}.ln2_bias"] = g2["bias"]
        grads[f"blocks.{l}.W"] = g1["W"]
        grads[f"blocks.{l}.b"] = g1["b"]
        grads[f"blocks.{l}.ln1_gain"] = g1["gain"]
        grads[f"blocks.{l}.ln1_bias"] = g1["bias"]
        dA = g1["A"] if dA is None else dA + g1["A"]
        d_table = g1["label_table"] if d_table is None else d_table + g1["label_table"]
    grads["H"] = dx
    if dA is not None:
        grads["A"] = dA
        grads["label_table"] = d_table
    return grads


def depgcn_stack(H_basic: np.ndarray, arcs, params: GcnParams) -> np.ndarray:
    """Run ``params.n2`` blocks of wrapped GCN then wrapped feed-forward sub-layers."""
    return stack_forward(H_basic, arcs, params)[0]


# -- fusion ---------------------------------------------------------------

def fuse(H_basic: np.ndarray, H_syn: np.ndarray, beta: float) -> np.ndarray:
    if H_basic.shape != H_syn.shape:
        raise ContractError(f"cannot fuse shapes {H_basic.shape} and {H_syn.shape}")
    if not 0.0 <= beta <= 1.0:
        raise ContractError(f"fusion factor {beta} outside [0, 1]")
    return beta * H_basic + (1.0 - beta) * H_syn


def fuse_backward(dout, H_basic, H_syn, beta):
    return {
        "H_basic": beta * dout,
        "H_syn": (1.0 - beta) * dout,
        "beta": np.array(float((dout * (H_basic - H_syn)).sum())),
    }
