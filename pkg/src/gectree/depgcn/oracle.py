"""Straight-line reference implementations using Python loops over lists.

They share no code with the vectorised layers and exist only to check them.
Inputs are nested lists (or anything indexable); outputs are nested lists.
"""

from __future__ import annotations

import math


def relu(x: float) -> float:
    return x if x > 0.0 else 0.0


def gcn_loop(H, A, label_ids, W, b, table):
    n, d = len(H), len(H[0])
    out = []
    for i in range(n):
        row = []
        for r in range(d):
            acc = 0.0
            for j in range(n):
                concat = list(H[j]) + list(table[label_ids[j]])
                proj = 0.0
                for c in range(2 * d):
                    proj += W[r][c] * concat[c]
                acc += A[i][j] * proj
            row.append(relu(acc + b[r]))
        out.append(row)
    return out


def ff_loop(H, W1, b1, W2, b2):
    d_ff, d = len(W1), len(H[0])
    out = []
    for h in H:
        hidden = []
        for k in range(d_ff):
            s = b1[k]
            for c in range(d):
                s += W1[k][c] * h[c]
            hidden.append(relu(s))
        row = []
        for r in range(d):
            s = b2[r]
            for k in range(d_ff):
                s += W2[r][k] * hidden[k]
            row.append(s)
        out.append(row)
    return out


def layer_norm_loop(x, gain, bias, eps=1e-5):
    out = []
    for row in x:
        d = len(row)
        mean = sum(row) / d
        var = sum((v - mean) ** 2 for v in row) / d
        std = math.sqrt(var + eps)
        out.append([gain[c] * (row[c] - mean) / std + bias[c] for c in range(d)])
    return out


def wrap_loop(x, f, gain, bias):
    fx = f(x)
    summed = [[x[i][c] + fx[i][c] for c in range(len(x[i]))] for i in range(len(x))]
    return layer_norm_loop(summed, gain, bias)


def stack_loop(H, A, label_ids, params):
    """``params`` is a GcnParams; tensors are read entry by entry."""
    table = params.label_table.tolist()
    x = [list(r) for r in H]
    for blk in params.blocks:
        W, b = blk.W.tolist(), blk.b.tolist()
        x = wrap_loop(x, lambda h: gcn_loop(h, A, label_ids, W, b, table),
                      blk.ln1_gain.tolist(), blk.ln1_bias.tolist())
        W1, b1, W2, b2 = blk.W1.tolist(), blk.b1.tolist(), blk.W2.tolist(), blk.b2.tolist()
        x = wrap_loop(x, lambda h: ff_loop(h, W1, b1, W2, b2),
                      blk.ln2_gain.tolist(), blk.ln2_bias.tolist())
    return x


def fuse_loop(Hb, Hs, beta):
    return [[beta * Hb[i][c] + (1.0 - beta) * Hs[i][c] for c in range(len(Hb[i]))] for i in range(len(Hb))]
