"""Random trees and corrupted sentence pairs for property and stress testing."""

from __future__ import annotations

import random

import numpy as np

from gectree.conllu import DepTree
from gectree.edits import MISSING, REDUNDANT, SUBSTITUTED, EditSpan

LABELS = ("nsubj", "obj", "det", "amod", "advmod", "case", "punct", "cc", "conj", "aux")
ROOT_LABEL = "Root"


def vocabulary(size: int = 20) -> list[str]:
    return [f"w{i}" for i in range(size)]


def random_heads(rng: random.Random, n: int) -> list[int]:
    """A uniformly shuffled attachment order gives a random (possibly non-projective) tree."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = [0] * n
    for k, node in enumerate(order[1:], start=1):
        heads[node - 1] = order[rng.randrange(k)]
    return heads


def random_tree(rng: random.Random, n: int, vocab: list[str] | None = None, probs: bool = False) -> DepTree:
    vocab = vocab or vocabulary()
    heads = random_heads(rng, n)
    labels = [ROOT_LABEL if h == 0 else rng.choice(LABELS) for h in heads]
    tree = DepTree.from_forms([rng.choice(vocab) for _ in range(n)], heads, labels)
    if probs:
        tree.arc_probs = random_arc_probs(rng, heads)
    return tree


def random_arc_probs(rng: random.Random, heads: list[int]) -> np.ndarray:
    """Soft arcs whose argmax is ``heads``; the root row keeps most mass on the root."""
    n = len(heads)
    a = np.zeros((n, n))
    for i, h in enumerate(heads):
        others = [j for j in range(n) if j != i]
        raw = np.array([rng.random() * 0.5 for _ in others])
        top = 1.0 + rng.random()
        total = raw.sum() + top + (0.0 if h == 0 else rng.random() * 0.5)
        for j, v in zip(others, raw):
            a[i, j] = v / total
        if h > 0:
            a[i, h - 1] = top / total
    return a


def mutate(
    rng: random.Random,
    tgt: list[str],
    max_spans: int = 4,
    vocab: list[str] | None = None,
) -> tuple[list[str], list[EditSpan]]:
    """Corrupt a target sentence into a source sentence, returning the source and its spans.

    Spans are placed directly (not recovered by alignment), so n:m
    substitutions, adjacent spans of different kinds, redundant suffixes and
    missing roots all occur. Retries until the source is non-empty and not
    entirely redundant.
    """
    vocab = vocab or vocabulary()
    m = len(tgt)
    while True:
        k = rng.randint(0, max_spans)
        # each edit claims target positions [a, b); insertions claim the point a == b
        edits: list[tuple[int, int, str]] = []
        for _ in range(k):
            kind = rng.choice((SUBSTITUTED, REDUNDANT, MISSING))
            a = rng.randint(0, m if kind == REDUNDANT else m - 1)
            b = a if kind == REDUNDANT else min(m, a + rng.randint(1, 3))
            if any(_clash(a, b, x, y) for x, y, _ in edits):
                continue
            edits.append((a, b, kind))
        edits.sort(key=lambda e: (e[0], e[1]))

        src: list[str] = []
        spans: list[EditSpan] = []
        pos = 0
        for a, b, kind in edits:
            src.extend(tgt[pos:a])
            sb = len(src)
            if kind != MISSING:
                src.extend(rng.choice(vocab) for _ in range(rng.randint(1, 2)))
            spans.append(EditSpan(sb, len(src), a, b, kind))
            pos = b
        src.extend(tgt[pos:])
        redundant = sum(sp.src_end - sp.src_beg for sp in spans if sp.kind == REDUNDANT)
        if src and redundant < len(src):
            return src, spans


def _clash(a: int, b: int, x: int, y: int) -> bool:
    if a == b and x == y:
        return a == x
    if a == b:
        return x < a < y
    if x == y:
        return a < x < b
    return a < y and x < b


def adversarial_pair(rng: random.Random, tgt_tree: DepTree, vocab: list[str] | None = None):
    """Pairs aimed at the corners: redundant suffixes and a missing target root."""
    vocab = vocab or vocabulary()
    tgt = tgt_tree.forms
    m = len(tgt)
    if rng.random() < 0.5:
        extra = [rng.choice(vocab) for _ in range(rng.randint(2, 3))]
        return tgt + extra, [EditSpan(m, m + len(extra), m, m, REDUNDANT)]
    root = tgt_tree.heads.index(0)
    if m == 1:
        return [rng.choice(vocab)], [EditSpan(0, 1, 0, 1, SUBSTITUTED)]
    end = min(m, root + rng.randint(1, 2))
    if end - root == m:
        end = root + m - 1 if root == 0 else end
    src = tgt[:root] + tgt[end:]
    if not src:
        return [rng.choice(vocab)], [EditSpan(0, 1, 0, m, SUBSTITUTED)]
    return src, [EditSpan(root, root, root, end, MISSING)]
