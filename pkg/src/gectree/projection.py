"""Project a target-side dependency tree onto an ungrammatical source sentence.

Erroneous source tokens get one of three extra labels:

* ``S`` (substituted): the span's tokens attach, flat, to wherever the
  target-side span was attached.
* ``R`` (redundant): the token attaches to its right neighbour; a token at
  the end of the sentence attaches to the nearest non-redundant token on
  its left instead.
* ``M`` (missing): the token right after the gap is relabelled, its head is
  left alone. Children of a missing word climb to the missing word's head.

When one token collects several of these, ``S`` beats ``R`` beats ``M``.
"""

from __future__ import annotations

from typing import Collection, Sequence

from gectree.conllu import EMPTY_COLUMNS, DepTree, Token, check_tree
from gectree.edits import MISSING, REDUNDANT, SUBSTITUTED, EditSpan, check_spans
from gectree.errors import ContractError, DegenerateInputError

GED_LABELS = (SUBSTITUTED, REDUNDANT, MISSING)
_PRIORITY = {SUBSTITUTED: 0, REDUNDANT: 1, MISSING: 2}


class ProjectedTree(DepTree):
    """A source-side tree whose labels may include the GED labels S, R and M."""

    @property
    def ged_mask(self) -> list[bool]:
        return [label in _PRIORITY for label in self.labels]


def resolve_label_conflict(candidates: Collection[str]) -> str:
    if not candidates:
        raise ContractError("no candidate labels")
    return min(candidates, key=_PRIORITY.__getitem__)


def resolve_head(tgt_index: int, tgt_to_src: Sequence[int | None], tgt_heads: Sequence[int]) -> int:
    """Map a 1-based target head to a 1-based source head (0 = root).

    ``tgt_to_src[t]`` is the source position for target token ``t`` (index 0
    is the root and maps to 0), or ``None`` when ``t`` sits inside a missing
    span, in which case we climb to its own head.
    """
    t = tgt_index
    for _ in range(len(tgt_heads) + 1):
        if t == 0:
            return 0
        s = tgt_to_src[t]
        if s is not None:
            return s
        t = tgt_heads[t - 1]
    raise ContractError("target head chain does not reach the root")


def _depths(heads: Sequence[int]) -> list[int]:
    depth = [0] * (len(heads) + 1)
    done = [False] * (len(heads) + 1)
    done[0] = True
    for start in range(1, len(heads) + 1):
        path = []
        t = start
        while not done[t]:
            path.append(t)
            t = heads[t - 1]
        for p in reversed(path):
            depth[p] = depth[t] + 1
            done[p] = True
            t = p
    return depth


def project(src: Sequence[str], tgt_tree: DepTree, spans: Sequence[EditSpan]) -> ProjectedTree:
    n, m = len(src), tgt_tree.n
    if n == 0:
        raise DegenerateInputError("source sentence is empty")
    check_tree(tgt_tree)
    spans = list(spans)
    check_spans(spans, n, m)

    tgt_heads = tgt_tree.heads
    # 1-based maps; index 0 is the root
    tgt_to_src: list[int | None] = [0] + [None] * m
    src_to_tgt: list[int | None] = [None] * (n + 1)
    ged: list[set[str]] = [set() for _ in range(n + 1)]
    heads = [0] * (n + 1)
    labels = [""] * (n + 1)

    prev_s = prev_t = 0
    for sp in spans:
        for k in range(sp.src_beg - prev_s):
            s, t = prev_s + k + 1, prev_t + k + 1
            tgt_to_src[t], src_to_tgt[s] = s, t
        if sp.kind == SUBSTITUTED:
            for t in range(sp.tgt_beg + 1, sp.tgt_end + 1):
                tgt_to_src[t] = sp.src_beg + 1
        prev_s, prev_t = sp.src_end, sp.tgt_end
    for k in range(n - prev_s):
        s, t = prev_s + k + 1, prev_t + k + 1
        tgt_to_src[t], src_to_tgt[s] = s, t

    redundant = [False] * (n + 1)
    for sp in spans:
        if sp.kind == REDUNDANT:
            for s in range(sp.src_beg + 1, sp.src_end + 1):
                redundant[s] = True
    if all(redundant[1:]):
        raise DegenerateInputError("every source token is redundant; nothing to attach to")

    # step 1: copy aligned tokens
    for s in range(1, n + 1):
        t = src_to_tgt[s]
        if t is not None:
            heads[s] = resolve_head(tgt_heads[t - 1], tgt_to_src, tgt_heads)
            labels[s] = tgt_tree.labels[t - 1]

    # substituted spans attach flat to the external head of their highest target token
    depth = None
    for sp in spans:
        if sp.kind != SUBSTITUTED:
            continue
        if depth is None:
            depth = _depths(tgt_heads)
        inside = range(sp.tgt_beg + 1, sp.tgt_end + 1)
        top = min(inside, key=lambda t: (depth[t], t))
        head = resolve_head(tgt_heads[top - 1], tgt_to_src, tgt_heads)
        for s in range(sp.src_beg + 1, sp.src_end + 1):
            heads[s] = head
            labels[s] = SUBSTITUTED
            ged[s].add(SUBSTITUTED)

    # step 2: redundant tokens lean right, or left at the sentence end
    for s in range(1, n + 1):
        if not redundant[s]:
            continue
        if s < n:
            heads[s] = s + 1
        else:
            heads[s] = max(k for k in range(1, s) if not redundant[k])
        ged[s].add(REDUNDANT)

    # step 3: the token right after a gap gets M; a gap at the end changes nothing
    for sp in spans:
        if sp.kind == MISSING and sp.src_beg < n:
            ged[sp.src_beg + 1].add(MISSING)

    for s in range(1, n + 1):
        if ged[s]:
            labels[s] = resolve_label_conflict(ged[s])

    # step 4: keep a single root
    roots = [s for s in range(1, n + 1) if heads[s] == 0]
    new_root = roots[0]
    root_tgt = tgt_heads.index(0) + 1
    if tgt_to_src[root_tgt] is None and not ged[new_root] & {SUBSTITUTED, REDUNDANT}:
        # the target root was missing: the leftmost orphan takes its label, M included
        labels[new_root] = tgt_tree.labels[root_tgt - 1]
    for s in roots[1:]:
        heads[s] = new_root

    columns = [
        tgt_tree.token_columns(src_to_tgt[s] - 1) if src_to_tgt[s] is not None else EMPTY_COLUMNS
        for s in range(1, n + 1)
    ]
    out = ProjectedTree(
        tokens=[Token(s, form) for s, form in enumerate(src, start=1)],
        heads=heads[1:],
        labels=labels[1:],
        columns=columns,
    )
    check_tree(out)
    return out
