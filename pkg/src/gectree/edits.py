"""Token alignment and edit-span extraction for parallel GEC data.

Alignment is a weighted Levenshtein distance without transpositions, so a
word-order change shows up as a deletion plus an insertion. Costs:

    match 0 (exact string equality)
    substitution 0.25 if the tokens are equal ignoring case, else 1
    deletion 1, insertion 1

When several operations reach a DP cell at the same cost the backtrace picks
match, then substitution, then deletion, then insertion. All costs are
multiples of 0.25, so the float comparisons below are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

from gectree.errors import ContractError, DegenerateInputError

MATCH, SUB, DEL, INS = "match", "sub", "del", "ins"

SUBSTITUTED, REDUNDANT, MISSING = "S", "R", "M"
KINDS = (SUBSTITUTED, REDUNDANT, MISSING)


class Op(NamedTuple):
    kind: str
    src: int | None  # 0-based source index, None for insertions
    tgt: int | None  # 0-based target index, None for deletions


@dataclass(frozen=True)
class Alignment:
    ops: tuple[Op, ...]
    cost: float


@dataclass(frozen=True, order=True)
class EditSpan:
    src_beg: int
    src_end: int
    tgt_beg: int
    tgt_end: int
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown span kind {self.kind!r}")
        if not (0 <= self.src_beg <= self.src_end and 0 <= self.tgt_beg <= self.tgt_end):
            raise ContractError(f"bad span ranges {self}")
        src_empty = self.src_beg == self.src_end
        tgt_empty = self.tgt_beg == self.tgt_end
        expected = {
            SUBSTITUTED: (False, False),
            REDUNDANT: (False, True),
            MISSING: (True, False),
        }[self.kind]
        if (src_empty, tgt_empty) != expected:
            raise ContractError(f"span ranges do not fit kind {self.kind}: {self.to_record()}")

    def to_record(self) -> str:
        return f"{self.src_beg} {self.src_end} {self.tgt_beg} {self.tgt_end} {self.kind}"

    @classmethod
    def from_record(cls, text: str) -> "EditSpan":
        parts = text.split()
        if len(parts) != 5:
            raise ContractError(f"span record needs 5 fields: {text!r}")
        try:
            a, b, c, d = map(int, parts[:4])
        except ValueError:
            raise ContractError(f"non-integer offset in span record {text!r}") from None
        return cls(a, b, c, d, parts[4])


def sub_cost(a: str, b: str) -> float:
    if a == b:
        return 0.0
    if a.lower() == b.lower():
        return 0.25
    return 1.0


def align_tokens(src: Sequence[str], tgt: Sequence[str]) -> Alignment:
    n, m = len(src), len(tgt)
    if n == 0 or m == 0:
        raise DegenerateInputError(f"cannot align empty sequence (source {n} tokens, target {m} tokens)")

    dist = [[0.0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = float(i)
    for j in range(1, m + 1):
        dist[0][j] = float(j)
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        s = src[i - 1]
        for j in range(1, m + 1):
            row[j] = min(prev[j - 1] + sub_cost(s, tgt[j - 1]), prev[j] + 1.0, row[j - 1] + 1.0)

    ops: list[Op] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0:
            c = sub_cost(src[i - 1], tgt[j - 1])
            if dist[i - 1][j - 1] + c == here:
                ops.append(Op(MATCH if c == 0 else SUB, i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if i > 0 and dist[i - 1][j] + 1.0 == here:
            ops.append(Op(DEL, i - 1, None))
            i -= 1
        else:
            ops.append(Op(INS, None, j - 1))
            j -= 1
    ops.reverse()
    return Alignment(tuple(ops), dist[n][m])


def merge_to_spans(alignment: Alignment) -> list[EditSpan]:
    """Collapse each maximal run of non-match operations into one span."""
    spans = []
    i = j = 0
    run_start: tuple[int, int] | None = None
    for op in alignment.ops:
        if op.kind == MATCH:
            if run_start is not None:
                spans.append(_span(run_start, i, j))
                run_start = None
            i += 1
            j += 1
            continue
        if run_start is None:
            run_start = (i, j)
        if op.src is not None:
            i += 1
        if op.tgt is not None:
            j += 1
    if run_start is not None:
        spans.append(_span(run_start, i, j))
    return spans


def _span(start: tuple[int, int], i: int, j: int) -> EditSpan:
    sb, tb = start
    if sb < i and tb < j:
        kind = SUBSTITUTED
    elif sb < i:
        kind = REDUNDANT
    else:
        kind = MISSING
    return EditSpan(sb, i, tb, j, kind)


def extract_spans(src: Sequence[str], tgt: Sequence[str]) -> list[EditSpan]:
    return merge_to_spans(align_tokens(src, tgt))


def apply_spans(src: Sequence[str], tgt: Sequence[str], spans: Sequence[EditSpan]) -> list[str]:
    """Rewrite ``src`` by applying each span's target-side replacement."""
    out: list[str] = []
    pos = 0
    for sp in sorted(spans):
        out.extend(src[pos:sp.src_beg])
        out.extend(tgt[sp.tgt_beg:sp.tgt_end])
        pos = sp.src_end
    out.extend(src[pos:])
    return out


def check_spans(spans: Sequence[EditSpan], n_src: int, n_tgt: int) -> None:
    """Raise unless ``spans`` are sorted, disjoint and leave equal-length gaps on both sides."""
    prev_s = prev_t = 0
    for sp in spans:
        gap_s, gap_t = sp.src_beg - prev_s, sp.tgt_beg - prev_t
        if gap_s < 0 or gap_t < 0:
            raise ContractError(f"span {sp.to_record()} overlaps or is out of order")
        if gap_s != gap_t:
            raise ContractError(
                f"span {sp.to_record()}: unaligned gap ({gap_s} source vs {gap_t} target tokens)"
            )
        prev_s, prev_t = sp.src_end, sp.tgt_end
    if prev_s > n_src or prev_t > n_tgt:
        raise ContractError(f"spans reach past the sentence ({n_src} source, {n_tgt} target tokens)")
    if n_src - prev_s != n_tgt - prev_t:
        raise ContractError(
            f"unaligned tail after last span ({n_src - prev_s} source vs {n_tgt - prev_t} target tokens)"
        )


def format_span_line(spans: Sequence[EditSpan]) -> str:
    return "\t".join(sp.to_record() for sp in spans)


def parse_span_line(line: str) -> list[EditSpan]:
    line = line.rstrip("\r\n")
    if not line.strip():
        return []
    return [EditSpan.from_record(rec) for rec in line.split("\t")]
