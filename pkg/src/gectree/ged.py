"""Token-level binary error-detection scoring.

Counts are micro-averaged over all tokens in the corpus. Zero-division
conventions: precision is 0 without predicted positives, recall is 0
without gold positives, F0.5 is 0 when both are 0, except that a corpus
with no positives on either side scores 1 across the board.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gectree.conllu import DepTree, decode_utf8
from gectree.errors import ContractError
from gectree.projection import GED_LABELS

BETA = 0.5


@dataclass(frozen=True)
class GedScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_half: float

    def format(self) -> str:
        return (
            f"TP={self.tp} FP={self.fp} FN={self.fn} "
            f"P={self.precision:.4f} R={self.recall:.4f} F0.5={self.f_half:.4f}"
        )


def extract_ged_labels(tree: DepTree) -> list[bool]:
    return [label in GED_LABELS for label in tree.labels]


def f_beta(p: float, r: float, beta: float = BETA) -> float:
    b2 = beta * beta
    denom = b2 * p + r
    return (1 + b2) * p * r / denom if denom > 0 else 0.0


def score_ged(pred: Sequence[Sequence[bool]], gold: Sequence[Sequence[bool]]) -> GedScore:
    if len(pred) != len(gold):
        raise ContractError(f"{len(pred)} predicted sentences vs {len(gold)} gold sentences")
    tp = fp = fn = 0
    for k, (p_sent, g_sent) in enumerate(zip(pred, gold)):
        if len(p_sent) != len(g_sent):
            raise ContractError(f"sentence {k}: {len(p_sent)} predicted tokens vs {len(g_sent)} gold tokens")
        for p, g in zip(p_sent, g_sent):
            if p and g:
                tp += 1
            elif p:
                fp += 1
            elif g:
                fn += 1
    if tp + fp + fn == 0:
        return GedScore(0, 0, 0, 1.0, 1.0, 1.0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return GedScore(tp, fp, fn, precision, recall, f_beta(precision, recall))


def parse_masks(text: str | bytes) -> list[list[bool]]:
    """One sentence per line, space-separated ``0``/``1`` per token."""
    out = []
    for lineno, line in enumerate(decode_utf8(text).splitlines(), start=1):
        row = []
        for tok in line.split():
            if tok not in ("0", "1"):
                raise ContractError(f"line {lineno}: mask value {tok!r} is not 0 or 1")
            row.append(tok == "1")
        out.append(row)
    return out


def format_masks(masks: Sequence[Sequence[bool]]) -> str:
    return "".join(" ".join("1" if v else "0" for v in row) + "\n" for row in masks)
