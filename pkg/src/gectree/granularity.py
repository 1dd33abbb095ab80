"""Move word-level trees to the units a GEC model consumes: subwords or characters.

Subword graphs copy every word-level arc probability onto all
(dependent unit, head unit) pairs and add nothing inside a word. Character
trees chain each multi-character word rightwards, so its last character
stands for the word.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from gectree.conllu import EMPTY_COLUMNS, DepTree, Token, decode_utf8
from gectree.errors import ConlluParseError, ContractError
from gectree.projection import ProjectedTree

SUBWORD_DELIMITER = "@@"
CHAR_LABEL = "char"


@dataclass(frozen=True)
class SegmentationMap:
    units: tuple[tuple[str, ...], ...]  # unit strings, one tuple per word

    @classmethod
    def from_words(cls, words: Sequence[Sequence[str]]) -> "SegmentationMap":
        return cls(tuple(tuple(w) for w in words))

    @classmethod
    def identity(cls, forms: Sequence[str]) -> "SegmentationMap":
        return cls(tuple((f,) for f in forms))

    @classmethod
    def characters(cls, forms: Sequence[str]) -> "SegmentationMap":
        return cls(tuple(tuple(f) for f in forms))

    @classmethod
    def parse_line(cls, line: str, delimiter: str = SUBWORD_DELIMITER) -> "SegmentationMap":
        """Parse ``buy@@ers are`` (or BPE-style ``buy@@ ers are``) into per-word units."""
        line = line.strip().replace(delimiter + " ", delimiter)
        words = []
        for word in line.split():
            parts = tuple(p for p in word.split(delimiter) if p)
            if not parts:
                raise ContractError(f"segmentation word {word!r} has no units")
            words.append(parts)
        return cls(tuple(words))

    def format_line(self, delimiter: str = SUBWORD_DELIMITER) -> str:
        return " ".join(delimiter.join(w) for w in self.units)

    @property
    def n_words(self) -> int:
        return len(self.units)

    @property
    def n_units(self) -> int:
        return sum(len(w) for w in self.units)

    @property
    def word_units(self) -> list[list[int]]:
        """0-based unit indices per word, tiling ``[0, n_units)`` in order."""
        out, k = [], 0
        for w in self.units:
            out.append(list(range(k, k + len(w))))
            k += len(w)
        return out

    @property
    def unit_word(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_words), [len(w) for w in self.units])

    def words(self) -> list[str]:
        return ["".join(w) for w in self.units]

    def check_covers(self, forms: Sequence[str]) -> None:
        if self.n_words != len(forms):
            raise ContractError(f"segmentation has {self.n_words} words, tree has {len(forms)}")
        for i, (joined, form) in enumerate(zip(self.words(), forms), start=1):
            if joined != form:
                raise ContractError(f"word {i}: units join to {joined!r}, tree form is {form!r}")


@dataclass
class ArcMatrix:
    weights: np.ndarray  # m x m, rows dependents, columns heads
    label_ids: list[int]

    @property
    def size(self) -> int:
        return len(self.label_ids)


def build_label_vocab(trees: Sequence[DepTree]) -> dict[str, int]:
    labels = sorted({label for tree in trees for label in tree.labels})
    return {label: i for i, label in enumerate(labels)}


def word_arc_matrix(tree: DepTree, vocab: Mapping[str, int]) -> ArcMatrix:
    try:
        ids = [vocab[label] for label in tree.labels]
    except KeyError as e:
        raise ContractError(f"label {e.args[0]!r} missing from the label vocabulary") from None
    return ArcMatrix(tree.adjacency().copy(), ids)


def expand_to_subwords(tree: DepTree, seg: SegmentationMap, vocab: Mapping[str, int]) -> ArcMatrix:
    seg.check_covers(tree.forms)
    word = word_arc_matrix(tree, vocab)
    uw = seg.unit_word
    # the diagonal of a valid arc matrix is zero, so intra-word blocks stay empty
    weights = word.weights[np.ix_(uw, uw)]
    return ArcMatrix(weights, [word.label_ids[w] for w in uw])


def to_char_tree(tree: DepTree, seg: SegmentationMap) -> ProjectedTree:
    seg.check_covers(tree.forms)
    spans = seg.word_units
    last = [units[-1] + 1 for units in spans]  # 1-based position of each word's last char
    forms: list[str] = []
    heads: list[int] = []
    labels: list[str] = []
    for w, units in enumerate(spans):
        for k, u in enumerate(units):
            forms.append(seg.units[w][k])
            if k < len(units) - 1:
                heads.append(u + 2)
                labels.append(CHAR_LABEL)
            else:
                h = tree.heads[w]
                heads.append(0 if h == 0 else last[h - 1])
                labels.append(tree.labels[w])
    return ProjectedTree(
        tokens=[Token(i + 1, f) for i, f in enumerate(forms)],
        heads=heads,
        labels=labels,
        columns=[EMPTY_COLUMNS] * len(forms),
    )


def parse_segmentation(text: str | bytes, delimiter: str = SUBWORD_DELIMITER) -> list[SegmentationMap]:
    return [SegmentationMap.parse_line(line, delimiter) for line in decode_utf8(text).splitlines()]


def write_arc_matrices(matrices: Sequence[ArcMatrix]) -> str:
    """JSON lines like the probability sidecar, plus the per-unit ``label_ids``."""
    lines = []
    for idx, am in enumerate(matrices):
        rec = {
            "sentence_index": idx,
            "n": am.size,
            "matrix": np.asarray(am.weights, dtype=float).ravel().tolist(),
            "label_ids": list(am.label_ids),
        }
        lines.append(json.dumps(rec) + "\n")
    return "".join(lines)


def parse_arc_matrices(text: str | bytes) -> list[ArcMatrix]:
    out = []
    for lineno, line in enumerate(decode_utf8(text).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            n = int(rec["n"])
            weights = np.asarray(rec["matrix"], dtype=float).reshape(n, n)
            ids = [int(x) for x in rec["label_ids"]]
        except (ValueError, KeyError, TypeError) as e:
            raise ConlluParseError(f"malformed arc-matrix record ({e})", lineno) from None
        if len(ids) != n:
            raise ConlluParseError(f"{len(ids)} label ids for n={n}", lineno)
        out.append(ArcMatrix(weights, ids))
    return out
