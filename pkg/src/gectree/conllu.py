"""CoNLL-U reading, writing and tree validation.

Only ID, FORM, HEAD and DEPREL are interpreted. The remaining six columns
(LEMMA, UPOS, XPOS, FEATS, DEPS, MISC) are carried verbatim so that trees
coming out of an upstream parser survive a round trip untouched.

Arc probabilities live in a JSON-lines sidecar, one record per sentence::

    {"sentence_index": 0, "n": 2, "matrix": [0.0, 1.0, 0.0, 0.0]}

``matrix`` is row-major with rows indexing dependents and columns indexing
heads. The root is not a column, so the probability of attaching to the root
is whatever mass a row leaves over.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from gectree.errors import ConlluParseError, ContractError, TreeValidationError

N_COLUMNS = 10
EMPTY_COLUMNS = ("_",) * 6
ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Token:
    index: int
    form: str


@dataclass(eq=False)
class DepTree:
    tokens: list[Token]
    heads: list[int]
    labels: list[str]
    arc_probs: np.ndarray | None = None
    # LEMMA, UPOS, XPOS, FEATS, DEPS, MISC per token
    columns: list[tuple[str, ...]] | None = None
    comments: list[str] = field(default_factory=list)

    @classmethod
    def from_forms(cls, forms, heads, labels, **kwargs) -> "DepTree":
        tokens = [Token(i + 1, form) for i, form in enumerate(forms)]
        return cls(tokens, list(heads), list(labels), **kwargs)

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    def token_columns(self, i: int) -> tuple[str, ...]:
        if self.columns is None:
            return EMPTY_COLUMNS
        return self.columns[i]

    def adjacency(self) -> np.ndarray:
        """Arc weights with rows as dependents and columns as heads.

        Falls back to the one-hot matrix of ``heads`` when no probabilities
        were attached; the root row is then all zeros.
        """
        if self.arc_probs is not None:
            return np.asarray(self.arc_probs, dtype=float)
        a = np.zeros((self.n, self.n))
        for i, h in enumerate(self.heads):
            if h > 0:
                a[i, h - 1] = 1.0
        return a

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DepTree):
            return NotImplemented
        if (self.forms, self.heads, self.labels) != (other.forms, other.heads, other.labels):
            return False
        if [self.token_columns(i) for i in range(self.n)] != [
            other.token_columns(i) for i in range(other.n)
        ]:
            return False
        if (self.arc_probs is None) != (other.arc_probs is None):
            return False
        return self.arc_probs is None or bool(np.array_equal(self.arc_probs, other.arc_probs))

    __hash__ = None  # mutable

    def __repr__(self) -> str:
        return f"{type(self).__name__}(forms={self.forms!r}, heads={self.heads!r}, labels={self.labels!r})"


class Violation(NamedTuple):
    kind: str  # "shape", "form", "range", "self-head", "cycle", "multi-root", "arc-probs"
    token: int | None  # 1-based index of the offending token, when there is one
    message: str

    def __str__(self) -> str:
        where = f" at token {self.token}" if self.token is not None else ""
        return f"{self.kind}{where}: {self.message}"


def validate_tree(tree: DepTree) -> Violation | None:
    """Return the first violated tree invariant, or ``None`` if the tree is valid.

    Checks run in a fixed order: shape, forms, head range, self-heads, cycles,
    root count, then arc probabilities. Once heads are in range and acyclic,
    every chain of heads ends at the root, so a separate connectivity check
    would never fire.
    """
    n = tree.n
    if n == 0:
        return Violation("shape", None, "tree has no tokens")
    if len(tree.heads) != n or len(tree.labels) != n:
        return Violation(
            "shape", None, f"{n} tokens but {len(tree.heads)} heads and {len(tree.labels)} labels"
        )
    if tree.columns is not None and len(tree.columns) != n:
        return Violation("shape", None, "pass-through columns do not match token count")
    for pos, tok in enumerate(tree.tokens, start=1):
        if tok.index != pos:
            return Violation("shape", pos, f"token index {tok.index} at position {pos}")
        if not tok.form or any(c.isspace() for c in tok.form):
            return Violation("form", pos, f"invalid form {tok.form!r}")
    for pos, label in enumerate(tree.labels, start=1):
        if not label or any(c.isspace() for c in label):
            return Violation("form", pos, f"invalid label {label!r}")
    for pos, h in enumerate(tree.heads, start=1):
        if not isinstance(h, (int, np.integer)) or not 0 <= h <= n:
            return Violation("range", pos, f"head {h!r} outside [0, {n}]")
        if h == pos:
            return Violation("self-head", pos, "token heads itself")

    # 0 = unvisited, 1 = on current path, 2 = known to reach the root
    state = [0] * (n + 1)
    state[0] = 2
    for start in range(1, n + 1):
        path = []
        node = start
        while state[node] == 0:
            state[node] = 1
            path.append(node)
            node = tree.heads[node - 1]
        if state[node] == 1:
            return Violation("cycle", node, "head chain returns to this token")
        for p in path:
            state[p] = 2

    roots = [pos for pos, h in enumerate(tree.heads, start=1) if h == 0]
    if len(roots) != 1:
        return Violation("multi-root", roots[1] if len(roots) > 1 else None, f"{len(roots)} tokens attach to the root")

    if tree.arc_probs is not None:
        a = np.asarray(tree.arc_probs, dtype=float)
        if a.shape != (n, n):
            return Violation("arc-probs", None, f"matrix shape {a.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(a)) or np.any(a < 0) or np.any(a > 1):
            return Violation("arc-probs", None, "entries must lie in [0, 1]")
        if np.any(np.diag(a) != 0):
            return Violation("arc-probs", None, "self-attachment probability must be zero")
        sums = a.sum(axis=1)
        bad = np.nonzero(sums > 1 + ROW_SUM_TOL)[0]
        if len(bad):
            return Violation("arc-probs", int(bad[0]) + 1, f"row sums to {sums[bad[0]]:.9g} > 1")
    return None


def check_tree(tree: DepTree) -> None:
    violation = validate_tree(tree)
    if violation is not None:
        raise TreeValidationError(violation)


def decode_utf8(text: str | bytes) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ConlluParseError(f"input is not valid UTF-8 ({e.reason} at byte {e.start})") from None
    return text


def parse_conllu(text: str | bytes) -> list[DepTree]:
    text = decode_utf8(text)
    trees: list[DepTree] = []
    comments: list[str] = []
    rows: list[tuple[int, list[str]]] = []
    block_start = 1

    def flush(end_lineno: int) -> None:
        if not rows and not comments:
            return
        if not rows:
            raise ConlluParseError("sentence has no tokens", block_start)
        n = len(rows)
        heads = []
        for lineno, cols in rows:
            try:
                h = int(cols[6])
            except ValueError:
                raise ConlluParseError(f"HEAD {cols[6]!r} is not an integer", lineno) from None
            if not 0 <= h <= n:
                raise ConlluParseError(f"HEAD {h} outside [0, {n}]", lineno)
            heads.append(h)
        trees.append(
            DepTree(
                tokens=[Token(i + 1, cols[1]) for i, (_, cols) in enumerate(rows)],
                heads=heads,
                labels=[cols[7] for _, cols in rows],
                columns=[(c[2], c[3], c[4], c[5], c[8], c[9]) for _, c in rows],
                comments=list(comments),
            )
        )
        comments.clear()
        rows.clear()

    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush(lineno)
            block_start = lineno + 1
            continue
        if not rows and not comments:
            block_start = lineno
        if line.startswith("#"):
            if rows:
                raise ConlluParseError("comment line inside a sentence", lineno)
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise ConlluParseError(f"expected {N_COLUMNS} tab-separated columns, found {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid or "." in tid:
            continue  # multiword token range or empty node
        try:
            index = int(tid)
        except ValueError:
            raise ConlluParseError(f"ID {tid!r} is not an integer", lineno) from None
        if index != len(rows) + 1:
            raise ConlluParseError(f"ID {index} out of sequence (expected {len(rows) + 1})", lineno)
        rows.append((lineno, cols))
    flush(lineno + 1)
    return trees


def write_conllu(trees: Iterable[DepTree]) -> str:
    out: list[str] = []
    for tree in trees:
        check_tree(tree)
        out.extend(tree.comments)
        for i, tok in enumerate(tree.tokens):
            lemma, upos, xpos, feats, deps, misc = tree.token_columns(i)
            out.append(
                "\t".join(
                    (str(tok.index), tok.form, lemma, upos, xpos, feats,
                     str(tree.heads[i]), tree.labels[i], deps, misc)
                )
            )
        out.append("")
    return "\n".join(out) + "\n" if out else ""


def read_conllu(path) -> list[DepTree]:
    with open(path, "rb") as f:
        return parse_conllu(f.read())


def parse_arc_probs(text: str | bytes) -> dict[int, np.ndarray]:
    """Parse a probability sidecar into ``{sentence_index: n x n matrix}``."""
    text = decode_utf8(text)
    out: dict[int, np.ndarray] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            idx, n, values = int(rec["sentence_index"]), int(rec["n"]), rec["matrix"]
        except (ValueError, KeyError, TypeError) as e:
            raise ConlluParseError(f"malformed probability record ({e})", lineno) from None
        if len(values) != n * n:
            raise ConlluParseError(f"expected {n * n} values for n={n}, found {len(values)}", lineno)
        if idx in out:
            raise ConlluParseError(f"duplicate sentence_index {idx}", lineno)
        out[idx] = np.asarray(values, dtype=float).reshape(n, n)
    return out


def write_arc_probs(matrices: dict[int, np.ndarray] | Iterable[np.ndarray]) -> str:
    items = matrices.items() if isinstance(matrices, dict) else enumerate(matrices)
    lines = []
    for idx, m in sorted(items, key=lambda kv: kv[0]):
        m = np.asarray(m, dtype=float)
        rec = {"sentence_index": int(idx), "n": int(m.shape[0]), "matrix": m.ravel().tolist()}
        lines.append(json.dumps(rec))
    return "".join(line + "\n" for line in lines)


def attach_arc_probs(trees: list[DepTree], matrices: dict[int, np.ndarray]) -> None:
    """Attach sidecar matrices to ``trees`` in place; sentences without a record keep one-hot arcs."""
    for idx, m in matrices.items():
        if not 0 <= idx < len(trees):
            raise ContractError(f"probability record for sentence {idx}, but only {len(trees)} trees")
        if m.shape != (trees[idx].n, trees[idx].n):
            raise ContractError(
                f"sentence {idx}: probability matrix is {m.shape[0]}x{m.shape[1]}, tree has {trees[idx].n} tokens"
            )
        trees[idx].arc_probs = m
