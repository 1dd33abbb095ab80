"""Self-check suites: DepGCN oracle equivalence and gradients, projection and granularity fuzzing."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from gectree.conllu import validate_tree
from gectree.depgcn import layers, oracle
from gectree.depgcn.gradcheck import (
    DEFAULT_EPS,
    GradReport,
    away_from_kinks,
    ff_case,
    fuse_case,
    gcn_case,
    grad_check,
    layer_norm_case,
    stack_case,
    wrap_case,
)
from gectree.depgcn.params import GcnBlock, GcnParams
from gectree.edits import extract_spans
from gectree.errors import ContractError
from gectree.fuzz import adversarial_pair, mutate, random_tree, vocabulary
from gectree.granularity import ArcMatrix, SegmentationMap, build_label_vocab, expand_to_subwords, to_char_tree
from gectree.projection import project

ORACLE_TOL = 1e-10
GRAD_TOL = 1e-4


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


# -- DepGCN oracle equivalence ------------------------------------------------

def _random_instance(rng: np.random.Generator, n: int, d: int, n_labels: int, n2: int):
    d_ff = int(rng.integers(1, 2 * d + 1))
    A = rng.random((n, n))
    np.fill_diagonal(A, 0.0)
    arcs = ArcMatrix(A, [int(x) for x in rng.integers(0, n_labels, size=n)])
    blocks = [
        GcnBlock(
            W=rng.normal(size=(d, 2 * d)), b=rng.normal(size=d),
            W1=rng.normal(size=(d_ff, d)), b1=rng.normal(size=d_ff),
            W2=rng.normal(size=(d, d_ff)), b2=rng.normal(size=d),
            ln1_gain=rng.normal(size=d), ln1_bias=rng.normal(size=d),
            ln2_gain=rng.normal(size=d), ln2_bias=rng.normal(size=d),
        )
        for _ in range(n2)
    ]
    params = GcnParams(rng.normal(size=(n_labels, d)), blocks, float(rng.uniform(0.05, 0.95)))
    return rng.normal(size=(n, d)), arcs, params


def oracle_errors(rng: np.random.Generator, n: int, d: int) -> dict[str, float]:
    """Max absolute difference between each vectorised op and its loop oracle on one instance."""
    n_labels = int(rng.integers(1, 5))
    H, arcs, params = _random_instance(rng, n, d, n_labels, n2=int(rng.integers(0, 4)))
    blk = params.blocks[0] if params.blocks else _random_instance(rng, n, d, n_labels, 1)[2].blocks[0]
    A, ids, table = arcs.weights.tolist(), arcs.label_ids, params.label_table
    Hl = H.tolist()

    def diff(x, y):
        return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))

    gcn = layers.gcn_layer(H, arcs, blk, table)
    ff = layers.feed_forward(H, blk)
    gcn_ref = oracle.gcn_loop(Hl, A, ids, blk.W.tolist(), blk.b.tolist(), table.tolist())
    ff_ref = oracle.ff_loop(Hl, blk.W1.tolist(), blk.b1.tolist(), blk.W2.tolist(), blk.b2.tolist())
    wrapped = layers.sublayer_wrap(H, lambda h: layers.gcn_layer(h, arcs, blk, table), blk.ln1_gain, blk.ln1_bias)
    wrapped_ref = oracle.wrap_loop(
        Hl, lambda h: oracle.gcn_loop(h, A, ids, blk.W.tolist(), blk.b.tolist(), table.tolist()),
        blk.ln1_gain.tolist(), blk.ln1_bias.tolist(),
    )
    H2 = rng.normal(size=H.shape)
    return {
        "gcn_layer": diff(gcn, gcn_ref),
        "feed_forward": diff(ff, ff_ref),
        "sublayer_wrap": diff(wrapped, wrapped_ref),
        "depgcn_stack": diff(layers.depgcn_stack(H, arcs, params), oracle.stack_loop(Hl, A, ids, params)),
        "fuse": diff(layers.fuse(H, H2, params.beta), oracle.fuse_loop(Hl, H2.tolist(), params.beta)),
    }


def oracle_suite(seed: int = 0, instances: int = 100, max_n: int = 6, max_d: int = 8) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for _ in range(instances):
        n = int(rng.integers(1, max_n + 1))
        d = int(rng.integers(2, max_d + 1))
        for op, err in oracle_errors(rng, n, d).items():
            worst[op] = max(worst.get(op, 0.0), err)
    ok = all(v <= ORACLE_TOL for v in worst.values())
    detail = ", ".join(f"{op} {err:.2e}" for op, err in worst.items())
    return SuiteResult(f"depgcn oracle equivalence ({instances} instances, tol {ORACLE_TOL:g})", ok, detail, worst)


# -- gradients ------------------------------------------------------------------

def gradient_reports(seed: int = 0, eps: float = DEFAULT_EPS, params: GcnParams | None = None) -> list[GradReport]:
    rng = np.random.default_rng(seed)
    makers = [
        lambda r: gcn_case(r, n=3, d=4),
        ff_case,
        wrap_case,
        layer_norm_case,
        lambda r: stack_case(r, n=3, d=4, n2=2),
        fuse_case,
    ]
    if params is not None:
        makers.append(lambda r: stack_case(r, n=3, params=params))
    return [grad_check(away_from_kinks(make, rng), eps) for make in makers]


def fuse_boundaries_exact(seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    Hb, Hs = rng.normal(size=(4, 5)), rng.normal(size=(4, 5))
    one, zero = layers.fuse(Hb, Hs, 1.0), layers.fuse(Hb, Hs, 0.0)
    return one.tobytes() == Hb.tobytes() and zero.tobytes() == Hs.tobytes()


def gradient_suite(seed: int = 0, eps: float = DEFAULT_EPS, params: GcnParams | None = None) -> SuiteResult:
    reports = gradient_reports(seed, eps, params)
    worst = max(reports, key=lambda r: r.max_rel_error)
    boundaries = fuse_boundaries_exact(seed)
    ok = worst.max_rel_error < GRAD_TOL and boundaries
    detail = (
        f"max relative error {worst.max_rel_error:.3e} ({worst.op} at {worst.worst}); "
        f"fuse boundaries {'exact' if boundaries else 'INEXACT'}"
    )
    return SuiteResult(
        f"depgcn gradient check (eps {eps:g}, tol {GRAD_TOL:g})", ok, detail,
        {r.op: r.max_rel_error for r in reports},
    )


# -- projection fuzzing ---------------------------------------------------------

def fuzz_pairs(seed: int, count: int, max_n: int = 12, vocab_size: int = 20, max_spans: int = 4):
    """Yield ``(src, tgt_tree, spans)``; a quarter adversarial, a quarter from the aligner."""
    rng = random.Random(seed)
    vocab = vocabulary(vocab_size)
    for k in range(count):
        tree = random_tree(rng, rng.randint(1, max_n), vocab)
        mode = k % 4
        if mode == 0:
            src, spans = adversarial_pair(rng, tree, vocab)
        elif mode == 1:
            src, _ = mutate(rng, tree.forms, max_spans, vocab)
            spans = extract_spans(src, tree.forms)
        else:
            src, spans = mutate(rng, tree.forms, max_spans, vocab)
        yield src, tree, spans


def projection_fuzz(seed: int = 0, count: int = 10_000) -> SuiteResult:
    failures = []
    for k, (src, tree, spans) in enumerate(fuzz_pairs(seed, count)):
        try:
            violation = validate_tree(project(src, tree, spans))
        except ContractError as e:
            violation = e
        if violation is not None:
            failures.append((k, str(violation)))
    detail = f"{count - len(failures)}/{count} projected trees valid"
    if failures:
        detail += f"; first failure #{failures[0][0]}: {failures[0][1]}"
    return SuiteResult("projection validity fuzz", not failures, detail, {"count": count, "failures": len(failures)})


# -- granularity fuzzing --------------------------------------------------------

def _random_segmentation(rng: random.Random, forms: list[str]) -> SegmentationMap:
    words = []
    for f in forms:
        cuts = sorted(rng.sample(range(1, len(f)), rng.randint(0, len(f) - 1))) if len(f) > 1 else []
        bounds = [0, *cuts, len(f)]
        words.append([f[a:b] for a, b in zip(bounds, bounds[1:])])
    return SegmentationMap.from_words(words)


def granularity_fuzz(seed: int = 0, count: int = 1000) -> SuiteResult:
    rng = random.Random(seed)
    alphabet = "abcdefghij"
    bad = 0
    for _ in range(count):
        n = rng.randint(1, 10)
        tree = random_tree(rng, n, probs=rng.random() < 0.5)
        forms = ["".join(rng.choice(alphabet) for _ in range(rng.randint(1, 4))) for _ in range(n)]
        tree = type(tree).from_forms(forms, tree.heads, tree.labels, arc_probs=tree.arc_probs)
        seg = _random_segmentation(rng, forms)
        vocab = build_label_vocab([tree])
        am = expand_to_subwords(tree, seg, vocab)
        if not granularity_conserved(tree, seg, am):
            bad += 1
            continue
        chars = to_char_tree(tree, SegmentationMap.characters(forms))
        if validate_tree(chars) is not None or chars.n != sum(len(f) for f in forms):
            bad += 1
    return SuiteResult(
        "granularity conservation fuzz", bad == 0, f"{count - bad}/{count} sentences conserved",
        {"count": count, "failures": bad},
    )


def granularity_conserved(tree, seg: SegmentationMap, am: ArcMatrix) -> bool:
    """Arc count and copied weights match a direct enumeration over word arcs."""
    A = tree.adjacency()
    units = seg.word_units
    expected_count = 0
    expected = np.zeros((seg.n_units, seg.n_units))
    for i in range(tree.n):
        for j in range(tree.n):
            if A[i, j] != 0:
                expected_count += len(units[i]) * len(units[j])
                for u in units[i]:
                    for v in units[j]:
                        expected[u, v] = A[i, j]
    return int(np.count_nonzero(am.weights)) == expected_count and np.array_equal(am.weights, expected)


def run_all(seed: int = 0, fuzz_count: int = 10_000, params: GcnParams | None = None) -> list[SuiteResult]:
    return [
        oracle_suite(seed),
        gradient_suite(seed, params=params),
        projection_fuzz(seed, fuzz_count),
        granularity_fuzz(seed),
    ]
