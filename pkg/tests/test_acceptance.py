"""Acceptance criteria, one test each; every test also prints a PASS/FAIL line.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and repeated in the
terminal summary so they stay visible without ``-s``.
"""

from __future__ import annotations

import functools
import random
import time

import conftest
from gectree.cli import main
from gectree.conllu import DepTree, validate_tree, write_conllu
from gectree.edits import align_tokens, extract_spans, format_span_line, sub_cost
from gectree.fuzz import random_tree, vocabulary
from gectree.ged import score_ged
from gectree.projection import project
from gectree.verify import fuzz_pairs, granularity_fuzz, gradient_suite, oracle_suite

from conftest import BUYERS_FORMS, BUYERS_HEADS, BUYERS_LABELS


def report(name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


# Hand-written goldens: source forms with their projected heads and labels.
BUYERS_GOLDEN = {
    "substituted": (
        "1\tBat\t_\t_\t_\t_\t3\tS\t_\t_\n"
        "2\tthere\t_\t_\t_\t_\t3\texpl\t_\t_\n"
        "3\twere\t_\t_\t_\t_\t0\tRoot\t_\t_\n"
        "4\tno\t_\t_\t_\t_\t5\tdet\t_\t_\n"
        "5\tbuyers\t_\t_\t_\t_\t3\tnsubj\t_\t_\n"
        "6\t.\t_\t_\t_\t_\t3\tpunct\t_\t_\n\n"
    ),
    "redundant": (
        "1\tBut\t_\t_\t_\t_\t3\tcc\t_\t_\n"
        "2\tthere\t_\t_\t_\t_\t3\texpl\t_\t_\n"
        "3\twere\t_\t_\t_\t_\t0\tRoot\t_\t_\n"
        "4\tno\t_\t_\t_\t_\t6\tdet\t_\t_\n"
        "5\tany\t_\t_\t_\t_\t6\tR\t_\t_\n"
        "6\tbuyers\t_\t_\t_\t_\t3\tnsubj\t_\t_\n"
        "7\t.\t_\t_\t_\t_\t3\tpunct\t_\t_\n\n"
    ),
    "missing": (
        "1\tBut\t_\t_\t_\t_\t3\tcc\t_\t_\n"
        "2\tthere\t_\t_\t_\t_\t3\texpl\t_\t_\n"
        "3\twere\t_\t_\t_\t_\t0\tRoot\t_\t_\n"
        "4\tno\t_\t_\t_\t_\t3\tdet\t_\t_\n"
        "5\t.\t_\t_\t_\t_\t3\tM\t_\t_\n\n"
    ),
}


def test_buyers_goldens():
    start = time.perf_counter()
    tgt = DepTree.from_forms(BUYERS_FORMS, BUYERS_HEADS, BUYERS_LABELS)
    mismatched = []
    for case, golden in BUYERS_GOLDEN.items():
        src = conftest.BUYERS_CASES[case][0].split()
        text = write_conllu([project(src, tgt, extract_spans(src, BUYERS_FORMS))])
        if text.encode("utf-8") != golden.encode("utf-8"):
            mismatched.append(case)
    elapsed = time.perf_counter() - start
    report(
        "buyers goldens",
        not mismatched and elapsed < 1.0,
        f"{3 - len(mismatched)}/3 byte-identical, {elapsed:.3f}s (limit 1s)",
    )


def _memo_cost(src, tgt):
    @functools.lru_cache(maxsize=None)
    def best(i, j):
        if i == len(src) and j == len(tgt):
            return 0.0
        options = []
        if i < len(src) and j < len(tgt):
            options.append(sub_cost(src[i], tgt[j]) + best(i + 1, j + 1))
        if i < len(src):
            options.append(1.0 + best(i + 1, j))
        if j < len(tgt):
            options.append(1.0 + best(i, j + 1))
        return min(options)

    return best(0, 0)


def test_alignment_oracle():
    rng = random.Random(2024)
    vocab = ["a", "b", "c"]
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        src = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 8)))
        tgt = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 8)))
        if align_tokens(src, tgt).cost != _memo_cost(src, tgt):
            mismatches += 1
    elapsed = time.perf_counter() - start
    report(
        "alignment oracle",
        mismatches == 0 and elapsed < 10.0,
        f"{mismatches} mismatches on 1000 pairs, {elapsed:.2f}s (limit 10s)",
    )


def test_projection_validity_fuzz():
    start = time.perf_counter()
    invalid = suffix = missing_root = 0
    for src, tree, spans in fuzz_pairs(seed=0, count=10_000):
        out = project(src, tree, spans)
        if validate_tree(out) is not None:
            invalid += 1
        if any(sp.kind == "R" and sp.src_end == len(src) and sp.src_end - sp.src_beg >= 2 for sp in spans):
            suffix += 1
        root = tree.heads.index(0)
        if any(sp.kind == "M" and sp.tgt_beg <= root < sp.tgt_end for sp in spans):
            missing_root += 1
    elapsed = time.perf_counter() - start
    report(
        "projection validity fuzz",
        invalid == 0 and suffix > 0 and missing_root > 0 and elapsed < 30.0,
        f"{10_000 - invalid}/10000 valid ({suffix} redundant suffixes, {missing_root} missing roots), "
        f"{elapsed:.2f}s (limit 30s)",
    )


def test_identity_law():
    rng = random.Random(99)
    vocab = vocabulary()
    failures = 0
    for _ in range(1000):
        tgt = random_tree(rng, rng.randint(1, 12), vocab)
        spans = extract_spans(tgt.forms, tgt.forms)
        out = project(tgt.forms, tgt, spans)
        if spans or out != tgt or any(out.ged_mask):
            failures += 1
    report("identity law", failures == 0, f"{1000 - failures}/1000 projections equal their target tree")


def test_depgcn_oracle_equivalence():
    result = oracle_suite(seed=0, instances=100, max_n=6, max_d=8)
    report("depgcn oracle equivalence", result.passed, f"max abs diff per op: {result.detail} (tol 1e-10)")


def test_gradient_verification():
    result = gradient_suite(seed=0, eps=1e-5)
    report("gradient verification", result.passed, result.detail + " (tol 1e-4)")


def test_granularity_conservation():
    result = granularity_fuzz(seed=0, count=1000)
    report("granularity conservation", result.passed, result.detail)


def _brute(pred, gold):
    tp = sum(p and g for ps, gs in zip(pred, gold) for p, g in zip(ps, gs))
    fp = sum(p and not g for ps, gs in zip(pred, gold) for p, g in zip(ps, gs))
    fn = sum(g and not p for ps, gs in zip(pred, gold) for p, g in zip(ps, gs))
    return tp, fp, fn


def test_ged_scorer():
    checks = {}
    s = score_ged([[True, True, False, False]], [[False, True, True, False]])
    checks["hand case"] = (s.tp, s.fp, s.fn, s.precision, s.recall, s.f_half) == (1, 1, 1, 0.5, 0.5, 0.5)
    s = score_ged([[False, False]], [[False, True]])
    checks["empty prediction"] = (s.precision, s.recall, s.f_half) == (0.0, 0.0, 0.0)
    s = score_ged([[False, False]], [[False, False]])
    checks["nothing anywhere"] = (s.precision, s.recall, s.f_half) == (1.0, 1.0, 1.0)
    rng = random.Random(5)
    brute_ok = True
    for _ in range(1000):
        lens = [rng.randint(0, 8) for _ in range(rng.randint(1, 6))]
        pred = [[rng.random() < 0.3 for _ in range(k)] for k in lens]
        gold = [[rng.random() < 0.3 for _ in range(k)] for k in lens]
        s = score_ged(pred, gold)
        brute_ok &= (s.tp, s.fp, s.fn) == _brute(pred, gold)
    checks["brute force (1000 corpora)"] = brute_ok
    failed = [k for k, ok in checks.items() if not ok]
    report("ged scorer", not failed, "all checks pass" if not failed else f"failed: {', '.join(failed)}")


def test_project_throughput(tmp_path):
    count = 10_000
    pairs = list(fuzz_pairs(seed=11, count=count))
    par = tmp_path / "pairs.tsv"
    par.write_text("".join(" ".join(s) + "\t" + " ".join(t.forms) + "\n" for s, t, _ in pairs), encoding="utf-8")
    trees = tmp_path / "trees.conllu"
    trees.write_text(write_conllu([t for _, t, _ in pairs]), encoding="utf-8")
    spans = tmp_path / "spans.txt"
    spans.write_text("".join(format_span_line(sp) + "\n" for _, _, sp in pairs), encoding="utf-8")
    out = tmp_path / "out.conllu"
    start = time.perf_counter()
    code = main(["project", "--parallel", str(par), "--trees", str(trees), "--spans", str(spans), "--out", str(out)])
    elapsed = time.perf_counter() - start
    rate = count / elapsed * 60
    report(
        "project throughput",
        code == 0 and rate >= 10_000,
        f"{count} pairs in {elapsed:.2f}s = {rate:,.0f} pairs/minute (minimum 10,000)",
    )
