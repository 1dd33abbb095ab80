from __future__ import annotations

import functools
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gectree.edits import (
    DEL,
    INS,
    MATCH,
    SUB,
    Alignment,
    EditSpan,
    Op,
    align_tokens,
    apply_spans,
    check_spans,
    extract_spans,
    format_span_line,
    merge_to_spans,
    parse_span_line,
    sub_cost,
)
from gectree.errors import ContractError, DegenerateInputError


def enumerate_alignment_costs(src, tgt):
    """Every monotone alignment, by explicit recursion over the three moves."""
    if not src and not tgt:
        yield 0.0
        return
    if src and tgt:
        for rest in enumerate_alignment_costs(src[1:], tgt[1:]):
            yield sub_cost(src[0], tgt[0]) + rest
    if src:
        for rest in enumerate_alignment_costs(src[1:], tgt):
            yield 1.0 + rest
    if tgt:
        for rest in enumerate_alignment_costs(src, tgt[1:]):
            yield 1.0 + rest


def memo_min_cost(src, tgt):
    """Top-down minimum over all alignments; independent of the tabulated DP."""
    src, tgt = tuple(src), tuple(tgt)

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


def test_redundant_example_alignment():
    src = ["But", "there", "were", "no", "any", "buyers", "."]
    tgt = ["But", "there", "were", "no", "buyers", "."]
    a = align_tokens(src, tgt)
    assert [op.kind for op in a.ops] == [MATCH] * 4 + [DEL] + [MATCH] * 2
    assert a.ops[4] == Op(DEL, 4, None)
    assert a.cost == 1.0


def test_identical_sequences_all_match():
    a = align_tokens(list("abcd"), list("abcd"))
    assert all(op.kind == MATCH for op in a.ops) and a.cost == 0


def test_single_substitution_cost_is_minimal():
    a = align_tokens(["a", "b", "c"], ["a", "x", "c"])
    assert [op.kind for op in a.ops] == [MATCH, SUB, MATCH]
    assert a.cost == 1.0
    # frozen from the exhaustive enumeration below
    assert min(enumerate_alignment_costs(("a", "b", "c"), ("a", "x", "c"))) == 1.0


def test_case_variant_is_cheap_substitution():
    a = align_tokens(["the", "Cat"], ["The", "cat"])
    assert [op.kind for op in a.ops] == [SUB, SUB]
    assert a.cost == 0.5


def test_tie_break_prefers_substitution_then_deletion():
    # "was" -> "there were": Sub(was, were) and Ins(there) beat Del + 2 Ins
    a = align_tokens(["But", "was", "no", "buyers"], ["But", "there", "were", "no", "buyers"])
    assert [op.kind for op in a.ops] == [MATCH, INS, SUB, MATCH, MATCH]
    # equal-cost Del/Ins against Sub at the same cell: Sub wins
    a = align_tokens(["a"], ["b"])
    assert a.ops == (Op(SUB, 0, 0),)
    # a swap costs 2 either as Sub+Sub or as Del+Ins; Sub wins the tie
    a = align_tokens(["a", "b"], ["b", "a"])
    assert [op.kind for op in a.ops] == [SUB, SUB]
    # Del and Ins both reach the final cell at cost 2 (Sub would cost 3): Del wins
    a = align_tokens(["a", "b", "a"], ["b", "a", "b"])
    assert [op.kind for op in a.ops] == [INS, MATCH, MATCH, DEL]


def test_empty_input_rejected():
    with pytest.raises(DegenerateInputError):
        align_tokens([], ["a"])
    with pytest.raises(DegenerateInputError):
        align_tokens(["a"], [])


def test_exhaustive_minimality_short():
    vocab = ["a", "b", "A"]
    for n in range(1, 5):
        for m in range(1, 5):
            for _ in range(6):
                rng = random.Random(n * 10 + m)
                src = [rng.choice(vocab) for _ in range(n)]
                tgt = [rng.choice(vocab) for _ in range(m)]
                assert align_tokens(src, tgt).cost == min(enumerate_alignment_costs(tuple(src), tuple(tgt)))


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sampled_from("abc"), min_size=1, max_size=8),
    st.lists(st.sampled_from("abc"), min_size=1, max_size=8),
)
def test_cost_matches_memoised_recursion(src, tgt):
    assert align_tokens(src, tgt).cost == memo_min_cost(src, tgt)


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sampled_from(["a", "b", "c", "B"]), min_size=1, max_size=8),
    st.lists(st.sampled_from(["a", "b", "c", "B"]), min_size=1, max_size=8),
)
def test_alignment_structure(src, tgt):
    a = align_tokens(src, tgt)
    assert [op.src for op in a.ops if op.src is not None] == list(range(len(src)))
    assert [op.tgt for op in a.ops if op.tgt is not None] == list(range(len(tgt)))
    assert a.cost == sum(
        sub_cost(src[op.src], tgt[op.tgt]) if op.kind in (MATCH, SUB) else 1.0 for op in a.ops
    )
    spans = merge_to_spans(a)
    assert apply_spans(src, tgt, spans) == list(tgt)
    check_spans(spans, len(src), len(tgt))
    # spans cover exactly the non-match operations
    covered_src = {i for sp in spans for i in range(sp.src_beg, sp.src_end)}
    covered_tgt = {j for sp in spans for j in range(sp.tgt_beg, sp.tgt_end)}
    assert covered_src == {op.src for op in a.ops if op.kind != MATCH and op.src is not None}
    assert covered_tgt == {op.tgt for op in a.ops if op.kind != MATCH and op.tgt is not None}
    assert spans == sorted(spans)


def test_merge_examples():
    src = ["But", "there", "were", "no", "any", "buyers", "."]
    tgt = ["But", "there", "were", "no", "buyers", "."]
    assert merge_to_spans(align_tokens(src, tgt)) == [EditSpan(4, 5, 4, 4, "R")]
    assert merge_to_spans(Alignment((Op(SUB, 0, 0),), 1.0)) == [EditSpan(0, 1, 0, 1, "S")]
    run = Alignment((Op(MATCH, 0, 0), Op(SUB, 1, 1), Op(INS, None, 2), Op(MATCH, 2, 3)), 2.0)
    assert merge_to_spans(run) == [EditSpan(1, 2, 1, 3, "S")]


def test_one_sided_span_insertion_points():
    assert extract_spans(["a", "b"], ["a", "x", "b"]) == [EditSpan(1, 1, 1, 2, "M")]
    assert extract_spans(["a", "b"], ["a", "b", "x"]) == [EditSpan(2, 2, 2, 3, "M")]
    assert extract_spans(["x", "a"], ["a"]) == [EditSpan(0, 1, 0, 0, "R")]


def test_word_order_is_redundant_plus_missing():
    src, tgt = "a b c d".split(), "b c d a".split()
    spans = extract_spans(src, tgt)
    assert spans == [EditSpan(0, 1, 0, 0, "R"), EditSpan(4, 4, 3, 4, "M")]
    assert apply_spans(src, tgt, spans) == tgt


@pytest.mark.parametrize(
    "args",
    [(0, 1, 0, 0, "S"), (0, 0, 0, 1, "R"), (0, 1, 0, 1, "M"), (0, 0, 0, 0, "M"), (0, 1, 0, 1, "X"), (2, 1, 0, 1, "S")],
)
def test_span_kind_invariants(args):
    with pytest.raises(ContractError):
        EditSpan(*args)


def test_span_records_round_trip():
    spans = [EditSpan(0, 1, 0, 1, "S"), EditSpan(4, 5, 4, 4, "R")]
    line = format_span_line(spans)
    assert line == "0 1 0 1 S\t4 5 4 4 R"
    assert parse_span_line(line) == spans
    assert parse_span_line("") == []
    with pytest.raises(ContractError):
        parse_span_line("1 2 3 S")


def test_check_spans_rejects_misalignment():
    with pytest.raises(ContractError, match="unaligned"):
        check_spans([EditSpan(1, 2, 2, 3, "S")], 3, 3)
    with pytest.raises(ContractError, match="overlaps"):
        check_spans([EditSpan(0, 2, 0, 2, "S"), EditSpan(1, 2, 1, 2, "S")], 3, 3)
    with pytest.raises(ContractError, match="tail"):
        check_spans([], 3, 4)


def test_alignment_is_deterministic():
    rng = random.Random(11)
    for src, tgt in itertools.islice(
        ((["a", "b", "c"][: rng.randint(1, 3)] * 2, ["c", "b", "a"][: rng.randint(1, 3)]) for _ in itertools.count()), 50
    ):
        assert align_tokens(src, tgt) == align_tokens(list(src), list(tgt))
