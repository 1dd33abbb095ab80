from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gectree.conllu import (
    DepTree,
    attach_arc_probs,
    parse_arc_probs,
    parse_conllu,
    validate_tree,
    write_arc_probs,
    write_conllu,
)
from gectree.errors import ConlluParseError, ContractError, TreeValidationError
from gectree.fuzz import random_tree

from conftest import BUYERS_FORMS, BUYERS_HEADS, BUYERS_LABELS


def _line(i, form, head, label, lemma="_"):
    return "\t".join([str(i), form, lemma, "_", "_", "_", str(head), label, "_", "_"])


def brute_force_valid(heads: list[int]) -> bool:
    n = len(heads)
    if any(not 0 <= h <= n or h == i for i, h in enumerate(heads, start=1)):
        return False
    if sum(h == 0 for h in heads) != 1:
        return False
    children = {k: [] for k in range(n + 1)}
    for i, h in enumerate(heads, start=1):
        children[h].append(i)
    seen, stack = set(), [0]
    while stack:
        node = stack.pop()
        for c in children[node]:
            if c in seen:
                return False
            seen.add(c)
            stack.append(c)
    return len(seen) == n


def test_buyers_tree_round_trip(buyers_tree):
    text = write_conllu([buyers_tree])
    lines = text.strip().split("\n")
    assert len(lines) == 6
    assert [int(line.split("\t")[6]) for line in lines] == [3, 3, 0, 5, 3, 3]
    (back,) = parse_conllu(text)
    assert back == buyers_tree
    assert back.forms == BUYERS_FORMS and back.heads == BUYERS_HEADS and back.labels == BUYERS_LABELS


def test_single_token_sentence():
    (tree,) = parse_conllu(_line(1, "Hello", 0, "Root") + "\n")
    assert tree.forms == ["Hello"] and tree.heads == [0] and tree.labels == ["Root"]
    assert validate_tree(tree) is None


def test_nine_columns_reports_line():
    text = "# sent_id = 1\n" + _line(1, "a", 0, "root") + "\n" + "\t".join(["2", "b", "_", "_", "_", "_", "1", "dep", "_"]) + "\n"
    with pytest.raises(ConlluParseError) as exc:
        parse_conllu(text)
    assert exc.value.lineno == 3


@pytest.mark.parametrize(
    "head, message",
    [("x", "not an integer"), ("5", "outside")],
)
def test_bad_head(head, message):
    text = _line(1, "a", 0, "root") + "\n" + _line(2, "b", 1, "dep").replace("\t1\tdep", f"\t{head}\tdep") + "\n"
    with pytest.raises(ConlluParseError, match=message) as exc:
        parse_conllu(text)
    assert exc.value.lineno == 2


def test_zero_token_sentence():
    with pytest.raises(ConlluParseError, match="no tokens"):
        parse_conllu("# text = nothing\n\n")


def test_multiword_and_empty_nodes_skipped():
    text = "\n".join([
        "1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_",
        _line(1, "de", 2, "case"),
        _line(2, "le", 0, "root"),
        "2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_",
    ]) + "\n"
    (tree,) = parse_conllu(text)
    assert tree.forms == ["de", "le"]


def test_pass_through_columns_and_comments_survive():
    text = "# sent_id = a\n# text = de le\n" + "\n".join([
        "1\tde\tde\tADP\tP\tK=V\t2\tcase\t2:case\tSpaceAfter=No",
        "2\tle\tle\tDET\tD\t_\t0\troot\t0:root\t_",
    ]) + "\n\n"
    trees = parse_conllu(text)
    assert write_conllu(trees) == text
    assert trees[0].comments == ["# sent_id = a", "# text = de le"]


def test_crlf_and_multiple_sentences():
    text = (_line(1, "a", 0, "root") + "\r\n\r\n" + _line(1, "b", 0, "root") + "\r\n")
    assert [t.forms for t in parse_conllu(text)] == [["a"], ["b"]]


def test_non_utf8_rejected():
    with pytest.raises(ConlluParseError, match="UTF-8"):
        parse_conllu(_line(1, "caf\xe9", 0, "root").encode("latin-1"))


def test_write_empty_list():
    assert write_conllu([]) == ""


def test_write_rejects_two_roots():
    tree = DepTree.from_forms(["a", "b"], [0, 0], ["root", "root"])
    with pytest.raises(TreeValidationError, match="multi-root"):
        write_conllu([tree])


def test_validate_examples(buyers_tree):
    assert validate_tree(buyers_tree) is None
    assert validate_tree(DepTree.from_forms(["a", "b"], [2, 1], ["x", "y"])).kind == "cycle"
    assert validate_tree(DepTree.from_forms(["a", "b"], [0, 0], ["x", "y"])).kind == "multi-root"
    assert validate_tree(DepTree.from_forms(["a", "b"], [0, 2], ["x", "y"])).kind == "self-head"
    assert validate_tree(DepTree.from_forms(["a", "b"], [0, 3], ["x", "y"])).kind == "range"
    assert validate_tree(DepTree.from_forms(["a b"], [0], ["x"])).kind == "form"


@settings(max_examples=500, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: st.lists(st.integers(0, n), min_size=n, max_size=n)))
def test_validate_matches_brute_force(heads):
    tree = DepTree.from_forms([f"w{i}" for i in range(len(heads))], heads, ["dep"] * len(heads))
    assert (validate_tree(tree) is None) == brute_force_valid(heads)


def test_round_trip_random_trees():
    rng = random.Random(3)
    trees = [random_tree(rng, rng.randint(1, 12)) for _ in range(200)]
    assert parse_conllu(write_conllu(trees)) == trees


def test_arc_probs_default_is_one_hot(buyers_tree):
    a = buyers_tree.adjacency()
    assert a.shape == (6, 6)
    assert a[0, 2] == 1 and a[3, 4] == 1 and a[2].sum() == 0
    assert a.sum() == 5


def test_arc_probs_sidecar_round_trip():
    rng = random.Random(0)
    trees = [random_tree(rng, n, probs=True) for n in (1, 3, 5)]
    text = write_arc_probs({k: t.arc_probs for k, t in enumerate(trees)})
    parsed = parse_arc_probs(text)
    assert sorted(parsed) == [0, 1, 2]
    for k, t in enumerate(trees):
        assert np.array_equal(parsed[k], t.arc_probs)
        assert validate_tree(t) is None


def test_arc_probs_attach_and_validate(buyers_tree):
    probs = {0: np.full((6, 6), 0.5)}
    attach_arc_probs([buyers_tree], probs)
    assert validate_tree(buyers_tree).kind == "arc-probs"
    with pytest.raises(ContractError):
        attach_arc_probs([buyers_tree], {0: np.zeros((2, 2))})
    with pytest.raises(ConlluParseError, match="expected 4 values"):
        parse_arc_probs('{"sentence_index": 0, "n": 2, "matrix": [1, 0, 0]}\n')
