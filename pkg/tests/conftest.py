from __future__ import annotations

import pytest

from gectree.conllu import DepTree

BUYERS_FORMS = "But there were no buyers .".split()
BUYERS_HEADS = [3, 3, 0, 5, 3, 3]
BUYERS_LABELS = ["cc", "expl", "Root", "det", "nsubj", "punct"]

# (source sentence, expected heads, expected labels) for the substituted,
# redundant and missing examples built on the target tree above
BUYERS_CASES = {
    "substituted": ("Bat there were no buyers .", [3, 3, 0, 5, 3, 3], ["S", "expl", "Root", "det", "nsubj", "punct"]),
    "redundant": ("But there were no any buyers .", [3, 3, 0, 6, 6, 3, 3],
                  ["cc", "expl", "Root", "det", "R", "nsubj", "punct"]),
    "missing": ("But there were no .", [3, 3, 0, 3, 3], ["cc", "expl", "Root", "det", "M"]),
}


@pytest.fixture
def buyers_tree() -> DepTree:
    return DepTree.from_forms(BUYERS_FORMS, BUYERS_HEADS, BUYERS_LABELS)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
