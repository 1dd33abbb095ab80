"""Corpus-level drivers shared by the command line and by library users.

Every sentence pair is handled independently. Pairs that cannot be
processed are skipped and reported with their 0-based index; nothing is
silently dropped.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gectree.conllu import DepTree, validate_tree
from gectree.edits import extract_spans, format_span_line, parse_span_line
from gectree.errors import ContractError
from gectree.projection import ProjectedTree, project

log = logging.getLogger(__name__)

SKIP_RECORD = "SKIP"


@dataclass
class RunReport:
    processed: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def skip(self, index: int, reason: str, lineno: int | None = None) -> None:
        where = f"line {lineno}" if lineno is not None else f"sentence {index}"
        log.warning("skipping %s: %s", where, reason)
        self.skipped.append((index, reason))

    def summary(self) -> str:
        return f"processed {self.processed} sentences, skipped {len(self.skipped)}"


def read_parallel(text: str) -> list[tuple[list[str], list[str]]]:
    """Parse ``source<TAB>target`` lines; a line without exactly one tab is fatal."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        cols = line.split("\t")
        if len(cols) != 2:
            raise ContractError(f"line {lineno}: expected source and target separated by one tab, found {len(cols)} columns")
        pairs.append((cols[0].split(), cols[1].split()))
    return pairs


def extract_corpus(pairs: Sequence[tuple[list[str], list[str]]], report: RunReport | None = None) -> list[str]:
    """One span record line per pair; pairs with an empty side become ``SKIP``."""
    report = report if report is not None else RunReport()
    lines = []
    for k, (src, tgt) in enumerate(pairs):
        if not src or not tgt:
            side = "source" if not src else "target"
            report.skip(k, f"empty {side} sentence", lineno=k + 1)
            lines.append(SKIP_RECORD)
            continue
        lines.append(format_span_line(extract_spans(src, tgt)))
        report.processed += 1
    return lines


def _project_one(job: tuple[int, list[str], list[str], DepTree, str]):
    k, src, tgt, tree, record = job
    if record.strip() == SKIP_RECORD:
        return None, "marked SKIP by edit extraction"
    if not src:
        return None, "empty source sentence"
    violation = validate_tree(tree)
    if violation is not None:
        return None, f"invalid target tree ({violation})"
    if tree.forms != tgt:
        return None, "target tree tokens differ from the parallel target sentence"
    try:
        spans = parse_span_line(record)
        return project(src, tree, spans), None
    except ContractError as e:
        return None, str(e)


def project_corpus(
    pairs: Sequence[tuple[list[str], list[str]]],
    trees: Sequence[DepTree],
    span_records: Sequence[str],
    report: RunReport | None = None,
    workers: int = 1,
) -> list[ProjectedTree]:
    """Project every pair; output order follows input order regardless of ``workers``."""
    report = report if report is not None else RunReport()
    if not len(pairs) == len(trees) == len(span_records):
        bad = min(len(pairs), len(trees), len(span_records))
        raise ContractError(
            f"misaligned inputs at sentence {bad}: {len(pairs)} pairs, {len(trees)} trees, {len(span_records)} span records"
        )
    jobs = [(k, src, tgt, tree, rec) for k, ((src, tgt), tree, rec) in enumerate(zip(pairs, trees, span_records))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results: Iterable = pool.map(_project_one, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
            results = list(results)
    else:
        results = map(_project_one, jobs)
    out = []
    for k, (tree, reason) in enumerate(results):
        if tree is None:
            report.skip(k, reason)
        else:
            out.append(tree)
            report.processed += 1
    return out

