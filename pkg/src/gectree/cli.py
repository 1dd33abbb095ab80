"""Command-line entry point: ``gectree <command> [options]``.

Commands follow the treebank workflow (extract edits, project trees, convert
granularity) and add scoring and self-verification. Exit status is 0 on
success, 1 on a contract or validation failure and 2 on an I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass

from gectree.conllu import attach_arc_probs, parse_arc_probs, parse_conllu, write_conllu
from gectree.depgcn.params import DEFAULT_BETA, DEFAULT_N2, init_params, load_params
from gectree.errors import ContractError
from gectree.ged import extract_ged_labels, format_masks, parse_masks, score_ged
from gectree.granularity import (
    SUBWORD_DELIMITER,
    SegmentationMap,
    build_label_vocab,
    expand_to_subwords,
    parse_segmentation,
    to_char_tree,
    word_arc_matrix,
    write_arc_matrices,
)
from gectree.pipeline import RunReport, extract_corpus, project_corpus, read_parallel

log = logging.getLogger("gectree")

EXIT_OK, EXIT_CONTRACT, EXIT_IO = 0, 1, 2
MODES = ("word", "subword", "char")


@dataclass
class PipelineConfig:
    parallel: str | None = None
    trees: str | None = None
    spans: str | None = None
    probs: str | None = None
    seg: str | None = None
    out: str | None = None
    mode: str = "word"
    beta: float = DEFAULT_BETA
    n2: int = DEFAULT_N2
    seed: int = 0

    def check(self) -> None:
        paths = [p for p in (self.parallel, self.trees, self.spans, self.probs, self.seg, self.out) if p]
        resolved = [os.path.realpath(p) for p in paths]
        if len(set(resolved)) != len(resolved):
            raise ContractError("input and output paths must be distinct")
        if self.mode not in MODES:
            raise ContractError(f"unknown mode {self.mode!r}")
        if self.mode in ("subword", "char") and not self.seg:
            raise ContractError(f"--mode {self.mode} requires --seg")
        if not 0.0 < self.beta < 1.0:
            raise ContractError(f"--beta must lie strictly between 0 and 1, got {self.beta}")
        if self.n2 < 0:
            raise ContractError("--n2 must be non-negative")


def _read(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _text(path: str) -> str:
    try:
        return _read(path).decode("utf-8")
    except UnicodeDecodeError as e:
        raise ContractError(f"{path}: not valid UTF-8 ({e.reason} at byte {e.start})") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig(**{k: getattr(args, k) for k in PipelineConfig.__dataclass_fields__ if hasattr(args, k)})
    cfg.check()
    return cfg


def cmd_extract(args) -> int:
    cfg = _config(args)
    report = RunReport()
    lines = extract_corpus(read_parallel(_text(cfg.parallel)), report)
    _write(cfg.out, "".join(line + "\n" for line in lines))
    print(f"extract: {report.summary()}", file=sys.stderr)
    return EXIT_OK


def cmd_project(args) -> int:
    cfg = _config(args)
    pairs = read_parallel(_text(cfg.parallel))
    trees = parse_conllu(_read(cfg.trees))
    records = _text(cfg.spans).splitlines()
    report = RunReport()
    projected = project_corpus(pairs, trees, records, report, workers=args.workers)
    _write(cfg.out, write_conllu(projected))
    print(f"project: {report.summary()}", file=sys.stderr)
    return EXIT_OK


def cmd_convert(args) -> int:
    cfg = _config(args)
    trees = parse_conllu(_read(cfg.trees))
    if cfg.probs:
        attach_arc_probs(trees, parse_arc_probs(_read(cfg.probs)))
    if cfg.seg:
        segs = parse_segmentation(_read(cfg.seg), args.delimiter)
        if len(segs) != len(trees):
            raise ContractError(f"{len(segs)} segmentation lines for {len(trees)} trees")
    if cfg.mode == "char":
        chars = [to_char_tree(t, SegmentationMap.characters(s.words())) for t, s in zip(trees, segs)]
        _write(cfg.out, write_conllu(chars))
    else:
        vocab = build_label_vocab(trees)
        if cfg.mode == "subword":
            mats = [expand_to_subwords(t, s, vocab) for t, s in zip(trees, segs)]
        else:
            mats = [word_arc_matrix(t, vocab) for t in trees]
        _write(cfg.out, write_arc_matrices(mats))
        vocab_text = "".join(label + "\n" for label in vocab)
        if cfg.out and cfg.out != "-":
            _write(cfg.out + ".labels", vocab_text)
        else:
            sys.stderr.write(vocab_text)
    print(f"convert: {len(trees)} sentences ({cfg.mode})", file=sys.stderr)
    return EXIT_OK


def cmd_masks(args) -> int:
    cfg = _config(args)
    trees = parse_conllu(_read(cfg.trees))
    _write(cfg.out, format_masks([extract_ged_labels(t) for t in trees]))
    return EXIT_OK


def cmd_score_ged(args) -> int:
    score = score_ged(parse_masks(_read(args.pred)), parse_masks(_read(args.gold)))
    print(score.format())
    return EXIT_OK


def cmd_verify(args) -> int:
    from gectree import verify

    cfg = _config(args)
    if args.params:
        params = load_params(_text(args.params))
    else:
        params = init_params(d=4, n_labels=3, n2=cfg.n2, beta=cfg.beta, seed=cfg.seed)
    results = verify.run_all(seed=cfg.seed, fuzz_count=args.fuzz_count, params=params)
    for r in results:
        print(r.line())
    grad = results[1].metrics
    print(f"max gradient error: {max(grad.values()):.3e}")
    fuzz = results[2].metrics
    print(f"projection fuzz: {fuzz['count']} pairs, {fuzz['failures']} failures")
    ok = all(r.passed for r in results)
    print("verify: OK" if ok else "verify: FAILED")
    return EXIT_OK if ok else EXIT_CONTRACT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gectree", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="align parallel sentences and write edit spans")
    p.add_argument("--parallel", required=True, help="source<TAB>target per line, space-tokenised")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("project", help="project target trees onto source sentences")
    p.add_argument("--parallel", required=True)
    p.add_argument("--trees", required=True, help="target-side CoNLL-U, one tree per pair")
    p.add_argument("--spans", required=True, help="output of `extract`")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("convert", help="convert trees to subword arc matrices or character trees")
    p.add_argument("--trees", required=True)
    p.add_argument("--mode", choices=MODES, default="word")
    p.add_argument("--seg", help="segmentation file, one sentence per line")
    p.add_argument("--probs", help="arc-probability sidecar (JSON lines)")
    p.add_argument("--delimiter", default=SUBWORD_DELIMITER)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("masks", help="write 0/1 error-detection masks from projected trees")
    p.add_argument("--trees", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_masks)

    p = sub.add_parser("score-ged", help="token-level P/R/F0.5 of predicted masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(func=cmd_score_ged)

    p = sub.add_parser("verify", help="run the numerical and fuzzing self-checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--n2", type=int, default=DEFAULT_N2)
    p.add_argument("--params", help="parameter file to gradient-check in addition to the built-in cases")
    p.add_argument("--fuzz-count", type=int, default=10_000)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
