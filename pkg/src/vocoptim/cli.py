"""Command-line front end.

Exit codes: 0 success, 1 input/output or corpus problems, 2 requests that are
infeasible for the given corpus or model.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import NORMALIZATIONS, Corpus, corpus_stats, load_corpus, normalize_text
from .cost import Alphas, Grid, SweepConfig, min_feasible_n, sweep
from .exceptions import CorpusError, DomainError, ModelFormatError
from .report import _utc_now, run_manifest, write_curve_csv, write_manifest
from .serialization import load_model, save_model
from .stats import DEFAULT_WINDOW, EncodedCorpus, term_breakdown
from .svg import write_curve_svg
from .tokenizer import KINDS, train
from . import unigram

logger = logging.getLogger("vocoptim")

EXIT_OK, EXIT_IO, EXIT_DOMAIN = 0, 1, 2
SPACE_GLYPH = "␠"


def _show_piece(piece: str) -> str:
    return piece.replace(" ", SPACE_GLYPH)


def _add_corpus_args(p, required=True):
    p.add_argument("--corpus", required=required, help="UTF-8 text, one sentence per line")
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="none")


def _add_unigram_args(p):
    g = p.add_argument_group("unigram trainer")
    g.add_argument("--seed-multiplier", type=int, default=unigram.DEFAULT_SEED_MULTIPLIER)
    g.add_argument("--max-piece-len", type=int, default=unigram.DEFAULT_MAX_PIECE_LEN)
    g.add_argument("--shrink", type=float, default=unigram.DEFAULT_SHRINK)
    g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vocoptim",
                                     description="Choose a subword vocabulary size by cost minimization.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="sentence, word and alphabet counts of a corpus")
    p.add_argument("corpus_path", nargs="?")
    _add_corpus_args(p, required=False)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sweep", help="evaluate the cost over a grid of vocabulary sizes")
    _add_corpus_args(p)
    p.add_argument("--tokenizer", choices=KINDS, default="bpe")
    p.add_argument("--n-min", type=int, default=None, help="default: alphabet size")
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--step", type=int, default=None,
                   help="uniform step; default is 1 up to 200, then 5")
    p.add_argument("--alphas", type=Alphas.parse, default=Alphas(1.0, 1.0, 1.0),
                   help="weights a1,a2,a3 (default 1,1,1)")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--out", default="curve.csv")
    p.add_argument("--svg", default=None)
    p.add_argument("--fast-unigram", action="store_true",
                   help="prune each smaller model from the previous one (approximation)")
    p.add_argument("--bpe-mode", choices=("trajectory", "truncate", "retrain"), default="trajectory")
    p.add_argument("--workers", type=int, default=None)
    _add_unigram_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("train", help="train a tokenizer and write the model file")
    _add_corpus_args(p)
    p.add_argument("--tokenizer", choices=KINDS, default="bpe")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_unigram_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="encode text with a trained model")
    p.add_argument("--model", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--text")
    src.add_argument("--corpus")
    p.add_argument("--normalization", choices=NORMALIZATIONS, default="none")
    p.add_argument("--stats", action="store_true", help="print theta_t, f+, f-, t2, t3")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.set_defaults(func=cmd_encode)
    return parser


def cmd_stats(args) -> int:
    path = args.corpus_path or args.corpus
    if not path:
        raise CorpusError("no corpus given")
    s = corpus_stats(load_corpus(path, args.normalization))
    if args.json:
        print(json.dumps(s.as_dict()))
    else:
        print(f"k={s.k} w={s.w} w_u={s.w_u} alphabet={s.alphabet_size}")
    return EXIT_OK


def _unigram_config(args) -> dict:
    return {"seed_multiplier": args.seed_multiplier, "max_piece_len": args.max_piece_len,
            "shrink": args.shrink, "seed": args.seed}


def cmd_sweep(args) -> int:
    started = _utc_now()
    corpus = load_corpus(args.corpus, args.normalization)
    n_min = args.n_min if args.n_min is not None else min_feasible_n(corpus_stats(corpus))
    try:
        grid = Grid(n_min, args.n_max, args.step)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    config = SweepConfig(window=args.window, workers=args.workers, bpe_mode=args.bpe_mode,
                         fast_unigram=args.fast_unigram, **_unigram_config(args))
    curve = sweep(corpus, args.tokenizer, grid, args.alphas, config)
    out = Path(args.out)
    write_curve_csv(curve, out)
    if args.svg:
        write_curve_svg(curve, args.svg)
    manifest = run_manifest(corpus, args.tokenizer, grid, curve, config, args.normalization, started)
    write_manifest(manifest, out.with_name(out.stem + ".manifest.json"))
    for n, why in curve.infeasible:
        logger.info("skipped n=%d: %s", n, why)
    print(f"n*={curve.n_star}")
    return EXIT_OK


def cmd_train(args) -> int:
    corpus = load_corpus(args.corpus, args.normalization)
    config = _unigram_config(args) if args.tokenizer == "unigram" else {}
    model = train(args.tokenizer, corpus, args.n, config)
    save_model(model, args.out)
    print(f"pieces={model.n}")
    return EXIT_OK


def cmd_encode(args) -> int:
    model = load_model(args.model)
    if args.text is not None:
        sentences = normalize_text(args.text, args.normalization)
    else:
        sentences = list(load_corpus(args.corpus, args.normalization).sentences)
    segs = model.encode_many(sentences)
    for seg in segs:
        print(" ".join(_show_piece(p) for p in model.id_to_piece(seg.token_ids)))
    if args.stats and sentences:
        enc = EncodedCorpus.from_segmentations(segs, model.n)
        t = term_breakdown(model.n, enc, corpus_stats(Corpus(tuple(sentences))), args.window)
        print(f"theta_t={t.theta_t} f_plus={t.f_plus!r} f_minus={t.f_minus!r} "
              f"t2={t.t2!r} t3={t.t3!r}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (CorpusError, ModelFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
