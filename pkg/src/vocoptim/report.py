"""CSV and run-manifest emission for cost curves."""

from __future__ import annotations

import io
import json
import os
from datetime import datetime, timezone

from . import __version__
from .cost import CostCurve, Grid, SweepConfig
from .corpus import Corpus

CSV_HEADER = ("n", "theta_t", "f_plus", "f_minus", "t1", "t2", "t3", "cost", "is_nstar")


def _real(x: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(x))


def curve_csv(curve: CostCurve) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for p in curve.grid:
        t = p.terms
        row = (str(t.n), str(t.theta_t), _real(t.f_plus), _real(t.f_minus), str(t.t1),
               _real(t.t2), _real(t.t3), _real(p.cost), "1" if t.n == curve.n_star else "0")
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_curve_csv(curve: CostCurve, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(curve_csv(curve))


def read_curve_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_manifest(corpus: Corpus, kind: str, grid: Grid, curve: CostCurve,
                 config: SweepConfig, normalization: str, started: str,
                 finished: str | None = None) -> dict:
    """Everything needed to reproduce a sweep; keys in a fixed order."""
    tokenizer_config = {"window": config.window, "bpe_mode": config.bpe_mode}
    if kind == "unigram":
        tokenizer_config.update(config.unigram_params())
        tokenizer_config["fast_unigram"] = config.fast_unigram
    return {
        "tool": "vocoptim",
        "version": __version__,
        "corpus": {
            "path": corpus.source_path,
            "normalization": normalization,
            "sha256": corpus.content_hash(),
            "sentences": len(corpus),
        },
        "tokenizer": {"kind": kind, "config": tokenizer_config, "seed": config.seed},
        "grid": {"n_min": grid.n_min, "n_max": grid.n_max, "step": grid.step,
                 "points": len(grid.values())},
        "alphas": list(curve.alphas.as_tuple()),
        "result": {"n_star": curve.n_star, "feasible_points": len(curve.grid),
                   "infeasible": [[n, why] for n, why in curve.infeasible]},
        "timestamps": {"started": started, "finished": finished or _utc_now()},
    }


def write_manifest(manifest: dict, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
