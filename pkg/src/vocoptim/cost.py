"""The vocabulary-size cost and its sweep over a grid of sizes.

``cost = a1 * n + a2 * (f+/f- - 1) + a3 * (theta_t/w - 1)``; the selected
size is the grid point of minimal cost, smallest ``n`` on ties.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .bpe import learn_merges, train_bpe, train_bpe_with_snapshots, truncate, BpeModel
from .corpus import Corpus, CorpusStats, alphabet_of, corpus_stats
from .exceptions import DomainError, EmptyGrid, ExhaustedPairs, InfeasibleVocabSize
from .stats import DEFAULT_WINDOW, EncodedCorpus, TermBreakdown, encode_corpus, term_breakdown
from .tokenizer import KINDS
from . import unigram

logger = logging.getLogger(__name__)

THREADS_ENV = "VOCOPTIM_THREADS"
# relative slack under which two costs count as tied (float rounding only)
TIE_RTOL = 1e-12
DENSE_UNTIL = 200
COARSE_STEP = 5


@dataclass(frozen=True)
class Alphas:
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.0

    def __post_init__(self):
        vals = (self.a1, self.a2, self.a3)
        if any(not (v >= 0) for v in vals):
            raise ValueError(f"alpha weights must be non-negative, got {vals}")
        if sum(vals) <= 0:
            raise ValueError("at least one alpha weight must be positive")

    @classmethod
    def parse(cls, text: str) -> "Alphas":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated weights, got {text!r}")
        return cls(*(float(p) for p in parts))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)

    def scaled(self, c: float) -> "Alphas":
        return Alphas(c * self.a1, c * self.a2, c * self.a3)


@dataclass(frozen=True)
class Grid:
    n_min: int
    n_max: int
    step: int | None = None

    def __post_init__(self):
        if self.n_min > self.n_max:
            raise ValueError(f"n_min={self.n_min} exceeds n_max={self.n_max}")
        if self.step is not None and self.step < 1:
            raise ValueError("step must be at least 1")

    def values(self) -> list[int]:
        """Dense below 200 then every 5th size by default; ``n_max`` always included."""
        if self.step is not None:
            ns = list(range(self.n_min, self.n_max + 1, self.step))
        else:
            ns = list(range(self.n_min, min(self.n_max, DENSE_UNTIL) + 1))
            start = ns[-1] + COARSE_STEP if ns else self.n_min
            ns.extend(range(start, self.n_max + 1, COARSE_STEP))
        if ns[-1] != self.n_max:
            ns.append(self.n_max)
        return ns


@dataclass(frozen=True)
class CurvePoint:
    terms: TermBreakdown
    cost: float

    @property
    def n(self) -> int:
        return self.terms.n


@dataclass(frozen=True)
class CostCurve:
    grid: tuple[CurvePoint, ...]
    alphas: Alphas
    tokenizer_kind: str
    n_star: int
    infeasible: tuple[tuple[int, str], ...] = ()

    @property
    def ns(self) -> list[int]:
        return [p.n for p in self.grid]

    @property
    def costs(self) -> list[float]:
        return [p.cost for p in self.grid]

    def point(self, n: int) -> CurvePoint:
        for p in self.grid:
            if p.n == n:
                return p
        raise KeyError(n)

    def with_alphas(self, alphas: Alphas) -> "CostCurve":
        """Re-weight the same term measurements."""
        return build_curve([p.terms for p in self.grid], alphas, self.tokenizer_kind,
                           self.infeasible)


@dataclass(frozen=True)
class SweepConfig:
    window: int = DEFAULT_WINDOW
    workers: int | None = None
    # bpe: "trajectory" reads every grid point off one training run,
    # "truncate" re-encodes with prefix models, "retrain" trains per point
    bpe_mode: str = "trajectory"
    fast_unigram: bool = False
    seed: int = 0
    seed_multiplier: int = unigram.DEFAULT_SEED_MULTIPLIER
    max_piece_len: int = unigram.DEFAULT_MAX_PIECE_LEN
    shrink: float = unigram.DEFAULT_SHRINK

    def unigram_params(self) -> dict:
        return {"seed_multiplier": self.seed_multiplier, "max_piece_len": self.max_piece_len,
                "shrink": self.shrink, "seed": self.seed}


def min_feasible_n(s: CorpusStats) -> int:
    return s.alphabet_size


def cost(t: TermBreakdown, a: Alphas) -> float:
    return a.a1 * t.t1 + a.a2 * t.t2 + a.a3 * t.t3


def select_nstar(points: Sequence[CurvePoint]) -> int:
    if not points:
        raise EmptyGrid()
    best = min(p.cost for p in points)
    slack = TIE_RTOL * max(1.0, abs(best))
    return min(p.n for p in points if p.cost <= best + slack)


def build_curve(terms: Iterable[TermBreakdown], alphas: Alphas, kind: str,
                infeasible=()) -> CostCurve:
    pts = tuple(sorted((CurvePoint(t, cost(t, alphas)) for t in terms), key=lambda p: p.n))
    if not pts:
        raise EmptyGrid(infeasible)
    return CostCurve(pts, alphas, kind, select_nstar(pts), tuple(infeasible))


def resolve_workers(workers: int | None) -> int:
    cap = os.environ.get(THREADS_ENV)
    w = workers if workers is not None else 1
    if cap:
        w = min(w, max(1, int(cap)))
    return max(1, w)


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _reason(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _attempt(fn):
    """Run ``fn``; domain failures become a reason string instead of an exception."""
    try:
        return fn(), None
    except DomainError as exc:
        return None, _reason(exc)


def measure(c: Corpus, kind: str, ns: Sequence[int], config: SweepConfig = SweepConfig(),
            stats: CorpusStats | None = None):
    """Term breakdowns for every feasible ``n`` plus ``(n, reason)`` for the rest."""
    if kind not in KINDS:
        raise ValueError(f"unknown tokenizer kind {kind!r}")
    stats = stats or corpus_stats(c)
    ns = sorted(set(ns))
    n_min = min_feasible_n(stats)
    infeasible = [(n, _reason(InfeasibleVocabSize(n, n_min))) for n in ns if n < n_min]
    ns = [n for n in ns if n >= n_min]
    workers = resolve_workers(config.workers)
    encodings: dict[int, EncodedCorpus] = {}
    if not ns:
        return [], infeasible

    if kind == "bpe":
        encodings, failed = _bpe_encodings(c, ns, config, workers)
    else:
        encodings, failed = _unigram_encodings(c, ns, config, workers)
    infeasible.extend(failed)

    terms = []
    for n in ns:
        if n in encodings:
            try:
                terms.append(term_breakdown(n, encodings[n], stats, config.window))
            except DomainError as exc:
                infeasible.append((n, _reason(exc)))
    infeasible.sort()
    return terms, infeasible


def _bpe_encodings(c, ns, config, workers):
    n_max = max(ns)
    failed = []
    if config.bpe_mode == "trajectory":
        model, encs = train_bpe_with_snapshots(c, n_max, ns)
    elif config.bpe_mode == "truncate":
        alphabet = alphabet_of(c.sentences)
        merges, _ = learn_merges(c.sentences, alphabet, n_max - len(alphabet))
        model = BpeModel(alphabet, merges, {"n": len(alphabet) + len(merges)})
        reach = [n for n in ns if n <= model.n]
        encs = dict(zip(reach, _map(lambda n: encode_corpus(truncate(model, n), c), reach, workers)))
    elif config.bpe_mode == "retrain":
        results = _map(lambda n: _attempt(lambda: encode_corpus(train_bpe(c, n), c)), ns, workers)
        encs = {}
        for n, (enc, why) in zip(ns, results):
            if why is None:
                encs[n] = enc
            else:
                failed.append((n, why))
        return encs, failed
    else:
        raise ValueError(f"unknown bpe_mode {config.bpe_mode!r}")
    for n in ns:
        if n not in encs:
            failed.append((n, _reason(ExhaustedPairs(n, model.n))))
    return encs, failed


def _unigram_encodings(c, ns, config, workers):
    table = unigram.substring_table(c, config.max_piece_len)
    params = config.unigram_params()
    failed = []
    encs = {}
    if config.fast_unigram:
        # approximation: every smaller model is pruned down from the previous one
        attainable = len(table.alphabet) + table.n_multi
        for n in ns:
            if n > attainable:
                failed.append((n, _reason(ExhaustedPairs(n, attainable))))
        reach = [n for n in ns if n <= attainable]
        if not reach:
            return encs, failed
        model = unigram.train_unigram(c, max(reach), table=table, **params)
        for n in sorted(reach, reverse=True):
            if n != model.n:
                model = unigram.prune(model, c, n, config.shrink)
            encs[n] = encode_corpus(model, c)
        return encs, failed

    def one(n):
        return _attempt(lambda: encode_corpus(
            unigram.train_unigram(c, n, table=table, **params), c))

    for n, (enc, why) in zip(ns, _map(one, ns, workers)):
        if why is None:
            encs[n] = enc
        else:
            failed.append((n, why))
    return encs, failed


def sweep(c: Corpus, kind: str, grid: Grid | Sequence[int], a: Alphas,
          config: SweepConfig = SweepConfig()) -> CostCurve:
    stats = corpus_stats(c)
    ns = grid.values() if isinstance(grid, Grid) else list(grid)
    if not ns:
        raise EmptyGrid()
    terms, infeasible = measure(c, kind, ns, config, stats)
    if not terms:
        raise EmptyGrid(infeasible)
    curve = build_curve(terms, a, kind, infeasible)
    logger.info("%s sweep over %d points: n*=%d", kind, len(curve.grid), curve.n_star)
    return curve
