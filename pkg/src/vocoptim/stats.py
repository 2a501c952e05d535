"""Encoded-corpus statistics: per-sentence lengths, token frequencies, cost terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, CorpusStats
from .exceptions import AllTokensUnused

DEFAULT_WINDOW = 5


@dataclass(frozen=True, eq=False)
class EncodedCorpus:
    """``betas[i]`` tokens for sentence i; ``freq[t]`` occurrences of token id t."""

    betas: np.ndarray
    theta_t: int
    freq: np.ndarray

    @classmethod
    def from_counts(cls, betas, freq) -> "EncodedCorpus":
        betas = np.asarray(betas, dtype=np.int64)
        freq = np.asarray(freq, dtype=np.int64)
        theta = int(betas.sum())
        if theta != int(freq.sum()):
            raise ValueError("token frequencies do not add up to the sentence lengths")
        return cls(betas, theta, freq)

    def __eq__(self, other):
        if not isinstance(other, EncodedCorpus):
            return NotImplemented
        return (self.theta_t == other.theta_t and np.array_equal(self.betas, other.betas)
                and np.array_equal(self.freq, other.freq))

    __hash__ = None

    @classmethod
    def from_segmentations(cls, segs, n: int) -> "EncodedCorpus":
        betas = np.fromiter((len(s) for s in segs), dtype=np.int64, count=len(segs))
        if len(segs):
            ids = np.concatenate([np.asarray(s.token_ids, dtype=np.int64) for s in segs])
        else:
            ids = np.zeros(0, dtype=np.int64)
        freq = np.bincount(ids, minlength=n)
        return cls.from_counts(betas, freq)


@dataclass(frozen=True)
class FreqSummary:
    f_plus: float
    f_minus: float
    m: int
    zero_count_tokens: tuple[int, ...]


@dataclass(frozen=True)
class TermBreakdown:
    n: int
    t1: int
    t2: float
    t3: float
    theta_t: int
    f_plus: float
    f_minus: float


def encode_corpus(m, c: Corpus) -> EncodedCorpus:
    return m.encode_counts(c.sentences)


def freq_summary(e: EncodedCorpus, m: int = DEFAULT_WINDOW) -> FreqSummary:
    """Means of the ``m`` largest and ``m`` smallest nonzero token counts.

    Unused tokens are left out of both windows (they would make the ratio
    infinite) and are reported in ``zero_count_tokens`` instead.
    """
    if m < 1:
        raise ValueError("window must be at least 1")
    freq = np.asarray(e.freq)
    ids = np.arange(len(freq))
    # descending count, ascending id
    order = np.lexsort((ids, -freq))
    counts = freq[order]
    nonzero = counts[counts > 0]
    if len(nonzero) == 0:
        raise AllTokensUnused()
    window = min(m, len(nonzero))
    f_plus = float(nonzero[:window].sum()) / window
    f_minus = float(nonzero[-window:].sum()) / window
    zeros = tuple(int(t) for t in np.flatnonzero(freq == 0))
    return FreqSummary(f_plus, f_minus, m, zeros)


def term_breakdown(n: int, e: EncodedCorpus, s: CorpusStats,
                   m: int = DEFAULT_WINDOW) -> TermBreakdown:
    if s.w < 1:
        raise ValueError("corpus has no words")
    fs = freq_summary(e, m)
    # (x - y) / y rather than x / y - 1: exact whenever the difference is an integer
    t2 = (fs.f_plus - fs.f_minus) / fs.f_minus
    t3 = (e.theta_t - s.w) / s.w
    return TermBreakdown(n=n, t1=n, t2=t2, t3=t3, theta_t=e.theta_t,
                         f_plus=fs.f_plus, f_minus=fs.f_minus)
