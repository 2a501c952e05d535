"""scikit-learn style wrappers.

The tokenizers are transformers (sentences -> token-id arrays), and
:class:`VocabSizeSelector` fits a cost curve over vocabulary sizes. All
constructor arguments are plain parameters, so ``get_params``/``set_params``,
``clone`` and grid search work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import unigram
from .bpe import train_bpe
from .corpus import corpus_stats
from .cost import Alphas, CostCurve, Grid, SweepConfig, measure, build_curve, min_feasible_n
from .exceptions import EmptyGrid
from .stats import DEFAULT_WINDOW, encode_corpus
from .tokenizer import KINDS
from .validation import check_corpus, check_sentences, check_token_ids, check_window


class _TokenizerMixin(TransformerMixin):
    def transform(self, X):
        """Encode each sentence to an int64 array of token ids."""
        check_is_fitted(self, "model_")
        segs = self.model_.encode_many(check_sentences(X))
        return [np.asarray(s.token_ids, dtype=np.int64) for s in segs]

    def inverse_transform(self, X):
        check_is_fitted(self, "model_")
        return [self.model_.decode(row) for row in check_token_ids(X)]

    def encoded_stats(self, X):
        """Per-sentence lengths and token frequencies over ``X``."""
        check_is_fitted(self, "model_")
        return encode_corpus(self.model_, check_corpus(X))

    @property
    def vocabulary_(self):
        check_is_fitted(self, "model_")
        return self.model_.piece_to_id


class BPETokenizer(_TokenizerMixin, BaseEstimator):
    """Sentence-level byte-pair encoding with exactly ``n_tokens`` pieces."""

    def __init__(self, n_tokens=300):
        self.n_tokens = n_tokens

    def fit(self, X, y=None):
        corpus = check_corpus(X)
        self.model_ = train_bpe(corpus, int(self.n_tokens))
        self.n_alphabet_ = len(self.model_.base_alphabet)
        return self


class UnigramTokenizer(_TokenizerMixin, BaseEstimator):
    """Unigram language-model tokenizer with exactly ``n_tokens`` pieces."""

    def __init__(self, n_tokens=300, seed_multiplier=unigram.DEFAULT_SEED_MULTIPLIER,
                 max_piece_len=unigram.DEFAULT_MAX_PIECE_LEN, shrink=unigram.DEFAULT_SHRINK,
                 random_state=0):
        self.n_tokens = n_tokens
        self.seed_multiplier = seed_multiplier
        self.max_piece_len = max_piece_len
        self.shrink = shrink
        self.random_state = random_state

    def fit(self, X, y=None):
        corpus = check_corpus(X)
        self.model_ = unigram.train_unigram(
            corpus, int(self.n_tokens), seed_multiplier=self.seed_multiplier,
            max_piece_len=self.max_piece_len, shrink=self.shrink, seed=self.random_state)
        self.n_alphabet_ = len(self.model_.alphabet)
        return self


_TOKENIZERS = {"bpe": BPETokenizer, "unigram": UnigramTokenizer}


class VocabSizeSelector(BaseEstimator):
    """Pick the vocabulary size that minimizes the weighted cost.

    Parameters
    ----------
    tokenizer : {"bpe", "unigram"}
    alphas : tuple of three non-negative floats
        Weights of vocabulary size, frequency imbalance and token overhead.
    n_min, n_max, step : grid bounds; ``n_min=None`` starts at the alphabet size,
        ``step=None`` is dense up to 200 and every 5th size after.
    window : number of most/least frequent tokens averaged for f+ and f-.
    fast_unigram : prune smaller unigram models from larger ones instead of
        retraining each grid point.
    n_jobs : worker threads for grid evaluation (capped by ``VOCOPTIM_THREADS``).

    Attributes
    ----------
    curve_ : CostCurve
    n_star_ : int
    terms_ : list of TermBreakdown, one per feasible grid point
    infeasible_ : list of (n, reason)
    corpus_stats_ : CorpusStats
    """

    def __init__(self, tokenizer="bpe", alphas=(1.0, 1.0, 1.0), n_min=None, n_max=1000,
                 step=None, window=DEFAULT_WINDOW, fast_unigram=False, n_jobs=None,
                 bpe_mode="trajectory", seed_multiplier=unigram.DEFAULT_SEED_MULTIPLIER,
                 max_piece_len=unigram.DEFAULT_MAX_PIECE_LEN, shrink=unigram.DEFAULT_SHRINK,
                 random_state=0):
        self.tokenizer = tokenizer
        self.alphas = alphas
        self.n_min = n_min
        self.n_max = n_max
        self.step = step
        self.window = window
        self.fast_unigram = fast_unigram
        self.n_jobs = n_jobs
        self.bpe_mode = bpe_mode
        self.seed_multiplier = seed_multiplier
        self.max_piece_len = max_piece_len
        self.shrink = shrink
        self.random_state = random_state

    def _alphas(self) -> Alphas:
        a = self.alphas
        if isinstance(a, Alphas):
            return a
        if isinstance(a, str):
            return Alphas.parse(a)
        return Alphas(*(float(v) for v in a))

    def _config(self) -> SweepConfig:
        return SweepConfig(window=check_window(self.window), workers=self.n_jobs,
                           bpe_mode=self.bpe_mode, fast_unigram=self.fast_unigram,
                           seed=self.random_state, seed_multiplier=self.seed_multiplier,
                           max_piece_len=self.max_piece_len, shrink=self.shrink)

    def fit(self, X, y=None):
        if self.tokenizer not in KINDS:
            raise ValueError(f"tokenizer must be one of {KINDS}, got {self.tokenizer!r}")
        alphas = self._alphas()
        corpus = check_corpus(X)
        stats = corpus_stats(corpus)
        n_min = min_feasible_n(stats) if self.n_min is None else int(self.n_min)
        self.grid_ = Grid(n_min, int(self.n_max), self.step)
        terms, infeasible = measure(corpus, self.tokenizer, self.grid_.values(),
                                    self._config(), stats)
        if not terms:
            raise EmptyGrid(infeasible)
        self.corpus_stats_ = stats
        self.terms_ = terms
        self.infeasible_ = infeasible
        self.curve_ = build_curve(terms, alphas, self.tokenizer, infeasible)
        self.n_star_ = self.curve_.n_star
        return self

    def reweight(self, alphas) -> CostCurve:
        """Cost curve for other weights, reusing the fitted measurements."""
        check_is_fitted(self, "terms_")
        if not isinstance(alphas, Alphas):
            alphas = Alphas(*alphas)
        return build_curve(self.terms_, alphas, self.tokenizer, self.infeasible_)

    def score(self, X=None, y=None):
        """Negative cost at the selected size (higher is better)."""
        check_is_fitted(self, "curve_")
        return -self.curve_.point(self.n_star_).cost

    def best_tokenizer(self, X):
        """A tokenizer of the selected size fitted on ``X``."""
        check_is_fitted(self, "n_star_")
        params = {"n_tokens": self.n_star_}
        if self.tokenizer == "unigram":
            params.update(seed_multiplier=self.seed_multiplier, max_piece_len=self.max_piece_len,
                          shrink=self.shrink, random_state=self.random_state)
        return _TOKENIZERS[self.tokenizer](**params).fit(X)
