"""Choose a subword vocabulary size by minimizing a three-term cost.

The cost of a tokenizer with ``n`` pieces trained on a corpus is::

    a1 * n  +  a2 * (f_plus / f_minus - 1)  +  a3 * (theta_t / w - 1)

where ``f_plus``/``f_minus`` average the five most/least frequent token
counts, ``theta_t`` is the number of tokens needed to encode the corpus and
``w`` its word count. Two tokenizers are included (sentence-level BPE and a
unigram language model) and any object following :class:`TokenModel` works.
"""

__version__ = "0.1.0"

from .bpe import BpeModel, MergeRule, train_bpe, truncate  # noqa: E402
from .corpus import Corpus, CorpusStats, corpus_stats, load_corpus  # noqa: E402
from .cost import (Alphas, CostCurve, Grid, SweepConfig, cost, min_feasible_n,  # noqa: E402
                   select_nstar, sweep)
from .estimator import BPETokenizer, UnigramTokenizer, VocabSizeSelector  # noqa: E402
from .serialization import load_model, save_model  # noqa: E402
from .stats import EncodedCorpus, TermBreakdown, encode_corpus, freq_summary, term_breakdown  # noqa: E402
from .tokenizer import Segmentation, TokenModel, decode, encode, train  # noqa: E402
from .unigram import UnigramModel, train_unigram  # noqa: E402

__all__ = [
    "Alphas", "BPETokenizer", "BpeModel", "Corpus", "CorpusStats", "CostCurve",
    "EncodedCorpus", "Grid", "MergeRule", "Segmentation", "SweepConfig", "TermBreakdown",
    "TokenModel", "UnigramModel", "UnigramTokenizer", "VocabSizeSelector", "corpus_stats",
    "cost", "decode", "encode", "encode_corpus", "freq_summary", "load_corpus", "load_model",
    "min_feasible_n", "save_model", "select_nstar", "sweep", "term_breakdown", "train",
    "train_bpe", "train_unigram", "truncate",
]
