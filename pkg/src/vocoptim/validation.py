"""Input checks shared by the estimators."""

from __future__ import annotations

import os
from pathlib import Path

from .corpus import Corpus, load_corpus


def check_corpus(X, normalization: str = "none") -> Corpus:
    """Coerce ``X`` to a :class:`Corpus`.

    Accepts a Corpus, a path to a text file, or an iterable of strings (each
    string may hold several newline-separated sentences).
    """
    if isinstance(X, Corpus):
        return X
    if isinstance(X, (os.PathLike, Path)):
        return load_corpus(X, normalization)
    if isinstance(X, str):
        raise TypeError("pass a list of sentences or a pathlib.Path, not a bare string")
    if hasattr(X, "tolist"):
        X = X.tolist()
    sentences = list(X)
    bad = [type(s).__name__ for s in sentences if not isinstance(s, str)]
    if bad:
        raise TypeError(f"expected strings, got {bad[0]}")
    return Corpus.from_sentences(sentences, normalization)


def check_sentences(X) -> list[str]:
    """Sentences to encode, taken verbatim (no whitespace normalization)."""
    if isinstance(X, str):
        return [X]
    if isinstance(X, Corpus):
        return list(X.sentences)
    if hasattr(X, "tolist"):
        X = X.tolist()
    out = list(X)
    for s in out:
        if not isinstance(s, str):
            raise TypeError(f"expected strings, got {type(s).__name__}")
    return out


def check_token_ids(X) -> list[list[int]]:
    if hasattr(X, "tolist") and getattr(X, "ndim", 1) == 1 and len(X) and not hasattr(X[0], "__len__"):
        return [list(X.tolist())]
    return [[int(t) for t in row] for row in X]


def check_window(m: int) -> int:
    if int(m) != m or m < 1:
        raise ValueError(f"window must be a positive integer, got {m!r}")
    return int(m)

