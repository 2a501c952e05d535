"""Corpus ingestion and corpus-level accounting.

A corpus is one sentence per line. Lines are trimmed, internal whitespace
runs collapse to one space, and blank lines are dropped, so word counts and
space-spanning tokens are well defined regardless of source formatting.
"""

from __future__ import annotations

import hashlib
import os
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import CorpusNotFound, EmptyCorpus, InvalidUtf8

SPACE = " "
NORMALIZATIONS = ("none", "nfkc")


def normalize_line(line: str) -> str:
    return SPACE.join(line.split())


def normalize_text(text: str, normalization: str = "none") -> list[str]:
    """Split raw text into normalized, non-empty sentences."""
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {normalization!r}")
    if normalization == "nfkc":
        text = unicodedata.normalize("NFKC", text)
    sentences = []
    for line in text.split("\n"):
        line = normalize_line(line.replace("\r", ""))
        if line:
            sentences.append(line)
    return sentences


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[str, ...]
    source_path: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        for s in self.sentences:
            if not s or "\n" in s:
                raise ValueError(f"invalid sentence {s!r}")

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @classmethod
    def from_sentences(cls, sentences: Iterable[str], normalization: str = "none",
                       source_path: str = "") -> "Corpus":
        """Build a corpus from in-memory strings, applying the file normalization rules."""
        out = []
        for s in sentences:
            out.extend(normalize_text(s, normalization))
        if not out:
            raise EmptyCorpus(source_path or None)
        return cls(tuple(out), source_path)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for s in self.sentences:
            h.update(s.encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()

    def to_text(self) -> str:
        return "".join(s + "\n" for s in self.sentences)


@dataclass(frozen=True)
class CorpusStats:
    k: int
    w: int
    w_u: int
    alphabet: tuple[str, ...] = field(repr=False)

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    def as_dict(self) -> dict:
        return {"k": self.k, "w": self.w, "w_u": self.w_u, "alphabet_size": self.alphabet_size}


def load_corpus(path: str | os.PathLike, normalization: str = "none") -> Corpus:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise CorpusNotFound(path) from None
    except IsADirectoryError:
        raise CorpusNotFound(path) from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidUtf8(path, exc.start) from None
    sentences = normalize_text(text, normalization)
    if not sentences:
        raise EmptyCorpus(path)
    return Corpus(tuple(sentences), str(path))


def alphabet_of(sentences: Sequence[str]) -> tuple[str, ...]:
    """Distinct characters in first-appearance order; space appended when absent."""
    seen = dict.fromkeys("".join(sentences))
    seen.setdefault(SPACE, None)
    return tuple(seen)


def corpus_stats(c: Corpus) -> CorpusStats:
    w = 0
    vocab = set()
    for s in c.sentences:
        words = s.split(SPACE)
        w += len(words)
        vocab.update(words)
    return CorpusStats(k=len(c.sentences), w=w, w_u=len(vocab), alphabet=alphabet_of(c.sentences))


def read_librispeech_transcripts(root: str | os.PathLike) -> list[str]:
    """Collect the text of every ``*.trans.txt`` under ``root``, utterance ids removed.

    Files are visited in sorted path order so the sentence order is reproducible.
    """
    lines = []
    for trans in sorted(Path(root).rglob("*.trans.txt")):
        for line in trans.read_text(encoding="utf-8").splitlines():
            _, _, text = line.partition(" ")
            if text.strip():
                lines.append(text)
    return lines
