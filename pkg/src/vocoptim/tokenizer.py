"""The black-box tokenizer contract shared by every concrete tokenizer.

A trained model maps a sentence to a sequence of dense token ids whose piece
strings concatenate back to the sentence. Nothing downstream (statistics,
cost, sweep) looks past :meth:`TokenModel.encode` / :meth:`TokenModel.decode`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .exceptions import InvalidTokenId, UnencodableCharacter
from .stats import EncodedCorpus

KINDS = ("bpe", "unigram")


@dataclass(frozen=True)
class Segmentation:
    token_ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "token_ids", tuple(int(t) for t in self.token_ids))

    @property
    def beta(self) -> int:
        return len(self.token_ids)

    def __len__(self):
        return len(self.token_ids)

    def __iter__(self):
        return iter(self.token_ids)


class TokenModel:
    """A trained vocabulary of ``n`` distinct pieces; id == index into ``pieces``."""

    kind: str = ""

    def __init__(self, pieces: Sequence[str], trainer_config: dict | None = None):
        self.pieces = tuple(pieces)
        if len(set(self.pieces)) != len(self.pieces):
            raise ValueError("pieces must be distinct")
        self.piece_to_id = {p: i for i, p in enumerate(self.pieces)}
        self.alphabet = tuple(p for p in self.pieces if len(p) == 1)
        self.trainer_config = dict(trainer_config or {})

    @property
    def n(self) -> int:
        return len(self.pieces)

    def __len__(self):
        return len(self.pieces)

    def __eq__(self, other):
        return (type(self) is type(other) and self.pieces == other.pieces
                and self._eq_extra(other))

    def __hash__(self):
        return hash((self.kind, self.pieces))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"

    def _eq_extra(self, other) -> bool:
        return True

    def check_encodable(self, s: str, sentence_index: int | None = None) -> None:
        ids = self.piece_to_id
        for pos, ch in enumerate(s):
            if ch not in ids:
                raise UnencodableCharacter(ch, pos, sentence_index)

    def encode(self, s: str) -> Segmentation:
        raise NotImplementedError

    def encode_many(self, sentences: Iterable[str]) -> list[Segmentation]:
        """Encode each sentence independently (tokens never cross sentences)."""
        out = []
        for i, s in enumerate(sentences):
            self.check_encodable(s, i)
            out.append(self.encode(s))
        return out

    def encode_counts(self, sentences: Iterable[str]):
        """Per-sentence lengths and token frequencies of the encoding."""
        return EncodedCorpus.from_segmentations(self.encode_many(sentences), self.n)

    def decode(self, seg: Segmentation | Iterable[int]) -> str:
        ids = seg.token_ids if isinstance(seg, Segmentation) else seg
        n = self.n
        parts = []
        for t in ids:
            t = int(t)
            if not 0 <= t < n:
                raise InvalidTokenId(t, n)
            parts.append(self.pieces[t])
        return "".join(parts)

    def id_to_piece(self, ids: Iterable[int]) -> list[str]:
        return [self.pieces[int(t)] for t in ids]


def train(kind: str, corpus, n: int, config: dict | None = None) -> TokenModel:
    """Train a ``kind`` tokenizer with exactly ``n`` pieces."""
    config = dict(config or {})
    if kind == "bpe":
        from .bpe import train_bpe

        return train_bpe(corpus, n)
    if kind == "unigram":
        from .unigram import train_unigram

        return train_unigram(corpus, n, **config)
    raise ValueError(f"unknown tokenizer kind {kind!r}; expected one of {KINDS}")


def encode(m: TokenModel, s: str) -> Segmentation:
    m.check_encodable(s)
    return m.encode(s)


def decode(m: TokenModel, seg: Segmentation | Iterable[int]) -> str:
    return m.decode(seg)
