"""Versioned text format for trained models.

::

    vocoptim-model v1 kind=bpe n=4
    0\ta\t-
    1\tb\t-
    2\t\\s\t-
    3\tab\t0\t1

One line per piece: index, escaped piece, aux. For BPE, aux is the merge
rank (``-`` for base characters) and a fourth column holds the length of the
merge's left part, since a piece string alone does not pin down which two
pieces produced it. For unigram models aux is the natural-log probability
with 17 significant digits.
"""

from __future__ import annotations

import os

import numpy as np

from .bpe import BpeModel, MergeRule
from .exceptions import ModelFormatError
from .tokenizer import TokenModel
from .unigram import UnigramModel

MAGIC = "vocoptim-model"
VERSION = "v1"

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r", " ": "\\s"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r", "s": " "}


def escape_piece(piece: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in piece)


def unescape_piece(text: str) -> str:
    out = []
    it = iter(text)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(it, None)
        if nxt not in _UNESCAPES:
            raise ModelFormatError(f"bad escape sequence in {text!r}")
        out.append(_UNESCAPES[nxt])
    return "".join(out)


def dumps(m: TokenModel) -> str:
    lines = [f"{MAGIC} {VERSION} kind={m.kind} n={m.n}"]
    if isinstance(m, BpeModel):
        a = len(m.base_alphabet)
        for i, piece in enumerate(m.pieces):
            if i < a:
                lines.append(f"{i}\t{escape_piece(piece)}\t-")
            else:
                rule = m.merges[i - a]
                lines.append(f"{i}\t{escape_piece(piece)}\t{rule.rank}\t{len(rule.left)}")
    elif isinstance(m, UnigramModel):
        for i, (piece, lp) in enumerate(zip(m.pieces, m.logprobs)):
            lines.append(f"{i}\t{escape_piece(piece)}\t{float(lp):.17g}")
    else:
        raise TypeError(f"cannot serialize {type(m).__name__}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> TokenModel:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ModelFormatError("empty model file")
    head = lines[0].split(" ")
    if len(head) != 4 or head[0] != MAGIC:
        raise ModelFormatError(f"not a vocoptim model header: {lines[0]!r}")
    if head[1] != VERSION:
        raise ModelFormatError(f"unsupported model version {head[1]!r}")
    try:
        fields = dict(h.split("=", 1) for h in head[2:])
        kind, n = fields["kind"], int(fields["n"])
    except (ValueError, KeyError):
        raise ModelFormatError(f"malformed header: {lines[0]!r}") from None
    rows = [line.split("\t") for line in lines[1:]]
    if len(rows) != n:
        raise ModelFormatError(f"header declares n={n} but file has {len(rows)} pieces")
    for i, row in enumerate(rows):
        if len(row) < 3 or row[0] != str(i):
            raise ModelFormatError(f"malformed piece line {i + 1}: {lines[i + 1]!r}")
    pieces = [unescape_piece(r[1]) for r in rows]
    if kind == "bpe":
        alphabet = []
        merges = []
        for piece, row in zip(pieces, rows):
            if row[2] == "-":
                if merges:
                    raise ModelFormatError("base characters must precede merges")
                alphabet.append(piece)
                continue
            if len(row) != 4:
                raise ModelFormatError(f"merge line for {piece!r} lacks the split column")
            split = int(row[3])
            merges.append(MergeRule(piece[:split], piece[split:], int(row[2])))
        return BpeModel(alphabet, merges, {"n": n})
    if kind == "unigram":
        return UnigramModel(pieces, np.array([float(r[2]) for r in rows]), {"n": n})
    raise ModelFormatError(f"unknown model kind {kind!r}")


def save_model(m: TokenModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(m))


def load_model(path: str | os.PathLike) -> TokenModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
