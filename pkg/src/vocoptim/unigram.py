"""Unigram language-model tokenizer.

Training seeds a large candidate set of frequent substrings, fits piece
probabilities by EM (full forward-backward expected counts), and prunes the
pieces whose removal costs the least likelihood until the target size is
reached. Encoding is Viterbi over the segmentation lattice.

All lattice work is vectorized across sentences: sentences are sorted by
length (longest first), so at character offset ``j`` the sentences still
alive form a prefix of the rows, and a DP column is one numpy expression per
piece length.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Corpus, alphabet_of
from .exceptions import ExhaustedPairs, InfeasibleVocabSize, TrainerDiverged, UnencodableCharacter
from .stats import EncodedCorpus
from .tokenizer import Segmentation, TokenModel

logger = logging.getLogger(__name__)

DEFAULT_SEED_MULTIPLIER = 10
DEFAULT_MAX_PIECE_LEN = 8
DEFAULT_SHRINK = 0.75
EM_STEPS_PER_ROUND = 2
# ties in Viterbi score are resolved by token count, then by id sequence
SCORE_RTOL = 1e-12
# lattices with at most this many edge slots keep their column index arrays
CACHE_EDGES = 1 << 21

_TINY = np.finfo(np.float64).tiny


class UnigramModel(TokenModel):
    kind = "unigram"

    def __init__(self, pieces: Sequence[str], logprobs, trainer_config: dict | None = None):
        super().__init__(pieces, trainer_config)
        self.logprobs = np.asarray(logprobs, dtype=np.float64)
        if self.logprobs.shape != (self.n,):
            raise ValueError("one log probability per piece is required")
        self.max_piece_len = max(len(p) for p in self.pieces)

    def _eq_extra(self, other) -> bool:
        return np.array_equal(self.logprobs, other.logprobs)

    def encode(self, s: str) -> Segmentation:
        return self.encode_many([s])[0]

    def encode_many(self, sentences) -> list[Segmentation]:
        sentences = list(sentences)
        lat = Lattice(sentences, self.pieces, self.max_piece_len)
        return lat.viterbi(self.logprobs).segmentations()

    def encode_counts(self, sentences) -> EncodedCorpus:
        """Token counts of the Viterbi encoding without materializing segmentations."""
        lat = Lattice(list(sentences), self.pieces, self.max_piece_len)
        path = lat.viterbi(self.logprobs)
        return EncodedCorpus.from_counts(path.betas(), path.freq(self.n))


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    m = x.max(axis=1)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return m + np.log(np.exp(x - m[:, None]).sum(axis=1))


class Lattice:
    """All piece occurrences over a batch of sentences.

    ``edge[L-1][p]`` is the id of the piece spelling ``text[p:p+L]`` in the
    flat (concatenated) text, or -1 when that substring is not a piece or
    runs past its sentence end.
    """

    def __init__(self, sentences: Sequence[str], pieces: Sequence[str], max_len: int,
                 *, exclude_full_span: bool = False):
        self.sentences = sentences
        self.k = len(sentences)
        self.max_len = max_len
        self.n = len(pieces)
        lens = np.fromiter((len(s) for s in sentences), dtype=np.int64, count=self.k)
        self.lens = lens
        self.starts = np.zeros(self.k, dtype=np.int64)
        if self.k:
            self.starts[1:] = np.cumsum(lens)[:-1]
        self.N = int(lens.sum())
        # rows sorted by length descending; stable so equal lengths keep corpus order
        self.order = np.argsort(-lens, kind="stable")
        self.row_lens = lens[self.order]
        self.row_starts = self.starts[self.order]
        self.maxlen = int(self.row_lens[0]) if self.k else 0
        # alive[j] = number of rows with length >= j
        self.alive = np.searchsorted(-self.row_lens, -np.arange(self.maxlen + 2), side="right")
        edges = _build_edges(sentences, self.starts, lens, self.N, pieces, max_len)
        # edge[L-1, p]; shape (max_len, N)
        self.edge = np.stack(edges) if edges else np.full((max_len, self.N), -1, dtype=np.int32)
        if exclude_full_span:
            for i in range(self.k):
                L = int(lens[i])
                if 1 <= L <= max_len:
                    self.edge[L - 1, self.starts[i]] = -1
        # boundary layout: row r, offset j (0..len) -> bstart[r] + j
        self.bstart = self.row_starts + self.order
        self.row_ends = self.bstart + self.row_lens
        self._cols_out = self._cols_in = None

    def restrict(self, keep: np.ndarray) -> "Lattice":
        """Lattice over the same text with only the pieces ``keep`` (old ids, new order)."""
        remap = np.full(self.n + 1, -1, dtype=np.int32)
        remap[keep] = np.arange(len(keep), dtype=np.int32)
        new = object.__new__(Lattice)
        new.__dict__.update(self.__dict__)
        new.n = len(keep)
        new.edge = remap[self.edge]
        return new

    def _boundary_array(self, fill, dtype=np.float64):
        # padded so lookups up to max_len past a row end stay in range
        return np.full(self.N + self.k + self.max_len + 1, fill, dtype=dtype)

    def _iter_columns_out(self):
        N = self.N
        for j in range(self.maxlen - 1, -1, -1):
            rows = int(self.alive[j + 1])
            Ls = np.arange(1, min(self.max_len, self.maxlen - j) + 1)
            epos = (Ls - 1) * N + (self.row_starts[:rows, None] + j)
            at = self.bstart[:rows] + j
            yield rows, Ls, epos, at[:, None] + Ls, at

    def _iter_columns_in(self):
        N = self.N
        for j in range(1, self.maxlen + 1):
            rows = int(self.alive[j])
            Ls = np.arange(1, min(j, self.max_len) + 1)
            epos = (Ls - 1) * N + (self.row_starts[:rows, None] + j - Ls)
            at = self.bstart[:rows] + j
            yield rows, epos, at[:, None] - Ls, at

    def _columns_out(self):
        """Per offset ``j`` (descending), the edges leaving ``j`` in rows longer than ``j``.

        Each entry is ``(rows, Ls, epos, nxt, at)``: flat indices into ``edge``
        and into the boundary layout for the edge end and start. Small lattices
        cache these, since every EM step and every restricted lattice shares them.
        """
        if self.edge.size > CACHE_EDGES:
            return self._iter_columns_out()
        if self._cols_out is None:
            self._cols_out = list(self._iter_columns_out())
        return self._cols_out

    def _columns_in(self):
        """Per offset ``j`` (ascending), the edges arriving at ``j``: ``(rows, epos, prev, at)``."""
        if self.edge.size > CACHE_EDGES:
            return self._iter_columns_in()
        if self._cols_in is None:
            self._cols_in = list(self._iter_columns_in())
        return self._cols_in

    def forward(self, lp: np.ndarray) -> np.ndarray:
        """Log prefix probabilities in boundary layout (``lp`` has -inf appended)."""
        alpha = self._boundary_array(-np.inf)
        alpha[self.bstart] = 0.0
        w_all = lp[self.edge.ravel()]
        for rows, epos, prev, at in self._columns_in():
            alpha[at] = _logsumexp_rows(alpha[prev] + w_all[epos])
        return alpha

    def forward_backward(self, logprobs: np.ndarray):
        """Expected piece counts and per-sentence log partition values (input order)."""
        lp = np.append(logprobs, -np.inf)
        alpha = self.forward(lp)
        logz = alpha[self.row_ends]
        if not np.all(np.isfinite(logz)):
            bad = int(self.order[np.flatnonzero(~np.isfinite(logz))[0]])
            raise TrainerDiverged(f"sentence {bad} has zero lattice probability")

        beta = self._boundary_array(-np.inf)
        beta[self.row_ends] = 0.0
        w_all = lp[self.edge.ravel()]
        # posterior of every edge, indexed like ``edge``; -inf weights give exactly 0
        post = np.zeros(self.edge.size)
        for rows, Ls, epos, nxt, at in self._columns_out():
            t = w_all[epos] + beta[nxt]
            beta[at] = _logsumexp_rows(t)
            a = alpha[at] - logz[:rows]
            post[epos] = np.exp(a[:, None] + t)
        post = post.reshape(self.edge.shape)
        ok = self.edge >= 0
        counts = np.bincount(self.edge[ok], weights=post[ok], minlength=self.n + 1)
        out = np.empty(self.k)
        out[self.order] = logz
        return counts[: self.n], out

    def viterbi(self, logprobs: np.ndarray) -> "ViterbiPath":
        """Best segmentation per sentence, computed right to left.

        Ties within ``SCORE_RTOL`` of the best score go to fewer tokens, then
        to the smaller first id. Going backward makes that rule local: among
        equal-length continuations the smaller first id gives the
        lexicographically smaller sequence.
        """
        lp = np.append(logprobs, -np.inf)
        big = 2**62
        bs = self.bstart
        score = self._boundary_array(-np.inf)
        ntok = self._boundary_array(big, np.int64)
        score[self.row_ends] = 0.0
        ntok[self.row_ends] = 0
        nb = self.N + self.k
        choice_id = np.full(nb, -1, dtype=np.int64)
        choice_len = np.zeros(nb, dtype=np.int64)
        with np.errstate(invalid="ignore"):
            edge_flat = self.edge.ravel()
            for rows, Ls, epos, nxt, at in self._columns_out():
                e = edge_flat[epos].astype(np.int64)
                cand = np.where(e >= 0, lp[e] + score[nxt], -np.inf)
                cnt = ntok[nxt] + 1
                best = cand.max(axis=1)
                fin = np.isfinite(best)
                tol = SCORE_RTOL * np.maximum(1.0, np.abs(np.where(fin, best, 0.0)))
                tie = np.isfinite(cand) & (cand >= (best - tol)[:, None])
                cnt_t = np.where(tie, cnt, big)
                tie &= cnt_t == cnt_t.min(axis=1)[:, None]
                pick = np.where(tie, e, big).argmin(axis=1)
                r = np.arange(rows)
                score[at] = np.where(fin, cand[r, pick], -np.inf)
                ntok[at] = np.where(fin, cnt[r, pick], big)
                choice_id[at] = np.where(fin, e[r, pick], -1)
                choice_len[at] = np.where(fin, pick + 1, 0)
        total = score[bs]
        if self.k and not np.all(np.isfinite(total)):
            bad = int(self.order[np.flatnonzero(~np.isfinite(total))[0]])
            raise TrainerDiverged(f"sentence {bad} cannot be segmented")
        return ViterbiPath(self, bs, choice_id, choice_len, ntok[bs], total)


@dataclass
class ViterbiPath:
    lattice: Lattice
    bstart: np.ndarray
    choice_id: np.ndarray
    choice_len: np.ndarray
    row_ntok: np.ndarray
    row_score: np.ndarray

    def _walk(self):
        """Token ids of every row, laid out row after row in one flat array."""
        lat = self.lattice
        ntok = self.row_ntok
        offsets = np.zeros(lat.k + 1, dtype=np.int64)
        np.cumsum(ntok, out=offsets[1:])
        out = np.empty(int(offsets[-1]), dtype=np.int64)
        cur = self.bstart.copy()
        end = self.bstart + lat.row_lens
        rows = np.arange(lat.k)
        step = 0
        active = rows[cur < end]
        while active.size:
            pos = cur[active]
            out[offsets[active] + step] = self.choice_id[pos]
            cur[active] = pos + self.choice_len[pos]
            step += 1
            active = active[cur[active] < end[active]]
        return out, offsets

    def betas(self) -> np.ndarray:
        lat = self.lattice
        b = np.empty(lat.k, dtype=np.int64)
        b[lat.order] = self.row_ntok
        return b

    def freq(self, n: int) -> np.ndarray:
        out, _ = self._walk()
        return np.bincount(out, minlength=n)

    def segmentations(self) -> list[Segmentation]:
        lat = self.lattice
        out, offsets = self._walk()
        segs: list = [None] * lat.k
        for r in range(lat.k):
            segs[int(lat.order[r])] = Segmentation(out[offsets[r]:offsets[r + 1]].tolist())
        return segs

    def row_ids(self) -> list[np.ndarray]:
        """Per-sentence id arrays in input order."""
        lat = self.lattice
        out, offsets = self._walk()
        res: list = [None] * lat.k
        for r in range(lat.k):
            res[int(lat.order[r])] = out[offsets[r]:offsets[r + 1]]
        return res


def _char_codes(sentences, alphabet_index):
    """Flat int array of 1-based character codes; raises on unknown characters."""
    flat = "".join(sentences)
    try:
        return np.fromiter((alphabet_index[ch] for ch in flat), dtype=np.int64, count=len(flat))
    except KeyError:
        pass
    for si, s in enumerate(sentences):
        for pos, ch in enumerate(s):
            if ch not in alphabet_index:
                raise UnencodableCharacter(ch, pos, si)
    raise AssertionError("unreachable")


def _window_keys(codes, base, L, valid_until):
    """Packed integer key of each length-L window; windows crossing a sentence end get -1."""
    N = len(codes)
    key = np.zeros(N, dtype=np.int64)
    if N < L:
        return np.full(N, -1, dtype=np.int64)
    span = N - L + 1
    k = np.zeros(span, dtype=np.int64)
    for i in range(L):
        k = k * base + codes[i:i + span]
    key[:span] = k
    key[span:] = -1
    pos = np.arange(N)
    key[pos + L > valid_until] = -1
    return key


def _packing_fits(base: int, max_len: int) -> bool:
    return max_len * math.log2(base) < 62


def _build_edges(sentences, starts, lens, N, pieces, max_len):
    alphabet_index = {p: i + 1 for i, p in enumerate(p for p in pieces if len(p) == 1)}
    codes = _char_codes(sentences, alphabet_index)
    # end of the sentence containing each flat position
    sent_end = np.repeat(starts + lens, lens)
    base = len(alphabet_index) + 1
    edges = []
    if not _packing_fits(base, max_len):
        ids = {p: i for i, p in enumerate(pieces)}
        flat = "".join(sentences)
        for L in range(1, max_len + 1):
            e = np.full(N, -1, dtype=np.int32)
            for p in range(N):
                if p + L <= sent_end[p]:
                    e[p] = ids.get(flat[p:p + L], -1)
            edges.append(e)
        return edges
    by_len: dict[int, list[tuple[int, int]]] = {}
    for pid, piece in enumerate(pieces):
        if len(piece) > max_len:
            raise ValueError(f"piece {piece!r} longer than max_len={max_len}")
        key = 0
        for ch in piece:
            if ch not in alphabet_index:
                raise ValueError(f"piece {piece!r} uses a character with no single-character piece")
            key = key * base + alphabet_index[ch]
        by_len.setdefault(len(piece), []).append((key, pid))
    for L in range(1, max_len + 1):
        e = np.full(N, -1, dtype=np.int32)
        entries = by_len.get(L)
        if entries and N:
            keys = _window_keys(codes, base, L, sent_end)
            entries.sort()
            pk = np.array([x for x, _ in entries], dtype=np.int64)
            pid = np.array([y for _, y in entries], dtype=np.int32)
            idx = np.searchsorted(pk, keys)
            idx_c = np.minimum(idx, len(pk) - 1)
            hit = (keys >= 0) & (pk[idx_c] == keys)
            e[hit] = pid[idx_c[hit]]
        edges.append(e)
    return edges


# --------------------------------------------------------------------------
# training


@dataclass(frozen=True)
class SubstringTable:
    """Every distinct substring (length <= max_len) of a corpus with its count,
    ranked by count * length, then by first occurrence."""

    alphabet: tuple[str, ...]
    strings: tuple[str, ...]
    counts: np.ndarray
    max_len: int

    @property
    def n_multi(self) -> int:
        return len(self.strings)


def substring_table(c: Corpus, max_len: int) -> SubstringTable:
    sentences = c.sentences
    alphabet = alphabet_of(sentences)
    index = {ch: i + 1 for i, ch in enumerate(alphabet)}
    codes = _char_codes(sentences, index)
    lens = np.fromiter((len(s) for s in sentences), dtype=np.int64, count=len(sentences))
    starts = np.concatenate(([0], np.cumsum(lens)[:-1]))
    sent_end = np.repeat(starts + lens, lens)
    base = len(alphabet) + 1
    flat = "".join(sentences)

    strings, counts, scores, firsts = [], [], [], []
    if _packing_fits(base, max_len):
        for L in range(2, max_len + 1):
            keys = _window_keys(codes, base, L, sent_end)
            ok = keys >= 0
            if not ok.any():
                break
            pos = np.flatnonzero(ok)
            uniq, first, cnt = np.unique(keys[ok], return_index=True, return_counts=True)
            first_pos = pos[first]
            strings.extend(flat[p:p + L] for p in first_pos.tolist())
            counts.append(cnt)
            scores.append(cnt * L)
            firsts.append(first_pos)
    else:
        table: dict[str, list[int]] = {}
        for p in range(len(flat)):
            end = int(sent_end[p])
            for L in range(2, max_len + 1):
                if p + L > end:
                    break
                sub = flat[p:p + L]
                entry = table.get(sub)
                if entry is None:
                    table[sub] = [1, p]
                else:
                    entry[0] += 1
        for sub, (cnt, first) in table.items():
            strings.append(sub)
            counts.append(np.array([cnt]))
            scores.append(np.array([cnt * len(sub)]))
            firsts.append(np.array([first]))
    if not strings:
        return SubstringTable(alphabet, (), np.zeros(0, dtype=np.int64), max_len)
    counts = np.concatenate(counts)
    scores = np.concatenate(scores)
    firsts = np.concatenate(firsts)
    rank = np.lexsort((firsts, -scores))
    return SubstringTable(alphabet, tuple(strings[i] for i in rank), counts[rank], max_len)


def char_counts(c: Corpus, alphabet) -> np.ndarray:
    index = {ch: i for i, ch in enumerate(alphabet)}
    out = np.zeros(len(alphabet), dtype=np.int64)
    for s in c.sentences:
        for ch in s:
            out[index[ch]] += 1
    return out


def seed_vocab(c: Corpus, seed_size: int, max_piece_len: int = DEFAULT_MAX_PIECE_LEN,
               table: SubstringTable | None = None) -> UnigramModel:
    """Single characters plus the top-scoring multi-character substrings.

    Initial probabilities are proportional to raw substring frequency.
    """
    if table is None or table.max_len != max_piece_len:
        table = substring_table(c, max_piece_len)
    alphabet = table.alphabet
    if seed_size < len(alphabet):
        raise InfeasibleVocabSize(seed_size, len(alphabet))
    n_multi = min(seed_size - len(alphabet), table.n_multi)
    pieces = alphabet + table.strings[:n_multi]
    freq = np.concatenate((char_counts(c, alphabet), table.counts[:n_multi])).astype(np.float64)
    freq = np.maximum(freq, _TINY)
    return UnigramModel(pieces, np.log(freq) - np.log(freq.sum()),
                        {"seed_size": seed_size, "max_piece_len": max_piece_len})


def _normalize(counts: np.ndarray) -> np.ndarray:
    counts = np.maximum(counts, _TINY)
    return np.log(counts) - np.log(counts.sum())


def em_step(m: UnigramModel, c: Corpus, lattice: Lattice | None = None):
    """One EM iteration. Returns the re-estimated model and the log-likelihood
    of the corpus under the *input* model."""
    if lattice is None:
        lattice = Lattice(c.sentences, m.pieces, m.max_piece_len)
    counts, logz = lattice.forward_backward(m.logprobs)
    new = UnigramModel(m.pieces, _normalize(counts), m.trainer_config)
    return new, float(logz.sum())


def removal_losses(m: UnigramModel, lattice: Lattice) -> np.ndarray:
    """Approximate likelihood loss of removing each piece.

    A piece used ``count`` times in the Viterbi encoding would be replaced by
    its best segmentation from the remaining pieces, so the loss is
    ``count * (logp(piece) - sum(logp(alternative)))``. Single characters get
    +inf (never removed).
    """
    path = lattice.viterbi(m.logprobs)
    counts = path.freq(m.n).astype(np.float64)
    loss = np.full(m.n, np.inf)
    multi = [i for i, p in enumerate(m.pieces) if len(p) > 1]
    if not multi:
        return loss
    alt_lat = Lattice([m.pieces[i] for i in multi], m.pieces, m.max_piece_len,
                      exclude_full_span=True)
    alt = alt_lat.viterbi(m.logprobs)
    lp = m.logprobs
    for idx, ids in zip(multi, alt.row_ids()):
        loss[idx] = counts[idx] * (lp[idx] - lp[ids].sum())
    return loss


def prune(m: UnigramModel, c: Corpus, target_n: int, shrink: float = DEFAULT_SHRINK,
          lattice: Lattice | None = None, em_steps: int = EM_STEPS_PER_ROUND) -> UnigramModel:
    """Shrink ``m`` to ``target_n`` pieces, dropping a ``1 - shrink`` share per round."""
    n_alpha = len(m.alphabet)
    if target_n < n_alpha:
        raise InfeasibleVocabSize(target_n, n_alpha)
    if not 0 < shrink < 1:
        raise ValueError("shrink must lie strictly between 0 and 1")
    if target_n > m.n:
        raise ExhaustedPairs(target_n, m.n)
    if lattice is None:
        lattice = Lattice(c.sentences, m.pieces, m.max_piece_len)
    while True:
        for _ in range(em_steps):
            m, ll = em_step(m, c, lattice)
        if m.n <= target_n:
            return m
        logger.debug("prune round: %d pieces, log-likelihood %.3f", m.n, ll)
        size = max(target_n, min(m.n - 1, int(m.n * shrink)))
        loss = removal_losses(m, lattice)
        ids = np.arange(m.n)
        # keep: highest loss first, ties to the lower (better seeded) id
        ranked = np.lexsort((ids, -loss))
        keep = np.sort(ranked[:size])
        lattice = lattice.restrict(keep)
        kept_lp = m.logprobs[keep]
        m = UnigramModel([m.pieces[i] for i in keep], kept_lp - np.logaddexp.reduce(kept_lp),
                         m.trainer_config)


def train_unigram(c: Corpus, n: int, seed_multiplier: int = DEFAULT_SEED_MULTIPLIER,
                  max_piece_len: int = DEFAULT_MAX_PIECE_LEN, shrink: float = DEFAULT_SHRINK,
                  seed: int = 0, table: SubstringTable | None = None) -> UnigramModel:
    """Seed, then alternate EM and pruning down to exactly ``n`` pieces.

    The procedure has no random component; ``seed`` is recorded for provenance.
    """
    alphabet = alphabet_of(c.sentences)
    if n < len(alphabet):
        raise InfeasibleVocabSize(n, len(alphabet))
    if table is None or table.max_len != max_piece_len:
        table = substring_table(c, max_piece_len)
    total = len(alphabet) + table.n_multi
    if n > total:
        raise ExhaustedPairs(n, total)
    seed_size = min(n * seed_multiplier, total)
    m = seed_vocab(c, seed_size, max_piece_len, table)
    m = prune(m, c, n, shrink)
    config = {"n": n, "seed_multiplier": seed_multiplier, "max_piece_len": max_piece_len,
              "shrink": shrink, "seed": seed}
    return UnigramModel(m.pieces, m.logprobs, config)


def viterbi_encode(m: UnigramModel, s: str) -> Segmentation:
    return m.encode(s)
