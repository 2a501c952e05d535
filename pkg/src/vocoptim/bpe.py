"""Byte-pair encoding over whole sentences.

Training treats every sentence as one symbol sequence, spaces included, and
repeatedly merges the adjacent pair with the highest corpus-wide occurrence
count. Ties go to the pair whose first occurrence comes earliest in the
corpus. Because merges only ever extend the list, the model for any smaller
size is a prefix of the model for a larger one (:func:`truncate`).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus, alphabet_of
from .exceptions import ExhaustedPairs, InfeasibleVocabSize
from .stats import EncodedCorpus
from .tokenizer import Segmentation, TokenModel


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    rank: int

    @property
    def result(self) -> str:
        return self.left + self.right


class BpeModel(TokenModel):
    kind = "bpe"

    def __init__(self, alphabet: Sequence[str], merges: Sequence[MergeRule],
                 trainer_config: dict | None = None):
        self.base_alphabet = tuple(alphabet)
        self.merges = tuple(merges)
        for i, rule in enumerate(self.merges):
            if rule.rank != i:
                raise ValueError("merge ranks must be dense and 0-based")
        super().__init__(self.base_alphabet + tuple(r.result for r in self.merges),
                         trainer_config)
        self._ranks = {(r.left, r.right): r.rank for r in self.merges}

    def _eq_extra(self, other) -> bool:
        return self.merges == other.merges

    def encode(self, s: str) -> Segmentation:
        self.check_encodable(s)
        return Segmentation([self.piece_to_id[p] for p in self._merge_symbols(list(s))])

    def _merge_symbols(self, symbols: list[str]) -> list[str]:
        # Lowest-rank pair first: a rule's result can only feed later rules,
        # so this equals replaying the merges in rank order.
        ranks = self._ranks
        while len(symbols) > 1:
            best = None
            for pair in zip(symbols, symbols[1:]):
                r = ranks.get(pair)
                if r is not None and (best is None or r < best):
                    best = r
            if best is None:
                break
            rule = self.merges[best]
            left, right, merged = rule.left, rule.right, rule.result
            out = []
            i = 0
            last = len(symbols) - 1
            while i <= last:
                if i < last and symbols[i] == left and symbols[i + 1] == right:
                    out.append(merged)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            symbols = out
        return symbols


def truncate(m: BpeModel, n: int) -> BpeModel:
    """Keep the first ``n - alphabet_size`` merges of ``m``."""
    a = len(m.base_alphabet)
    if n < a:
        raise InfeasibleVocabSize(n, a)
    if n > m.n:
        raise ValueError(f"cannot truncate a {m.n}-piece model up to {n}")
    if n == m.n:
        return m
    return BpeModel(m.base_alphabet, m.merges[: n - a], m.trainer_config)


def train_bpe(c: Corpus, n_max: int) -> BpeModel:
    alphabet = alphabet_of(c.sentences)
    if n_max < len(alphabet):
        raise InfeasibleVocabSize(n_max, len(alphabet))
    merges, _ = learn_merges(c.sentences, alphabet, n_max - len(alphabet))
    if len(merges) < n_max - len(alphabet):
        raise ExhaustedPairs(n_max, len(alphabet) + len(merges))
    return BpeModel(alphabet, merges, {"n": n_max})


def train_bpe_with_snapshots(c: Corpus, n_max: int, snapshot_ns: Iterable[int]):
    """Train once up to ``n_max`` (or as far as the corpus allows).

    Returns the model and, for every requested size that was reached, the
    encoding of the training corpus under the truncated model, read off the
    training state instead of re-encoding.
    """
    alphabet = alphabet_of(c.sentences)
    a = len(alphabet)
    if n_max < a:
        raise InfeasibleVocabSize(n_max, a)
    at = {n - a for n in snapshot_ns if a <= n <= n_max}
    merges, snaps = learn_merges(c.sentences, alphabet, n_max - a, snapshot_at=at)
    model = BpeModel(alphabet, merges, {"n": a + len(merges)})
    return model, {a + k: enc for k, enc in snaps.items()}


def learn_merges(sentences: Sequence[str], alphabet: Sequence[str], max_merges: int,
                 snapshot_at: Iterable[int] = ()):
    """Incremental BPE: pair counts and occurrence lists are updated in place.

    Symbols live in linked arrays indexed by global character position, so a
    symbol is identified by the position of its first character and the
    earliest-occurrence tie-break is a plain integer comparison.
    """
    snapshot_at = set(snapshot_at)
    strings = list(alphabet)
    string_ids = {s: i for i, s in enumerate(strings)}

    sym: list[int] = []
    sent_of: list[int] = []
    nxt: list[int] = []
    prv: list[int] = []
    for si, s in enumerate(sentences):
        base = len(sym)
        L = len(s)
        sym.extend(string_ids[ch] for ch in s)
        sent_of.extend([si] * L)
        nxt.extend(range(base + 1, base + L + 1))
        nxt[-1] = -1
        prv.append(-1)
        prv.extend(range(base, base + L - 1))

    freq = np.bincount(np.asarray(sym, dtype=np.int64), minlength=len(strings)).tolist()
    betas = [len(s) for s in sentences]

    counts: dict[tuple[int, int], int] = {}
    occ: dict[tuple[int, int], list[int]] = {}
    for p, q in enumerate(nxt):
        if q != -1:
            pair = (sym[p], sym[q])
            counts[pair] = counts.get(pair, 0) + 1
            lst = occ.get(pair)
            if lst is None:
                occ[pair] = [p]
            else:
                lst.append(p)

    heap = [(-cnt, pair) for pair, cnt in counts.items()]
    heapq.heapify(heap)
    banned: set[tuple[int, int]] = set()

    def snapshot():
        return EncodedCorpus.from_counts(np.array(betas, dtype=np.int64),
                                         np.array(freq, dtype=np.int64))

    snaps = {}
    if 0 in snapshot_at:
        snaps[0] = snapshot()

    def first_occurrence(pair):
        a, b = pair
        live = [p for p in occ.get(pair, ()) if sym[p] == a and nxt[p] != -1 and sym[nxt[p]] == b]
        occ[pair] = live
        return min(live)

    merges: list[MergeRule] = []
    while len(merges) < max_merges:
        # Gather every live pair tied at the top count.
        top = None
        tied = []
        while heap:
            negc, pair = heap[0]
            cnt = -negc
            if counts.get(pair, 0) != cnt or pair in banned:
                heapq.heappop(heap)
                continue
            if top is None:
                top = cnt
            elif cnt != top:
                break
            heapq.heappop(heap)
            if strings[pair[0]] + strings[pair[1]] in string_ids:
                banned.add(pair)
                top = None if not tied else top
                continue
            if pair not in tied:
                tied.append(pair)
        if not tied or top < 2:
            break
        if len(tied) == 1:
            best = tied[0]
        else:
            best = min(tied, key=first_occurrence)
            for pair in tied:
                if pair != best:
                    heapq.heappush(heap, (-top, pair))

        a, b = best
        c = len(strings)
        merged = strings[a] + strings[b]
        strings.append(merged)
        string_ids[merged] = c
        freq.append(0)
        changed = set()

        def bump(pair, delta, pos=None):
            cnt = counts.get(pair, 0) + delta
            if cnt:
                counts[pair] = cnt
            else:
                counts.pop(pair, None)
            changed.add(pair)
            if pos is not None:
                lst = occ.get(pair)
                if lst is None:
                    occ[pair] = [pos]
                else:
                    lst.append(pos)

        applied = 0
        for p in sorted(set(occ.pop(best, ()))):
            if sym[p] != a:
                continue
            q = nxt[p]
            if q == -1 or sym[q] != b:
                continue
            pp = prv[p]
            qq = nxt[q]
            if pp != -1:
                bump((sym[pp], a), -1)
                bump((sym[pp], c), 1, pp)
            if qq != -1:
                bump((b, sym[qq]), -1)
                bump((c, sym[qq]), 1, p)
                prv[qq] = p
            bump(best, -1)
            sym[p] = c
            sym[q] = -1
            nxt[p] = qq
            betas[sent_of[p]] -= 1
            applied += 1

        freq[a] -= applied
        freq[b] -= applied
        freq[c] = applied
        for pair in changed:
            cnt = counts.get(pair)
            if cnt:
                heapq.heappush(heap, (-cnt, pair))
        merges.append(MergeRule(strings[a], strings[b], len(merges)))
        if len(merges) in snapshot_at:
            snaps[len(merges)] = snapshot()

    return merges, snaps
