"""KNN-based diacritization candidate generation and coverage measurement.

Neighbors are lexicon keys of the same letter count, ranked by the number of
positions where characters match; each neighbor contributes its observed
patterns in frequency order, and the merged list (deduplicated after
application) is truncated to the requested candidate-set size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import hebrew
from .corpus import Lexicon
from .errors import NoNeighbors

DEFAULT_K = 5
DEFAULT_C = 2


@dataclass(frozen=True)
class Neighbor:
    form: str
    similarity: int
    corpus_freq: int


@dataclass(frozen=True)
class NeighborList:
    neighbors: tuple[Neighbor, ...]

    def __len__(self) -> int:
        return len(self.neighbors)

    def forms(self) -> tuple[str, ...]:
        return tuple(n.form for n in self.neighbors)


@dataclass(frozen=True)
class CandidateSet:
    query: str
    candidates: tuple[hebrew.DiacritizedWord, ...]
    gold_index: int | None = None


class KnnIndex:
    """Exact positional-match search over per-length key buckets.

    Each bucket keeps its keys sorted ascending, a codepoint matrix for
    vectorized similarity, and a precomputed (freq desc, form asc) order for
    tie resolution at the similarity cutoff.
    """

    def __init__(self, lexicon: Lexicon):
        self.lexicon = lexicon
        self._buckets: dict[int, dict] = {}
        for length, keys in lexicon.keys_by_length().items():
            codes = np.empty((len(keys), length), dtype=np.int32)
            for row, key in enumerate(keys):
                codes[row] = [ord(ch) for ch in key]
            freqs = np.array([lexicon.freq(k) for k in keys], dtype=np.int64)
            # rows ordered by (freq desc, form asc); keys are sorted, so a
            # stable sort on -freq preserves the lexicographic tiebreak
            by_freq = np.argsort(-freqs, kind="stable")
            self._buckets[length] = {
                "keys": keys,
                "codes": codes,
                "freqs": freqs,
                "by_freq": by_freq,
            }

    def query(self, w: str, k: int) -> NeighborList:
        if k < 1:
            raise ValueError("k must be >= 1")
        bucket = self._buckets.get(len(w))
        if bucket is None:
            raise NoNeighbors(f"no lexicon key with {len(w)} letters")
        keys: list[str] = bucket["keys"]
        freqs: np.ndarray = bucket["freqs"]
        q = np.array([ord(ch) for ch in w], dtype=np.int32)
        sims = (bucket["codes"] == q).sum(axis=1)

        n = len(keys)
        k_eff = min(k, n)
        # similarity of the k-th best neighbor
        cutoff = np.partition(sims, n - k_eff)[n - k_eff]

        above = np.flatnonzero(sims > cutoff)
        chosen = sorted(
            above.tolist(),
            key=lambda i: (-int(sims[i]), -int(freqs[i]), keys[i]),
        )
        needed = k_eff - len(chosen)
        if needed > 0:
            by_freq = bucket["by_freq"]
            at_cutoff = by_freq[sims[by_freq] == cutoff]
            chosen.extend(int(i) for i in at_cutoff[:needed])
        return NeighborList(tuple(
            Neighbor(keys[i], int(sims[i]), int(freqs[i])) for i in chosen
        ))


def _as_index(lexicon_or_index) -> KnnIndex:
    if isinstance(lexicon_or_index, KnnIndex):
        return lexicon_or_index
    return KnnIndex(lexicon_or_index)


def knn_neighbors(lexicon_or_index, w: str, k: int = DEFAULT_K) -> NeighborList:
    """Top-k same-length lexicon keys by positional character matches.

    Ties break by corpus frequency descending, then form ascending.  An
    in-vocabulary query is always its own best neighbor.
    """
    if hebrew.letter_count(w) < 1:
        raise NoNeighbors(f"query {w!r} has no Hebrew letter")
    return _as_index(lexicon_or_index).query(w, k)


def _merged_candidates(index: KnnIndex, w: str, k: int) -> list[hebrew.DiacritizedWord]:
    """All distinct candidates from the k nearest neighbors, in merge order."""
    neighbor_list = knn_neighbors(index, w, k)
    lexicon = index.lexicon
    seen: set[str] = set()
    out: list[hebrew.DiacritizedWord] = []
    for neighbor in neighbor_list.neighbors:
        for pattern, _count in lexicon.patterns(neighbor.form):
            candidate = hebrew.apply_pattern(w, pattern)
            text = hebrew.to_text(candidate)
            if text in seen:
                continue
            seen.add(text)
            out.append(candidate)
    return out


def generate_candidates(lexicon_or_index, w: str, k: int = DEFAULT_K,
                        c: int = DEFAULT_C) -> CandidateSet:
    """Merge the neighbors' frequency-sorted pattern lists in neighbor order,
    apply each pattern to ``w``, deduplicate keeping first occurrence, and
    truncate to ``c`` candidates."""
    if c < 1:
        raise ValueError("c must be >= 1")
    index = _as_index(lexicon_or_index)
    merged = _merged_candidates(index, w, k)
    return CandidateSet(query=w, candidates=tuple(merged[:c]))


def oracle_candidates(lexicon_or_index, w: str, gold: hebrew.DiacritizedWord,
                      k: int = DEFAULT_K, c: int = DEFAULT_C) -> CandidateSet:
    """Candidate set with the gold form guaranteed present.

    If generation misses the gold form it replaces the last candidate when
    the set is full, or is appended otherwise; with no same-length neighbors
    at all the set degenerates to the gold form alone.
    """
    if hebrew.strip(gold) != w:
        raise ValueError("gold form does not strip to the query")
    try:
        generated = generate_candidates(lexicon_or_index, w, k, c)
    except NoNeighbors:
        return CandidateSet(query=w, candidates=(gold,), gold_index=0)
    cands = list(generated.candidates)
    if gold in cands:
        return CandidateSet(w, tuple(cands), gold_index=cands.index(gold))
    if len(cands) >= c:
        cands[-1] = gold
    else:
        cands.append(gold)
    return CandidateSet(w, tuple(cands), gold_index=cands.index(gold))


def coverage(lexicon_or_index, pairs: Iterable[tuple[str, hebrew.DiacritizedWord]],
             k: int = DEFAULT_K, c: int = DEFAULT_C) -> float:
    """Fraction of (undiacritized, gold) pairs whose gold form appears in the
    generated candidate set; pairs with no neighbors count as misses."""
    index = _as_index(lexicon_or_index)
    total = 0
    hits = 0
    for w, gold in pairs:
        total += 1
        try:
            candset = generate_candidates(index, w, k, c)
        except NoNeighbors:
            continue
        if gold in candset.candidates:
            hits += 1
    if total == 0:
        raise ValueError("coverage needs at least one test pair")
    return hits / total


def coverage_curve(lexicon_or_index,
                   pairs: Sequence[tuple[str, hebrew.DiacritizedWord]],
                   k_values: Sequence[int],
                   c_values: Sequence[int]) -> list[tuple[int, int, float]]:
    """Coverage for every (k, c) combination, as ``(k, c, coverage)`` rows.

    For a fixed k the candidate list is generated once at max(c) and each
    smaller c reads the gold form's position in it, which is equivalent to
    truncating per c.
    """
    if not pairs:
        raise ValueError("coverage needs at least one test pair")
    index = _as_index(lexicon_or_index)
    rows: list[tuple[int, int, float]] = []
    c_max = max(c_values)
    for k in k_values:
        gold_positions: list[int | None] = []
        for w, gold in pairs:
            try:
                merged = _merged_candidates(index, w, k)[:c_max]
            except NoNeighbors:
                gold_positions.append(None)
                continue
            try:
                gold_positions.append(merged.index(gold))
            except ValueError:
                gold_positions.append(None)
        for c in c_values:
            hits = sum(1 for pos in gold_positions if pos is not None and pos < c)
            rows.append((k, c, hits / len(pairs)))
    return rows
