"""Synthetic Hebrew corpora for tests.

Two generators:

* a cue-word corpus where the word right before each ambiguous form
  deterministically selects between its two diacritization patterns, giving
  a fully learnable two-candidate ranking task;
* random well-formed words/corpora for property tests.
"""

from __future__ import annotations

import numpy as np

from niqqudkit import hebrew as H

_VOWELS = sorted(H.VOWEL_MARKS)
_LETTERS = [chr(cp) for cp in range(0x05D0, 0x05EB)]


def pattern(*marks) -> H.DiacritizationPattern:
    """Pattern from one mark (or None, or an iterable of marks) per slot."""
    slots = []
    for m in marks:
        if m is None:
            slots.append(frozenset())
        elif isinstance(m, str):
            slots.append(frozenset({m}))
        else:
            slots.append(frozenset(m))
    return H.DiacritizationPattern(tuple(slots))


def diacritize(word: str, pat: H.DiacritizationPattern) -> str:
    return H.to_text(H.apply_pattern(word, pat))


# --- cue-word corpus ---------------------------------------------------------

AMBIGUOUS: dict[str, tuple[H.DiacritizationPattern, H.DiacritizationPattern]] = {
    "מלך": (  # melekh / malakh
        pattern(H.SEGOL, H.SEGOL, H.SHEVA),
        pattern(H.QAMATS, H.PATAH, H.SHEVA),
    ),
    "דבר": (
        pattern(H.QAMATS, H.QAMATS, None),
        pattern(H.HIRIQ, (H.TSERE, H.DAGESH), None),
    ),
    "ספר": (
        pattern(H.TSERE, H.SEGOL, None),
        pattern(H.HIRIQ, H.SHEVA, None),
    ),
}

CUE_FIRST = "אבא"   # selects the first pattern
CUE_SECOND = "גדי"  # selects the second pattern

CUE_PATTERNS = {
    CUE_FIRST: pattern(H.PATAH, H.QAMATS, None),
    CUE_SECOND: pattern(H.HIRIQ, None, H.HIRIQ),
}

FILLERS = {
    "שלום": pattern((H.SHIN_DOT, H.QAMATS), H.SHEVA, None, None),
    "בית": pattern((H.PATAH, H.DAGESH), None, None),
    "אור": pattern(None, H.HOLAM, None),
    "ים": pattern(H.QAMATS, None),
}


def cue_corpus(n_sentences: int, seed: int) -> str:
    """Sentences "<cue> <ambiguous> <filler>." with the cue deciding the
    gold pattern of the ambiguous word."""
    rng = np.random.default_rng(seed)
    ambig = sorted(AMBIGUOUS)
    fillers = sorted(FILLERS)
    lines = []
    for _ in range(n_sentences):
        word = ambig[rng.integers(len(ambig))]
        first = bool(rng.integers(2))
        cue = CUE_FIRST if first else CUE_SECOND
        gold = AMBIGUOUS[word][0 if first else 1]
        filler = fillers[rng.integers(len(fillers))]
        lines.append(" ".join((
            diacritize(cue, CUE_PATTERNS[cue]),
            diacritize(word, gold),
            diacritize(filler, FILLERS[filler]),
        )) + ".")
    return " ".join(lines)


# --- random well-formed words -------------------------------------------------

def random_word(rng: np.random.Generator, min_len: int = 1,
                max_len: int = 8) -> H.DiacritizedWord:
    length = int(rng.integers(min_len, max_len + 1))
    clusters = []
    for _ in range(length):
        base = _LETTERS[rng.integers(len(_LETTERS))]
        marks: set[str] = set()
        if rng.random() < 0.8:
            marks.add(_VOWELS[rng.integers(len(_VOWELS))])
        if rng.random() < 0.3:
            marks.add(H.DAGESH)
        if base == H.SHIN and rng.random() < 0.9:
            marks.add(H.SHIN_DOT if rng.random() < 0.5 else H.SIN_DOT)
        clusters.append(H.LetterCluster(base, frozenset(marks)))
    return H.DiacritizedWord(tuple(clusters))


def random_gold_pred_corpus(rng: np.random.Generator, n_words: int = 150,
                            exact_rate: float = 0.6, absent_rate: float = 0.05,
                            ) -> list[tuple[H.DiacritizedWord, H.DiacritizedWord | None]]:
    """Gold/pred pairs resembling system output: most words exact, errors
    localized to one or two vowel slots, occasional equivocation."""
    pairs = []
    for _ in range(n_words):
        gold = random_word(rng, min_len=2, max_len=8)
        roll = rng.random()
        if roll < absent_rate:
            pairs.append((gold, None))
            continue
        if roll < absent_rate + exact_rate:
            pairs.append((gold, gold))
            continue
        clusters = list(gold.clusters)
        for _ in range(int(rng.integers(1, 3))):
            i = int(rng.integers(len(clusters)))
            cluster = clusters[i]
            non_vowel = frozenset(m for m in cluster.marks
                                  if m not in H.VOWEL_MARKS)
            new_vowel = _VOWELS[rng.integers(len(_VOWELS))]
            keep = rng.random() < 0.2  # sometimes drop the vowel instead
            marks = non_vowel if keep else non_vowel | {new_vowel}
            clusters[i] = H.LetterCluster(cluster.base, marks)
        pairs.append((gold, H.DiacritizedWord(tuple(clusters))))
    return pairs
