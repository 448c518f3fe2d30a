"""Unicode-exact decomposition of Hebrew words into letter clusters.

A cluster is one Hebrew base letter plus the set of combining niqqud marks
attached to it.  Patterns are per-letter mark-sets with the bases removed;
they transfer between words of equal letter count.

Conventions (fixed for the whole toolkit):

* input is NFD-decomposed so every mark is its own scalar;
* in-cluster mark order is canonical ascending codepoint;
* holam haser for vav (U+05BA) is folded into holam (U+05B9);
* meteg, rafe and cantillation marks are stripped in lenient mode and
  rejected in strict mode;
* final and non-final letter forms are distinct letters everywhere.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field

from .errors import (
    EmptyInput,
    InvalidBase,
    InvalidCluster,
    LengthMismatch,
    OrphanMark,
    UnsupportedMark,
)

# Niqqud mark codepoints
SHEVA = "ְ"
HATAF_SEGOL = "ֱ"
HATAF_PATAH = "ֲ"
HATAF_QAMATS = "ֳ"
HIRIQ = "ִ"
TSERE = "ֵ"
SEGOL = "ֶ"
PATAH = "ַ"
QAMATS = "ָ"
HOLAM = "ֹ"
HOLAM_HASER_VAV = "ֺ"  # folded into HOLAM at parse time
QUBUTS = "ֻ"
DAGESH = "ּ"
SHIN_DOT = "ׁ"
SIN_DOT = "ׂ"
QAMATS_QATAN = "ׇ"

# Canonical mark inventory after the U+05BA fold, ascending codepoint.
MARK_INVENTORY: tuple[str, ...] = (
    SHEVA, HATAF_SEGOL, HATAF_PATAH, HATAF_QAMATS, HIRIQ, TSERE, SEGOL,
    PATAH, QAMATS, HOLAM, QUBUTS, DAGESH, SHIN_DOT, SIN_DOT, QAMATS_QATAN,
)
MARK_INDEX: dict[str, int] = {m: i for i, m in enumerate(MARK_INVENTORY)}

# Marks accepted on input (inventory plus the folded variant).
ACCEPTED_MARKS = frozenset(MARK_INVENTORY) | {HOLAM_HASER_VAV}

# At most one of these per cluster.
VOWEL_MARKS = frozenset({
    SHEVA, HATAF_SEGOL, HATAF_PATAH, HATAF_QAMATS, HIRIQ, TSERE, SEGOL,
    PATAH, QAMATS, HOLAM, QUBUTS, QAMATS_QATAN,
})

SHIN = "ש"

_ALEF = 0x05D0
_TAV = 0x05EA

FINAL_LETTERS = frozenset("ךםןףץ")  # kaf/mem/nun/pe/tsadi sofit


def is_hebrew_letter(ch: str) -> bool:
    return _ALEF <= ord(ch) <= _TAV


def is_supported_mark(ch: str) -> bool:
    return ch in ACCEPTED_MARKS


def _is_ignorable_mark(ch: str) -> bool:
    # Meteg, rafe, cantillation, and any other stray combining mark.
    return unicodedata.combining(ch) != 0


def letter_count(text: str) -> int:
    """Number of Hebrew letters in ``text``."""
    return sum(1 for ch in text if is_hebrew_letter(ch))


def strip_marks(text: str) -> str:
    """Remove every combining mark from raw text (any script)."""
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if unicodedata.combining(ch) == 0)


@dataclass(frozen=True)
class LetterCluster:
    """One Hebrew base letter with its attached niqqud marks."""

    base: str
    marks: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.base) != 1 or not is_hebrew_letter(self.base):
            raise InvalidBase(f"not a Hebrew letter: {self.base!r}")
        unknown = self.marks - set(MARK_INVENTORY)
        if unknown:
            raise UnsupportedMark(f"marks outside inventory: {sorted(unknown)!r}")
        vowels = self.marks & VOWEL_MARKS
        if len(vowels) > 1:
            raise InvalidCluster(
                f"cluster {self.base!r} carries {len(vowels)} vowel marks"
            )
        if SHIN_DOT in self.marks and SIN_DOT in self.marks:
            raise InvalidCluster("shin and sin dots cannot co-occur")
        if (SHIN_DOT in self.marks or SIN_DOT in self.marks) and self.base != SHIN:
            raise InvalidCluster(f"shin/sin dot on non-shin base {self.base!r}")

    def sorted_marks(self) -> tuple[str, ...]:
        return tuple(sorted(self.marks))

    def vowel(self) -> str | None:
        """The single vowel-class mark, or None."""
        for m in self.marks:
            if m in VOWEL_MARKS:
                return m
        return None


@dataclass(frozen=True)
class DiacritizedWord:
    """An ordered, non-empty sequence of letter clusters (logical order)."""

    clusters: tuple[LetterCluster, ...]

    def __post_init__(self):
        if not self.clusters:
            raise EmptyInput("a word needs at least one cluster")

    def __len__(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class DiacritizationPattern:
    """Per-letter mark-sets with base letters removed.

    Slots keep shin/sin dots unconditionally; dots are validated (and dropped
    on non-shin bases) only when the pattern is applied.
    """

    slots: tuple[frozenset[str], ...]

    def __post_init__(self):
        for i, slot in enumerate(self.slots):
            unknown = slot - set(MARK_INVENTORY)
            if unknown:
                raise UnsupportedMark(
                    f"slot {i} has marks outside inventory: {sorted(unknown)!r}"
                )
            if len(slot & VOWEL_MARKS) > 1:
                raise InvalidCluster(f"slot {i} carries more than one vowel mark")

    def __len__(self) -> int:
        return len(self.slots)


def parse_word(text: str, strict: bool = False) -> DiacritizedWord:
    """Decompose a Hebrew word into letter clusters.

    The input is NFD-normalized first, U+05BA is folded into U+05B9, and
    out-of-inventory combining marks are stripped (lenient, the default) or
    rejected (``strict=True``).
    """
    decomposed = unicodedata.normalize("NFD", text)
    if not any(is_hebrew_letter(ch) for ch in decomposed):
        raise EmptyInput(f"no Hebrew letter in {text!r}")

    clusters: list[LetterCluster] = []
    base: str | None = None
    marks: set[str] = set()

    def flush():
        nonlocal base, marks
        if base is not None:
            clusters.append(LetterCluster(base, frozenset(marks)))
        base, marks = None, set()

    for ch in decomposed:
        if is_hebrew_letter(ch):
            flush()
            base = ch
        elif is_supported_mark(ch):
            if base is None:
                raise OrphanMark(f"mark U+{ord(ch):04X} with no preceding letter")
            marks.add(HOLAM if ch == HOLAM_HASER_VAV else ch)
        elif _is_ignorable_mark(ch):
            if strict:
                raise UnsupportedMark(f"unsupported mark U+{ord(ch):04X}")
            # lenient: meteg / cantillation / stray combining marks vanish
        else:
            raise InvalidBase(f"non-Hebrew character {ch!r} in word {text!r}")
    flush()
    return DiacritizedWord(tuple(clusters))


def strip(word: DiacritizedWord) -> str:
    """The undiacritized form: base letters only."""
    return "".join(c.base for c in word.clusters)


def extract_pattern(word: DiacritizedWord) -> DiacritizationPattern:
    """The word's diacritization pattern: marks per slot, bases dropped."""
    return DiacritizationPattern(tuple(c.marks for c in word.clusters))


def apply_pattern(undiac: str, pattern: DiacritizationPattern) -> DiacritizedWord:
    """Apply a pattern to an undiacritized word of matching letter count.

    Shin/sin dots landing on a non-shin base are dropped silently: patterns
    transfer mechanically between words, and a stray dot must not discard an
    otherwise valid candidate.
    """
    letters = list(undiac)
    for ch in letters:
        if not is_hebrew_letter(ch):
            raise InvalidBase(f"non-Hebrew letter {ch!r} in {undiac!r}")
    if len(letters) != len(pattern.slots):
        raise LengthMismatch(
            f"{len(letters)} letters vs {len(pattern.slots)} pattern slots"
        )
    clusters = []
    for ch, slot in zip(letters, pattern.slots):
        marks = slot
        if ch != SHIN:
            marks = marks - {SHIN_DOT, SIN_DOT}
        clusters.append(LetterCluster(ch, frozenset(marks)))
    return DiacritizedWord(tuple(clusters))


def to_text(word: DiacritizedWord) -> str:
    """Canonical serialization: each base followed by its marks in
    ascending-codepoint order."""
    out = []
    for c in word.clusters:
        out.append(c.base)
        out.extend(c.sorted_marks())
    return "".join(out)


# --- pattern text encoding (lexicon file format) ---------------------------

_EMPTY_SLOT = "-"


def encode_pattern(pattern: DiacritizationPattern) -> str:
    """Slots joined by ``|``; each slot is ``+``-joined uppercase hex
    codepoints in ascending order; an empty slot is ``-``."""
    parts = []
    for slot in pattern.slots:
        if slot:
            parts.append("+".join(f"{ord(m):04X}" for m in sorted(slot)))
        else:
            parts.append(_EMPTY_SLOT)
    return "|".join(parts)


def decode_pattern(text: str) -> DiacritizationPattern:
    slots = []
    for part in text.split("|"):
        if part == _EMPTY_SLOT:
            slots.append(frozenset())
            continue
        marks = set()
        for hexcode in part.split("+"):
            try:
                marks.add(chr(int(hexcode, 16)))
            except ValueError as e:
                raise UnsupportedMark(f"bad mark code {hexcode!r}") from e
        slots.append(frozenset(marks))
    return DiacritizationPattern(tuple(slots))
