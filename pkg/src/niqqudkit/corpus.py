"""Corpus ingestion: sentence chunking, tokenization, lexicon construction,
and training-time sampling weights.

The lexicon maps each undiacritized form seen in a diacritized corpus to a
frequency-sorted list of its observed diacritization patterns; it backs
candidate generation and both baselines.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import hebrew
from .errors import CorpusParseError, DataError, FormatError

LEXICON_MAGIC = "DIVRIT-LEX"
LEXICON_VERSION = 1

CHUNK_CHAR_THRESHOLD = 200

# Punctuation allowed inside a Hebrew token (abbreviation/acronym marks);
# split off again when leading or trailing.
INTERNAL_PUNCT = frozenset({"׳", "״", "'", '"'})

_HEBREW_COMBINING_LO = 0x0591
_HEBREW_COMBINING_HI = 0x05C7


def _is_word_mark(ch: str) -> bool:
    code = ord(ch)
    if _HEBREW_COMBINING_LO <= code <= _HEBREW_COMBINING_HI:
        return unicodedata.combining(ch) != 0
    return False


def _is_hebrew_token_char(ch: str) -> bool:
    return hebrew.is_hebrew_letter(ch) or _is_word_mark(ch) or ch in INTERNAL_PUNCT


@dataclass(frozen=True)
class Token:
    start: int
    end: int
    is_hebrew_word: bool

    def text(self, sentence_text: str) -> str:
        return sentence_text[self.start:self.end]


@dataclass(frozen=True)
class Sentence:
    text: str
    tokens: tuple[Token, ...]

    def token_text(self, index: int) -> str:
        return self.tokens[index].text(self.text)


def chunk_text(raw: str) -> list[str]:
    """Split raw text into sentence chunks.

    A boundary is emitted immediately after every ``.``; additionally, once a
    chunk has accumulated at least 200 characters (Unicode scalars, marks
    included), the next line break ends it.  Chunks are trimmed of
    surrounding whitespace; empty chunks are discarded.
    """
    chunks: list[str] = []
    current: list[str] = []

    def flush():
        chunk = "".join(current).strip()
        current.clear()
        if chunk:
            chunks.append(chunk)

    for ch in raw:
        if ch == "\n" and len(current) >= CHUNK_CHAR_THRESHOLD:
            flush()
            continue
        current.append(ch)
        if ch == ".":
            flush()
    flush()
    return chunks


def tokenize(sentence_text: str) -> tuple[Token, ...]:
    """Token spans over ``sentence_text``.

    Maximal runs of Hebrew letters, combining marks, and internal
    abbreviation punctuation form Hebrew-word tokens (with leading/trailing
    punctuation split off); every other non-space run is a single token;
    whitespace only separates.
    """
    tokens: list[Token] = []
    n = len(sentence_text)
    i = 0

    def emit(start: int, end: int):
        if end > start:
            span = sentence_text[start:end]
            has_letter = any(hebrew.is_hebrew_letter(c) for c in span)
            tokens.append(Token(start, end, has_letter))

    while i < n:
        ch = sentence_text[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if _is_hebrew_token_char(ch):
            while i < n and _is_hebrew_token_char(sentence_text[i]):
                i += 1
            left, right = start, i
            while left < right and sentence_text[left] in INTERNAL_PUNCT:
                left += 1
            while right > left and sentence_text[right - 1] in INTERNAL_PUNCT:
                right -= 1
            emit(start, left)
            emit(left, right)
            emit(right, i)
        else:
            while i < n and not sentence_text[i].isspace() \
                    and not _is_hebrew_token_char(sentence_text[i]):
                i += 1
            emit(start, i)
    return tuple(tokens)


def read_corpus(raw: str) -> list[Sentence]:
    """Chunk raw text into sentences and tokenize each."""
    return [Sentence(chunk, tokenize(chunk)) for chunk in chunk_text(raw)]


def load_corpus_file(path) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return read_corpus(fh.read())


def is_lexical_token(token_text: str) -> bool:
    """True when a token consists purely of Hebrew letters and combining
    marks.  Tokens mixing Hebrew letters with anything else (acronym
    punctuation, Latin, digits) have no well-defined pattern and are excluded
    from the lexicon and from word-level metrics."""
    has_letter = False
    for ch in token_text:
        if hebrew.is_hebrew_letter(ch):
            has_letter = True
        elif unicodedata.combining(ch) == 0:
            return False
    return has_letter


class Lexicon:
    """Undiacritized form -> frequency-sorted (pattern, count) list.

    Lists are sorted by count descending, ties broken by the canonical
    pattern serialization ascending.  Immutable once built.
    """

    def __init__(self, entries: dict[str, tuple[tuple[hebrew.DiacritizationPattern, int], ...]]):
        self.entries = entries
        self._freq = {w: sum(c for _, c in pats) for w, pats in entries.items()}
        self.total_tokens = sum(self._freq.values())
        self._length_buckets: dict[int, list[str]] | None = None

    def __contains__(self, undiac: str) -> bool:
        return undiac in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def patterns(self, undiac: str) -> tuple[tuple[hebrew.DiacritizationPattern, int], ...]:
        return self.entries[undiac]

    def freq(self, undiac: str) -> int:
        return self._freq.get(undiac, 0)

    def top_pattern(self, undiac: str) -> hebrew.DiacritizationPattern | None:
        pats = self.entries.get(undiac)
        return pats[0][0] if pats else None

    def keys_by_length(self) -> dict[int, list[str]]:
        """Lexicon keys bucketed by letter count, each bucket sorted
        ascending (cached)."""
        if self._length_buckets is None:
            buckets: dict[int, list[str]] = {}
            for key in self.entries:
                buckets.setdefault(len(key), []).append(key)
            for bucket in buckets.values():
                bucket.sort()
            self._length_buckets = buckets
        return self._length_buckets

    # --- persistence (line-oriented UTF-8, bit-exact) -----------------------

    def dumps(self) -> str:
        lines = [f"{LEXICON_MAGIC} {LEXICON_VERSION}"]
        for undiac in sorted(self.entries):
            pats = self.entries[undiac]
            total = sum(c for _, c in pats)
            encoded = ",".join(
                f"{hebrew.encode_pattern(p)}:{c}" for p, c in pats
            )
            lines.append(f"{undiac}\t{total}\t{encoded}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "Lexicon":
        lines = text.splitlines()
        if not lines:
            raise FormatError("empty lexicon file")
        header = lines[0].split()
        if len(header) != 2 or header[0] != LEXICON_MAGIC:
            raise FormatError(f"bad lexicon header: {lines[0]!r}")
        if int(header[1]) != LEXICON_VERSION:
            raise FormatError(f"unsupported lexicon version {header[1]}")
        entries: dict[str, tuple[tuple[hebrew.DiacritizationPattern, int], ...]] = {}
        prev_key: str | None = None
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise FormatError(f"line {lineno}: expected 3 fields, got {len(fields)}")
            undiac, total_str, encoded = fields
            if prev_key is not None and undiac <= prev_key:
                raise FormatError(f"line {lineno}: entries not sorted ({undiac!r})")
            prev_key = undiac
            pats: list[tuple[hebrew.DiacritizationPattern, int]] = []
            for item in encoded.split(","):
                pat_text, _, count_str = item.rpartition(":")
                try:
                    count = int(count_str)
                except ValueError as e:
                    raise FormatError(f"line {lineno}: bad count {count_str!r}") from e
                if count < 1:
                    raise FormatError(f"line {lineno}: count must be >= 1")
                try:
                    pattern = hebrew.decode_pattern(pat_text)
                except DataError as e:
                    raise FormatError(f"line {lineno}: {e}") from e
                if len(pattern) != hebrew.letter_count(undiac):
                    raise FormatError(
                        f"line {lineno}: pattern length {len(pattern)} does not "
                        f"match key {undiac!r}"
                    )
                pats.append((pattern, count))
            if int(total_str) != sum(c for _, c in pats):
                raise FormatError(f"line {lineno}: total disagrees with counts")
            entries[undiac] = tuple(pats)
        return cls(entries)

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _sort_entry(counts: dict[hebrew.DiacritizationPattern, int]):
    return tuple(sorted(
        counts.items(),
        key=lambda pc: (-pc[1], hebrew.encode_pattern(pc[0])),
    ))


def build_lexicon(sentences: Iterable[Sentence], strict: bool = False,
                  source=None) -> Lexicon:
    """Fold a diacritized corpus into a lexicon.

    Lenient mode skips tokens that fail to parse; strict mode propagates the
    parse error together with its source location.
    """
    counts: dict[str, dict[hebrew.DiacritizationPattern, int]] = {}
    for sent_index, sentence in enumerate(sentences):
        for token in sentence.tokens:
            text = token.text(sentence.text)
            if not token.is_hebrew_word or not is_lexical_token(text):
                continue
            try:
                word = hebrew.parse_word(text, strict=strict)
            except DataError as e:
                if strict:
                    raise CorpusParseError(
                        str(e), source=source, sentence_index=sent_index,
                        token_span=(token.start, token.end),
                    ) from e
                continue
            undiac = hebrew.strip(word)
            pattern = hebrew.extract_pattern(word)
            per_word = counts.setdefault(undiac, {})
            per_word[pattern] = per_word.get(pattern, 0) + 1
    return Lexicon({w: _sort_entry(c) for w, c in counts.items()})


def sampling_weight(freq: int) -> float:
    """Training-time word sampling weight: ``freq ** 0.75``."""
    if freq < 1:
        raise ValueError("frequency must be >= 1")
    return float(freq) ** 0.75


@dataclass(frozen=True)
class SamplingTable:
    """Word forms with unnormalized ``freq ** 0.75`` weights; dividing by
    ``normalization`` yields a probability distribution."""

    items: tuple[tuple[str, float], ...]
    normalization: float

    def probabilities(self) -> Iterator[tuple[str, float]]:
        for form, weight in self.items:
            yield form, weight / self.normalization


def build_sampling_table(lexicon: Lexicon) -> SamplingTable:
    items = tuple(
        (form, sampling_weight(lexicon.freq(form)))
        for form in sorted(lexicon.entries)
    )
    return SamplingTable(items, sum(w for _, w in items))


def balanced_cap(lexicon: Lexicon) -> Lexicon:
    """Cap each entry's top pattern count at the combined count of all its
    alternatives (at most 50% of occurrences); single-pattern entries are
    unchanged."""
    capped: dict[str, tuple[tuple[hebrew.DiacritizationPattern, int], ...]] = {}
    for form, pats in lexicon.entries.items():
        if len(pats) < 2:
            capped[form] = pats
            continue
        rest_total = sum(c for _, c in pats[1:])
        top_pattern, top_count = pats[0]
        new_counts = {top_pattern: min(top_count, rest_total)}
        for p, c in pats[1:]:
            new_counts[p] = c
        capped[form] = _sort_entry(new_counts)
    return Lexicon(capped)
