"""Exception hierarchy shared across the toolkit.

``DataError`` covers everything caused by malformed input data (bad words,
bad files, misaligned corpora); the CLI maps it to exit code 2.  Everything
else that escapes is treated as an internal invariant failure (exit code 3).
"""


class NiqqudkitError(Exception):
    """Base class for all toolkit errors."""


class DataError(NiqqudkitError):
    """Errors caused by malformed input data."""


# --- word parsing / pattern application -----------------------------------

class EmptyInput(DataError):
    """Input contains no Hebrew letter."""


class OrphanMark(DataError):
    """A combining mark appeared with no preceding Hebrew letter."""


class UnsupportedMark(DataError):
    """A combining mark outside the supported inventory (strict mode only)."""


class InvalidCluster(DataError):
    """A letter cluster violating mark-compatibility rules (two vowels,
    shin/sin dot on a non-shin base, or co-occurring shin and sin dots)."""


class InvalidBase(DataError):
    """A character that cannot serve as a cluster base (not a Hebrew letter)."""


class LengthMismatch(DataError):
    """Pattern length does not match the letter count of the target word."""


# --- candidate generation ---------------------------------------------------

class NoNeighbors(DataError):
    """No lexicon key of the same letter length exists for the query."""


# --- corpus / file formats ---------------------------------------------------

class CorpusParseError(DataError):
    """A corpus token failed to parse; carries a source location."""

    def __init__(self, message, *, source=None, sentence_index=None, token_span=None):
        super().__init__(message)
        self.source = source
        self.sentence_index = sentence_index
        self.token_span = token_span

    def __str__(self):
        loc = []
        if self.source is not None:
            loc.append(str(self.source))
        if self.sentence_index is not None:
            loc.append(f"sentence {self.sentence_index}")
        if self.token_span is not None:
            loc.append(f"chars {self.token_span[0]}..{self.token_span[1]}")
        base = super().__str__()
        return f"{base} ({', '.join(loc)})" if loc else base


class FormatError(DataError):
    """A persisted artifact (lexicon, checkpoint, report) is malformed."""


class AlignmentError(DataError):
    """Gold and predicted token streams do not align."""


# --- rendering ----------------------------------------------------------------

class TooWide(DataError):
    """Rendered instance exceeds the configured patch budget."""


class MissingGlyph(DataError):
    """No glyph for a character (strict rendering mode only)."""


# --- scoring ---------------------------------------------------------------

class ShapeMismatch(NiqqudkitError):
    """Model parameter or input shapes are inconsistent."""


class DimensionMismatch(NiqqudkitError):
    """Embedding dimensions disagree."""


class EmptyCandidates(NiqqudkitError):
    """Scoring requires at least one candidate."""


class BadTargetIndex(DataError):
    """Context target index does not point at a Hebrew word token."""


class TargetDerivationError(DataError):
    """Auxiliary targets could not be derived from a candidate."""


class ConfigurationError(NiqqudkitError):
    """Invalid run or model configuration."""
