import unicodedata

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from niqqudkit import hebrew as H
from niqqudkit.errors import (
    EmptyInput,
    InvalidBase,
    InvalidCluster,
    LengthMismatch,
    OrphanMark,
    UnsupportedMark,
)

import synthdata
from conftest import MALAKH, MELEKH, MLK


class TestParseWord:
    def test_undiacritized_input(self):
        word = H.parse_word(MLK)
        assert len(word) == 3
        assert all(not c.marks for c in word.clusters)

    def test_melekh_decomposition(self, melekh_word):
        got = [(c.base, set(c.marks)) for c in melekh_word.clusters]
        assert got == [
            ("מ", {H.SEGOL}),
            ("ל", {H.SEGOL}),
            ("ך", {H.SHEVA}),
        ]

    def test_mark_before_letter_is_orphan(self):
        with pytest.raises(OrphanMark):
            H.parse_word("ֶמ")

    def test_empty_and_letterless_input(self):
        with pytest.raises(EmptyInput):
            H.parse_word("")
        with pytest.raises(EmptyInput):
            H.parse_word("ֶּ")  # marks only

    def test_non_hebrew_character_rejected(self):
        with pytest.raises(InvalidBase):
            H.parse_word(MLK + "x")

    def test_nfc_input_is_decomposed(self):
        composed = unicodedata.normalize("NFC", MELEKH)
        assert H.parse_word(composed) == H.parse_word(MELEKH)

    def test_holam_haser_vav_folds_into_holam(self):
        word = H.parse_word("וֺ")
        assert word.clusters[0].marks == frozenset({H.HOLAM})

    def test_meteg_stripped_leniently_rejected_strictly(self):
        text = "מֶֽל"
        assert H.parse_word(text).clusters[0].marks == frozenset({H.SEGOL})
        with pytest.raises(UnsupportedMark):
            H.parse_word(text, strict=True)

    def test_cantillation_stripped_leniently(self):
        text = "מֶ֑ל"
        assert H.parse_word(text) == H.parse_word("מֶל")

    def test_two_vowels_rejected(self):
        with pytest.raises(InvalidCluster):
            H.parse_word("מֶַ")

    def test_shin_dot_on_non_shin_rejected(self):
        with pytest.raises(InvalidCluster):
            H.parse_word("מׁ")

    def test_qamats_and_qamats_qatan_stay_distinct(self):
        plain = H.parse_word("מָ")
        qatan = H.parse_word("מׇ")
        assert plain != qatan


class TestStrip:
    def test_melekh_strips_to_mlk(self, melekh_word):
        assert H.strip(melekh_word) == MLK

    def test_unmarked_word_is_identity(self):
        assert H.strip(H.parse_word(MLK)) == MLK

    def test_ambiguity_of_the_skeleton(self, melekh_word, malakh_word):
        # two different vocalizations share one undiacritized form
        assert H.strip(melekh_word) == H.strip(malakh_word) == MLK


class TestExtractApply:
    def test_extract_melekh(self, melekh_word):
        pattern = H.extract_pattern(melekh_word)
        assert pattern.slots == (
            frozenset({H.SEGOL}), frozenset({H.SEGOL}), frozenset({H.SHEVA}),
        )

    def test_extract_unmarked(self):
        assert H.extract_pattern(H.parse_word(MLK)).slots == (
            frozenset(), frozenset(), frozenset(),
        )

    def test_extract_malakh(self, malakh_word):
        assert H.extract_pattern(malakh_word).slots == (
            frozenset({H.QAMATS}), frozenset({H.PATAH}), frozenset({H.SHEVA}),
        )

    def test_apply_inverts_extract(self, melekh_word):
        pattern = H.extract_pattern(melekh_word)
        assert H.apply_pattern(MLK, pattern) == melekh_word

    def test_length_mismatch(self):
        pattern = synthdata.pattern(H.SEGOL, H.SEGOL)
        with pytest.raises(LengthMismatch):
            H.apply_pattern(MLK, pattern)

    def test_non_hebrew_base_rejected(self):
        with pytest.raises(InvalidBase):
            H.apply_pattern("ab", synthdata.pattern(None, None))

    def test_shin_dot_dropped_on_non_shin_base(self):
        pattern = synthdata.pattern((H.SHIN_DOT, H.PATAH))
        word = H.apply_pattern("מ", pattern)
        assert word.clusters[0].marks == frozenset({H.PATAH})

    def test_shin_dot_kept_on_shin(self):
        pattern = synthdata.pattern((H.SHIN_DOT, H.PATAH))
        word = H.apply_pattern(H.SHIN, pattern)
        assert word.clusters[0].marks == frozenset({H.SHIN_DOT, H.PATAH})


class TestToText:
    def test_melekh_serialization(self, melekh_word):
        assert H.to_text(melekh_word) == MELEKH

    def test_marks_serialized_ascending(self):
        word = H.DiacritizedWord((
            H.LetterCluster("מ", frozenset({H.DAGESH, H.SHEVA})),
        ))
        # sheva U+05B0 sorts before dagesh U+05BC
        assert H.to_text(word) == "מְּ"

    def test_parse_roundtrip(self, malakh_word):
        assert H.parse_word(H.to_text(malakh_word)) == malakh_word


class TestPatternCodec:
    def test_encode_melekh(self, melekh_word):
        assert H.encode_pattern(H.extract_pattern(melekh_word)) == "05B6|05B6|05B0"

    def test_empty_slots(self):
        assert H.encode_pattern(synthdata.pattern(None, None)) == "-|-"

    def test_decode_roundtrip(self, malakh_word):
        pattern = H.extract_pattern(malakh_word)
        assert H.decode_pattern(H.encode_pattern(pattern)) == pattern


# --- properties ----------------------------------------------------------------

@st.composite
def words(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return synthdata.random_word(np.random.default_rng(seed))


@given(words())
@settings(max_examples=150, deadline=None)
def test_roundtrip_extract_apply(word):
    assert H.apply_pattern(H.strip(word), H.extract_pattern(word)) == word


@given(words())
@settings(max_examples=150, deadline=None)
def test_roundtrip_serialization(word):
    assert H.parse_word(H.to_text(word)) == word


@given(words())
@settings(max_examples=150, deadline=None)
def test_pattern_length_matches_strip(word):
    assert len(H.extract_pattern(word)) == len(H.strip(word))


@given(words())
@settings(max_examples=150, deadline=None)
def test_strip_of_apply_is_identity(word):
    undiac = H.strip(word)
    assert H.strip(H.apply_pattern(undiac, H.extract_pattern(word))) == undiac
