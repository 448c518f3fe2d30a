import numpy as np
import pytest

import niqqudkit as nk
from niqqudkit import candidates as cg, corpus, hebrew as H
from niqqudkit.errors import NoNeighbors

import synthdata
from conftest import MALAKH, MELEKH, MLK

ALEF, BET, KAF, LAMED, MEM = "א", "ב", "כ", "ל", "מ"


def lexicon_from(words: list[str]) -> corpus.Lexicon:
    return nk.build_lexicon(nk.read_corpus(" ".join(words)))


@pytest.fixture
def mlk_lexicon():
    # "mlk" twice as melekh, once as malakh
    return lexicon_from([MELEKH, MELEKH, MALAKH])


class TestKnnNeighbors:
    def test_positional_similarity_ranking(self):
        # keys: mlk, mla, klb; query mlk -> similarities 3, 2, 0
        mla = MEM + LAMED + ALEF
        klb = KAF + LAMED + BET
        lex = lexicon_from([MLK, mla, klb])
        result = nk.knn_neighbors(lex, MLK, k=2)
        assert [(n.form, n.similarity) for n in result.neighbors] == [
            (MLK, 3), (mla, 2),
        ]

    def test_in_vocabulary_query_is_own_best_neighbor(self, mlk_lexicon):
        result = nk.knn_neighbors(mlk_lexicon, MLK, k=1)
        assert result.neighbors[0].form == MLK
        assert result.neighbors[0].similarity == len(MLK)

    def test_default_parameters_match_generator_figure(self):
        assert cg.DEFAULT_K == 5
        assert cg.DEFAULT_C == 2

    def test_ties_broken_by_freq_then_form(self):
        # two keys at equal similarity to the query; higher frequency wins
        a = ALEF + LAMED + KAF   # differs from query at position 0
        b = BET + LAMED + KAF
        lex = lexicon_from([a, b, b])
        query = MEM + LAMED + KAF
        result = nk.knn_neighbors(lex, query, k=2)
        assert result.forms() == (b, a)
        # equal frequency: ascending form decides
        lex2 = lexicon_from([a, b])
        assert nk.knn_neighbors(lex2, query, k=2).forms() == (a, b)

    def test_no_same_length_key(self, mlk_lexicon):
        with pytest.raises(NoNeighbors):
            nk.knn_neighbors(mlk_lexicon, MLK + MLK, k=1)

    def test_index_reuse_matches_adhoc(self, mlk_lexicon):
        index = nk.KnnIndex(mlk_lexicon)
        assert nk.knn_neighbors(index, MLK, 1) == nk.knn_neighbors(mlk_lexicon, MLK, 1)


class TestGenerateCandidates:
    def test_in_vocab_k1_gives_frequency_order(self, mlk_lexicon):
        candset = nk.generate_candidates(mlk_lexicon, MLK, k=1, c=1)
        assert H.to_text(candset.candidates[0]) == MELEKH

    def test_top_c_patterns_of_self(self, mlk_lexicon):
        candset = nk.generate_candidates(mlk_lexicon, MLK, k=1, c=2)
        assert [H.to_text(w) for w in candset.candidates] == [MELEKH, MALAKH]

    def test_duplicate_pattern_collapsed_and_next_promoted(self):
        # neighbor's top pattern equals the query's, so the merged list
        # deduplicates and promotes the next distinct form
        mla = MEM + LAMED + ALEF
        seg = synthdata.pattern(H.SEGOL, H.SEGOL, H.SHEVA)
        hir = synthdata.pattern(H.HIRIQ, H.HIRIQ, None)
        text = " ".join([
            synthdata.diacritize(MLK, seg),
            synthdata.diacritize(mla, seg), synthdata.diacritize(mla, seg),
            synthdata.diacritize(mla, hir),
        ])
        lex = nk.build_lexicon(nk.read_corpus(text))
        candset = nk.generate_candidates(lex, MLK, k=2, c=2)
        texts = [H.to_text(w) for w in candset.candidates]
        assert texts == [
            synthdata.diacritize(MLK, seg),
            synthdata.diacritize(MLK, hir),
        ]

    def test_all_candidates_strip_to_query(self, cue_train_text):
        lex = nk.build_lexicon(nk.read_corpus(cue_train_text))
        index = nk.KnnIndex(lex)
        for word in list(lex.entries)[:10]:
            candset = nk.generate_candidates(index, word, k=3, c=4)
            assert all(H.strip(w) == word for w in candset.candidates)

    def test_deterministic(self, cue_train_text):
        lex = nk.build_lexicon(nk.read_corpus(cue_train_text))
        a = nk.generate_candidates(lex, MLK, k=5, c=3)
        b = nk.generate_candidates(nk.KnnIndex(lex), MLK, k=5, c=3)
        assert a == b


class TestOracleCandidates:
    def test_gold_already_present(self, mlk_lexicon, melekh_word):
        candset = nk.oracle_candidates(mlk_lexicon, MLK, melekh_word, k=1, c=2)
        assert candset.gold_index == 0
        assert candset.candidates[0] == melekh_word

    def test_gold_replaces_last_when_full(self, mlk_lexicon):
        gold = H.apply_pattern(MLK, synthdata.pattern(H.HOLAM, None, None))
        candset = nk.oracle_candidates(mlk_lexicon, MLK, gold, k=1, c=2)
        assert len(candset.candidates) == 2
        assert candset.candidates[-1] == gold
        assert candset.gold_index == 1

    def test_gold_appended_when_not_full(self, mlk_lexicon):
        gold = H.apply_pattern(MLK, synthdata.pattern(H.HOLAM, None, None))
        candset = nk.oracle_candidates(mlk_lexicon, MLK, gold, k=1, c=5)
        assert candset.candidates[-1] == gold
        assert len(candset.candidates) == 3  # two observed patterns + gold

    def test_no_neighbors_degenerates_to_gold(self, mlk_lexicon):
        query = MLK + MLK
        gold = H.parse_word(query)
        candset = nk.oracle_candidates(mlk_lexicon, query, gold, k=5, c=2)
        assert candset.candidates == (gold,)
        assert candset.gold_index == 0


class TestCoverage:
    def test_exhaustive_in_vocab_coverage_is_one(self, cue_train_text):
        lex = nk.build_lexicon(nk.read_corpus(cue_train_text))
        pairs = [
            (w, H.apply_pattern(w, p))
            for w, pats in lex.entries.items() for p, _ in pats
        ]
        assert nk.coverage(lex, pairs, k=1, c=10) == 1.0

    def test_coverage_c1_equals_knn1_wor(self, cue_train_text, cue_heldout_text):
        from niqqudkit.metrics import run_baseline

        lex = nk.build_lexicon(nk.read_corpus(cue_train_text))
        held = nk.read_corpus(cue_heldout_text)
        from niqqudkit.metrics import iter_gold_words

        pairs = [(H.strip(g), g) for _s, _i, g in iter_gold_words(held)]
        cov = nk.coverage(lex, pairs, k=1, c=1)
        report = run_baseline(lex, held, "knn1")
        assert cov * 100 == pytest.approx(report.wor, abs=1e-9)

    def test_monotone_in_c_and_k(self, cue_train_text, cue_heldout_text):
        lex = nk.build_lexicon(nk.read_corpus(cue_train_text))
        from niqqudkit.metrics import iter_gold_words

        pairs = [(H.strip(g), g)
                 for _s, _i, g in iter_gold_words(nk.read_corpus(cue_heldout_text))]
        index = nk.KnnIndex(lex)
        by_c = [nk.coverage(index, pairs, k=2, c=c) for c in range(1, 6)]
        assert by_c == sorted(by_c)
        by_k = [nk.coverage(index, pairs, k=k, c=2) for k in range(1, 6)]
        assert by_k == sorted(by_k)

    def test_no_neighbors_counts_as_miss(self, mlk_lexicon):
        gold = H.parse_word(MLK + MLK)
        assert nk.coverage(mlk_lexicon, [(MLK + MLK, gold)], k=1, c=1) == 0.0

    def test_curve_matches_pointwise_coverage(self, cue_train_text, cue_heldout_text):
        lex = nk.build_lexicon(nk.read_corpus(cue_train_text))
        from niqqudkit.candidates import coverage_curve
        from niqqudkit.metrics import iter_gold_words

        pairs = [(H.strip(g), g)
                 for _s, _i, g in iter_gold_words(nk.read_corpus(cue_heldout_text))]
        index = nk.KnnIndex(lex)
        rows = coverage_curve(index, pairs, [1, 3], [1, 2, 3])
        for k, c, value in rows:
            assert value == pytest.approx(nk.coverage(index, pairs, k=k, c=c))
