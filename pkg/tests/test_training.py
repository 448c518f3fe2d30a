import numpy as np
import pytest

import niqqudkit as nk
from niqqudkit.errors import ConfigurationError, DataError
from niqqudkit.scoring import (
    ScorerConfig,
    TrainConfig,
    build_training_set,
    oracle_accuracy,
    train,
)
from niqqudkit.scoring.training import write_trace

SMALL = dict(hidden_dim=16, embed_dim=16, ngram_table_size=512)


@pytest.fixture(scope="module")
def cue_setup(request):
    import synthdata

    text = synthdata.cue_corpus(250, seed=41)
    sentences = nk.read_corpus(text)
    lexicon = nk.build_lexicon(sentences)
    return sentences, lexicon


def make_training_set(cue_setup, **config_kwargs):
    sentences, lexicon = cue_setup
    config = ScorerConfig(**{**SMALL, **config_kwargs})
    return build_training_set(sentences, lexicon, scorer_config=config), config


class TestBuildTrainingSet:
    def test_examples_carry_gold_and_probabilities(self, cue_setup):
        training_set, _config = make_training_set(cue_setup)
        assert len(training_set) > 0
        assert training_set.probabilities.sum() == pytest.approx(1.0)
        for example in training_set.examples[:20]:
            assert 0 <= example.gold_index < example.n_candidates

    def test_word_mass_follows_freq_power(self, cue_setup):
        sentences, lexicon = cue_setup
        training_set, _config = make_training_set(cue_setup)
        mass: dict[str, float] = {}
        for example, p in zip(training_set.examples, training_set.probabilities):
            mass[example.word] = mass.get(example.word, 0.0) + p
        words = sorted(mass)
        expected = np.array([lexicon.freq(w) ** 0.75 for w in words])
        expected /= expected.sum()
        got = np.array([mass[w] for w in words])
        assert np.allclose(got, expected, atol=1e-9)

    def test_balanced_caps_majority_pattern_mass(self):
        import synthdata
        from niqqudkit import hebrew as H

        # one word, pattern A three times, pattern B once
        word = "מלך"
        a = synthdata.AMBIGUOUS[word][0]
        b = synthdata.AMBIGUOUS[word][1]
        text = " ".join([synthdata.diacritize(word, a)] * 3
                        + [synthdata.diacritize(word, b)])
        sentences = nk.read_corpus(text)
        lexicon = nk.build_lexicon(sentences)
        config = ScorerConfig(**SMALL)
        plain = build_training_set(sentences, lexicon, scorer_config=config)
        capped = build_training_set(sentences, lexicon, scorer_config=config,
                                    balanced=True)

        def pattern_mass(ts, pattern):
            total = 0.0
            for ex, p in zip(ts.examples, ts.probabilities):
                gold = H.extract_pattern(H.parse_word(ex.candidate_texts[ex.gold_index]))
                if gold == pattern:
                    total += p
            return total

        assert pattern_mass(plain, a) == pytest.approx(0.75)
        assert pattern_mass(capped, a) == pytest.approx(0.5)
        assert pattern_mass(capped, b) == pytest.approx(0.5)

    def test_empty_corpus_rejected(self):
        lexicon = nk.build_lexicon([])
        with pytest.raises(DataError):
            build_training_set([], lexicon, scorer_config=ScorerConfig(**SMALL))

    def test_aux_targets_attached(self, cue_setup):
        training_set, _config = make_training_set(cue_setup, aux="bag")
        ex = training_set.examples[0]
        assert ex.bag_targets is not None
        assert ex.bag_targets.shape == (ex.n_candidates, 15)
        training_set, config = make_training_set(cue_setup, aux="positional")
        ex = training_set.examples[0]
        assert ex.pos_targets.shape == (ex.n_candidates, config.max_word_len, 15)
        assert ex.pos_valid == len(ex.word)


class TestTrain:
    def test_zero_learning_rate_keeps_parameters(self, cue_setup):
        training_set, config = make_training_set(cue_setup)
        result = train(training_set, config,
                       TrainConfig(steps=5, batch_size=4, learning_rate=0.0, seed=7))
        from niqqudkit.scoring import Scorer

        init_seq, _ = np.random.SeedSequence(7).spawn(2)
        reference = Scorer.init(config, np.random.default_rng(init_seq))
        assert result.scorer.checksum() == reference.checksum()

    def test_zero_steps_equal_initialization(self, cue_setup):
        training_set, config = make_training_set(cue_setup)
        result = train(training_set, config, TrainConfig(steps=0, seed=3))
        from niqqudkit.scoring import Scorer

        init_seq, _ = np.random.SeedSequence(3).spawn(2)
        assert result.scorer.checksum() == \
            Scorer.init(config, np.random.default_rng(init_seq)).checksum()
        assert result.trace == []

    def test_same_seed_bit_reproducible(self, cue_setup):
        training_set, config = make_training_set(cue_setup)
        tc = TrainConfig(steps=12, batch_size=8, seed=99)
        a = train(training_set, config, tc)
        b = train(training_set, config, tc)
        assert a.scorer.checksum() == b.scorer.checksum()
        assert a.trace == b.trace

    def test_different_seeds_differ(self, cue_setup):
        training_set, config = make_training_set(cue_setup)
        a = train(training_set, config, TrainConfig(steps=12, batch_size=8, seed=1))
        b = train(training_set, config, TrainConfig(steps=12, batch_size=8, seed=2))
        assert a.scorer.checksum() != b.scorer.checksum()

    def test_momentum_changes_trajectory(self, cue_setup):
        training_set, config = make_training_set(cue_setup)
        a = train(training_set, config, TrainConfig(steps=12, batch_size=8, seed=5))
        b = train(training_set, config,
                  TrainConfig(steps=12, batch_size=8, seed=5, momentum=0.9))
        assert a.scorer.checksum() != b.scorer.checksum()

    def test_learning_improves_heldout_accuracy(self, cue_setup):
        import synthdata

        training_set, config = make_training_set(cue_setup)
        sentences, lexicon = cue_setup
        held = build_training_set(
            nk.read_corpus(synthdata.cue_corpus(60, seed=42)), lexicon,
            scorer_config=config)
        result = train(training_set, config,
                       TrainConfig(steps=250, batch_size=32, seed=0))
        assert oracle_accuracy(result.scorer, held.examples) >= 0.9

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(steps=-1)
        with pytest.raises(ConfigurationError):
            TrainConfig(momentum=1.5)

    def test_trace_file(self, tmp_path, cue_setup):
        training_set, config = make_training_set(cue_setup)
        result = train(training_set, config, TrainConfig(steps=3, batch_size=4))
        path = tmp_path / "trace.csv"
        write_trace(path, result.trace)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,loss,accuracy"
        assert len(lines) == 4
