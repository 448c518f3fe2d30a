"""Training-set construction and the SGD training loop.

Examples pair each Hebrew word token with an oracle candidate set (gold form
guaranteed present).  Words are sampled with probability proportional to
``freq ** 0.75``; with balanced data enabled, occurrences of a word's
majority pattern are additionally down-weighted so its effective frequency
never exceeds the combined frequency of the alternatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .. import hebrew
from ..candidates import KnnIndex, oracle_candidates
from ..corpus import Lexicon, Sentence, balanced_cap, is_lexical_token, sampling_weight
from ..errors import ConfigurationError, DataError
from ..rendering import RenderConfig, mirror_rtl, patchify, render_text
from .model import (
    Example,
    Scorer,
    ScorerConfig,
    context_window_texts,
    derive_bag_target,
    derive_positional_target,
    text_ngram_rows,
)


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 1000
    batch_size: int = 32
    learning_rate: float = 0.5
    momentum: float = 0.0
    seed: int = 0
    balanced: bool = False

    def __post_init__(self):
        if self.steps < 0 or self.batch_size < 1:
            raise ConfigurationError("steps must be >= 0 and batch_size >= 1")
        if self.learning_rate < 0 or not (0 <= self.momentum < 1):
            raise ConfigurationError("bad learning rate or momentum")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class TrainingSet:
    examples: list[Example]
    probabilities: np.ndarray

    def __len__(self) -> int:
        return len(self.examples)


@dataclass(frozen=True)
class StepStats:
    step: int
    loss: float
    accuracy: float


@dataclass
class TrainResult:
    scorer: Scorer
    trace: list[StepStats] = field(default_factory=list)


class PatchCache:
    """Rendered candidate patches keyed by candidate text."""

    def __init__(self, render_config: RenderConfig, mirror: bool):
        self.render_config = render_config
        self.mirror = mirror
        self._cache: dict[str, np.ndarray] = {}

    def patches(self, candidate_text: str) -> np.ndarray:
        cached = self._cache.get(candidate_text)
        if cached is None:
            image = render_text(candidate_text, self.render_config, truncate=True)
            if self.mirror:
                image = mirror_rtl(image)
            cached = patchify(image)
            self._cache[candidate_text] = cached
        return cached


def _example_weight(lexicon: Lexicon, capped: Lexicon | None, word: str,
                    pattern: hebrew.DiacritizationPattern) -> float:
    freq = lexicon.freq(word)
    if freq < 1:
        return 1.0
    # per-occurrence weight so that word-level mass follows freq ** 0.75
    weight = sampling_weight(freq) / freq
    if capped is not None:
        raw = dict(lexicon.patterns(word)).get(pattern, 0)
        eff = dict(capped.patterns(word)).get(pattern, 0) if word in capped else 0
        if raw > 0:
            weight *= eff / raw
    return weight


def build_training_set(sentences: Iterable[Sentence], lexicon: Lexicon, *,
                       scorer_config: ScorerConfig,
                       render_config: RenderConfig | None = None,
                       k: int = 5, c: int = 2,
                       balanced: bool = False,
                       index: KnnIndex | None = None) -> TrainingSet:
    """Oracle-candidate examples for every parseable Hebrew word token."""
    render_config = render_config or RenderConfig()
    index = index or KnnIndex(lexicon)
    capped = balanced_cap(lexicon) if balanced else None
    cache = PatchCache(render_config, scorer_config.mirror_candidates)

    examples: list[Example] = []
    weights: list[float] = []
    for sentence in sentences:
        for token_index, token in enumerate(sentence.tokens):
            text = token.text(sentence.text)
            if not token.is_hebrew_word or not is_lexical_token(text):
                continue
            try:
                gold = hebrew.parse_word(text)
            except DataError:
                continue
            word = hebrew.strip(gold)
            candset = oracle_candidates(index, word, gold, k, c)
            candidate_texts = tuple(hebrew.to_text(w) for w in candset.candidates)

            context_rows: list[int] = []
            for ctx_text in context_window_texts(sentence, token_index,
                                                 scorer_config.window_radius):
                context_rows.extend(text_ngram_rows(ctx_text, scorer_config))

            example = Example(
                word=word,
                candidate_texts=candidate_texts,
                candidate_patches=tuple(cache.patches(t) for t in candidate_texts),
                gold_index=candset.gold_index,
                target_rows=tuple(text_ngram_rows(word, scorer_config)),
                context_rows=tuple(context_rows),
            )
            if scorer_config.aux == "bag":
                example.bag_targets = np.stack(
                    [derive_bag_target(w) for w in candset.candidates])
            elif scorer_config.aux == "positional":
                example.pos_targets = np.stack([
                    derive_positional_target(w, scorer_config.max_word_len)
                    for w in candset.candidates
                ])
                example.pos_valid = min(len(word), scorer_config.max_word_len)
            pattern = hebrew.extract_pattern(gold)
            example.weight = _example_weight(lexicon, capped, word, pattern)
            examples.append(example)
            weights.append(example.weight)

    if not examples:
        raise DataError("no trainable Hebrew word tokens in the corpus")
    probs = np.array(weights, dtype=np.float64)
    return TrainingSet(examples, probs / probs.sum())


def train(training_set: TrainingSet, scorer_config: ScorerConfig,
          config: TrainConfig) -> TrainResult:
    """Plain SGD (optional momentum) over sampled batches.

    All randomness flows from ``config.seed``: one stream initializes the
    parameters, a second drives batch sampling, so identical seeds and
    configs reproduce the parameter checksum and trace bit-exactly.
    """
    init_seq, sample_seq = np.random.SeedSequence(config.seed).spawn(2)
    scorer = Scorer.init(scorer_config, np.random.default_rng(init_seq))
    sampler = np.random.default_rng(sample_seq)
    velocity = {name: np.zeros_like(arr) for name, arr in scorer.params.items()}

    trace: list[StepStats] = []
    n = len(training_set.examples)
    for step in range(config.steps):
        chosen = sampler.choice(n, size=config.batch_size, replace=True,
                                p=training_set.probabilities)
        batch_grads = {name: np.zeros_like(arr)
                       for name, arr in scorer.params.items()}
        batch_loss = 0.0
        correct = 0
        for idx in chosen:
            example = training_set.examples[int(idx)]
            loss, grads, predicted = scorer.loss_grads_prediction(example)
            batch_loss += loss
            for name, g in grads.items():
                batch_grads[name] += g
            if predicted == example.gold_index:
                correct += 1
        batch_loss /= config.batch_size
        if not np.isfinite(batch_loss):
            raise ConfigurationError(f"training diverged at step {step} (loss={batch_loss})")
        for name in scorer.params:
            g = batch_grads[name] / config.batch_size
            velocity[name] = config.momentum * velocity[name] - config.learning_rate * g
            scorer.params[name] += velocity[name]
        trace.append(StepStats(step=step, loss=batch_loss,
                               accuracy=correct / config.batch_size))
    return TrainResult(scorer=scorer, trace=trace)


def oracle_accuracy(scorer: Scorer, examples: Sequence[Example]) -> float:
    """Fraction of examples whose gold candidate gets the top score."""
    if not examples:
        raise ValueError("need at least one example")
    correct = sum(
        1 for ex in examples
        if scorer.score_example(ex).predicted_index() == ex.gold_index
    )
    return correct / len(examples)


def write_trace(path, trace: Sequence[StepStats]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,loss,accuracy\n")
        for stats in trace:
            fh.write(f"{stats.step},{stats.loss:.10g},{stats.accuracy:.6g}\n")
