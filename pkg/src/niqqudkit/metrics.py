"""Diacritization metrics (DEC/CHA/WOR/VOC), the two baselines, and the
oracle / KNN evaluation harness.

Decision slots per letter: the vowel-class mark (or none), dagesh presence,
and, on shin only, the shin/sin dot value.  A character is correct when all
its slots match (CHA), a word when all characters match (WOR); VOC compares
words after mapping each vowel mark to its vocalization class.  An absent
prediction contributes its full decision/char totals as incorrect.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import hebrew
from .candidates import KnnIndex, generate_candidates, oracle_candidates
from .corpus import Lexicon, Sentence, is_lexical_token, tokenize
from .errors import AlignmentError, DataError, NoNeighbors
from .rendering import RenderConfig
from .scoring.model import Scorer, score

REPORT_MAGIC = "DIVRIT-REPORT"
REPORT_VERSION = 1

#: Default vowel -> vocalization class table (config-overridable).  Classes
#: follow modern pronunciation redundancy; dagesh and shin/sin dots are
#: always compared exactly.
DEFAULT_VOCALIZATION_CLASSES: dict[str, tuple[str, ...]] = {
    "A": (hebrew.PATAH, hebrew.QAMATS, hebrew.HATAF_PATAH),
    "E": (hebrew.TSERE, hebrew.SEGOL, hebrew.HATAF_SEGOL),
    "I": (hebrew.HIRIQ,),
    "O": (hebrew.HOLAM, hebrew.HATAF_QAMATS, hebrew.QAMATS_QATAN),
    "U": (hebrew.QUBUTS,),
    "SHEVA": (hebrew.SHEVA,),
}


def vocalization_map(classes: dict[str, tuple[str, ...]] | None = None) -> dict[str, str]:
    """Mark -> class-name mapping from a class table."""
    classes = classes or DEFAULT_VOCALIZATION_CLASSES
    mapping: dict[str, str] = {}
    for name, marks in classes.items():
        for mark in marks:
            if mark in mapping:
                raise ValueError(f"mark U+{ord(mark):04X} in two classes")
            mapping[mark] = name
    return mapping


_DEFAULT_VOC_MAP = vocalization_map()


@dataclass(frozen=True)
class WordJudgment:
    gold: hebrew.DiacritizedWord
    pred: hebrew.DiacritizedWord | None
    decisions_total: int
    decisions_correct: int
    chars_total: int
    chars_correct: int
    word_correct: bool
    voc_correct: bool


def _slots(cluster: hebrew.LetterCluster) -> tuple:
    vowel = cluster.vowel()
    dagesh = hebrew.DAGESH in cluster.marks
    if cluster.base == hebrew.SHIN:
        dot = (hebrew.SHIN_DOT if hebrew.SHIN_DOT in cluster.marks
               else hebrew.SIN_DOT if hebrew.SIN_DOT in cluster.marks
               else None)
        return (vowel, dagesh, dot)
    return (vowel, dagesh)


def judge_word(gold: hebrew.DiacritizedWord,
               pred: hebrew.DiacritizedWord | None,
               voc_map: dict[str, str] | None = None) -> WordJudgment:
    """Compare one prediction against gold over all decision slots."""
    voc_map = voc_map or _DEFAULT_VOC_MAP
    decisions_total = sum(len(_slots(c)) for c in gold.clusters)
    chars_total = len(gold.clusters)
    if pred is None:
        return WordJudgment(gold, None, decisions_total, 0, chars_total, 0,
                            word_correct=False, voc_correct=False)
    if hebrew.strip(pred) != hebrew.strip(gold):
        raise AlignmentError(
            f"prediction strips to {hebrew.strip(pred)!r}, "
            f"gold to {hebrew.strip(gold)!r}"
        )
    decisions_correct = 0
    chars_correct = 0
    voc_ok = True
    for g, p in zip(gold.clusters, pred.clusters):
        gs, ps = _slots(g), _slots(p)
        matches = sum(1 for a, b in zip(gs, ps) if a == b)
        decisions_correct += matches
        if matches == len(gs):
            chars_correct += 1
        g_voc = (voc_map.get(gs[0]),) + gs[1:]
        p_voc = (voc_map.get(ps[0]),) + ps[1:]
        if g_voc != p_voc:
            voc_ok = False
    return WordJudgment(
        gold, pred, decisions_total, decisions_correct, chars_total,
        chars_correct, word_correct=chars_correct == chars_total,
        voc_correct=voc_ok,
    )


@dataclass
class MetricTotals:
    decisions_total: int = 0
    decisions_correct: int = 0
    chars_total: int = 0
    chars_correct: int = 0
    words_total: int = 0
    words_correct: int = 0
    voc_correct: int = 0

    def add(self, judgment: WordJudgment) -> None:
        self.decisions_total += judgment.decisions_total
        self.decisions_correct += judgment.decisions_correct
        self.chars_total += judgment.chars_total
        self.chars_correct += judgment.chars_correct
        self.words_total += 1
        self.words_correct += judgment.word_correct
        self.voc_correct += judgment.voc_correct


@dataclass(frozen=True)
class EvalReport:
    scheme: str
    dec: float
    cha: float
    wor: float
    voc: float
    counts: MetricTotals

    @classmethod
    def from_totals(cls, totals: MetricTotals, scheme: str) -> "EvalReport":
        if totals.words_total == 0:
            raise DataError("no Hebrew word tokens to evaluate")
        return cls(
            scheme=scheme,
            dec=100.0 * totals.decisions_correct / totals.decisions_total,
            cha=100.0 * totals.chars_correct / totals.chars_total,
            wor=100.0 * totals.words_correct / totals.words_total,
            voc=100.0 * totals.voc_correct / totals.words_total,
            counts=totals,
        )

    def to_dict(self) -> dict:
        return {
            "format": REPORT_MAGIC,
            "version": REPORT_VERSION,
            "scheme": self.scheme,
            "metrics": {"DEC": self.dec, "CHA": self.cha,
                        "WOR": self.wor, "VOC": self.voc},
            "counts": {
                "decisions": [self.counts.decisions_correct, self.counts.decisions_total],
                "chars": [self.counts.chars_correct, self.counts.chars_total],
                "words": [self.counts.words_correct, self.counts.words_total],
                "voc_words": [self.counts.voc_correct, self.counts.words_total],
            },
        }

    def to_json(self, metadata: dict | None = None) -> str:
        payload = self.to_dict()
        if metadata:
            payload["metadata"] = metadata
        return json.dumps(payload, indent=1, sort_keys=True, ensure_ascii=False) + "\n"

    def to_table(self) -> str:
        header = f"{'Scheme':<12}{'DEC':>8}{'CHA':>8}{'WOR':>8}{'VOC':>8}"
        row = (f"{self.scheme:<12}{self.dec:>8.2f}{self.cha:>8.2f}"
               f"{self.wor:>8.2f}{self.voc:>8.2f}")
        return header + "\n" + row + "\n"


def report_from_json(text: str) -> EvalReport:
    payload = json.loads(text)
    counts = MetricTotals(
        decisions_correct=payload["counts"]["decisions"][0],
        decisions_total=payload["counts"]["decisions"][1],
        chars_correct=payload["counts"]["chars"][0],
        chars_total=payload["counts"]["chars"][1],
        words_correct=payload["counts"]["words"][0],
        words_total=payload["counts"]["words"][1],
        voc_correct=payload["counts"]["voc_words"][0],
    )
    return EvalReport.from_totals(counts, payload["scheme"])


# --- baselines ------------------------------------------------------------

def majority_predict(lexicon: Lexicon, w: str) -> hebrew.DiacritizedWord | None:
    """Most frequent observed pattern for ``w``; None when out-of-vocabulary
    (scored as incorrect)."""
    top = lexicon.top_pattern(w)
    if top is None:
        return None
    return hebrew.apply_pattern(w, top)


def knn1_predict(lexicon_or_index, w: str) -> hebrew.DiacritizedWord | None:
    """Single-candidate KNN generation (k=1, c=1): the nearest in-vocabulary
    word's most frequent pattern applied to ``w``."""
    try:
        candset = generate_candidates(lexicon_or_index, w, k=1, c=1)
    except NoNeighbors:
        return None
    return candset.candidates[0]


def iter_gold_words(sentences: Iterable[Sentence]):
    """(sentence, token_index, gold word) for every parseable Hebrew token
    that qualifies for word-level metrics."""
    for sentence in sentences:
        for token_index, token in enumerate(sentence.tokens):
            text = token.text(sentence.text)
            if not token.is_hebrew_word or not is_lexical_token(text):
                continue
            try:
                gold = hebrew.parse_word(text)
            except DataError:
                continue
            yield sentence, token_index, gold


def run_baseline(lexicon: Lexicon, sentences: Sequence[Sentence],
                 method: str, voc_map: dict[str, str] | None = None) -> EvalReport:
    if method not in ("majority", "knn1"):
        raise ValueError(f"unknown baseline {method!r}")
    index = KnnIndex(lexicon) if method == "knn1" else None
    totals = MetricTotals()
    for _sentence, _idx, gold in iter_gold_words(sentences):
        w = hebrew.strip(gold)
        if method == "majority":
            pred = majority_predict(lexicon, w)
        else:
            pred = knn1_predict(index, w)
        totals.add(judge_word(gold, pred, voc_map))
    return EvalReport.from_totals(totals, method)


# --- model evaluation schemes ----------------------------------------------

def run_scheme(scheme: str, scorer: Scorer, lexicon: Lexicon,
               sentences: Sequence[Sentence], k: int = 5, c: int = 2,
               render_config: RenderConfig | None = None,
               voc_map: dict[str, str] | None = None,
               threads: int = 1) -> EvalReport:
    """Candidate generation (oracle or knn), rendering, dual-encoder scoring,
    and judging over a test corpus."""
    if scheme not in ("oracle", "knn"):
        raise ValueError(f"unknown scheme {scheme!r}")
    from .scoring.training import PatchCache

    render_config = render_config or RenderConfig()
    index = KnnIndex(lexicon)
    cache = PatchCache(render_config, scorer.config.mirror_candidates)

    def judge_one(item) -> WordJudgment:
        sentence, token_index, gold = item
        w = hebrew.strip(gold)
        if scheme == "oracle":
            candset = oracle_candidates(index, w, gold, k, c)
        else:
            try:
                candset = generate_candidates(index, w, k, c)
            except NoNeighbors:
                return judge_word(gold, None, voc_map)
        embeddings = [
            scorer.encode_candidate_patches(cache.patches(hebrew.to_text(cand)))
            for cand in candset.candidates
        ]
        context = scorer.encode_context(sentence, token_index)
        dist = score(context, np.stack(embeddings))
        pred = candset.candidates[dist.predicted_index()]
        return judge_word(gold, pred, voc_map)

    items = list(iter_gold_words(sentences))
    totals = MetricTotals()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for judgment in pool.map(judge_one, items):
                totals.add(judgment)
    else:
        for item in items:
            totals.add(judge_one(item))
    return EvalReport.from_totals(totals, scheme)


# --- file-based evaluation ---------------------------------------------------

def evaluate_texts(gold_text: str, pred_text: str,
                   scheme: str = "external",
                   voc_map: dict[str, str] | None = None) -> EvalReport:
    """Evaluate parallel gold/predicted texts with identical undiacritized
    skeletons.

    Token streams must align one-to-one with matching stripped forms.  A
    predicted token that fails to parse counts as an absent (fully
    incorrect) prediction; a bare token is a prediction of no marks — plain
    text cannot express equivocation.
    """
    gold_tokens = tokenize(gold_text)
    pred_tokens = tokenize(pred_text)
    if len(gold_tokens) != len(pred_tokens):
        raise AlignmentError(
            f"token count mismatch: gold has {len(gold_tokens)}, "
            f"prediction has {len(pred_tokens)}"
        )
    totals = MetricTotals()
    for position, (gt, pt) in enumerate(zip(gold_tokens, pred_tokens)):
        g_text = gt.text(gold_text)
        p_text = pt.text(pred_text)
        if hebrew.strip_marks(g_text) != hebrew.strip_marks(p_text):
            raise AlignmentError(
                f"token {position}: gold {g_text!r} and prediction "
                f"{p_text!r} have different skeletons"
            )
        if not gt.is_hebrew_word or not is_lexical_token(g_text):
            continue
        try:
            gold = hebrew.parse_word(g_text)
        except DataError:
            continue
        try:
            pred = hebrew.parse_word(p_text)
        except DataError:
            pred = None
        totals.add(judge_word(gold, pred, voc_map))
    return EvalReport.from_totals(totals, scheme)
