"""Dual-encoder candidate scoring with hand-rolled backpropagation.

A tiny visual candidate encoder (patch projection, tanh, mean pooling,
output projection) and a character-n-gram context encoder project into a
shared space; candidate likelihood is the inner product with the contextual
embedding.  The training loss is cross-entropy over candidates plus an
optional auxiliary binary prediction of the marks present in each candidate
(as a bag, or per letter position).

The encoders are deliberately small reference implementations; anything that
produces fixed-dimension context/candidate embeddings can be plugged in
behind the same two-method surface (``encode_candidate_patches`` /
``encode_context``).
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .. import hebrew
from ..corpus import Sentence
from ..errors import (
    BadTargetIndex,
    ConfigurationError,
    DimensionMismatch,
    EmptyCandidates,
    FormatError,
    ShapeMismatch,
    TargetDerivationError,
)
from ..rendering import RenderConfig

CHECKPOINT_MAGIC = "DIVRIT-CKPT"
CHECKPOINT_VERSION = 1

AUX_MODES = ("none", "bag", "positional")

MARK_COUNT = len(hebrew.MARK_INVENTORY)

# auxiliary-term weight from the training objective: 0.5 / N_cands
AUX_WEIGHT = 0.5


@dataclass(frozen=True)
class ScorerConfig:
    hidden_dim: int = 64
    embed_dim: int = 64
    ngram_table_size: int = 4096
    ngram_min: int = 1
    ngram_max: int = 3
    window_radius: int = 2
    max_word_len: int = 16
    aux: str = "none"
    mirror_candidates: bool = False

    def __post_init__(self):
        if self.aux not in AUX_MODES:
            raise ConfigurationError(f"aux must be one of {AUX_MODES}")
        if min(self.hidden_dim, self.embed_dim, self.ngram_table_size,
               self.max_word_len) < 1:
            raise ConfigurationError("model dimensions must be positive")
        if not (1 <= self.ngram_min <= self.ngram_max):
            raise ConfigurationError("need 1 <= ngram_min <= ngram_max")
        if self.window_radius < 0:
            raise ConfigurationError("window_radius must be >= 0")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, data: dict) -> "ScorerConfig":
        return cls(**data)


@dataclass(frozen=True)
class ScoreDistribution:
    logits: np.ndarray
    probabilities: np.ndarray

    def predicted_index(self) -> int:
        # first index wins ties
        return int(np.argmax(self.probabilities))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def score(context: np.ndarray, candidates: np.ndarray) -> ScoreDistribution:
    """Inner-product logits of each candidate embedding against the context
    embedding, with softmax probabilities."""
    candidates = np.asarray(candidates, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    if candidates.ndim != 2 or candidates.shape[0] == 0:
        raise EmptyCandidates("need at least one candidate embedding")
    if candidates.shape[1] != context.shape[0]:
        raise DimensionMismatch(
            f"candidate dim {candidates.shape[1]} vs context dim {context.shape[0]}"
        )
    logits = candidates @ context
    return ScoreDistribution(logits=logits, probabilities=np.exp(_log_softmax(logits)))


def ngram_row(ngram: str, table_size: int) -> int:
    """Deterministic n-gram -> embedding row (stable across runs and
    platforms, unlike the builtin randomized hash)."""
    digest = hashlib.blake2b(ngram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % table_size

def text_ngram_rows(text: str, config: ScorerConfig) -> list[int]:
    rows = []
    for n in range(config.ngram_min, config.ngram_max + 1):
        for i in range(len(text) - n + 1):
            rows.append(ngram_row(text[i:i + n], config.ngram_table_size))
    return rows


def context_window_texts(sentence: Sentence, target_index: int,
                         radius: int) -> list[str]:
    """Stripped texts of the tokens around the target (the target excluded);
    context always reads the undiacritized surface."""
    lo = max(0, target_index - radius)
    hi = min(len(sentence.tokens), target_index + radius + 1)
    return [
        hebrew.strip_marks(sentence.token_text(i))
        for i in range(lo, hi) if i != target_index
    ]


def derive_bag_target(word: hebrew.DiacritizedWord) -> np.ndarray:
    """Multi-hot vector over the mark inventory: which marks appear anywhere
    in the word."""
    target = np.zeros(MARK_COUNT, dtype=np.float64)
    for cluster in word.clusters:
        for mark in cluster.marks:
            target[hebrew.MARK_INDEX[mark]] = 1.0
    return target


def derive_positional_target(word: hebrew.DiacritizedWord,
                             max_word_len: int) -> np.ndarray:
    """(max_word_len, M) multi-hot of marks per 0-based letter position;
    positions at or beyond the word length stay zero and are masked from the
    loss."""
    target = np.zeros((max_word_len, MARK_COUNT), dtype=np.float64)
    for pos, cluster in enumerate(word.clusters):
        if pos >= max_word_len:
            break
        for mark in cluster.marks:
            target[pos, hebrew.MARK_INDEX[mark]] = 1.0
    return target


@dataclass
class Example:
    """One scoring instance, fully preprocessed for the reference encoders."""

    word: str
    candidate_texts: tuple[str, ...]
    candidate_patches: tuple[np.ndarray, ...]
    gold_index: int
    target_rows: tuple[int, ...]
    context_rows: tuple[int, ...]
    bag_targets: np.ndarray | None = None        # (N, M)
    pos_targets: np.ndarray | None = None        # (N, L_max, M)
    pos_valid: int = 0                           # letter positions in the loss
    weight: float = 1.0

    @property
    def n_candidates(self) -> int:
        return len(self.candidate_patches)


def _he_normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in = shape[-1]
    return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)


class Scorer:
    """Parameter container plus forward/backward passes (all float64)."""

    def __init__(self, config: ScorerConfig, params: dict[str, np.ndarray]):
        self.config = config
        self.params = params
        self._check_shapes()

    # --- construction -------------------------------------------------------

    @classmethod
    def param_shapes(cls, config: ScorerConfig) -> dict[str, tuple[int, ...]]:
        h, d = config.hidden_dim, config.embed_dim
        shapes = {
            "patch_proj_w": (h, 256),
            "patch_proj_b": (h,),
            "cand_out_w": (d, h),
            "cand_out_b": (d,),
            "ngram_table": (config.ngram_table_size, h),
            "mix_target": (1,),
            "mix_context": (1,),
            "ctx_out_w": (d, h),
            "ctx_out_b": (d,),
        }
        if config.aux == "bag":
            shapes["bag_w"] = (MARK_COUNT, d)
            shapes["bag_b"] = (MARK_COUNT,)
        elif config.aux == "positional":
            shapes["pos_w"] = (config.max_word_len * MARK_COUNT, d)
            shapes["pos_b"] = (config.max_word_len * MARK_COUNT,)
        return shapes

    @classmethod
    def init(cls, config: ScorerConfig, seed: int | np.random.Generator = 0) -> "Scorer":
        rng = seed if isinstance(seed, np.random.Generator) \
            else np.random.default_rng(seed)
        params = {}
        for name, shape in cls.param_shapes(config).items():
            if name in ("mix_target", "mix_context"):
                params[name] = np.ones(shape, dtype=np.float64)
            elif name.endswith("_b"):
                params[name] = np.zeros(shape, dtype=np.float64)
            else:
                params[name] = _he_normal(rng, shape)
        return cls(config, params)

    @classmethod
    def zeros(cls, config: ScorerConfig) -> "Scorer":
        params = {name: np.zeros(shape, dtype=np.float64)
                  for name, shape in cls.param_shapes(config).items()}
        return cls(config, params)

    def _check_shapes(self):
        expected = self.param_shapes(self.config)
        if set(expected) != set(self.params):
            raise ShapeMismatch(
                f"parameter names {sorted(self.params)} do not match "
                f"{sorted(expected)}"
            )
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ShapeMismatch(
                    f"{name}: expected {shape}, got {self.params[name].shape}"
                )

    def checksum(self) -> str:
        digest = hashlib.sha256()
        for name in sorted(self.params):
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(self.params[name]).tobytes())
        return digest.hexdigest()

    def clone(self) -> "Scorer":
        return Scorer(self.config, {k: v.copy() for k, v in self.params.items()})

    # --- encoders -----------------------------------------------------------

    def encode_candidate_patches(self, patches: np.ndarray) -> np.ndarray:
        """Mean over patches of tanh(patch projection), then output
        projection.  Patch order is irrelevant by construction."""
        patches = np.asarray(patches, dtype=np.float64)
        if patches.ndim != 2 or patches.shape[1] != 256:
            raise ShapeMismatch(f"patches must be (n, 256), got {patches.shape}")
        z = np.tanh(patches @ self.params["patch_proj_w"].T
                    + self.params["patch_proj_b"])
        pooled = z.mean(axis=0)
        return self.params["cand_out_w"] @ pooled + self.params["cand_out_b"]

    def _context_from_rows(self, target_rows, context_rows) -> np.ndarray:
        table = self.params["ngram_table"]
        h = self.config.hidden_dim
        t = table[list(target_rows)].mean(axis=0) if target_rows else np.zeros(h)
        cx = table[list(context_rows)].mean(axis=0) if context_rows else np.zeros(h)
        mixed = self.params["mix_target"][0] * t + self.params["mix_context"][0] * cx
        return self.params["ctx_out_w"] @ mixed + self.params["ctx_out_b"]

    def encode_context(self, sentence: Sentence, target_index: int) -> np.ndarray:
        """Contextual embedding of the (undiacritized) target word inside its
        sentence window."""
        if not (0 <= target_index < len(sentence.tokens)) \
                or not sentence.tokens[target_index].is_hebrew_word:
            raise BadTargetIndex(f"token {target_index} is not a Hebrew word")
        target_text = hebrew.strip_marks(sentence.token_text(target_index))
        target_rows = text_ngram_rows(target_text, self.config)
        context_rows = []
        for text in context_window_texts(sentence, target_index,
                                         self.config.window_radius):
            context_rows.extend(text_ngram_rows(text, self.config))
        return self._context_from_rows(target_rows, context_rows)

    def score_example(self, example: Example) -> ScoreDistribution:
        cand = np.stack([
            self.encode_candidate_patches(p) for p in example.candidate_patches
        ])
        ctx = self._context_from_rows(example.target_rows, example.context_rows)
        return score(ctx, cand)

    # --- loss and gradients ---------------------------------------------------

    def _forward(self, example: Example) -> dict:
        if example.n_candidates == 0:
            raise EmptyCandidates("example has no candidates")
        cfg = self.config
        p = self.params

        # all candidates' patches through one matmul, segment-pooled
        counts = np.array([pt.shape[0] for pt in example.candidate_patches])
        patches = np.concatenate(example.candidate_patches, axis=0)
        pre = patches @ p["patch_proj_w"].T + p["patch_proj_b"]
        z = np.tanh(pre)
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        pooled = np.add.reduceat(z, starts, axis=0) / counts[:, None]
        e_cand = pooled @ p["cand_out_w"].T + p["cand_out_b"]   # (N, d)

        table = p["ngram_table"]
        h = cfg.hidden_dim
        t = table[list(example.target_rows)].mean(axis=0) \
            if example.target_rows else np.zeros(h)
        cx = table[list(example.context_rows)].mean(axis=0) \
            if example.context_rows else np.zeros(h)
        mixed = p["mix_target"][0] * t + p["mix_context"][0] * cx
        e_ctx = p["ctx_out_w"] @ mixed + p["ctx_out_b"]         # (d,)

        logits = e_cand @ e_ctx
        log_probs = _log_softmax(logits)
        loss = -log_probs[example.gold_index]

        cache = {
            "counts": counts, "patches": patches, "z": z, "starts": starts,
            "pooled": pooled, "e_cand": e_cand, "t": t, "cx": cx,
            "mixed": mixed, "e_ctx": e_ctx, "logits": logits,
            "log_probs": log_probs, "loss_ce": loss,
        }

        n = example.n_candidates
        if cfg.aux == "bag":
            if example.bag_targets is None:
                raise TargetDerivationError("bag targets missing from example")
            x = e_cand @ p["bag_w"].T + p["bag_b"]              # (N, M)
            tgt = example.bag_targets
            bce = np.maximum(x, 0) - x * tgt + np.log1p(np.exp(-np.abs(x)))
            aux = (AUX_WEIGHT / n) * bce.mean(axis=1).sum()
            cache.update(aux_x=x, aux_tgt=tgt, aux_loss=aux)
            loss = loss + aux
        elif cfg.aux == "positional":
            if example.pos_targets is None:
                raise TargetDerivationError("positional targets missing from example")
            valid = example.pos_valid
            if valid < 1:
                raise TargetDerivationError("positional target has no valid position")
            x = (e_cand @ p["pos_w"].T + p["pos_b"]).reshape(
                n, cfg.max_word_len, MARK_COUNT)
            tgt = example.pos_targets
            bce = np.maximum(x, 0) - x * tgt + np.log1p(np.exp(-np.abs(x)))
            # per candidate: mean over the (valid positions x marks) entries
            per_cand = bce[:, :valid, :].reshape(n, -1).mean(axis=1)
            aux = (AUX_WEIGHT / n) * per_cand.sum()
            cache.update(aux_x=x, aux_tgt=tgt, aux_loss=aux, aux_valid=valid)
            loss = loss + aux

        cache["loss"] = loss
        return cache

    def total_loss(self, example: Example) -> float:
        """Cross-entropy of the gold candidate plus the configured auxiliary
        term (0.5/N_cands weighted, BCE averaged over mark slots)."""
        return float(self._forward(example)["loss"])

    def loss_and_grads(self, example: Example) -> tuple[float, dict[str, np.ndarray]]:
        loss, grads, _ = self.loss_grads_prediction(example)
        return loss, grads

    def loss_grads_prediction(
        self, example: Example
    ) -> tuple[float, dict[str, np.ndarray], int]:
        """Loss, gradients, and the argmax candidate from one forward pass."""
        cfg = self.config
        p = self.params
        cache = self._forward(example)
        n = example.n_candidates
        grads = {name: np.zeros_like(arr) for name, arr in p.items()}

        # cross-entropy -> logits
        dlogits = np.exp(cache["log_probs"])
        dlogits[example.gold_index] -= 1.0

        e_cand, e_ctx = cache["e_cand"], cache["e_ctx"]
        de_cand = dlogits[:, None] * e_ctx[None, :]
        de_ctx = dlogits @ e_cand

        # auxiliary heads feed additional gradient into the candidate embeddings
        if cfg.aux == "bag":
            dx = (1 / (1 + np.exp(-cache["aux_x"])) - cache["aux_tgt"])
            dx *= AUX_WEIGHT / (n * MARK_COUNT)
            grads["bag_w"] += dx.T @ e_cand
            grads["bag_b"] += dx.sum(axis=0)
            de_cand = de_cand + dx @ p["bag_w"]
        elif cfg.aux == "positional":
            valid = cache["aux_valid"]
            dx = (1 / (1 + np.exp(-cache["aux_x"])) - cache["aux_tgt"])
            dx[:, valid:, :] = 0.0
            dx *= AUX_WEIGHT / (n * valid * MARK_COUNT)
            dx_flat = dx.reshape(n, -1)
            grads["pos_w"] += dx_flat.T @ e_cand
            grads["pos_b"] += dx_flat.sum(axis=0)
            de_cand = de_cand + dx_flat @ p["pos_w"]

        # candidate encoder
        grads["cand_out_w"] += de_cand.T @ cache["pooled"]
        grads["cand_out_b"] += de_cand.sum(axis=0)
        dpooled = de_cand @ p["cand_out_w"]                     # (N, h)
        counts = cache["counts"]
        dz = np.repeat(dpooled / counts[:, None], counts, axis=0)
        dpre = dz * (1.0 - cache["z"] ** 2)
        grads["patch_proj_w"] += dpre.T @ cache["patches"]
        grads["patch_proj_b"] += dpre.sum(axis=0)

        # context encoder
        grads["ctx_out_w"] += np.outer(de_ctx, cache["mixed"])
        grads["ctx_out_b"] += de_ctx
        dmixed = p["ctx_out_w"].T @ de_ctx
        grads["mix_target"][0] = dmixed @ cache["t"]
        grads["mix_context"][0] = dmixed @ cache["cx"]
        if example.target_rows:
            dt = p["mix_target"][0] * dmixed / len(example.target_rows)
            np.add.at(grads["ngram_table"], list(example.target_rows), dt)
        if example.context_rows:
            dcx = p["mix_context"][0] * dmixed / len(example.context_rows)
            np.add.at(grads["ngram_table"], list(example.context_rows), dcx)

        return float(cache["loss"]), grads, int(np.argmax(cache["logits"]))


# --- checkpoint container -----------------------------------------------------

def _encode_array(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype=np.float64)
    return {
        "shape": list(data.shape),
        "dtype": "float64",
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode_array(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"]))
    return arr.reshape(entry["shape"]).copy()


def save_checkpoint(path, scorer: Scorer, render_config: RenderConfig,
                    metadata: dict | None = None) -> None:
    """Self-describing text container: version header, named parameter
    tensors, and the render + encoder configuration that reproduces scoring
    bit-exactly."""
    payload = {
        "format": CHECKPOINT_MAGIC,
        "version": CHECKPOINT_VERSION,
        "scorer_config": scorer.config.to_dict(),
        "render_config": render_config.to_dict(),
        "params": {name: _encode_array(arr) for name, arr in sorted(scorer.params.items())},
        "checksum": scorer.checksum(),
    }
    if metadata:
        payload["metadata"] = metadata
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> tuple[Scorer, RenderConfig, dict]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CHECKPOINT_MAGIC:
        raise FormatError(f"not a checkpoint file: {path}")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {payload.get('version')}")
    config = ScorerConfig.from_dict(payload["scorer_config"])
    params = {name: _decode_array(entry)
              for name, entry in payload["params"].items()}
    scorer = Scorer(config, params)
    if scorer.checksum() != payload.get("checksum"):
        raise FormatError("checkpoint parameter checksum mismatch")
    render_config = RenderConfig.from_dict(payload["render_config"])
    return scorer, render_config, payload.get("metadata", {})
