"""FastAPI service exposing the toolkit's inference surfaces.

The service loads a lexicon (and optionally a trained checkpoint) once at
startup and serves diacritization, candidate listing, rendering, scoring,
and file-free evaluation over HTTP.  Batch workflows (lexicon building,
training, corpus-scale evaluation) stay on the ``niqqudkit`` CLI.

Run with ``niqqudkit-serve --lexicon lex.txt [--checkpoint model.ckpt]``.
"""

from __future__ import annotations

import argparse
import base64
import io
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, hebrew
from .candidates import KnnIndex, generate_candidates
from .corpus import Lexicon, Sentence, is_lexical_token, tokenize
from .errors import DataError, NoNeighbors
from .metrics import evaluate_texts, majority_predict
from .rendering import RenderConfig, mirror_rtl, render_text, to_pgm
from .scoring.model import Scorer, load_checkpoint, score
from .scoring.training import PatchCache


class ServiceState:
    def __init__(self, lexicon: Lexicon, scorer: Scorer | None = None,
                 render_config: RenderConfig | None = None,
                 k: int = 5, c: int = 2):
        self.lexicon = lexicon
        self.index = KnnIndex(lexicon)
        self.scorer = scorer
        self.render_config = render_config or RenderConfig()
        self.k = k
        self.c = c
        mirror = scorer.config.mirror_candidates if scorer else False
        self.patch_cache = PatchCache(self.render_config, mirror)

    @classmethod
    def from_paths(cls, lexicon_path, checkpoint_path=None, k: int = 5,
                   c: int = 2) -> "ServiceState":
        lexicon = Lexicon.load(lexicon_path)
        scorer = None
        render_config = None
        if checkpoint_path:
            scorer, render_config, _meta = load_checkpoint(checkpoint_path)
        return cls(lexicon, scorer, render_config, k=k, c=c)


# --- request / response models ----------------------------------------------

class InfoResponse(BaseModel):
    version: str
    lexicon_entries: int
    lexicon_tokens: int
    model_loaded: bool
    scorer_config: dict | None = None
    render: dict


class CandidateItem(BaseModel):
    text: str
    pattern: str


class CandidatesRequest(BaseModel):
    word: str
    k: int = Field(default=5, ge=1)
    c: int = Field(default=2, ge=1)


class CandidatesResponse(BaseModel):
    query: str
    candidates: list[CandidateItem]


class DiacritizeRequest(BaseModel):
    text: str
    method: Literal["majority", "knn1", "model"] = "knn1"
    k: int | None = Field(default=None, ge=1)
    c: int | None = Field(default=None, ge=1)


class TokenPrediction(BaseModel):
    text: str
    is_hebrew_word: bool
    prediction: str | None = None


class DiacritizeResponse(BaseModel):
    method: str
    tokens: list[TokenPrediction]
    diacritized_text: str


class RenderRequest(BaseModel):
    text: str
    mirror: bool = False
    format: Literal["pgm", "png"] = "png"


class RenderResponse(BaseModel):
    width: int
    height: int
    patch_count: int
    truncated: bool
    format: str
    image_base64: str


class ScoreRequest(BaseModel):
    sentence: str
    target_index: int = Field(ge=0)
    candidates: list[str] | None = None
    k: int | None = Field(default=None, ge=1)
    c: int | None = Field(default=None, ge=1)


class ScoreResponse(BaseModel):
    query: str
    candidates: list[str]
    logits: list[float]
    probabilities: list[float]
    predicted_index: int
    predicted_text: str


class EvaluateRequest(BaseModel):
    gold_text: str
    pred_text: str


class EvaluateResponse(BaseModel):
    scheme: str
    metrics: dict[str, float]
    counts: dict[str, list[int]]


# --- app factory ------------------------------------------------------------

def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="niqqudkit", version=__version__,
                  description="Hebrew diacritics restoration service")
    app.state.toolkit = state

    def _require_model() -> Scorer:
        if state.scorer is None:
            raise HTTPException(status_code=409, detail="no checkpoint loaded")
        return state.scorer

    def _predict_token(sentence: Sentence, token_index: int, method: str,
                       k: int, c: int) -> hebrew.DiacritizedWord | None:
        text = sentence.token_text(token_index)
        word = hebrew.strip_marks(text)
        if method == "majority":
            return majority_predict(state.lexicon, word)
        try:
            candset = generate_candidates(state.index, word, k=k, c=c)
        except NoNeighbors:
            return None
        if method == "knn1":
            return candset.candidates[0]
        scorer = _require_model()
        embeddings = np.stack([
            scorer.encode_candidate_patches(
                state.patch_cache.patches(hebrew.to_text(cand)))
            for cand in candset.candidates
        ])
        context = scorer.encode_context(sentence, token_index)
        dist = score(context, embeddings)
        return candset.candidates[dist.predicted_index()]

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/info", response_model=InfoResponse)
    def info():
        return InfoResponse(
            version=__version__,
            lexicon_entries=len(state.lexicon),
            lexicon_tokens=state.lexicon.total_tokens,
            model_loaded=state.scorer is not None,
            scorer_config=state.scorer.config.to_dict() if state.scorer else None,
            render=state.render_config.to_dict(),
        )

    @app.post("/candidates", response_model=CandidatesResponse)
    def candidates(req: CandidatesRequest):
        query = hebrew.strip_marks(req.word)
        try:
            candset = generate_candidates(state.index, query, k=req.k, c=req.c)
        except NoNeighbors as e:
            raise HTTPException(status_code=404, detail=str(e))
        except DataError as e:
            raise HTTPException(status_code=422, detail=str(e))
        return CandidatesResponse(
            query=query,
            candidates=[
                CandidateItem(
                    text=hebrew.to_text(cand),
                    pattern=hebrew.encode_pattern(hebrew.extract_pattern(cand)),
                )
                for cand in candset.candidates
            ],
        )

    @app.post("/diacritize", response_model=DiacritizeResponse)
    def diacritize(req: DiacritizeRequest):
        if req.method == "model":
            _require_model()
        k = req.k if req.k is not None else (1 if req.method == "knn1" else state.k)
        c = req.c if req.c is not None else (1 if req.method == "knn1" else state.c)
        sentence = Sentence(req.text, tokenize(req.text))
        results: list[TokenPrediction] = []
        replacements: list[tuple[int, int, str]] = []
        for index, token in enumerate(sentence.tokens):
            text = token.text(sentence.text)
            prediction = None
            if token.is_hebrew_word and is_lexical_token(hebrew.strip_marks(text)):
                try:
                    predicted = _predict_token(sentence, index, req.method, k, c)
                except DataError as e:
                    raise HTTPException(status_code=422, detail=str(e))
                if predicted is not None:
                    prediction = hebrew.to_text(predicted)
                    replacements.append((token.start, token.end, prediction))
            results.append(TokenPrediction(
                text=text, is_hebrew_word=token.is_hebrew_word,
                prediction=prediction,
            ))
        out = []
        cursor = 0
        for start, end, text in replacements:
            out.append(req.text[cursor:start])
            out.append(text)
            cursor = end
        out.append(req.text[cursor:])
        return DiacritizeResponse(method=req.method, tokens=results,
                                  diacritized_text="".join(out))

    @app.post("/render", response_model=RenderResponse)
    def render(req: RenderRequest):
        try:
            image = render_text(req.text, state.render_config, truncate=True)
        except DataError as e:
            raise HTTPException(status_code=422, detail=str(e))
        if req.mirror:
            image = mirror_rtl(image)
        if req.format == "pgm":
            blob = to_pgm(image)
        else:
            from PIL import Image

            levels = np.rint(image.pixels * 255).astype(np.uint8)
            buffer = io.BytesIO()
            Image.fromarray(levels, mode="L").save(buffer, format="PNG")
            blob = buffer.getvalue()
        return RenderResponse(
            width=image.width, height=image.height,
            patch_count=image.patch_count, truncated=image.truncated,
            format=req.format,
            image_base64=base64.b64encode(blob).decode("ascii"),
        )

    @app.post("/score", response_model=ScoreResponse)
    def score_endpoint(req: ScoreRequest):
        scorer = _require_model()
        sentence = Sentence(req.sentence, tokenize(req.sentence))
        if not (0 <= req.target_index < len(sentence.tokens)):
            raise HTTPException(status_code=422, detail="target_index out of range")
        word = hebrew.strip_marks(sentence.token_text(req.target_index))
        try:
            if req.candidates:
                parsed = []
                for text in req.candidates:
                    cand = hebrew.parse_word(text)
                    if hebrew.strip(cand) != word:
                        raise HTTPException(
                            status_code=422,
                            detail=f"candidate {text!r} does not strip to {word!r}",
                        )
                    parsed.append(cand)
            else:
                k = req.k if req.k is not None else state.k
                c = req.c if req.c is not None else state.c
                parsed = list(generate_candidates(state.index, word, k=k, c=c).candidates)
            embeddings = np.stack([
                scorer.encode_candidate_patches(
                    state.patch_cache.patches(hebrew.to_text(cand)))
                for cand in parsed
            ])
            context = scorer.encode_context(sentence, req.target_index)
        except NoNeighbors as e:
            raise HTTPException(status_code=404, detail=str(e))
        except DataError as e:
            raise HTTPException(status_code=422, detail=str(e))
        dist = score(context, embeddings)
        predicted = dist.predicted_index()
        return ScoreResponse(
            query=word,
            candidates=[hebrew.to_text(cand) for cand in parsed],
            logits=[float(v) for v in dist.logits],
            probabilities=[float(v) for v in dist.probabilities],
            predicted_index=predicted,
            predicted_text=hebrew.to_text(parsed[predicted]),
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(req: EvaluateRequest):
        try:
            report = evaluate_texts(req.gold_text, req.pred_text)
        except DataError as e:
            raise HTTPException(status_code=422, detail=str(e))
        payload = report.to_dict()
        return EvaluateResponse(scheme=payload["scheme"],
                                metrics=payload["metrics"],
                                counts=payload["counts"])

    return app


def main() -> None:
    parser = argparse.ArgumentParser(
        prog="niqqudkit-serve",
        description="Serve the diacritization toolkit over HTTP",
    )
    parser.add_argument("--lexicon", required=True)
    parser.add_argument("--checkpoint")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--c", type=int, default=2)
    args = parser.parse_args()

    import uvicorn

    state = ServiceState.from_paths(args.lexicon, args.checkpoint,
                                    k=args.k, c=args.c)
    uvicorn.run(create_app(state), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
