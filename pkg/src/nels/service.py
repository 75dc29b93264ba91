"""HTTP facade: text search, link analysis, feedback, stats.

JSON over four endpoints: GET /search, GET /classify, POST /feedback,
GET /stats. Feedback writes funnel through the index's single-writer
lock; everything else is read-only over index snapshots.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Optional

from fastapi import FastAPI, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from nels import audio, classifier, textmap
from nels.classifier import Model
from nels.config import ServiceConfig
from nels.crawler import (
    HttpMediaSource,
    LocalCorpusSource,
    MediaSource,
    admit_media,
)
from nels.errors import InvalidAudioError, SegmentNotFoundError, SourceError
from nels.index import ContentIndex, FeedbackEvent, IndexEntry, Verdict
from nels.textmap import EmbeddingVocabulary

logger = logging.getLogger(__name__)

NO_MATCH_STATUS = "no class above threshold"


@dataclass
class AppState:
    index: ContentIndex
    model: Model
    embeddings: EmbeddingVocabulary
    source: MediaSource
    class_embeddings: list = None

    def __post_init__(self):
        if self.class_embeddings is None:
            self.class_embeddings = textmap.build_class_embeddings(
                self.embeddings, self.model.class_list
            )


def parse_source(spec: str) -> MediaSource:
    """``local:<dir>`` or ``http:<base-url>``."""
    kind, _, rest = spec.partition(":")
    if kind == "local":
        return LocalCorpusSource(rest)
    if kind in ("http", "https"):
        return HttpMediaSource(spec if kind == "https" else rest or spec)
    raise SourceError(f"unknown source spec {spec!r}")


def build_state(config: ServiceConfig) -> AppState:
    return AppState(
        index=ContentIndex(config.index_path),
        model=Model.load(config.model_path),
        embeddings=textmap.load_embeddings(config.embeddings_path),
        source=parse_source(config.source),
    )


def _result_payload(entry: IndexEntry) -> dict:
    return {
        "segment_id": entry.segment_id,
        "media_url": entry.metadata.url,
        "offset_s": entry.offset_s,
        "predicted_class": entry.predicted_class.label,
        "confidence": entry.confidence,
        "title": entry.metadata.title,
        "thumbnail_url": entry.metadata.thumbnail_url,
        "correct_votes": entry.correct_votes,
        "incorrect_votes": entry.incorrect_votes,
    }


class FeedbackBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    segment_id: str
    class_label: str = Field(alias="class")
    verdict: str


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="NELS search service")
    # the UI ships as static assets that may be served from another origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/search")
    def search(q: str, limit: int = Query(default=20, ge=1)):
        mapping = textmap.map_query(
            state.embeddings, state.model.class_list, q, state.class_embeddings
        )
        if mapping.matched_class is None:
            return {
                "query": q,
                "matched_class": None,
                "similarity": None,
                "status": NO_MATCH_STATUS,
                "results": [],
            }
        entries = state.index.query_by_class_topk(mapping.matched_class.label, limit)
        return {
            "query": q,
            "matched_class": mapping.matched_class.label,
            "similarity": mapping.similarity,
            "status": "ok",
            "results": [_result_payload(e) for e in entries],
        }

    @app.get("/classify")
    def classify(url: str):
        try:
            raw, audio_path = state.source.fetch_by_url(url)
            samples, rate = audio.load_wav(audio_path)
        except (SourceError, InvalidAudioError) as exc:
            return JSONResponse(
                status_code=502, content={"error": "upstream-error", "detail": str(exc)}
            )
        duration_s = (samples.shape[0] if samples.ndim else 0) / float(rate)
        if not admit_media(duration_s):
            return JSONResponse(
                status_code=422,
                content={"error": "rejected-duration", "duration_s": duration_s},
            )
        waveform = audio.canonicalize_audio(samples, rate)
        media_id = str(raw.get("media_id", url))
        segments = audio.segment_waveform(waveform, media_id)
        features = [audio.log_mel_features(seg) for seg in segments]
        dominant, predictions = classifier.dominant_sound(state.model, features)
        return {
            "url": url,
            "dominant_class": dominant.label,
            "segments": [
                {
                    "offset_s": seg.offset_s,
                    "label": pred.argmax_class.label,
                    "confidence": pred.confidence,
                }
                for seg, pred in zip(segments, predictions)
            ],
        }

    @app.post("/feedback")
    def feedback(body: FeedbackBody):
        try:
            verdict = Verdict(body.verdict)
        except ValueError:
            return JSONResponse(
                status_code=400,
                content={"error": "invalid-verdict", "detail": f"{body.verdict!r} is not correct/incorrect"},
            )
        event = FeedbackEvent(
            segment_id=body.segment_id,
            class_label=body.class_label,
            verdict=verdict,
            timestamp=time.time(),
        )
        try:
            correct, incorrect = state.index.record_feedback(event)
        except SegmentNotFoundError:
            return JSONResponse(
                status_code=404,
                content={"error": "unknown-segment", "segment_id": body.segment_id},
            )
        return {
            "segment_id": body.segment_id,
            "correct_votes": correct,
            "incorrect_votes": incorrect,
        }

    @app.get("/stats")
    def stats():
        return state.index.stats()

    return app


def serve(config: ServiceConfig) -> None:
    """Blocking uvicorn server over the configured state."""
    import uvicorn

    app = create_app(build_state(config))
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
