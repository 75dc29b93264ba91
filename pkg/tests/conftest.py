"""Shared fixtures: embedding files, synthetic corpora, trained models."""

from __future__ import annotations

import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from nels import audio, classifier, pipeline, synth
from nels.classifier import Model
from nels.crawler import CrawlJob, LocalCorpusSource, MediaRecord
from nels.index import ContentIndex, FeedbackEvent, IndexEntry, Verdict
from nels.vocab import Dataset, SoundClass

# Embedding fixture (dimension 5). Chosen so key cosines are exact or
# near-exact:
#   cos(puppy, dog) = 0.8, cos(puppy, siren) = 0.1 (unit-norm construction)
#   cos(brink, tick) = 3/20 = 0.15 exactly: integer vector of norm exactly 20
#     (9 + 361 + 25 + 4 + 1 = 400), so dot=3.0, norms 1.0 and 20.0, and the
#     IEEE division 3/20 is the same double as the literal 0.15.
EMBED_VECTORS = {
    "dog": (1.0, 0.0, 0.0, 0.0, 0.0),
    "siren": (0.0, 1.0, 0.0, 0.0, 0.0),
    "bark": (0.6, 0.0, 0.8, 0.0, 0.0),
    "puppy": (0.8, 0.1, 0.5916079783099616, 0.0, 0.0),
    "ortho": (0.0, 0.0, 1.0, 0.0, 0.0),
    "unrelated": (0.0, 0.0, 0.0, 0.0, 1.0),
    "tick": (0.0, 0.0, 0.0, 0.0, 1.0),
    "brink": (19.0, 5.0, 2.0, 1.0, 3.0),
    "zework": (0.0, 0.0, 0.0, 0.0, 0.0),
    "tone440": (1.0, 0.0, 0.0, 0.0, 0.0),
    "tone1000": (0.0, 1.0, 0.0, 0.0, 0.0),
    "tone3000": (0.0, 0.0, 1.0, 0.0, 0.0),
    "white": (0.0, 0.0, 0.0, 1.0, 0.0),
    "noise": (0.0, 0.0, 0.0, 1.0, 0.0),
}


def write_embeddings(path: Path, vectors: dict | None = None) -> Path:
    vectors = vectors if vectors is not None else EMBED_VECTORS
    lines = [f"{token} " + " ".join(repr(v) for v in vec) for token, vec in vectors.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def embeddings_path(tmp_path_factory) -> Path:
    return write_embeddings(tmp_path_factory.mktemp("emb") / "vectors.txt")


@dataclass
class ToneSetup:
    """A crawlable synthetic corpus and a model trained on it."""

    root: Path
    manifest: Path
    model_path: Path
    model: Model
    classes: list[SoundClass]
    heldout: classifier.LabeledFeatures


@pytest.fixture(scope="session")
def tone_setup(tmp_path_factory) -> ToneSetup:
    root = tmp_path_factory.mktemp("tonecorpus")
    manifest = synth.generate_corpus(root, clips_per_class=8, seed=11, sidecars=True)
    # one extra clip that is too short to be admitted anywhere
    short = synth.tone_clip(440.0, duration_s=1.0)
    audio.save_canonical_wav(audio.Waveform(short, audio.CANONICAL_RATE), root / "shorty.wav")
    (root / "shorty.meta").write_text(
        "title=shorty sound\nurl=local://shorty\nduration=1.0\n", encoding="utf-8"
    )

    train_set = classifier.load_manifest(manifest, folds={1, 2, 3, 4})
    heldout = classifier.load_manifest(manifest, folds={0})
    model = classifier.train_softmax(train_set, seed=7)
    model_path = root / "model.nels"
    model.save(model_path)
    return ToneSetup(
        root=root,
        manifest=manifest,
        model_path=model_path,
        model=model,
        classes=list(model.class_list),
        heldout=heldout,
    )


@pytest.fixture(scope="session")
def _session_index(tone_setup, tmp_path_factory) -> Path:
    """Index log produced by one full pipeline pass over the tone corpus."""
    index_path = tmp_path_factory.mktemp("idx") / "index.ndjson"
    source = LocalCorpusSource(tone_setup.root)
    jobs = [CrawlJob.for_class(c, limit=10) for c in tone_setup.classes]
    with ContentIndex(index_path) as idx:
        pipeline.run_pipeline(jobs, source, tone_setup.model, idx)
    return index_path


@pytest.fixture
def seeded_index_path(_session_index, tmp_path) -> Path:
    """A private copy of the session index log, safe to mutate."""
    dst = tmp_path / "index.ndjson"
    shutil.copy(_session_index, dst)
    return dst


def make_entry(
    segment_id: str,
    label: str = "dog",
    confidence: float = 0.9,
    crawl_label: str | None = None,
    correct_votes: int = 0,
    incorrect_votes: int = 0,
    class_id: int = 0,
    indexed_at: float = 1700000000.0,
) -> IndexEntry:
    """Small hand-built entry for index/evaluation tests."""
    media_id = segment_id.split("#")[0]
    return IndexEntry(
        segment_id=segment_id,
        media_id=media_id,
        offset_s=0.0,
        predicted_class=SoundClass(label, Dataset.ESC50, class_id),
        confidence=confidence,
        top_scores=[(label, confidence)],
        crawl_label=crawl_label if crawl_label is not None else label,
        metadata=MediaRecord(
            media_id=media_id,
            url=f"local://{media_id}",
            title=f"{media_id} clip",
            duration_s=30.0,
        ),
        correct_votes=correct_votes,
        incorrect_votes=incorrect_votes,
        indexed_at=indexed_at,
    )


@pytest.fixture
def plant_agreement_index():
    """Factory: index where crawl labels agree with majority feedback on a
    controlled fraction of the judged segments."""

    def _plant(
        n_classes: int = 5,
        per_class: int = 40,
        agreement: float = 0.9,
        seed: int = 123,
        path=None,
    ) -> tuple[ContentIndex, list[str]]:
        rng = np.random.default_rng(seed)
        labels = [f"class{c:02d}" for c in range(n_classes)]
        idx = ContentIndex(path)
        for ci, label in enumerate(labels):
            for i in range(per_class):
                human_correct = bool(rng.random() < 0.7)
                agrees = bool(rng.random() < agreement)
                query_correct = human_correct if agrees else not human_correct
                entry = make_entry(
                    f"{label}_m{i:03d}#0",
                    label=label,
                    confidence=float(rng.uniform(0.3, 1.0)),
                    crawl_label=label if query_correct else "somethingelse",
                    correct_votes=2 if human_correct else 0,
                    incorrect_votes=0 if human_correct else 2,
                    class_id=ci,
                )
                idx.insert(entry)
        return idx, labels

    return _plant


def feedback(segment_id: str, verdict: Verdict, label: str = "dog") -> FeedbackEvent:
    return FeedbackEvent(
        segment_id=segment_id, class_label=label, verdict=verdict, timestamp=1700000001.0
    )
