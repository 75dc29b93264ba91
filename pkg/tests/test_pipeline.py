import numpy as np

from nels import audio, synth
from nels.crawler import CrawlJob, LocalCorpusSource
from nels.index import ContentIndex
from nels.pipeline import run_pipeline


def jobs_for(classes, limit=10):
    return [CrawlJob.for_class(c, limit) for c in classes]


class TestRunPipeline:
    def test_full_pass_indexes_every_admitted_segment(self, tone_setup):
        index = ContentIndex()
        stats = run_pipeline(
            jobs_for(tone_setup.classes),
            LocalCorpusSource(tone_setup.root),
            tone_setup.model,
            index,
        )
        # 4 classes x 8 clips, each 2.3 s -> one segment per clip; shorty is inadmissible
        assert stats.media_crawled == 32
        assert stats.segments_indexed == 32
        assert stats.crawl_counters.inadmissible == 0  # shorty never matches a tone query
        assert len(index) == 32

    def test_crawl_labels_stamped_on_entries(self, tone_setup):
        index = ContentIndex()
        run_pipeline(
            jobs_for(tone_setup.classes),
            LocalCorpusSource(tone_setup.root),
            tone_setup.model,
            index,
        )
        for label in ("tone440", "tone1000", "tone3000", "white_noise"):
            entries = [e for e in (index.get(f"{label}_{i:03d}#0") for i in range(8)) if e]
            assert len(entries) == 8
            assert all(e.crawl_label == label for e in entries)

    def test_predictions_recorded_with_top_scores(self, tone_setup):
        index = ContentIndex()
        run_pipeline(
            jobs_for(tone_setup.classes, limit=2),
            LocalCorpusSource(tone_setup.root),
            tone_setup.model,
            index,
        )
        entry = next(e for e in (index.get(f"tone440_{i:03d}#0") for i in range(8)) if e)
        assert 1 <= len(entry.top_scores) <= 5
        assert entry.top_scores[0][1] == entry.confidence
        scores = [s for _, s in entry.top_scores]
        assert scores == sorted(scores, reverse=True)

    def test_limit_bounds_media_per_job(self, tone_setup):
        index = ContentIndex()
        stats = run_pipeline(
            jobs_for(tone_setup.classes, limit=3),
            LocalCorpusSource(tone_setup.root),
            tone_setup.model,
            index,
        )
        assert stats.media_crawled == 12
        assert len(index) == 12

    def test_tiny_queue_still_completes(self, tone_setup):
        index = ContentIndex()
        stats = run_pipeline(
            jobs_for(tone_setup.classes),
            LocalCorpusSource(tone_setup.root),
            tone_setup.model,
            index,
            queue_size=1,
            feature_workers=1,
        )
        assert stats.segments_indexed == 32

    def test_multi_segment_media(self, tmp_path, tone_setup):
        clip = synth.tone_clip(440.0, duration_s=7.0)
        audio.save_canonical_wav(audio.Waveform(clip, audio.CANONICAL_RATE), tmp_path / "long.wav")
        (tmp_path / "long.meta").write_text(
            "title=tone440 sound long\nurl=local://long\nduration=7.0\n", encoding="utf-8"
        )
        index = ContentIndex()
        tone440 = next(c for c in tone_setup.classes if c.label == "tone440")
        stats = run_pipeline(
            jobs_for([tone440]),
            LocalCorpusSource(tmp_path),
            tone_setup.model,
            index,
        )
        assert stats.media_crawled == 1
        assert stats.segments_indexed == 3
        offsets = sorted(index.get(f"long#{i}").offset_s for i in range(3))
        assert offsets == [0.0, 2.3, 4.6]

    def test_unreadable_media_counted_not_fatal(self, tmp_path, tone_setup):
        clip = synth.tone_clip(440.0, duration_s=2.5)
        audio.save_canonical_wav(audio.Waveform(clip, audio.CANONICAL_RATE), tmp_path / "ok.wav")
        (tmp_path / "ok.meta").write_text(
            "title=tone440 sound ok\nurl=local://ok\nduration=2.5\n", encoding="utf-8"
        )
        (tmp_path / "bad.wav").write_bytes(b"deadbeef")
        (tmp_path / "bad.meta").write_text(
            "title=tone440 sound bad\nurl=local://bad\nduration=2.5\n", encoding="utf-8"
        )
        index = ContentIndex()
        tone440 = next(c for c in tone_setup.classes if c.label == "tone440")
        stats = run_pipeline(
            jobs_for([tone440]),
            LocalCorpusSource(tmp_path),
            tone_setup.model,
            index,
        )
        assert stats.failed_media == 1
        assert stats.segments_indexed == 1
        assert index.get("ok#0") is not None

    def test_durable_when_backed_by_file(self, tone_setup, tmp_path):
        path = tmp_path / "index.ndjson"
        with ContentIndex(path) as index:
            run_pipeline(
                jobs_for(tone_setup.classes, limit=1),
                LocalCorpusSource(tone_setup.root),
                tone_setup.model,
                index,
            )
            expected = index.stats()
        assert ContentIndex(path).stats() == expected

    def test_end_to_end_then_search(self, tone_setup, embeddings_path):
        """crawl -> features -> classify -> index -> serve -> search."""
        from fastapi.testclient import TestClient

        from nels.service import AppState, create_app
        from nels.textmap import load_embeddings

        index = ContentIndex()
        run_pipeline(
            jobs_for(tone_setup.classes),
            LocalCorpusSource(tone_setup.root),
            tone_setup.model,
            index,
        )
        state = AppState(
            index=index,
            model=tone_setup.model,
            embeddings=load_embeddings(embeddings_path),
            source=LocalCorpusSource(tone_setup.root),
        )
        with TestClient(create_app(state)) as client:
            body = client.get("/search", params={"q": "tone3000"}).json()
        assert body["matched_class"] == "tone3000"
        assert len(body["results"]) >= 1
        confidences = [r["confidence"] for r in body["results"]]
        assert confidences == sorted(confidences, reverse=True)
