import pytest
from fastapi.testclient import TestClient

from nels.config import ServiceConfig, load_config
from nels.crawler import LocalCorpusSource
from nels.errors import ConfigurationError
from nels.index import ContentIndex
from nels.service import AppState, create_app, parse_source
from nels.textmap import load_embeddings


@pytest.fixture
def service(tone_setup, seeded_index_path, embeddings_path):
    index = ContentIndex(seeded_index_path)
    state = AppState(
        index=index,
        model=tone_setup.model,
        embeddings=load_embeddings(embeddings_path),
        source=LocalCorpusSource(tone_setup.root),
    )
    with TestClient(create_app(state)) as client:
        yield client, index


class TestSearch:
    def test_exact_label_query_returns_ordered_results(self, service):
        client, _ = service
        body = client.get("/search", params={"q": "tone440"}).json()
        assert body["matched_class"] == "tone440"
        assert body["similarity"] == pytest.approx(1.0, abs=1e-6)
        assert body["status"] == "ok"
        assert len(body["results"]) >= 1
        confidences = [r["confidence"] for r in body["results"]]
        assert confidences == sorted(confidences, reverse=True)
        assert all(r["predicted_class"] == "tone440" for r in body["results"])

    def test_below_threshold_query_empty_with_status(self, service):
        client, _ = service
        body = client.get("/search", params={"q": "unrelated"}).json()
        assert body["results"] == []
        assert body["matched_class"] is None
        assert body["status"] == "no class above threshold"

    def test_limit_respected(self, service):
        client, _ = service
        body = client.get("/search", params={"q": "tone440", "limit": 3}).json()
        assert len(body["results"]) <= 3

    def test_missing_query_param_is_client_error(self, service):
        client, _ = service
        assert client.get("/search").status_code == 422

    def test_unknown_params_ignored(self, service):
        client, _ = service
        response = client.get("/search", params={"q": "tone440", "debug": "yes"})
        assert response.status_code == 200

    def test_results_expose_source_urls_not_paths(self, service):
        client, _ = service
        body = client.get("/search", params={"q": "tone440"}).json()
        for result in body["results"]:
            assert result["media_url"].startswith("local://")
            assert ".wav" not in result["media_url"]


class TestClassify:
    def test_local_fixture_clip_dominant_class(self, service):
        client, _ = service
        body = client.get("/classify", params={"url": "local://tone1000_000"}).json()
        assert body["dominant_class"] == "tone1000"
        assert len(body["segments"]) == 1
        assert body["segments"][0]["offset_s"] == 0.0

    def test_short_clip_rejected_duration(self, service):
        client, _ = service
        response = client.get("/classify", params={"url": "local://shorty"})
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "rejected-duration"
        assert body["duration_s"] == pytest.approx(1.0, abs=1e-3)

    def test_unknown_scheme_upstream_error(self, service):
        client, _ = service
        response = client.get("/classify", params={"url": "ftp://nowhere/clip"})
        assert response.status_code == 502
        assert response.json()["error"] == "upstream-error"

    def test_unknown_media_id_upstream_error(self, service):
        client, _ = service
        assert client.get("/classify", params={"url": "local://ghost"}).status_code == 502


class TestFeedback:
    def segment_id(self, client):
        return client.get("/search", params={"q": "tone440"}).json()["results"][0]["segment_id"]

    def test_first_vote(self, service):
        client, _ = service
        sid = self.segment_id(client)
        body = client.post(
            "/feedback", json={"segment_id": sid, "class": "tone440", "verdict": "correct"}
        ).json()
        assert body == {"segment_id": sid, "correct_votes": 1, "incorrect_votes": 0}

    def test_two_rapid_votes_both_recorded(self, service):
        client, _ = service
        sid = self.segment_id(client)
        payload = {"segment_id": sid, "class": "tone440", "verdict": "correct"}
        client.post("/feedback", json=payload)
        body = client.post("/feedback", json=payload).json()
        assert body["correct_votes"] == 2

    def test_invalid_verdict_400(self, service):
        client, _ = service
        sid = self.segment_id(client)
        response = client.post(
            "/feedback", json={"segment_id": sid, "class": "tone440", "verdict": "maybe"}
        )
        assert response.status_code == 400

    def test_unknown_segment_404(self, service):
        client, _ = service
        response = client.post(
            "/feedback", json={"segment_id": "ghost#0", "class": "x", "verdict": "correct"}
        )
        assert response.status_code == 404

    def test_missing_field_is_client_error(self, service):
        client, _ = service
        assert client.post("/feedback", json={"verdict": "correct"}).status_code == 422

    def test_feedback_survives_reload(self, service, seeded_index_path):
        client, index = service
        sid = self.segment_id(client)
        client.post("/feedback", json={"segment_id": sid, "class": "tone440", "verdict": "incorrect"})
        index.close()
        reloaded = ContentIndex(seeded_index_path)
        assert reloaded.get(sid).incorrect_votes == 1

    def test_vote_visible_in_search_results(self, service):
        client, _ = service
        sid = self.segment_id(client)
        client.post("/feedback", json={"segment_id": sid, "class": "tone440", "verdict": "correct"})
        results = client.get("/search", params={"q": "tone440"}).json()["results"]
        tallies = {r["segment_id"]: r["correct_votes"] for r in results}
        assert tallies[sid] == 1


class TestStats:
    def test_stats_mirror_index(self, service):
        client, index = service
        body = client.get("/stats").json()
        assert body == index.stats()
        assert body["segment_count"] > 0
        assert body["hours_indexed"] == pytest.approx(body["segment_count"] * 2.3 / 3600.0)

    def test_empty_index_zeroes(self, tone_setup, embeddings_path):
        state = AppState(
            index=ContentIndex(),
            model=tone_setup.model,
            embeddings=load_embeddings(embeddings_path),
            source=LocalCorpusSource(tone_setup.root),
        )
        with TestClient(create_app(state)) as client:
            body = client.get("/stats").json()
        assert body["segment_count"] == 0
        assert body["hours_indexed"] == 0.0


class TestConfig:
    def test_defaults(self):
        config = load_config()
        assert config.listen_addr == "127.0.0.1:8080"
        assert config.port == 8080

    def test_file_values(self, tmp_path):
        path = tmp_path / "nels.conf"
        path.write_text(
            "# comment\nlisten_addr=0.0.0.0:9999\nindex_path=/data/idx.ndjson\n"
            "model_path=m.nels\nembeddings_path=e.txt\nsource=local:/corpus\n"
        )
        config = load_config(path)
        assert config.port == 9999
        assert config.host == "0.0.0.0"
        assert config.source == "local:/corpus"

    def test_env_overrides(self, tmp_path, monkeypatch):
        path = tmp_path / "nels.conf"
        path.write_text("listen_addr=127.0.0.1:1111\n")
        monkeypatch.setenv("NELS_LISTEN_ADDR", "127.0.0.1:2222")
        assert load_config(path).port == 2222

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "nels.conf"
        path.write_text("listen_adr=typo:1\n")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "nels.conf"
        path.write_text("just some text\n")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_parse_source_local(self, tone_setup):
        source = parse_source(f"local:{tone_setup.root}")
        assert isinstance(source, LocalCorpusSource)

    def test_parse_source_unknown(self):
        from nels.errors import SourceError

        with pytest.raises(SourceError):
            parse_source("gopher:whatever")
