"""Media crawling: query formulation, duration admission, metadata extraction.

Sources are pluggable behind :class:`MediaSource`. The local-corpus adapter
(a directory of audio files with ``<media_id>.meta`` sidecars) is the one
used by tests and offline runs; the HTTP adapter is a thin skeleton for
real deployments.
"""

from __future__ import annotations

import json
import logging
import threading
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from nels.errors import (
    InvalidDurationError,
    InvalidLabelError,
    MetadataIncompleteError,
    NelsError,
    SourceError,
    UnsupportedUrlError,
)
from nels.vocab import SoundClass

logger = logging.getLogger(__name__)

#: Admission window for crawled media, inclusive at both ends.
MIN_DURATION_S = 2.0
MAX_DURATION_S = 600.0

QUERY_SUFFIX = "sound"

AUDIO_EXTENSIONS = (".wav",)


def formulate_query(label: str) -> str:
    """Turn a sound-event label into the crawl query ``"<label> sound"``.

    Internal whitespace is collapsed to single spaces; casing is preserved.
    """
    tokens = label.split()
    if not tokens:
        raise InvalidLabelError("label is empty or whitespace-only")
    return " ".join(tokens) + " " + QUERY_SUFFIX


def admit_media(duration_s: float) -> bool:
    """True iff a recording of this duration is admitted (2 s to 10 min)."""
    if duration_s < 0:
        raise InvalidDurationError(f"negative duration {duration_s}")
    return MIN_DURATION_S <= duration_s <= MAX_DURATION_S


@dataclass
class MediaRecord:
    """The 12-attribute metadata snapshot of one crawled recording."""

    media_id: str
    url: str
    title: str
    duration_s: float
    description: Optional[str] = None
    upload_date: Optional[date] = None
    uploader: Optional[str] = None
    view_count: Optional[int] = None
    like_count: Optional[int] = None
    category: Optional[str] = None
    keywords: list[str] = field(default_factory=list)
    thumbnail_url: Optional[str] = None

    def to_json_dict(self) -> dict:
        d = {
            "media_id": self.media_id,
            "url": self.url,
            "title": self.title,
            "duration_s": self.duration_s,
            "description": self.description,
            "upload_date": self.upload_date.isoformat() if self.upload_date else None,
            "uploader": self.uploader,
            "view_count": self.view_count,
            "like_count": self.like_count,
            "category": self.category,
            "keywords": list(self.keywords),
            "thumbnail_url": self.thumbnail_url,
        }
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "MediaRecord":
        upload = d.get("upload_date")
        return cls(
            media_id=d["media_id"],
            url=d["url"],
            title=d["title"],
            duration_s=float(d["duration_s"]),
            description=d.get("description"),
            upload_date=date.fromisoformat(upload) if upload else None,
            uploader=d.get("uploader"),
            view_count=d.get("view_count"),
            like_count=d.get("like_count"),
            category=d.get("category"),
            keywords=list(d.get("keywords") or []),
            thumbnail_url=d.get("thumbnail_url"),
        )


def _parse_date(value) -> Optional[date]:
    if value is None or value == "":
        return None
    if isinstance(value, date):
        return value
    text = str(value).strip()
    for fmt in ("%Y-%m-%d", "%Y%m%d"):
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise MetadataIncompleteError(f"unparseable upload_date {value!r}")


def _parse_count(name: str, value) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise MetadataIncompleteError(f"malformed {name} {value!r}") from None
    if n < 0:
        raise MetadataIncompleteError(f"negative {name} {n}")
    return n


def _parse_keywords(value) -> list[str]:
    if value is None or value == "":
        return []
    if isinstance(value, str):
        return [k.strip() for k in value.split(",") if k.strip()]
    return [str(k) for k in value]


def extract_metadata(raw: Mapping) -> MediaRecord:
    """Map a raw source item onto the fixed 12-attribute MediaRecord.

    Mandatory fields are media_id (or id), url, title and duration; an item
    missing any of them raises MetadataIncompleteError so the caller can
    skip and log it. Optional fields are kept as explicit absences.
    """
    media_id = raw.get("media_id") or raw.get("id")
    url = raw.get("url")
    title = raw.get("title")
    duration = raw.get("duration_s", raw.get("duration"))

    missing = [
        name
        for name, value in (
            ("media_id", media_id),
            ("url", url),
            ("title", title),
            ("duration", duration),
        )
        if value is None
    ]
    if missing:
        raise MetadataIncompleteError(f"missing mandatory fields: {', '.join(missing)}")

    try:
        duration_s = float(duration)
    except (TypeError, ValueError):
        raise MetadataIncompleteError(f"malformed duration {duration!r}") from None
    if duration_s < 0:
        raise MetadataIncompleteError(f"negative duration {duration_s}")

    return MediaRecord(
        media_id=str(media_id),
        url=str(url),
        title=str(title),
        duration_s=duration_s,
        description=None if raw.get("description") is None else str(raw["description"]),
        upload_date=_parse_date(raw.get("upload_date")),
        uploader=None if raw.get("uploader") is None else str(raw["uploader"]),
        view_count=_parse_count("view_count", raw.get("view_count")),
        like_count=_parse_count("like_count", raw.get("like_count")),
        category=None if raw.get("category") is None else str(raw["category"]),
        keywords=_parse_keywords(raw.get("keywords")),
        thumbnail_url=None if raw.get("thumbnail_url") is None else str(raw["thumbnail_url"]),
    )


@dataclass(frozen=True)
class CrawlJob:
    """One per-class crawl request; the query is always derived from the label."""

    sound_class: SoundClass
    query: str
    requested_limit: int

    def __post_init__(self):
        if self.requested_limit < 1:
            raise ValueError("requested_limit must be positive")
        expected = formulate_query(self.sound_class.label)
        if self.query != expected:
            raise ValueError(f"query must be {expected!r}, got {self.query!r}")

    @classmethod
    def for_class(cls, sound_class: SoundClass, limit: int) -> "CrawlJob":
        return cls(sound_class, formulate_query(sound_class.label), limit)


@dataclass
class CrawledMedia:
    """An admitted item: metadata, an audio payload reference, its crawl label."""

    record: MediaRecord
    audio_uri: str
    crawl_label: str


@dataclass
class CrawlCounters:
    """Skip bookkeeping for long-running crawls; one instance may be shared."""

    inadmissible: int = 0
    failed: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def count_inadmissible(self):
        with self._lock:
            self.inadmissible += 1

    def count_failed(self):
        with self._lock:
            self.failed += 1


class MediaSource:
    """A searchable media archive. Adapters must be thread-safe."""

    def search(self, query: str, limit: int) -> Iterable[Mapping]:
        """Yield raw items for a query. ``limit`` is a hint, not a contract."""
        raise NotImplementedError

    def fetch_by_url(self, url: str) -> tuple[Mapping, str]:
        """Resolve a pasted URL to (raw item, local audio path)."""
        raise NotImplementedError


def crawl_once(
    job: CrawlJob,
    source: MediaSource,
    counters: Optional[CrawlCounters] = None,
) -> list[CrawledMedia]:
    """Run one crawl job: search, admit by duration, extract metadata.

    Per-item failures are skipped (counted when ``counters`` is given) so a
    bad item never aborts the batch; a failing source raises SourceError.
    """
    counters = counters or CrawlCounters()
    try:
        raw_items = source.search(job.query, job.requested_limit)
    except SourceError:
        raise
    except Exception as exc:
        raise SourceError(f"source search failed: {exc}") from exc

    results: list[CrawledMedia] = []
    for raw in raw_items:
        if len(results) >= job.requested_limit:
            break
        try:
            record = extract_metadata(raw)
            if not admit_media(record.duration_s):
                counters.count_inadmissible()
                continue
            audio_uri = raw.get("audio_uri")
            if not audio_uri:
                raise MetadataIncompleteError("item has no audio_uri")
            results.append(
                CrawledMedia(record=record, audio_uri=str(audio_uri), crawl_label=job.sound_class.label)
            )
        except NelsError as exc:
            counters.count_failed()
            logger.warning("skipping item from %r: %s", job.query, exc)
    return results


class LocalCorpusSource(MediaSource):
    """Directory of audio files with ``<media_id>.meta`` key=value sidecars.

    Search matches items whose title/description/keywords contain every
    query token (case-insensitive); results come in media_id order so runs
    are reproducible. Reads are stateless, so concurrent use is safe.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise SourceError(f"local corpus directory not found: {self.root}")

    def _sidecars(self) -> list[Path]:
        return sorted(self.root.glob("*.meta"))

    def _load_item(self, meta_path: Path) -> dict:
        media_id = meta_path.stem
        raw: dict = {"media_id": media_id}
        for line in meta_path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise MetadataIncompleteError(f"{meta_path.name}: bad sidecar line {line!r}")
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()

        audio_path = self._audio_path(media_id)
        if audio_path is None:
            raise MetadataIncompleteError(f"{media_id}: no audio file next to sidecar")
        raw["audio_uri"] = str(audio_path)
        raw.setdefault("url", f"local://{media_id}")
        if "duration" not in raw and "duration_s" not in raw:
            raw["duration_s"] = _wav_duration(audio_path)
        return raw

    def _audio_path(self, media_id: str) -> Optional[Path]:
        for ext in AUDIO_EXTENSIONS:
            candidate = self.root / f"{media_id}{ext}"
            if candidate.exists():
                return candidate
        return None

    def search(self, query: str, limit: int) -> Iterator[Mapping]:
        tokens = [t for t in query.lower().split() if t]
        for meta_path in self._sidecars():
            try:
                raw = self._load_item(meta_path)
            except NelsError as exc:
                logger.warning("unreadable corpus item %s: %s", meta_path.name, exc)
                continue
            bag = " ".join(
                [
                    str(raw.get("title", "")),
                    str(raw.get("description", "")),
                    str(raw.get("keywords", "")),
                ]
            ).lower()
            if all(token in bag for token in tokens):
                yield raw

    def fetch_by_url(self, url: str) -> tuple[Mapping, str]:
        if url.startswith("local://"):
            media_id = url[len("local://") :]
        elif "://" in url:
            # fall back to matching the sidecar-declared url
            for meta_path in self._sidecars():
                raw = self._load_item(meta_path)
                if raw.get("url") == url:
                    return raw, raw["audio_uri"]
            raise UnsupportedUrlError(f"cannot resolve {url!r} in local corpus")
        else:
            media_id = url
        meta_path = self.root / f"{media_id}.meta"
        if not meta_path.exists():
            raise SourceError(f"no such media id {media_id!r}")
        raw = self._load_item(meta_path)
        return raw, raw["audio_uri"]


def _wav_duration(path: Path) -> float:
    # imported lazily to keep the crawler importable without scipy
    from nels.audio import load_wav

    samples, rate = load_wav(path)
    return samples.shape[0] / float(rate)


class HttpMediaSource(MediaSource):
    """Skeleton adapter for a remote search endpoint (never used in CI).

    Expects ``GET <base>/search?q=...&limit=N`` to return a JSON array of
    raw items whose ``audio_uri`` fields are downloadable audio URLs.
    """

    def __init__(self, base_url: str, timeout_s: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def search(self, query: str, limit: int) -> list[Mapping]:
        url = f"{self.base_url}/search?q={urllib.parse.quote(query)}&limit={limit}"
        try:
            with urllib.request.urlopen(url, timeout=self.timeout_s) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise SourceError(f"http search failed: {exc}") from exc
        if not isinstance(payload, list):
            raise SourceError("http search response is not a JSON array")
        return payload

    def fetch_by_url(self, url: str) -> tuple[Mapping, str]:
        raise UnsupportedUrlError("http source does not support link analysis yet")
