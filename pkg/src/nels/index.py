"""Persistent segment index: predictions + crawl metadata + human feedback.

Storage is an append-only newline-delimited JSON log with two record
types, ``entry`` and ``feedback``. Loading replays the log; compaction
rewrites it to one entry record per live segment (current tallies folded
in) and is idempotent. All mutations funnel through a single lock, so many
threads can read while one writes.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional

from nels.audio import SEGMENT_SECONDS
from nels.crawler import MediaRecord
from nels.errors import IndexLogError, SegmentNotFoundError
from nels.vocab import Dataset, SoundClass


class Verdict(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


@dataclass
class FeedbackEvent:
    segment_id: str
    class_label: str
    verdict: Verdict
    timestamp: float

    def to_record(self) -> dict:
        return {
            "type": "feedback",
            "segment_id": self.segment_id,
            "class_label": self.class_label,
            "verdict": self.verdict.value,
            "timestamp": self.timestamp,
        }


@dataclass
class IndexEntry:
    """The indexed unit: one segment with prediction, metadata and votes."""

    segment_id: str
    media_id: str
    offset_s: float
    predicted_class: SoundClass
    confidence: float
    top_scores: list[tuple[str, float]]
    crawl_label: str
    metadata: MediaRecord
    correct_votes: int = 0
    incorrect_votes: int = 0
    indexed_at: float = field(default_factory=time.time)

    def __post_init__(self):
        if not self.top_scores or self.top_scores[0][1] != self.confidence:
            raise ValueError("confidence must equal the first top_scores value")
        if self.correct_votes < 0 or self.incorrect_votes < 0:
            raise ValueError("vote counters must be non-negative")

    def to_record(self) -> dict:
        return {
            "type": "entry",
            "segment_id": self.segment_id,
            "media_id": self.media_id,
            "offset_s": self.offset_s,
            "predicted_class": {
                "label": self.predicted_class.label,
                "dataset": self.predicted_class.dataset.value,
                "class_id": self.predicted_class.class_id,
            },
            "confidence": self.confidence,
            "top_scores": [[label, score] for label, score in self.top_scores],
            "crawl_label": self.crawl_label,
            "metadata": self.metadata.to_json_dict(),
            "correct_votes": self.correct_votes,
            "incorrect_votes": self.incorrect_votes,
            "indexed_at": self.indexed_at,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "IndexEntry":
        pc = rec["predicted_class"]
        return cls(
            segment_id=rec["segment_id"],
            media_id=rec["media_id"],
            offset_s=float(rec["offset_s"]),
            predicted_class=SoundClass(
                label=pc["label"], dataset=Dataset(pc["dataset"]), class_id=int(pc["class_id"])
            ),
            confidence=float(rec["confidence"]),
            top_scores=[(label, float(score)) for label, score in rec["top_scores"]],
            crawl_label=rec["crawl_label"],
            metadata=MediaRecord.from_json_dict(rec["metadata"]),
            correct_votes=int(rec["correct_votes"]),
            incorrect_votes=int(rec["incorrect_votes"]),
            indexed_at=float(rec["indexed_at"]),
        )


@dataclass
class LoadReport:
    records_applied: int = 0
    skipped_tail_records: int = 0


def _dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"


class ContentIndex:
    """In-memory maps over an append-only log; single-writer, many readers.

    With ``path=None`` the index is purely in-memory (tests, scratch use).
    ``fsync=True`` additionally fsyncs after every append for power-loss
    durability; the default flushes to the OS on each write.
    """

    def __init__(self, path: Optional[str | Path] = None, *, fsync: bool = False):
        self.path = Path(path) if path is not None else None
        self.fsync = fsync
        self.load_report = LoadReport()
        self._entries: dict[str, IndexEntry] = {}
        self._by_class: dict[str, set[str]] = {}
        self._lock = threading.Lock()
        self._log = None
        if self.path is not None:
            if self.path.exists():
                self._replay_file()
            self._log = open(self.path, "a", encoding="utf-8")

    # -- log plumbing -------------------------------------------------

    def _replay_file(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            raw = fh.read()
        lines = raw.split("\n")
        ends_clean = raw.endswith("\n") or raw == ""
        if lines and lines[-1] == "":
            lines.pop()
        last = len(lines) - 1
        for i, line in enumerate(lines):
            try:
                rec = json.loads(line)
                self._apply_record(rec)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                if i == last and not ends_clean:
                    # torn final write from a crash: keep everything before it
                    self.load_report.skipped_tail_records += 1
                    break
                raise IndexLogError(i + 1, f"corrupt record: {exc}") from exc
            self.load_report.records_applied += 1

    def _apply_record(self, rec: dict) -> None:
        rtype = rec.get("type")
        if rtype == "entry":
            self._apply_entry(IndexEntry.from_record(rec))
        elif rtype == "feedback":
            segment_id = rec["segment_id"]
            if segment_id not in self._entries:
                raise KeyError(f"feedback for unknown segment {segment_id!r}")
            self._bump(segment_id, Verdict(rec["verdict"]))
        else:
            raise ValueError(f"unknown record type {rtype!r}")

    def _apply_entry(self, entry: IndexEntry) -> None:
        existing = self._entries.get(entry.segment_id)
        if existing is not None:
            # re-insert: replace prediction fields, never the accumulated votes
            entry = replace(
                entry,
                correct_votes=existing.correct_votes,
                incorrect_votes=existing.incorrect_votes,
            )
            self._by_class[existing.predicted_class.label].discard(entry.segment_id)
        self._entries[entry.segment_id] = entry
        self._by_class.setdefault(entry.predicted_class.label, set()).add(entry.segment_id)

    def _bump(self, segment_id: str, verdict: Verdict) -> tuple[int, int]:
        entry = self._entries[segment_id]
        if verdict is Verdict.CORRECT:
            entry.correct_votes += 1
        else:
            entry.incorrect_votes += 1
        return entry.correct_votes, entry.incorrect_votes

    def _append(self, record: dict) -> None:
        if self._log is None:
            return
        self._log.write(_dumps(record))
        self._log.flush()
        if self.fsync:
            os.fsync(self._log.fileno())

    # -- mutations ----------------------------------------------------

    def insert(self, entry: IndexEntry) -> None:
        """Add or replace a segment. Re-inserts keep accumulated votes."""
        with self._lock:
            self._append(entry.to_record())
            self._apply_entry(entry)

    def record_feedback(self, event: FeedbackEvent) -> tuple[int, int]:
        """Apply one Correct/Incorrect vote; returns the new tallies."""
        with self._lock:
            if event.segment_id not in self._entries:
                raise SegmentNotFoundError(event.segment_id)
            self._append(event.to_record())
            return self._bump(event.segment_id, event.verdict)

    def compact(self) -> None:
        """Rewrite the log to one record per live entry, atomically.

        Feedback history is folded into the entry tallies, so compacting an
        already-compacted log is byte-identical.
        """
        if self.path is None:
            return
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                for entry in self._entries.values():
                    fh.write(_dumps(entry.to_record()))
                fh.flush()
                os.fsync(fh.fileno())
            if self._log is not None:
                self._log.close()
            os.replace(tmp, self.path)
            self._log = open(self.path, "a", encoding="utf-8")

    def close(self) -> None:
        with self._lock:
            if self._log is not None:
                self._log.close()
                self._log = None

    def __enter__(self) -> "ContentIndex":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- queries ------------------------------------------------------

    def get(self, segment_id: str) -> Optional[IndexEntry]:
        with self._lock:
            entry = self._entries.get(segment_id)
            return replace(entry) if entry is not None else None

    def __len__(self) -> int:
        return len(self._entries)

    def query_by_class_topk(self, class_label: str | SoundClass, k: int) -> list[IndexEntry]:
        """Highest-confidence entries of one class, ties by segment id."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        label = class_label.label if isinstance(class_label, SoundClass) else class_label
        with self._lock:
            ids = self._by_class.get(label, ())
            entries = sorted(
                (self._entries[sid] for sid in ids),
                key=lambda e: (-e.confidence, e.segment_id),
            )
            return [replace(e) for e in entries[:k]]

    def class_labels(self) -> list[str]:
        with self._lock:
            return sorted(label for label, ids in self._by_class.items() if ids)

    def stats(self) -> dict:
        with self._lock:
            per_class = {
                label: len(ids) for label, ids in sorted(self._by_class.items()) if ids
            }
            feedback = sum(e.correct_votes + e.incorrect_votes for e in self._entries.values())
            count = len(self._entries)
            return {
                "segment_count": count,
                "hours_indexed": count * SEGMENT_SECONDS / 3600.0,
                "per_class_counts": per_class,
                "feedback_count": feedback,
            }
