"""Bounded-queue indexing pipeline: crawl -> features -> classify -> index.

Stages are connected by bounded queues, so a slow downstream stage blocks
the producer instead of letting work pile up (the system is meant to run
continuously). Feature extraction fans out over a small worker pool; all
index writes happen on one indexer thread.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, field

from nels import audio, classifier
from nels.classifier import Model
from nels.crawler import CrawlCounters, CrawledMedia, CrawlJob, MediaSource, crawl_once
from nels.errors import NelsError, SourceError
from nels.index import ContentIndex, IndexEntry

logger = logging.getLogger(__name__)

_DONE = object()


@dataclass
class PipelineStats:
    media_crawled: int = 0
    segments_indexed: int = 0
    crawl_counters: CrawlCounters = field(default_factory=CrawlCounters)
    failed_media: int = 0
    failed_jobs: int = 0


def run_pipeline(
    jobs: list[CrawlJob],
    source: MediaSource,
    model: Model,
    index: ContentIndex,
    *,
    queue_size: int = 8,
    feature_workers: int = 2,
) -> PipelineStats:
    """Crawl every job and index each admitted segment with its prediction."""
    stats = PipelineStats()
    stats_lock = threading.Lock()
    media_q: queue.Queue = queue.Queue(maxsize=queue_size)
    feature_q: queue.Queue = queue.Queue(maxsize=queue_size)

    def producer():
        try:
            for job in jobs:
                try:
                    batch = crawl_once(job, source, stats.crawl_counters)
                except SourceError as exc:
                    logger.warning("crawl job %r failed: %s", job.query, exc)
                    with stats_lock:
                        stats.failed_jobs += 1
                    continue
                for item in batch:
                    media_q.put(item)  # blocks when downstream is saturated
                    with stats_lock:
                        stats.media_crawled += 1
        finally:
            for _ in range(feature_workers):
                media_q.put(_DONE)

    def feature_worker():
        try:
            while True:
                item = media_q.get()
                if item is _DONE:
                    break
                try:
                    _extract(item)
                except NelsError as exc:
                    logger.warning("media %s failed: %s", item.record.media_id, exc)
                    with stats_lock:
                        stats.failed_media += 1
        finally:
            feature_q.put(_DONE)

    def _extract(item: CrawledMedia):
        samples, rate = audio.load_wav(item.audio_uri)
        waveform = audio.canonicalize_audio(samples, rate)
        for seg in audio.segment_waveform(waveform, item.record.media_id):
            features = audio.log_mel_features(seg)
            feature_q.put((item, seg, features))

    def indexer():
        pending_workers = feature_workers
        while pending_workers:
            got = feature_q.get()
            if got is _DONE:
                pending_workers -= 1
                continue
            item, seg, features = got
            prediction = classifier.predict(model, features)
            entry = IndexEntry(
                segment_id=seg.segment_id,
                media_id=seg.media_id,
                offset_s=seg.offset_s,
                predicted_class=prediction.argmax_class,
                confidence=prediction.confidence,
                top_scores=prediction.top_scores(model.class_list, k=5),
                crawl_label=item.crawl_label,
                metadata=item.record,
                indexed_at=time.time(),
            )
            index.insert(entry)
            with stats_lock:
                stats.segments_indexed += 1

    threads = [threading.Thread(target=producer, name="crawl-producer")]
    threads += [
        threading.Thread(target=feature_worker, name=f"features-{i}")
        for i in range(feature_workers)
    ]
    threads.append(threading.Thread(target=indexer, name="indexer"))
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return stats
