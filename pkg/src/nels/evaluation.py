"""Recognition precision over the highest-K indexed segments per class.

Two references exist for judging a retrieved segment: the crawl query
(correct iff the segment's crawl label equals the class) and human
feedback (correct iff Correct votes strictly outnumber Incorrect ones;
unvoted segments are not judged). Their per-class divergence estimates how
far the cheap query reference sits from human inspection.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from nels.index import ContentIndex, IndexEntry
from nels.vocab import SoundClass

DEFAULT_K = 40


class Reference(str, Enum):
    HUMAN = "human"
    QUERY = "query"


@dataclass
class PrecisionReport:
    class_label: str
    k: int
    reference: Reference
    judged: int
    correct: int

    @property
    def precision(self) -> Optional[float]:
        if self.judged == 0:
            return None
        return self.correct / self.judged


def _judge_human(entry: IndexEntry) -> Optional[bool]:
    """True/False for voted segments, None when unjudged. Ties are incorrect."""
    if entry.correct_votes + entry.incorrect_votes == 0:
        return None
    return entry.correct_votes > entry.incorrect_votes


def precision_at_k(
    index: ContentIndex,
    sound_class: str | SoundClass,
    k: int = DEFAULT_K,
    reference: Reference = Reference.HUMAN,
) -> PrecisionReport:
    """Precision of the top-k retrieved segments under one reference."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    label = sound_class.label if isinstance(sound_class, SoundClass) else sound_class
    top = index.query_by_class_topk(label, k)

    judged = 0
    correct = 0
    for entry in top:
        if reference is Reference.QUERY:
            judged += 1
            correct += entry.crawl_label == label
        else:
            verdict = _judge_human(entry)
            if verdict is None:
                continue
            judged += 1
            correct += verdict
    return PrecisionReport(class_label=label, k=k, reference=reference, judged=judged, correct=correct)


@dataclass
class DivergenceRow:
    class_label: str
    k: int
    p_human: Optional[float]
    judged_human: int
    p_query: Optional[float]

    @property
    def delta(self) -> Optional[float]:
        if self.p_human is None or self.p_query is None:
            return None
        return abs(self.p_human - self.p_query)


@dataclass
class DivergenceReport:
    rows: list[DivergenceRow]
    mean_abs_delta: Optional[float]
    undefined_classes: list[str]


def compare_references(
    index: ContentIndex,
    classes: Sequence[str | SoundClass],
    k: int = DEFAULT_K,
) -> DivergenceReport:
    """Per-class |P_human - P_query| and its mean where both are defined."""
    rows = []
    deltas = []
    undefined = []
    for sound_class in classes:
        human = precision_at_k(index, sound_class, k, Reference.HUMAN)
        query = precision_at_k(index, sound_class, k, Reference.QUERY)
        row = DivergenceRow(
            class_label=human.class_label,
            k=k,
            p_human=human.precision,
            judged_human=human.judged,
            p_query=query.precision,
        )
        rows.append(row)
        if row.delta is None:
            undefined.append(row.class_label)
        else:
            deltas.append(row.delta)
    mean = sum(deltas) / len(deltas) if deltas else None
    return DivergenceReport(rows=rows, mean_abs_delta=mean, undefined_classes=undefined)


def write_report_csv(report: DivergenceReport, path: str | Path) -> None:
    """CSV with header ``class,k,p_human,judged,p_query,delta``."""

    def fmt(value: Optional[float]) -> str:
        return "" if value is None else f"{value:.6f}"

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "k", "p_human", "judged", "p_query", "delta"])
        for row in report.rows:
            writer.writerow(
                [row.class_label, row.k, fmt(row.p_human), row.judged_human, fmt(row.p_query), fmt(row.delta)]
            )
