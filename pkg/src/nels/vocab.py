"""Sound-class vocabulary: labels with dataset provenance and dense class ids.

The full production vocabulary unions four datasets (ESC50, US8K, TUT16,
AudioSet) for 605 classes in total. Label lists are loaded from CSV files;
this module only enforces the structural rules (unique labels, dense ids,
expected per-dataset sizes).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from nels.errors import VocabularyError


class Dataset(str, Enum):
    ESC50 = "ESC50"
    US8K = "US8K"
    TUT16 = "TUT16"
    AUDIOSET = "AUDIOSET"


#: Class counts of the four source datasets. Their union is the full
#: 605-label vocabulary (50 + 10 + 18 + 527).
DATASET_CLASS_COUNTS = {
    Dataset.ESC50: 50,
    Dataset.US8K: 10,
    Dataset.TUT16: 18,
    Dataset.AUDIOSET: 527,
}

FULL_VOCABULARY_SIZE = sum(DATASET_CLASS_COUNTS.values())


@dataclass(frozen=True)
class SoundClass:
    """One recognizable sound-event label."""

    label: str
    dataset: Dataset
    class_id: int


class Vocabulary:
    """An ordered set of SoundClasses with unique labels and ids 0..V-1."""

    def __init__(self, classes: Iterable[SoundClass]):
        self._classes = list(classes)
        self._by_label = {}
        for i, cls in enumerate(self._classes):
            if cls.class_id != i:
                raise VocabularyError(
                    f"class ids must be dense 0..{len(self._classes) - 1}, "
                    f"got {cls.class_id} at position {i}"
                )
            if cls.label in self._by_label:
                raise VocabularyError(f"duplicate label {cls.label!r}")
            self._by_label[cls.label] = cls

    @classmethod
    def from_labels(cls, pairs: Iterable[tuple[str, Dataset]]) -> "Vocabulary":
        """Build a vocabulary assigning dense ids in the given order."""
        classes = [
            SoundClass(label=label, dataset=Dataset(dataset), class_id=i)
            for i, (label, dataset) in enumerate(pairs)
        ]
        return cls(classes)

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        """Load a vocabulary from a CSV file with header ``label,dataset``."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "label" not in reader.fieldnames:
                raise VocabularyError(f"{path}: expected CSV header with a 'label' column")
            pairs = []
            for row in reader:
                dataset = row.get("dataset") or Dataset.ESC50.value
                pairs.append((row["label"], Dataset(dataset)))
        return cls.from_labels(pairs)

    def save(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "dataset"])
            for c in self._classes:
                writer.writerow([c.label, c.dataset.value])

    def __len__(self) -> int:
        return len(self._classes)

    def __iter__(self) -> Iterator[SoundClass]:
        return iter(self._classes)

    def __contains__(self, label: str) -> bool:
        return label in self._by_label

    def get(self, label: str) -> SoundClass:
        try:
            return self._by_label[label]
        except KeyError:
            raise VocabularyError(f"unknown label {label!r}") from None

    def by_id(self, class_id: int) -> SoundClass:
        return self._classes[class_id]

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self._classes]

    def dataset_counts(self) -> dict[Dataset, int]:
        counts = {d: 0 for d in Dataset}
        for c in self._classes:
            counts[c.dataset] += 1
        return counts

    def is_full(self) -> bool:
        """True when this vocabulary has the size of the four-dataset union."""
        counts = self.dataset_counts()
        return all(counts[d] == n for d, n in DATASET_CLASS_COUNTS.items())
