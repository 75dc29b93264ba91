"""Synthetic desk-scale corpora: tone and noise clips with manifests.

Used by the test suite and handy for demoing the full pipeline without any
real media: four default classes (tones at 440/1000/3000 Hz plus white
noise), seeded generation, optional crawler sidecars.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from nels import audio
from nels.audio import Waveform
from nels.vocab import Dataset, SoundClass, Vocabulary

DEFAULT_TONES = {"tone440": 440.0, "tone1000": 1000.0, "tone3000": 3000.0}
NOISE_LABEL = "white_noise"

DEFAULT_LABELS = sorted([*DEFAULT_TONES, NOISE_LABEL])


def tone_clip(
    freq_hz: float,
    duration_s: float = audio.SEGMENT_SECONDS,
    sample_rate: int = audio.CANONICAL_RATE,
    amplitude: float = 0.5,
    phase: float = 0.0,
) -> np.ndarray:
    t = np.arange(round(duration_s * sample_rate)) / sample_rate
    return amplitude * np.sin(2.0 * np.pi * freq_hz * t + phase)


def noise_clip(
    rng: np.random.Generator,
    duration_s: float = audio.SEGMENT_SECONDS,
    sample_rate: int = audio.CANONICAL_RATE,
    amplitude: float = 0.3,
) -> np.ndarray:
    n = round(duration_s * sample_rate)
    return np.clip(amplitude * rng.normal(0.0, 1.0, n), -1.0, 1.0)


def synth_clip(label: str, rng: np.random.Generator, duration_s: float, tones: dict) -> np.ndarray:
    """One randomized clip: tones vary in amplitude/phase + light noise."""
    if label in tones:
        clip = tone_clip(
            tones[label],
            duration_s=duration_s,
            amplitude=rng.uniform(0.3, 0.8),
            phase=rng.uniform(0.0, 2.0 * np.pi),
        )
        clip = clip + rng.normal(0.0, 0.01, clip.shape[0])
        return np.clip(clip, -1.0, 1.0)
    return noise_clip(rng, duration_s=duration_s, amplitude=rng.uniform(0.2, 0.6))


def default_vocabulary() -> Vocabulary:
    return Vocabulary.from_labels([(label, Dataset.ESC50) for label in DEFAULT_LABELS])


def generate_corpus(
    root: str | Path,
    labels: list[str] | None = None,
    clips_per_class: int = 50,
    duration_s: float = audio.SEGMENT_SECONDS,
    seed: int = 0,
    n_folds: int = 5,
    sidecars: bool = False,
    tones: dict | None = None,
) -> Path:
    """Write WAV clips plus a ``path,label,dataset,fold`` manifest.

    Returns the manifest path. Folds cycle 0..n_folds-1 per class, so any
    fold is a stratified split. With ``sidecars`` each clip also gets a
    ``<media_id>.meta`` file whose title contains "<label> sound", making
    the directory crawlable as a local corpus.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    labels = labels if labels is not None else DEFAULT_LABELS
    tones = tones if tones is not None else DEFAULT_TONES
    rng = np.random.default_rng(seed)

    rows = []
    for label in labels:
        for i in range(clips_per_class):
            media_id = f"{label}_{i:03d}"
            clip = synth_clip(label, rng, duration_s, tones)
            audio.save_canonical_wav(
                Waveform(clip, audio.CANONICAL_RATE), root / f"{media_id}.wav"
            )
            rows.append((f"{media_id}.wav", label, Dataset.ESC50.value, i % n_folds))
            if sidecars:
                (root / f"{media_id}.meta").write_text(
                    "\n".join(
                        [
                            f"title={label} sound clip {i}",
                            f"url=local://{media_id}",
                            f"duration={duration_s}",
                            f"uploader=synth",
                            f"keywords={label},synthetic",
                        ]
                    )
                    + "\n",
                    encoding="utf-8",
                )

    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "dataset", "fold"])
        writer.writerows(rows)
    return manifest


def synth_classes(labels: list[str] | None = None) -> list[SoundClass]:
    labels = labels if labels is not None else DEFAULT_LABELS
    return [SoundClass(label, Dataset.ESC50, i) for i, label in enumerate(sorted(labels))]
