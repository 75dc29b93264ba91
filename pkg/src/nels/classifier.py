"""Multi-class sound-event recognition over pooled log-mel features.

The reference model is multinomial logistic regression trained by
full-batch gradient descent; CNN-style models can be plugged in behind the
same train/predict surface. Features are the per-band mean and standard
deviation of a segment's 60 x T log-mel matrix (120 values), z-scored with
statistics frozen at training time.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from nels import audio
from nels.audio import FeatureMatrix
from nels.errors import (
    ContractViolationError,
    ManifestError,
    ModelFormatError,
    TrainingError,
)
from nels.vocab import Dataset, SoundClass, Vocabulary

POOLED_DIM = 2 * audio.N_MELS

MODEL_MAGIC = b"NELSMODEL1\n"

MODEL_KIND_SOFTMAX = "softmax-pooled-v1"


def pool_features(fm: FeatureMatrix) -> np.ndarray:
    """Reduce a 60 x T feature matrix to 120 values: per-band mean ++ std.

    Standard deviations are population (ddof=0). No scaling happens here;
    train/predict apply the stored z-score statistics.
    """
    v = fm.values
    if v.ndim != 2 or v.shape[0] != audio.N_MELS or v.shape[1] < 1:
        raise ContractViolationError(f"expected a {audio.N_MELS} x T matrix with T >= 1, got {v.shape}")
    return np.concatenate([v.mean(axis=1), v.std(axis=1)])


@dataclass(frozen=True)
class FeatureStats:
    """Z-score statistics of the training set, stored with the model."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray) -> "FeatureStats":
        std = x.std(axis=0)
        std = np.where(std < 1e-8, 1.0, std)
        return cls(mean=x.mean(axis=0), std=std)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


@dataclass(frozen=True)
class Hyper:
    """Gradient-descent hyperparameters."""

    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 1e-4


@dataclass
class TrainMeta:
    seed: int
    epochs: int
    learning_rate: float
    l2: float
    loss_history: list[float] = field(default_factory=list)


@dataclass
class Model:
    kind: str
    weights: np.ndarray  # V x 120
    bias: np.ndarray  # V
    class_list: list[SoundClass]
    feature_stats: FeatureStats
    train_meta: TrainMeta

    @property
    def n_classes(self) -> int:
        return len(self.class_list)

    def save(self, path: str | Path) -> None:
        """Serialize with a magic header; arrays round-trip bit-exactly."""
        buf = io.BytesIO()
        np.savez(
            buf,
            kind=np.array(self.kind),
            weights=self.weights,
            bias=self.bias,
            labels=np.array([c.label for c in self.class_list]),
            datasets=np.array([c.dataset.value for c in self.class_list]),
            stats_mean=self.feature_stats.mean,
            stats_std=self.feature_stats.std,
            seed=np.array(self.train_meta.seed),
            epochs=np.array(self.train_meta.epochs),
            learning_rate=np.array(self.train_meta.learning_rate),
            l2=np.array(self.train_meta.l2),
            loss_history=np.array(self.train_meta.loss_history),
        )
        with open(path, "wb") as fh:
            fh.write(MODEL_MAGIC)
            fh.write(buf.getvalue())

    @classmethod
    def load(cls, path: str | Path) -> "Model":
        with open(path, "rb") as fh:
            magic = fh.read(len(MODEL_MAGIC))
            if magic != MODEL_MAGIC:
                raise ModelFormatError(f"{path}: missing {MODEL_MAGIC!r} magic header")
            payload = fh.read()
        try:
            data = np.load(io.BytesIO(payload), allow_pickle=False)
        except Exception as exc:
            raise ModelFormatError(f"{path}: unreadable model payload: {exc}") from exc
        classes = [
            SoundClass(label=str(lbl), dataset=Dataset(str(ds)), class_id=i)
            for i, (lbl, ds) in enumerate(zip(data["labels"], data["datasets"]))
        ]
        return cls(
            kind=str(data["kind"]),
            weights=data["weights"],
            bias=data["bias"],
            class_list=classes,
            feature_stats=FeatureStats(mean=data["stats_mean"], std=data["stats_std"]),
            train_meta=TrainMeta(
                seed=int(data["seed"]),
                epochs=int(data["epochs"]),
                learning_rate=float(data["learning_rate"]),
                l2=float(data["l2"]),
                loss_history=[float(v) for v in data["loss_history"]],
            ),
        )


@dataclass
class Prediction:
    """Per-class probabilities for one segment."""

    scores: np.ndarray
    argmax_class: SoundClass
    confidence: float

    def top_scores(self, classes: Sequence[SoundClass], k: int = 5) -> list[tuple[str, float]]:
        order = sorted(range(len(classes)), key=lambda i: (-self.scores[i], classes[i].label))
        return [(classes[i].label, float(self.scores[i])) for i in order[:k]]


@dataclass
class LabeledFeatures:
    """An in-memory labeled dataset of pooled (unscaled) feature vectors."""

    x: np.ndarray  # n x 120
    y: np.ndarray  # n, int class ids
    classes: list[SoundClass]

    def __post_init__(self):
        if self.x.shape[0] != self.y.shape[0]:
            raise ManifestError("feature/label count mismatch")
        if self.x.shape[0] and (self.y.min() < 0 or self.y.max() >= len(self.classes)):
            raise ManifestError("label id outside the class list")

    def __len__(self) -> int:
        return self.x.shape[0]


def load_manifest(
    manifest_path: str | Path,
    vocabulary: Optional[Vocabulary] = None,
    folds: Optional[set[int]] = None,
) -> LabeledFeatures:
    """Load a ``path,label,dataset,fold`` manifest into pooled features.

    Paths are relative to the manifest. Every segment of a listed clip
    becomes one example with the clip's label. With ``vocabulary`` given,
    unknown labels are an error; otherwise classes are derived from the
    manifest (sorted by label).
    """
    manifest_path = Path(manifest_path)
    rows = []
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"path", "label", "dataset", "fold"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise ManifestError(f"{manifest_path}: expected CSV header path,label,dataset,fold")
        for row in reader:
            if folds is not None and int(row["fold"]) not in folds:
                continue
            rows.append(row)
    if not rows:
        raise ManifestError(f"{manifest_path}: no usable rows")

    if vocabulary is not None:
        classes = list(vocabulary)
        for row in rows:
            if row["label"] not in vocabulary:
                raise ManifestError(f"{manifest_path}: label {row['label']!r} not in vocabulary")
    else:
        seen = {}
        for row in rows:
            seen.setdefault(row["label"], row["dataset"])
        classes = [
            SoundClass(label=lbl, dataset=Dataset(seen[lbl]), class_id=i)
            for i, lbl in enumerate(sorted(seen))
        ]
    id_of = {c.label: c.class_id for c in classes}

    xs, ys = [], []
    for row in rows:
        samples, rate = audio.load_wav(manifest_path.parent / row["path"])
        waveform = audio.canonicalize_audio(samples, rate)
        for seg in audio.segment_waveform(waveform, media_id=Path(row["path"]).stem):
            xs.append(pool_features(audio.log_mel_features(seg)))
            ys.append(id_of[row["label"]])
    return LabeledFeatures(x=np.array(xs), y=np.array(ys, dtype=np.int64), classes=classes)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def loss_and_grads(
    weights: np.ndarray,
    bias: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy + (l2/2)||W||^2 and its analytic gradients.

    Kept as a pure function so the finite-difference check can drive it.
    """
    n = x.shape[0]
    probs = _softmax(x @ weights.T + bias)
    nll = -np.log(np.maximum(probs[np.arange(n), y], 1e-300)).mean()
    loss = nll + 0.5 * l2 * float((weights**2).sum())

    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grad_w = delta.T @ x + l2 * weights
    grad_b = delta.sum(axis=0)
    return float(loss), grad_w, grad_b


def train_softmax(
    dataset: LabeledFeatures,
    hyper: Hyper = Hyper(),
    *,
    seed: int,
) -> Model:
    """Full-batch gradient descent on cross-entropy with L2 weight decay.

    Deterministic for a given seed: fixed initialization, fixed iteration
    order, no data-dependent reductions. The recorded loss history has one
    entry per epoch plus the final loss.
    """
    if len(dataset) == 0:
        raise TrainingError("empty training set")
    present = np.unique(dataset.y)
    if present.size < 2:
        raise TrainingError(f"need at least 2 classes present, got {present.size}")

    v = len(dataset.classes)
    stats = FeatureStats.fit(dataset.x)
    x = stats.apply(dataset.x)
    y = dataset.y

    rng = np.random.default_rng(seed)
    weights = rng.normal(0.0, 0.01, size=(v, POOLED_DIM))
    bias = np.zeros(v)

    history = []
    for _ in range(hyper.epochs):
        loss, grad_w, grad_b = loss_and_grads(weights, bias, x, y, hyper.l2)
        history.append(loss)
        weights = weights - hyper.learning_rate * grad_w
        bias = bias - hyper.learning_rate * grad_b
    final_loss, _, _ = loss_and_grads(weights, bias, x, y, hyper.l2)
    history.append(final_loss)

    return Model(
        kind=MODEL_KIND_SOFTMAX,
        weights=weights,
        bias=bias,
        class_list=list(dataset.classes),
        feature_stats=stats,
        train_meta=TrainMeta(
            seed=seed,
            epochs=hyper.epochs,
            learning_rate=hyper.learning_rate,
            l2=hyper.l2,
            loss_history=history,
        ),
    )


def train(
    manifest: str | Path | LabeledFeatures,
    hyper: Hyper = Hyper(),
    *,
    seed: int,
    vocabulary: Optional[Vocabulary] = None,
) -> Model:
    """Train from a manifest file or an in-memory dataset."""
    if isinstance(manifest, LabeledFeatures):
        dataset = manifest
    else:
        dataset = load_manifest(manifest, vocabulary=vocabulary)
    return train_softmax(dataset, hyper, seed=seed)


def predict_pooled(model: Model, pooled: np.ndarray) -> Prediction:
    """Prediction from an already-pooled 120-value vector."""
    if pooled.shape != (model.weights.shape[1],):
        raise ContractViolationError(
            f"pooled feature shape {pooled.shape} does not match model {model.weights.shape}"
        )
    scores = _softmax(model.weights @ model.feature_stats.apply(pooled) + model.bias)
    idx = int(np.argmax(scores))
    return Prediction(
        scores=scores,
        argmax_class=model.class_list[idx],
        confidence=float(scores[idx]),
    )


def predict(model: Model, fm: FeatureMatrix) -> Prediction:
    """Class probabilities for one segment's feature matrix."""
    return predict_pooled(model, pool_features(fm))


def dominant_from_scores(
    score_rows: np.ndarray, classes: Sequence[SoundClass]
) -> SoundClass:
    """Class with the largest score sum; ties go to the smaller label."""
    totals = score_rows.sum(axis=0)
    best = min(range(len(classes)), key=lambda i: (-totals[i], classes[i].label))
    return classes[best]


def dominant_sound(
    model: Model, segments: Sequence[FeatureMatrix]
) -> tuple[SoundClass, list[Prediction]]:
    """Summarize a whole recording by its per-segment score sums."""
    if len(segments) == 0:
        raise ValueError("dominant_sound needs at least one segment")
    predictions = [predict(model, fm) for fm in segments]
    scores = np.stack([p.scores for p in predictions])
    return dominant_from_scores(scores, model.class_list), predictions
