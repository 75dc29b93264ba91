"""Semi-supervised self-training over unlabeled segment features.

Each round pseudo-labels the unlabeled items the current model is
confident about (argmax class, probability >= the threshold), retrains
from scratch on base + pseudo-labeled data, and measures held-out
precision before/after. The loop accepts a round only when overall
precision does not decrease, and stops once improvement plateaus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from nels.audio import FeatureMatrix
from nels.classifier import (
    Hyper,
    LabeledFeatures,
    Model,
    pool_features,
    predict_pooled,
    train_softmax,
)
from nels.errors import ConfigurationError


@dataclass
class SelfTrainConfig:
    eval_split: LabeledFeatures
    confidence_threshold: float = 0.85
    max_rounds: int = 5
    plateau_patience: int = 3

    def __post_init__(self):
        if not 0.0 < self.confidence_threshold < 1.0:
            raise ConfigurationError(
                f"confidence threshold must be in (0, 1), got {self.confidence_threshold}"
            )


@dataclass
class RoundReport:
    round_index: int
    pseudo_count: int
    precision_before: float
    precision_after: float
    per_class_before: dict[str, Optional[float]]
    per_class_after: dict[str, Optional[float]]
    model: Model = field(repr=False, default=None)
    accepted: Optional[bool] = None


def evaluate_precision(
    model: Model, data: LabeledFeatures
) -> tuple[float, dict[str, Optional[float]]]:
    """(overall precision, per-class precision) on a labeled split.

    Overall is micro precision, i.e. accuracy for single-label data;
    per-class precision is undefined (None) when the class is never
    predicted.
    """
    predicted = np.array([predict_pooled(model, row).argmax_class.class_id for row in data.x])
    overall = float((predicted == data.y).mean())
    per_class: dict[str, Optional[float]] = {}
    for cls in model.class_list:
        mask = predicted == cls.class_id
        if not mask.any():
            per_class[cls.label] = None
        else:
            per_class[cls.label] = float((data.y[mask] == cls.class_id).mean())
    return overall, per_class


def pseudo_label(
    model: Model, unlabeled: Sequence[FeatureMatrix], threshold: float
) -> tuple[np.ndarray, np.ndarray]:
    """Pooled features and hard labels of the confidently predicted items."""
    xs, ys = [], []
    for fm in unlabeled:
        pooled = pool_features(fm)
        pred = predict_pooled(model, pooled)
        if pred.confidence >= threshold:
            xs.append(pooled)
            ys.append(pred.argmax_class.class_id)
    if not xs:
        return np.empty((0, model.weights.shape[1])), np.empty(0, dtype=np.int64)
    return np.array(xs), np.array(ys, dtype=np.int64)


def self_train_round(
    model: Model,
    unlabeled: Sequence[FeatureMatrix],
    cfg: SelfTrainConfig,
    base: LabeledFeatures,
    round_index: int = 0,
) -> tuple[Model, RoundReport]:
    """One pseudo-label + retrain cycle; acceptance is the caller's call."""
    before, per_class_before = evaluate_precision(model, cfg.eval_split)

    pseudo_x, pseudo_y = pseudo_label(model, unlabeled, cfg.confidence_threshold)
    augmented = LabeledFeatures(
        x=np.vstack([base.x, pseudo_x]),
        y=np.concatenate([base.y, pseudo_y]),
        classes=base.classes,
    )
    hyper = Hyper(
        learning_rate=model.train_meta.learning_rate,
        epochs=model.train_meta.epochs,
        l2=model.train_meta.l2,
    )
    new_model = train_softmax(augmented, hyper, seed=model.train_meta.seed)
    after, per_class_after = evaluate_precision(new_model, cfg.eval_split)

    report = RoundReport(
        round_index=round_index,
        pseudo_count=int(pseudo_x.shape[0]),
        precision_before=before,
        precision_after=after,
        per_class_before=per_class_before,
        per_class_after=per_class_after,
        model=new_model,
    )
    return new_model, report


def run_self_training(
    cfg: SelfTrainConfig,
    base: LabeledFeatures,
    pool: Sequence[FeatureMatrix],
    model: Model,
) -> list[RoundReport]:
    """Iterate rounds until plateau or the round budget runs out.

    A round is accepted iff held-out precision does not decrease; only
    accepted models carry into the next round. ``plateau_patience``
    consecutive rounds without strict improvement end the loop. Every
    round, rejected ones included, appears in the returned reports.
    """
    current = model
    plateau = 0
    reports: list[RoundReport] = []
    for i in range(cfg.max_rounds):
        candidate, report = self_train_round(current, pool, cfg, base, round_index=i)
        report.accepted = report.precision_after >= report.precision_before
        if report.accepted:
            current = candidate
        improved = report.precision_after > report.precision_before
        plateau = 0 if improved else plateau + 1
        reports.append(report)
        if plateau >= cfg.plateau_patience:
            break
    return reports


def final_model(baseline: Model, reports: Sequence[RoundReport]) -> Model:
    """The last accepted round's model, or the baseline if none passed."""
    for report in reversed(reports):
        if report.accepted:
            return report.model
    return baseline
