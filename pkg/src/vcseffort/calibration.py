"""Threshold calibration: confusion counts, retrieval measures, and goodness sweeps."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import CalibrationError, ConfigError, ParameterError
from .survey import LABEL_FULL, SurveyLabel

SWEEP_CSV_HEADER = (
    "theta",
    "tp",
    "fp",
    "fn",
    "tn",
    "precision",
    "recall",
    "accuracy",
    "f_measure",
    "goodness",
    "compensation",
)

SELECT_MIN = "min"
SELECT_MAX = "max"
SELECT_LOWER_MEDIAN = "lower-median"
SELECTION_POLICIES = (SELECT_MIN, SELECT_MAX, SELECT_LOWER_MEDIAN)


@dataclass(frozen=True)
class ThresholdMetrics:
    theta: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    accuracy: float
    f_measure: float
    goodness: float
    compensation: int  # fn - fp: positive when misses outweigh false alarms


@dataclass(frozen=True)
class ThetaSelection:
    argmax_thetas: tuple[int, ...]
    argmax_range: tuple[int, int]
    selected_theta: int
    max_goodness: float
    policy: str


def confusion_at(
    theta: int,
    counts: Mapping[str, int],
    labels: Sequence[SurveyLabel],
) -> tuple[int, int, int, int]:
    """Confusion counts (tp, fp, fn, tn) for predicting full-time as activity >= theta.

    Developers missing from ``counts`` have zero activity.
    """
    if theta < 1:
        raise ParameterError(f"theta must be >= 1, got {theta}")
    tp = fp = fn = tn = 0
    for label in labels:
        predicted_full = counts.get(label.developer_id, 0) >= theta
        if label.label == LABEL_FULL:
            if predicted_full:
                tp += 1
            else:
                fn += 1
        else:
            if predicted_full:
                fp += 1
            else:
                tn += 1
    return tp, fp, fn, tn


def metrics_at(
    theta: int,
    counts: Mapping[str, int],
    labels: Sequence[SurveyLabel],
) -> ThresholdMetrics:
    """All measures at one threshold.

    Precision and recall default to 1 on a zero denominator (nothing retrieved,
    or nothing to retrieve, is not an error). F is 0 when both are 0. Goodness
    1 - |fp - fn| / (tp + fn + fp) rewards compensating errors and is defined
    as 1 when its denominator is zero.
    """
    tp, fp, fn, tn = confusion_at(theta, counts, labels)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 1.0
    f_measure = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    involved = tp + fn + fp
    goodness = 1.0 - abs(fp - fn) / involved if involved else 1.0
    return ThresholdMetrics(
        theta, tp, fp, fn, tn, precision, recall, accuracy, f_measure, goodness, fn - fp
    )


def sweep(
    counts: Mapping[str, int],
    labels: Sequence[SurveyLabel],
    theta_max: int | None = None,
) -> list[ThresholdMetrics]:
    """Metrics for every integer threshold 1..theta_max.

    The default upper bound is one past the highest labeled developer's
    activity, so the sweep always reaches the degenerate nobody-is-full-time
    end.
    """
    if not labels:
        raise CalibrationError("cannot sweep thresholds without labeled developers")
    if theta_max is None:
        theta_max = max(counts.get(label.developer_id, 0) for label in labels) + 1
    if theta_max < 1:
        raise ParameterError(f"theta_max must be >= 1, got {theta_max}")
    return [metrics_at(theta, counts, labels) for theta in range(1, theta_max + 1)]


def select_theta(
    metrics: Sequence[ThresholdMetrics],
    policy: str = SELECT_LOWER_MEDIAN,
) -> ThetaSelection:
    """Pick a threshold from the goodness argmax set.

    The argmax set is reported in full; the policy picks min, max, or the
    lower median (the default breaks even-sized ties toward the smaller
    threshold).
    """
    if not metrics:
        raise CalibrationError("cannot select a threshold from an empty sweep")
    if policy not in SELECTION_POLICIES:
        raise ConfigError(f"unknown selection policy {policy!r}")
    best = max(m.goodness for m in metrics)
    argmax = tuple(m.theta for m in metrics if m.goodness == best)
    if policy == SELECT_MIN:
        selected = argmax[0]
    elif policy == SELECT_MAX:
        selected = argmax[-1]
    else:
        selected = argmax[(len(argmax) - 1) // 2]
    return ThetaSelection(argmax, (argmax[0], argmax[-1]), selected, best, policy)


def sweep_to_csv(metrics: Sequence[ThresholdMetrics]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_CSV_HEADER)
    for m in metrics:
        writer.writerow(
            [
                m.theta,
                m.tp,
                m.fp,
                m.fn,
                m.tn,
                f"{m.precision:.6f}",
                f"{m.recall:.6f}",
                f"{m.accuracy:.6f}",
                f"{m.f_measure:.6f}",
                f"{m.goodness:.6f}",
                m.compensation,
            ]
        )
    return buffer.getvalue()
