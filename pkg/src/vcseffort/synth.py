"""Seeded synthetic developer populations with a planted full-time threshold.

Generated activity is skewed (discrete power law): full-timers draw from
[theta_true, 10 * theta_true], everyone else from [1, theta_true - 1], so the
planted threshold separates the two groups perfectly before label noise.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .activity import date_to_epoch, subtract_months
from .errors import GenerationError
from .ingest import CommitRecord, to_jsonl_line, to_pipe_line
from .survey import (
    LABEL_FULL,
    LABEL_NON_FULL,
    PROVENANCE_SELF,
    SURVEY_HEADER,
    SurveyLabel,
)


@dataclass(frozen=True)
class PopulationSpec:
    n_fulltime: int
    n_other: int
    theta_true: int
    skew_exponent: float = 2.0
    label_noise: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_fulltime < 0 or self.n_other < 0:
            raise GenerationError("population sizes must be >= 0")
        if self.n_fulltime + self.n_other == 0:
            raise GenerationError("population must contain at least one developer")
        if self.theta_true < 1:
            raise GenerationError(f"theta_true must be >= 1, got {self.theta_true}")
        if self.n_other > 0 and self.theta_true < 2:
            raise GenerationError(
                "theta_true must be >= 2 when non-full-time developers exist"
            )
        if not 0.0 <= self.label_noise <= 1.0:
            raise GenerationError(f"label_noise must be in [0, 1], got {self.label_noise}")
        if self.skew_exponent <= 0:
            raise GenerationError(f"skew_exponent must be > 0, got {self.skew_exponent}")


@dataclass(frozen=True)
class GroundTruth:
    theta_true: int
    min_fulltime_activity: int | None
    max_other_activity: int | None
    flipped: tuple[str, ...]  # developer ids whose label was noise-inverted

    def separating_range(self) -> tuple[int, int] | None:
        """Thresholds that classify the pre-noise population perfectly."""
        if self.min_fulltime_activity is None:
            return None
        low = (self.max_other_activity or 0) + 1
        return (low, self.min_fulltime_activity)


@dataclass(frozen=True)
class SyntheticPopulation:
    spec: PopulationSpec
    counts: dict[str, int]  # developer id -> activity in the generation window
    labels: tuple[SurveyLabel, ...]
    ground_truth: GroundTruth


def _power_law_values(rng: random.Random, low: int, high: int, exponent: float, size: int) -> list[int]:
    """Inverse-CDF sampling of integers in [low, high] with weight k^-exponent."""
    support = range(low, high + 1)
    cumulative = []
    acc = 0.0
    for k in support:
        acc += k**-exponent
        cumulative.append(acc)
    total = cumulative[-1]
    values = []
    for _ in range(size):
        target = rng.random() * total
        # Linear scan is fine: supports stay small (tens to hundreds of values).
        for k, bound in zip(support, cumulative):
            if target <= bound:
                values.append(k)
                break
        else:
            values.append(high)
    return values


def _developer_id(index: int) -> str:
    return f"dev{index:05d}@synth.example"


def generate(spec: PopulationSpec) -> SyntheticPopulation:
    """Deterministically generate a labeled population from the spec's seed."""
    spec.validate()
    rng = random.Random(spec.seed)

    fulltime_ids = [_developer_id(i) for i in range(spec.n_fulltime)]
    other_ids = [
        _developer_id(i) for i in range(spec.n_fulltime, spec.n_fulltime + spec.n_other)
    ]

    counts: dict[str, int] = {}
    fulltime_values = _power_law_values(
        rng, spec.theta_true, spec.theta_true * 10, spec.skew_exponent, len(fulltime_ids)
    )
    for developer_id, value in zip(fulltime_ids, fulltime_values):
        counts[developer_id] = value
    other_values = (
        _power_law_values(rng, 1, spec.theta_true - 1, spec.skew_exponent, len(other_ids))
        if other_ids
        else []
    )
    for developer_id, value in zip(other_ids, other_values):
        counts[developer_id] = value

    flipped = []
    labels = []
    true_label = {developer_id: LABEL_FULL for developer_id in fulltime_ids}
    true_label.update({developer_id: LABEL_NON_FULL for developer_id in other_ids})
    for developer_id in fulltime_ids + other_ids:
        label = true_label[developer_id]
        if spec.label_noise > 0 and rng.random() < spec.label_noise:
            label = LABEL_NON_FULL if label == LABEL_FULL else LABEL_FULL
            flipped.append(developer_id)
        labels.append(SurveyLabel(developer_id, label, PROVENANCE_SELF, True))

    ground_truth = GroundTruth(
        spec.theta_true,
        min((counts[d] for d in fulltime_ids), default=None),
        max((counts[d] for d in other_ids), default=None),
        tuple(flipped),
    )
    return SyntheticPopulation(spec, counts, tuple(labels), ground_truth)


def _fixture_records(
    population: SyntheticPopulation, window_start: date, window_end: date
) -> list[CommitRecord]:
    start_epoch = date_to_epoch(window_start)
    span = date_to_epoch(window_end) - start_epoch
    records = []
    for index, (developer_id, count) in enumerate(population.counts.items()):
        name = f"Synth Dev {index:05d}"
        for k in range(count):
            # Spread commits evenly across the window, away from both edges.
            timestamp = start_epoch + ((2 * k + 1) * span) // (2 * count)
            records.append(
                CommitRecord(
                    hash=f"{index:06x}{k:08x}",
                    author_name=name,
                    author_email=developer_id,
                    author_timestamp=timestamp,
                    is_merge=False,
                )
            )
    return records


def write_fixture(
    population: SyntheticPopulation,
    out_dir: str | Path,
    anchor: date,
    period_months: int = 6,
    log_format: str = "pipe",
) -> dict[str, Path]:
    """Materialize a population as a commit log, survey CSV, and ground-truth JSON.

    Commits land inside [anchor - period_months, anchor); the survey is dated
    at the anchor, so calibrating on these files reproduces the generated
    activity counts exactly.
    """
    if log_format not in ("pipe", "jsonl"):
        raise GenerationError(f"unknown log format {log_format!r}")
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    window_start = subtract_months(anchor, period_months)
    records = _fixture_records(population, window_start, anchor)

    log_path = directory / ("commits.log" if log_format == "pipe" else "commits.jsonl")
    to_line = to_pipe_line if log_format == "pipe" else to_jsonl_line
    with open(log_path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(to_line(record) + "\n")

    survey_path = directory / "survey.csv"
    with open(survey_path, "w", encoding="utf-8") as handle:
        handle.write(",".join(SURVEY_HEADER) + "\n")
        for label in population.labels:
            self_class = "full" if label.label == LABEL_FULL else "part"
            handle.write(
                f"{label.developer_id},{self_class},,{anchor.isoformat()},\n"
            )

    truth_path = directory / "ground_truth.json"
    truth = {
        "theta_true": population.ground_truth.theta_true,
        "min_fulltime_activity": population.ground_truth.min_fulltime_activity,
        "max_other_activity": population.ground_truth.max_other_activity,
        "separating_range": population.ground_truth.separating_range(),
        "flipped": list(population.ground_truth.flipped),
        "seed": population.spec.seed,
        "counts": population.counts,
    }
    with open(truth_path, "w", encoding="utf-8") as handle:
        json.dump(truth, handle, indent=2, sort_keys=True)
        handle.write("\n")

    return {"log": log_path, "survey": survey_path, "ground_truth": truth_path}
