"""Activity aggregation: bucketing commits into fixed-length periods per developer."""

from __future__ import annotations

import calendar
import csv
import io
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, ParameterError
from .ingest import CommitRecord

METRIC_COMMITS = "commits"
METRIC_ACTIVE_DAYS = "active-days"
METRICS = (METRIC_COMMITS, METRIC_ACTIVE_DAYS)

ALIGNMENT_CALENDAR = "calendar"
ALIGNMENT_ROLLING = "rolling"

ACTIVITY_CSV_HEADER = ("developer_id", "period_label", "count")


def subtract_months(day: date, months: int) -> date:
    """Calendar-month subtraction with day clamping (Mar 31 - 1 month = Feb 28/29)."""
    total = day.year * 12 + (day.month - 1) - months
    year, month_index = divmod(total, 12)
    month = month_index + 1
    last_day = calendar.monthrange(year, month)[1]
    return date(year, month, min(day.day, last_day))


def date_to_epoch(day: date) -> int:
    """Midnight UTC at the start of the given day, as epoch seconds."""
    return calendar.timegm(day.timetuple())


def epoch_to_utc_date(timestamp: int) -> date:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date()


@dataclass(frozen=True)
class PeriodSpec:
    """Period layout: calendar half-years, or rolling windows ending at an anchor date."""

    length_months: int = 6
    alignment: str = ALIGNMENT_CALENDAR
    anchor: date | None = None

    def validate(self) -> None:
        if self.length_months < 1:
            raise ConfigError(f"period length must be >= 1 month, got {self.length_months}")
        if self.alignment not in (ALIGNMENT_CALENDAR, ALIGNMENT_ROLLING):
            raise ConfigError(f"unknown alignment {self.alignment!r}")
        if self.alignment == ALIGNMENT_CALENDAR and self.length_months != 6:
            raise ConfigError("calendar alignment supports only 6-month periods")
        if self.alignment == ALIGNMENT_ROLLING and self.anchor is None:
            raise ConfigError("rolling alignment requires an anchor date")


@dataclass
class ActivityMatrix:
    """Per-developer, per-period activity counts.

    ``period_labels`` is chronological; rows hold only non-zero cells.
    ``overflow_commits`` counts commits at or after the rolling anchor, which
    belong to no period; with calendar alignment it is always zero.
    """

    metric: str
    period_months: int
    period_labels: list[str]
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    overflow_commits: int = 0

    def cell(self, developer_id: str, period_label: str) -> int:
        return self.counts.get(developer_id, {}).get(period_label, 0)

    def developers(self) -> list[str]:
        return sorted(self.counts)

    def total(self) -> int:
        return sum(sum(row.values()) for row in self.counts.values())

    def to_csv(self) -> str:
        order = {label: i for i, label in enumerate(self.period_labels)}
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(ACTIVITY_CSV_HEADER)
        for developer_id in self.developers():
            row = self.counts[developer_id]
            for label in sorted(row, key=order.__getitem__):
                writer.writerow([developer_id, label, row[label]])
        return buffer.getvalue()


def semester_index(day: date) -> int:
    return day.year * 2 + (0 if day.month <= 6 else 1)


def semester_label(index: int) -> str:
    """Half-year label like ``13s2``: two-digit year and semester number."""
    year, half = divmod(index, 2)
    return f"{year % 100:02d}s{half + 1}"


def rolling_windows(
    anchor: date, length_months: int, earliest: int
) -> list[tuple[str, int, int]]:
    """Contiguous [start, end) windows walking back from the anchor.

    Windows are returned chronologically, labeled by ISO start date, and cover
    every timestamp from ``earliest`` up to (not including) the anchor.
    """
    anchor_epoch = date_to_epoch(anchor)
    if earliest >= anchor_epoch:
        return []
    windows: list[tuple[str, int, int]] = []
    end = anchor
    while True:
        start = subtract_months(end, length_months)
        windows.append((start.isoformat(), date_to_epoch(start), date_to_epoch(end)))
        if date_to_epoch(start) <= earliest:
            break
        end = start
    windows.reverse()
    return windows


def aggregate(
    commits: Sequence[CommitRecord],
    assignments: Mapping[str, str],
    spec: PeriodSpec,
    metric: str = METRIC_COMMITS,
) -> ActivityMatrix:
    """Bucket commits into periods; a timestamp on a boundary joins the later period."""
    spec.validate()
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")

    matrix = ActivityMatrix(metric, spec.length_months, [])
    if not commits:
        return matrix

    if spec.alignment == ALIGNMENT_CALENDAR:
        indices = [semester_index(epoch_to_utc_date(c.author_timestamp)) for c in commits]
        low, high = min(indices), max(indices)
        matrix.period_labels = [semester_label(i) for i in range(low, high + 1)]
        labels_by_index = {i: semester_label(i) for i in range(low, high + 1)}
        label_of = [labels_by_index[i] for i in indices]
        placements = zip(commits, label_of)
    else:
        earliest = min(c.author_timestamp for c in commits)
        windows = rolling_windows(spec.anchor, spec.length_months, earliest)
        matrix.period_labels = [label for label, _, _ in windows]
        starts = [start for _, start, _ in windows]
        anchor_epoch = date_to_epoch(spec.anchor)
        placed: list[tuple[CommitRecord, str | None]] = []
        for commit in commits:
            if commit.author_timestamp >= anchor_epoch:
                placed.append((commit, None))
            else:
                index = bisect_right(starts, commit.author_timestamp) - 1
                placed.append((commit, windows[index][0]))
        placements = iter(placed)

    if metric == METRIC_COMMITS:
        for commit, label in placements:
            if label is None:
                matrix.overflow_commits += 1
                continue
            row = matrix.counts.setdefault(assignments[commit.hash], {})
            row[label] = row.get(label, 0) + 1
    else:
        day_sets: dict[tuple[str, str], set[date]] = {}
        for commit, label in placements:
            if label is None:
                matrix.overflow_commits += 1
                continue
            key = (assignments[commit.hash], label)
            day_sets.setdefault(key, set()).add(epoch_to_utc_date(commit.author_timestamp))
        for (developer_id, label), days in day_sets.items():
            matrix.counts.setdefault(developer_id, {})[label] = len(days)

    return matrix


def activity_in_window(
    commits: Iterable[CommitRecord],
    assignments: Mapping[str, str],
    window_end: date,
    length_months: int,
    metric: str = METRIC_COMMITS,
) -> dict[str, int]:
    """Per-developer activity in the half-open window [end - length, end)."""
    if length_months < 1:
        raise ParameterError(f"window length must be >= 1 month, got {length_months}")
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    start_epoch = date_to_epoch(subtract_months(window_end, length_months))
    end_epoch = date_to_epoch(window_end)

    if metric == METRIC_COMMITS:
        counts: dict[str, int] = {}
        for commit in commits:
            if start_epoch <= commit.author_timestamp < end_epoch:
                developer_id = assignments[commit.hash]
                counts[developer_id] = counts.get(developer_id, 0) + 1
        return counts

    days: dict[str, set[date]] = {}
    for commit in commits:
        if start_epoch <= commit.author_timestamp < end_epoch:
            developer_id = assignments[commit.hash]
            days.setdefault(developer_id, set()).add(
                epoch_to_utc_date(commit.author_timestamp)
            )
    return {developer_id: len(dates) for developer_id, dates in days.items()}
