"""Person-month effort from activity matrices, with full-time saturation.

A developer active at or above the full-time threshold in a period contributes
the whole period length in person-months; below it, the contribution scales
linearly with activity. All arithmetic is exact (rationals); rounding happens
only at rendering, to two decimals with ties to even.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .activity import ActivityMatrix
from .errors import ParameterError


def developer_effort(activity: int, theta: int, period_months: int) -> Fraction:
    """Effort in person-months for one developer in one period."""
    if theta < 1:
        raise ParameterError(f"theta must be >= 1, got {theta}")
    if period_months < 1:
        raise ParameterError(f"period length must be >= 1, got {period_months}")
    if activity < 0:
        raise ParameterError(f"activity must be >= 0, got {activity}")
    if activity >= theta:
        return Fraction(period_months)
    return Fraction(period_months) * Fraction(activity, theta)


@dataclass(frozen=True)
class EffortReport:
    theta: int
    period_months: int
    per_period: dict[str, Fraction]  # keyed by period label, chronological
    total: Fraction
    upper_bound: Fraction


def upper_bound(matrix: ActivityMatrix, period_months: int | None = None) -> Fraction:
    """Effort ceiling: every active developer-period counts as fully dedicated.

    Equals the estimate at theta = 1, since any activity then saturates.
    """
    months = matrix.period_months if period_months is None else period_months
    active_cells = sum(
        1 for row in matrix.counts.values() for count in row.values() if count >= 1
    )
    return Fraction(months * active_cells)


def project_effort(
    matrix: ActivityMatrix, theta: int, period_months: int | None = None
) -> EffortReport:
    """Sum developer efforts per period and overall. An empty matrix yields zero."""
    months = matrix.period_months if period_months is None else period_months
    per_period = {label: Fraction(0) for label in matrix.period_labels}
    for row in matrix.counts.values():
        for label, count in row.items():
            per_period[label] += developer_effort(count, theta, months)
    total = sum(per_period.values(), Fraction(0))
    return EffortReport(theta, months, per_period, total, upper_bound(matrix, months))


def error_table(
    matrix: ActivityMatrix,
    selected_theta: int,
    thetas: Sequence[int],
    period_months: int | None = None,
) -> dict[int, Fraction]:
    """Percent deviation of total effort at each theta from the selected theta's total."""
    baseline = project_effort(matrix, selected_theta, period_months).total
    if baseline == 0:
        raise ParameterError("error table undefined: zero total effort at the selected theta")
    table: dict[int, Fraction] = {}
    for theta in thetas:
        total = project_effort(matrix, theta, period_months).total
        table[theta] = (total - baseline) / baseline * 100
    return table


def render_quantity(value: Fraction) -> str:
    """Exact two-decimal rendering with ties to even (1.005 -> '1.00', 1.015 -> '1.02')."""
    cents = round(Fraction(value) * 100)
    sign = "-" if cents < 0 else ""
    magnitude = abs(cents)
    return f"{sign}{magnitude // 100}.{magnitude % 100:02d}"


def render_percent(value: Fraction) -> str:
    """Signed two-decimal percentage, e.g. '+21.21%' or '-4.96%'."""
    rendered = render_quantity(value)
    if not rendered.startswith("-"):
        rendered = "+" + rendered
    return rendered + "%"


def _error_cell(errors: Mapping[int, Fraction] | None, theta: int, selected: int) -> str:
    if theta == selected:
        return "--"
    if errors is None or theta not in errors:
        return ""
    return render_percent(errors[theta])


def reports_for_thetas(
    matrix: ActivityMatrix, thetas: Sequence[int], period_months: int | None = None
) -> list[EffortReport]:
    return [project_effort(matrix, theta, period_months) for theta in thetas]


def render_markdown(
    reports: Sequence[EffortReport],
    selected_theta: int,
    errors: Mapping[int, Fraction] | None = None,
) -> str:
    """Markdown table: one row per threshold, with per-period columns and the error column."""
    if not reports:
        return ""
    labels = list(reports[0].per_period)
    header = ["theta", "total_pm", *labels, "error_vs_selected"]
    lines = [
        "| " + " | ".join(header) + " |",
        "| " + " | ".join("---" for _ in header) + " |",
    ]
    for report in reports:
        cells = [
            str(report.theta),
            render_quantity(report.total),
            *(render_quantity(report.per_period[label]) for label in labels),
            _error_cell(errors, report.theta, selected_theta),
        ]
        lines.append("| " + " | ".join(cells) + " |")
    lines.append("")
    lines.append(f"Upper bound: {render_quantity(reports[0].upper_bound)} PM")
    return "\n".join(lines) + "\n"


def render_csv(
    reports: Sequence[EffortReport],
    selected_theta: int,
    errors: Mapping[int, Fraction] | None = None,
) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    labels = list(reports[0].per_period) if reports else []
    writer.writerow(["theta", "total_pm", *labels, "error_vs_selected"])
    for report in reports:
        writer.writerow(
            [
                report.theta,
                render_quantity(report.total),
                *(render_quantity(report.per_period[label]) for label in labels),
                _error_cell(errors, report.theta, selected_theta),
            ]
        )
    return buffer.getvalue()


def report_payload(
    reports: Sequence[EffortReport],
    selected_theta: int,
    errors: Mapping[int, Fraction] | None = None,
) -> dict:
    """JSON-ready structure; quantities appear as exact two-decimal strings."""
    rows = []
    for report in reports:
        rows.append(
            {
                "theta": report.theta,
                "total_pm": render_quantity(report.total),
                "per_period_pm": {
                    label: render_quantity(value)
                    for label, value in report.per_period.items()
                },
                "error_vs_selected": _error_cell(errors, report.theta, selected_theta),
            }
        )
    payload = {
        "selected_theta": selected_theta,
        "period_months": reports[0].period_months if reports else None,
        "upper_bound_pm": render_quantity(reports[0].upper_bound) if reports else "0.00",
        "thresholds": rows,
    }
    return payload


def render_json(
    reports: Sequence[EffortReport],
    selected_theta: int,
    errors: Mapping[int, Fraction] | None = None,
) -> str:
    return json.dumps(report_payload(reports, selected_theta, errors), indent=2, sort_keys=True) + "\n"
