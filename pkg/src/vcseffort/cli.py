"""Command-line interface: calibrate thresholds, estimate effort, check survey coverage.

Exit codes: 0 on success, 1 when input cannot be read or parsed, 2 on
configuration or semantic errors. All output files are deterministic
functions of the inputs and configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .activity import (
    ALIGNMENT_CALENDAR,
    ALIGNMENT_ROLLING,
    METRIC_COMMITS,
    METRICS,
    PeriodSpec,
    activity_in_window,
    aggregate,
)
from .calibration import (
    SELECT_LOWER_MEDIAN,
    SELECTION_POLICIES,
    ThetaSelection,
    select_theta,
    sweep,
    sweep_to_csv,
)
from .effort import (
    error_table,
    project_effort,
    render_csv,
    render_json,
    render_markdown,
    render_quantity,
    reports_for_thetas,
)
from .errors import CalibrationError, ConfigError, IngestionError, VcsEffortError
from .identity import AliasMap, load_alias_map, resolve_identities
from .ingest import (
    DEFAULT_BOT_PATTERNS,
    DEFAULT_MALFORMED_TOLERANCE,
    FilterConfig,
    apply_filters,
    load_bot_patterns,
    parse_log_file,
    parse_log_stream,
    read_repository_log,
)
from .stats import DEFAULT_CUTOFFS, representativeness_table, representativeness_to_csv
from .survey import LABEL_FULL, load_survey, triangulate
from .synth import PopulationSpec, generate, write_fixture

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2

FORMAT_JSON = "json"
FORMAT_CSV = "csv"
FORMAT_MARKDOWN = "markdown"
FORMATS = (FORMAT_JSON, FORMAT_CSV, FORMAT_MARKDOWN)

_REPORT_FILENAMES = {
    FORMAT_JSON: "report.json",
    FORMAT_CSV: "report.csv",
    FORMAT_MARKDOWN: "report.md",
}


@dataclass
class RunConfig:
    """Fully resolved options: defaults, then config file, then command-line flags."""

    command: str = ""
    log: str | None = None
    commits: str | None = None
    repo: str | None = None
    period_months: int = 6
    alignment: str = ALIGNMENT_CALENDAR
    anchor: date | None = None
    bots: str | None = None
    exclude_merges: bool = False
    aliases: str | None = None
    name_merging: bool = False
    survey: str | None = None
    theta: int | None = None
    theta_max: int | None = None
    metric: str = METRIC_COMMITS
    select: str = SELECT_LOWER_MEDIAN
    format: str = FORMAT_JSON
    out: str = "."
    cutoffs: tuple[int, ...] = DEFAULT_CUTOFFS
    malformed_tolerance: float = DEFAULT_MALFORMED_TOLERANCE
    seed: int = 0
    fulltime: int = 10
    other: int = 100
    theta_true: int = 10
    skew: float = 2.0
    label_noise: float = 0.0
    log_format: str = "pipe"


def _parse_config_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _parse_config_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise ConfigError(f"expected an ISO date (YYYY-MM-DD), got {text!r}") from None


def _parse_config_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _parse_config_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


def _parse_config_cutoffs(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(token.strip()) for token in text.split(",") if token.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise ConfigError("cutoff list is empty")
    if any(value < 0 for value in values):
        raise ConfigError("cutoffs must be >= 0")
    return tuple(sorted(set(values)))


def _identity(text: str) -> str:
    return text


_CONFIG_FIELDS: dict[str, tuple[str, Callable[[str], object]]] = {
    "log": ("log", _identity),
    "commits": ("commits", _identity),
    "repo": ("repo", _identity),
    "period-months": ("period_months", _parse_config_int),
    "alignment": ("alignment", _identity),
    "anchor": ("anchor", _parse_config_date),
    "bots": ("bots", _identity),
    "exclude-merges": ("exclude_merges", _parse_config_bool),
    "aliases": ("aliases", _identity),
    "name-merging": ("name_merging", _parse_config_bool),
    "survey": ("survey", _identity),
    "theta": ("theta", _parse_config_int),
    "theta-max": ("theta_max", _parse_config_int),
    "metric": ("metric", _identity),
    "select": ("select", _identity),
    "format": ("format", _identity),
    "out": ("out", _identity),
    "cutoffs": ("cutoffs", _parse_config_cutoffs),
    "malformed-tolerance": ("malformed_tolerance", _parse_config_float),
    "seed": ("seed", _parse_config_int),
    "fulltime": ("fulltime", _parse_config_int),
    "other": ("other", _parse_config_int),
    "theta-true": ("theta_true", _parse_config_int),
    "skew": ("skew", _parse_config_float),
    "label-noise": ("label_noise", _parse_config_float),
    "log-format": ("log_format", _identity),
}

_FLAG_ATTRS = tuple(attr for attr, _ in _CONFIG_FIELDS.values())


def read_config_file(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; blank lines and #-comments are ignored."""
    options: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, separator, value = line.partition("=")
                if not separator:
                    raise ConfigError(f"config {path} line {line_no}: expected key = value")
                options[key.strip()] = value.strip()
    except OSError as exc:
        raise IngestionError(f"cannot read config file {path}: {exc}") from exc
    return options


def _apply_config_file(config: RunConfig, path: str) -> None:
    for key, value in read_config_file(path).items():
        normalized = key.lower().replace("_", "-")
        if normalized not in _CONFIG_FIELDS:
            raise ConfigError(f"config file {path}: unknown option {key!r}")
        attr, coerce = _CONFIG_FIELDS[normalized]
        setattr(config, attr, coerce(value))


def _validate(config: RunConfig) -> None:
    if config.alignment not in (ALIGNMENT_CALENDAR, ALIGNMENT_ROLLING):
        raise ConfigError(f"unknown alignment {config.alignment!r}")
    if config.metric not in METRICS:
        raise ConfigError(f"unknown metric {config.metric!r}")
    if config.select not in SELECTION_POLICIES:
        raise ConfigError(f"unknown selection policy {config.select!r}")
    if config.format not in FORMATS:
        raise ConfigError(f"unknown output format {config.format!r}")
    if config.log_format not in ("pipe", "jsonl"):
        raise ConfigError(f"unknown log format {config.log_format!r}")
    if config.period_months < 1:
        raise ConfigError(f"period length must be >= 1 month, got {config.period_months}")
    if config.theta is not None and config.theta < 1:
        raise ConfigError(f"theta must be >= 1, got {config.theta}")
    if config.theta_max is not None and config.theta_max < 1:
        raise ConfigError(f"theta-max must be >= 1, got {config.theta_max}")
    if not 0.0 <= config.malformed_tolerance <= 1.0:
        raise ConfigError(
            f"malformed tolerance must be in [0, 1], got {config.malformed_tolerance}"
        )


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(command=args.command)
    config_path = getattr(args, "config", None)
    if config_path:
        _apply_config_file(config, config_path)
    for attr in _FLAG_ATTRS:
        value = getattr(args, attr, None)
        if value is not None:
            setattr(config, attr, value)
    _validate(config)
    return config


def config_snapshot(config: RunConfig) -> dict:
    snapshot = asdict(config)
    snapshot["anchor"] = config.anchor.isoformat() if config.anchor else None
    snapshot["cutoffs"] = list(config.cutoffs)
    return snapshot


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _write_json(path: Path, payload: object) -> None:
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _out_dir(config: RunConfig) -> Path:
    directory = Path(config.out)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _write_run_record(config: RunConfig, extras: dict) -> None:
    payload = {
        "version": __version__,
        "command": config.command,
        "config": config_snapshot(config),
    }
    payload.update(extras)
    _write_json(_out_dir(config) / "run.json", payload)


def _load_commits(config: RunConfig):
    sources = [source for source in (config.log, config.commits, config.repo) if source]
    if len(sources) != 1:
        raise ConfigError("exactly one of --log, --commits, or --repo is required")
    if config.log:
        result = parse_log_file(config.log, "pipe", config.malformed_tolerance)
    elif config.commits:
        result = parse_log_file(config.commits, "jsonl", config.malformed_tolerance)
    else:
        lines = read_repository_log(config.repo)
        result = parse_log_stream(lines, "pipe", config.malformed_tolerance)

    if config.bots is None:
        patterns: tuple[str, ...] = ()
    elif config.bots == "default":
        patterns = DEFAULT_BOT_PATTERNS
    else:
        patterns = load_bot_patterns(config.bots)
    kept, bots, merges = apply_filters(
        result.records, FilterConfig(patterns, config.exclude_merges)
    )
    print(
        f"parsed {len(result.records)} commits ({len(result.malformed)} malformed); "
        f"excluded {bots} bot, {merges} merge"
    )
    ingest_info = {
        "parsed": len(result.records),
        "malformed": len(result.malformed),
        "bot_excluded": bots,
        "merge_excluded": merges,
        "kept": len(kept),
    }
    return kept, ingest_info


def _build_roster(config: RunConfig, commits):
    aliases = load_alias_map(config.aliases) if config.aliases else AliasMap()
    return resolve_identities(commits, aliases, config.name_merging)


def _survey_labels(config: RunConfig, roster):
    if not config.survey:
        raise ConfigError(f"{config.command} requires --survey")
    responses = load_survey(config.survey)
    if not responses:
        raise CalibrationError(f"survey {config.survey} has no responses")
    labels, exclusions = triangulate(responses, roster)
    if not labels:
        raise CalibrationError("no survey response matched the developer roster")
    window_end = config.anchor or max(response.survey_date for response in responses)
    return responses, labels, exclusions, window_end


def _tally(items: Sequence, key: Callable[[object], str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for item in items:
        name = key(item)
        counts[name] = counts.get(name, 0) + 1
    return counts


def _selection_payload(
    selection: ThetaSelection, labels, exclusions, window_end: date, theta_max: int
) -> dict:
    return {
        "argmax_range": list(selection.argmax_range),
        "argmax_thetas": list(selection.argmax_thetas),
        "selected_theta": selection.selected_theta,
        "max_goodness": selection.max_goodness,
        "policy": selection.policy,
        "theta_max": theta_max,
        "window_end": window_end.isoformat(),
        "label_counts": _tally(labels, lambda label: label.label),
        "exclusion_counts": _tally(exclusions, lambda exclusion: exclusion.reason),
    }


def _calibrate_flow(config: RunConfig, commits, assignments, roster):
    responses, labels, exclusions, window_end = _survey_labels(config, roster)
    counts = activity_in_window(
        commits, assignments, window_end, config.period_months, config.metric
    )
    metrics = sweep(counts, labels, config.theta_max)
    selection = select_theta(metrics, config.select)
    full = sum(1 for label in labels if label.label == LABEL_FULL)
    print(
        f"labels: {len(labels)} (full-time {full}, non-full-time {len(labels) - full}); "
        f"exclusions: {len(exclusions)}"
    )
    return metrics, selection, labels, exclusions, window_end


def cmd_calibrate(config: RunConfig) -> int:
    commits, ingest_info = _load_commits(config)
    assignments, roster = _build_roster(config, commits)
    metrics, selection, labels, exclusions, window_end = _calibrate_flow(
        config, commits, assignments, roster
    )
    out = _out_dir(config)
    _write_text(out / "sweep.csv", sweep_to_csv(metrics))
    _write_json(
        out / "selection.json",
        _selection_payload(selection, labels, exclusions, window_end, metrics[-1].theta),
    )
    _write_run_record(config, {"result": {"selected_theta": selection.selected_theta}, "ingest": ingest_info})
    low, high = selection.argmax_range
    print(
        f"theta range [{low},{high}], selected {selection.selected_theta}, "
        f"goodness {selection.max_goodness:.2f}"
    )
    return EXIT_OK


def cmd_estimate(config: RunConfig) -> int:
    if (config.theta is None) == (config.survey is None):
        raise ConfigError("estimate requires exactly one of --theta or --survey")
    commits, ingest_info = _load_commits(config)
    assignments, roster = _build_roster(config, commits)

    calibration_payload = None
    if config.theta is not None:
        theta = config.theta
        provenance = "explicit"
    else:
        metrics, selection, labels, exclusions, window_end = _calibrate_flow(
            config, commits, assignments, roster
        )
        theta = selection.selected_theta
        provenance = "calibrated"
        calibration_payload = _selection_payload(
            selection, labels, exclusions, window_end, metrics[-1].theta
        )

    spec = PeriodSpec(config.period_months, config.alignment, config.anchor)
    matrix = aggregate(commits, assignments, spec, config.metric)

    thetas = list(range(1, config.theta_max + 1)) if config.theta_max else []
    if theta not in thetas:
        thetas.append(theta)
        thetas.sort()
    selected_report = project_effort(matrix, theta)
    errors = (
        error_table(matrix, theta, thetas)
        if len(thetas) > 1 and selected_report.total != 0
        else None
    )
    reports = reports_for_thetas(matrix, thetas)

    out = _out_dir(config)
    _write_text(out / "activity.csv", matrix.to_csv())
    renderers = {
        FORMAT_JSON: render_json,
        FORMAT_CSV: render_csv,
        FORMAT_MARKDOWN: render_markdown,
    }
    _write_text(
        out / _REPORT_FILENAMES[config.format], renderers[config.format](reports, theta, errors)
    )
    result = {
        "theta": theta,
        "theta_provenance": provenance,
        "total_pm": render_quantity(selected_report.total),
        "upper_bound_pm": render_quantity(selected_report.upper_bound),
        "overflow_commits": matrix.overflow_commits,
    }
    if calibration_payload is not None:
        result["calibration"] = calibration_payload
    _write_run_record(config, {"result": result, "ingest": ingest_info})
    print(
        f"total effort {render_quantity(selected_report.total)} PM "
        f"(theta {theta}, upper bound {render_quantity(selected_report.upper_bound)} PM)"
    )
    return EXIT_OK


def cmd_representativeness(config: RunConfig) -> int:
    commits, ingest_info = _load_commits(config)
    assignments, roster = _build_roster(config, commits)
    responses, labels, exclusions, window_end = _survey_labels(config, roster)
    counts = activity_in_window(
        commits, assignments, window_end, config.period_months, config.metric
    )
    all_counts = {developer.developer_id: counts.get(developer.developer_id, 0) for developer in roster}
    surveyed_counts = {label.developer_id: all_counts[label.developer_id] for label in labels}
    rows = representativeness_table(all_counts, surveyed_counts, config.cutoffs)

    out = _out_dir(config)
    _write_text(out / "representativeness.csv", representativeness_to_csv(rows))
    insufficient = sum(1 for row in rows if row.ks is None)
    _write_run_record(
        config,
        {
            "result": {
                "cutoffs": list(config.cutoffs),
                "insufficient": insufficient,
                "window_end": window_end.isoformat(),
                "surveyed": len(surveyed_counts),
                "population": len(all_counts),
            },
            "ingest": ingest_info,
        },
    )
    print(f"representativeness: {len(rows)} cutoffs, {insufficient} insufficient")
    return EXIT_OK


def cmd_synth(config: RunConfig) -> int:
    spec = PopulationSpec(
        n_fulltime=config.fulltime,
        n_other=config.other,
        theta_true=config.theta_true,
        skew_exponent=config.skew,
        label_noise=config.label_noise,
        seed=config.seed,
    )
    population = generate(spec)
    anchor = config.anchor or date(2020, 1, 1)
    paths = write_fixture(
        population, config.out, anchor, config.period_months, config.log_format
    )
    total_commits = sum(population.counts.values())
    _write_run_record(
        config,
        {
            "result": {
                "developers": len(population.counts),
                "commits": total_commits,
                "files": {name: path.name for name, path in paths.items()},
                "anchor": anchor.isoformat(),
            }
        },
    )
    print(f"generated {len(population.counts)} developers, {total_commits} commits")
    return EXIT_OK


_COMMANDS = {
    "calibrate": cmd_calibrate,
    "estimate": cmd_estimate,
    "representativeness": cmd_representativeness,
    "synth": cmd_synth,
}


def _cli_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _cli_cutoffs(text: str) -> tuple[int, ...]:
    try:
        return _parse_config_cutoffs(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcs-effort",
        description="Estimate development effort in person-months from version control activity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text 'key = value' file; flags override it")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument(
        "--period-months", type=int, dest="period_months", help="period length in months (default 6)"
    )
    common.add_argument("--anchor", type=_cli_date, help="anchor date YYYY-MM-DD")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--log", help="pipe-format commit log (hash|email|name|timestamp|merge)")
    source.add_argument("--commits", help="JSON-lines commit file")
    source.add_argument("--repo", help="path to a local git repository")
    source.add_argument(
        "--bots", help="bot regex file (one pattern per line), or 'default' for the built-in set"
    )
    source.add_argument(
        "--exclude-merges",
        action="store_const",
        const=True,
        dest="exclude_merges",
        help="drop merge commits (kept by default)",
    )
    source.add_argument("--aliases", help="alias CSV: alias_email_or_name,canonical_email")
    source.add_argument(
        "--name-merging",
        action="store_const",
        const=True,
        dest="name_merging",
        help="also merge identities sharing a normalized author name",
    )
    source.add_argument("--metric", choices=METRICS, help="activity metric (default commits)")
    source.add_argument(
        "--malformed-tolerance",
        type=float,
        dest="malformed_tolerance",
        help="abort when the malformed line fraction exceeds this (default 0.05)",
    )

    survey_opts = argparse.ArgumentParser(add_help=False)
    survey_opts.add_argument("--survey", help="survey CSV (email,self_class,hours_bucket,survey_date,suspect)")

    calibrate = subparsers.add_parser(
        "calibrate",
        parents=[common, source, survey_opts],
        help="sweep thresholds against survey labels and select the best",
    )
    calibrate.add_argument("--theta-max", type=int, dest="theta_max", help="sweep upper bound")
    calibrate.add_argument("--select", choices=SELECTION_POLICIES, help="tie-break policy")

    estimate = subparsers.add_parser(
        "estimate",
        parents=[common, source, survey_opts],
        help="estimate person-month effort at a threshold",
    )
    estimate.add_argument("--theta", type=int, help="explicit full-time threshold")
    estimate.add_argument("--theta-max", type=int, dest="theta_max", help="also report thresholds 1..N")
    estimate.add_argument("--select", choices=SELECTION_POLICIES, help="tie-break policy")
    estimate.add_argument(
        "--alignment",
        choices=(ALIGNMENT_CALENDAR, ALIGNMENT_ROLLING),
        help="period layout (default calendar half-years)",
    )
    estimate.add_argument("--format", choices=FORMATS, help="report format (default json)")

    representativeness = subparsers.add_parser(
        "representativeness",
        parents=[common, source, survey_opts],
        help="compare surveyed developers against the population at activity cutoffs",
    )
    representativeness.add_argument(
        "--cutoffs", type=_cli_cutoffs, help="comma-separated activity cutoffs"
    )

    synth = subparsers.add_parser(
        "synth",
        parents=[common],
        help="generate a seeded synthetic commit log and survey",
    )
    synth.add_argument("--seed", type=int, help="random seed (default 0)")
    synth.add_argument("--fulltime", type=int, help="number of full-time developers")
    synth.add_argument("--other", type=int, help="number of non-full-time developers")
    synth.add_argument("--theta-true", type=int, dest="theta_true", help="planted threshold")
    synth.add_argument("--skew", type=float, help="power-law exponent (default 2.0)")
    synth.add_argument("--label-noise", type=float, dest="label_noise", help="label flip probability")
    synth.add_argument("--log-format", choices=("pipe", "jsonl"), dest="log_format")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return _COMMANDS[config.command](config)
    except IngestionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VcsEffortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
