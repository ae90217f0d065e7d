"""Effort estimation from version control activity.

The pipeline turns raw commit logs into person-month estimates: ingest and
filter commits, resolve author identities, bucket activity into periods,
calibrate a full-time activity threshold against survey labels, and sum
saturated per-developer efforts. Sample representativeness can be checked
with two-sample KS tests, and seeded synthetic populations support
end-to-end validation against a planted threshold.
"""

__version__ = "0.1.0"

from .activity import (
    ActivityMatrix,
    PeriodSpec,
    activity_in_window,
    aggregate,
    subtract_months,
)
from .calibration import (
    ThetaSelection,
    ThresholdMetrics,
    confusion_at,
    metrics_at,
    select_theta,
    sweep,
)
from .effort import (
    EffortReport,
    developer_effort,
    error_table,
    project_effort,
    render_percent,
    render_quantity,
    upper_bound,
)
from .errors import (
    CalibrationError,
    ConfigError,
    GenerationError,
    IngestionError,
    ParameterError,
    VcsEffortError,
)
from .identity import AliasMap, CanonicalDeveloper, load_alias_map, resolve_identities
from .ingest import (
    CommitRecord,
    FilterConfig,
    ParseResult,
    apply_filters,
    parse_log_file,
    parse_log_stream,
)
from .stats import (
    KsResult,
    PopulationSummary,
    ks_two_sample,
    representativeness_table,
    summarize,
)
from .survey import SurveyLabel, SurveyResponse, load_survey, triangulate
from .synth import GroundTruth, PopulationSpec, SyntheticPopulation, generate, write_fixture

__all__ = [
    "ActivityMatrix",
    "AliasMap",
    "CalibrationError",
    "CanonicalDeveloper",
    "CommitRecord",
    "ConfigError",
    "EffortReport",
    "FilterConfig",
    "GenerationError",
    "GroundTruth",
    "IngestionError",
    "KsResult",
    "ParameterError",
    "ParseResult",
    "PeriodSpec",
    "PopulationSpec",
    "PopulationSummary",
    "SurveyLabel",
    "SurveyResponse",
    "SyntheticPopulation",
    "ThetaSelection",
    "ThresholdMetrics",
    "VcsEffortError",
    "activity_in_window",
    "aggregate",
    "apply_filters",
    "confusion_at",
    "developer_effort",
    "error_table",
    "generate",
    "ks_two_sample",
    "load_alias_map",
    "load_survey",
    "metrics_at",
    "parse_log_file",
    "parse_log_stream",
    "project_effort",
    "render_percent",
    "render_quantity",
    "representativeness_table",
    "resolve_identities",
    "select_theta",
    "subtract_months",
    "summarize",
    "sweep",
    "triangulate",
    "upper_bound",
    "write_fixture",
]
