"""Commit log ingestion: pipe and JSON-lines parsing, bot and merge filtering."""

from __future__ import annotations

import json
import re
import subprocess
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError, IngestionError

# One record per line: hash|author_email|author_name|unix_timestamp|merge_flag.
# Author names may themselves contain pipes, so lines are split from both ends.
PIPE_FIELD_COUNT = 5

GIT_PRETTY_FORMAT = "%H|%ae|%an|%at|%P"

DEFAULT_BOT_PATTERNS = (r"\bbot\b", "jenkins", "gerrit", "automation")

JSONL_REQUIRED_KEYS = ("hash", "author_name", "author_email", "author_timestamp", "is_merge")

DEFAULT_MALFORMED_TOLERANCE = 0.05


@dataclass(frozen=True)
class CommitRecord:
    """One version-control change, attributed to its author (committers are ignored)."""

    hash: str
    author_name: str
    author_email: str
    author_timestamp: int  # UTC seconds since the epoch
    is_merge: bool = False


@dataclass(frozen=True)
class MalformedLine:
    """A rejected input line, kept for loss accounting."""

    line_no: int  # 1-based position in the stream
    line: str
    reason: str


@dataclass
class ParseResult:
    records: list[CommitRecord]
    malformed: list[MalformedLine]


@dataclass(frozen=True)
class FilterConfig:
    """Exclusion rules applied after parsing; both default to off."""

    bot_patterns: tuple[str, ...] = ()
    exclude_merges: bool = False


def _parse_pipe_line(line: str) -> CommitRecord:
    parts = line.split("|")
    if len(parts) < PIPE_FIELD_COUNT:
        raise ValueError(f"expected {PIPE_FIELD_COUNT} pipe-delimited fields, got {len(parts)}")
    commit_hash = parts[0]
    email = parts[1]
    ts_field = parts[-2]
    merge_field = parts[-1]
    name = "|".join(parts[2:-2])
    if not commit_hash:
        raise ValueError("empty hash field")
    try:
        timestamp = int(ts_field)
    except ValueError:
        raise ValueError(f"non-integer timestamp {ts_field!r}") from None
    if timestamp <= 0:
        raise ValueError(f"non-positive timestamp {timestamp}")
    if merge_field not in ("0", "1"):
        raise ValueError(f"merge flag must be 0 or 1, got {merge_field!r}")
    if not email and not name:
        raise ValueError("author email and name are both empty")
    return CommitRecord(commit_hash, name, email, timestamp, merge_field == "1")


def _parse_jsonl_line(line: str) -> CommitRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ValueError("JSON line is not an object")
    for key in JSONL_REQUIRED_KEYS:
        if key not in obj:
            raise ValueError(f"missing key {key!r}")
    commit_hash = obj["hash"]
    name = obj["author_name"]
    email = obj["author_email"]
    timestamp = obj["author_timestamp"]
    is_merge = obj["is_merge"]
    if not isinstance(commit_hash, str) or not commit_hash:
        raise ValueError("hash must be a non-empty string")
    if not isinstance(name, str) or not isinstance(email, str):
        raise ValueError("author_name and author_email must be strings")
    if isinstance(timestamp, bool) or not isinstance(timestamp, int):
        raise ValueError("author_timestamp must be an integer")
    if timestamp <= 0:
        raise ValueError(f"non-positive timestamp {timestamp}")
    if not isinstance(is_merge, bool):
        raise ValueError("is_merge must be a boolean")
    if not email and not name:
        raise ValueError("author email and name are both empty")
    return CommitRecord(commit_hash, name, email, timestamp, is_merge)


_LINE_PARSERS = {"pipe": _parse_pipe_line, "jsonl": _parse_jsonl_line}


def parse_log_stream(
    lines: Iterable[str],
    fmt: str = "pipe",
    malformed_tolerance: float = DEFAULT_MALFORMED_TOLERANCE,
) -> ParseResult:
    """Parse a commit log stream into records plus a malformed-line report.

    Blank lines carry no record and are skipped without counting as malformed.
    Duplicate hashes keep the first occurrence. If the malformed fraction of
    non-blank lines exceeds ``malformed_tolerance`` the whole ingest aborts.
    """
    try:
        parse_one = _LINE_PARSERS[fmt]
    except KeyError:
        raise ConfigError(f"unknown log format {fmt!r}, expected 'pipe' or 'jsonl'") from None
    if not 0.0 <= malformed_tolerance <= 1.0:
        raise ConfigError(f"malformed tolerance must be in [0, 1], got {malformed_tolerance}")

    records: list[CommitRecord] = []
    malformed: list[MalformedLine] = []
    seen_hashes: set[str] = set()
    total = 0
    try:
        for line_no, raw in enumerate(lines, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            total += 1
            try:
                record = parse_one(line)
            except ValueError as exc:
                malformed.append(MalformedLine(line_no, line, str(exc)))
                continue
            if record.hash in seen_hashes:
                malformed.append(MalformedLine(line_no, line, f"duplicate hash {record.hash!r}"))
                continue
            seen_hashes.add(record.hash)
            records.append(record)
    except (OSError, UnicodeError) as exc:
        raise IngestionError(f"unreadable input: {exc}") from exc

    if total and len(malformed) / total > malformed_tolerance:
        preview = "; ".join(f"line {m.line_no}: {m.reason}" for m in malformed[:5])
        raise IngestionError(
            f"{len(malformed)} of {total} lines malformed, exceeding tolerance "
            f"{malformed_tolerance:.1%}: {preview}"
        )
    return ParseResult(records, malformed)


def parse_log_file(
    path: str,
    fmt: str = "pipe",
    malformed_tolerance: float = DEFAULT_MALFORMED_TOLERANCE,
) -> ParseResult:
    try:
        with open(path, encoding="utf-8", errors="replace") as handle:
            return parse_log_stream(handle, fmt, malformed_tolerance)
    except OSError as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc


def to_pipe_line(record: CommitRecord) -> str:
    flag = "1" if record.is_merge else "0"
    return (
        f"{record.hash}|{record.author_email}|{record.author_name}"
        f"|{record.author_timestamp}|{flag}"
    )


def to_jsonl_line(record: CommitRecord) -> str:
    return json.dumps(
        {
            "hash": record.hash,
            "author_name": record.author_name,
            "author_email": record.author_email,
            "author_timestamp": record.author_timestamp,
            "is_merge": record.is_merge,
        },
        sort_keys=True,
    )


def load_bot_patterns(path: str) -> tuple[str, ...]:
    """Read one regular expression per line; blank lines and #-comment lines are skipped."""
    patterns = []
    try:
        with open(path, encoding="utf-8") as handle:
            for raw in handle:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                patterns.append(line)
    except OSError as exc:
        raise IngestionError(f"cannot read bot pattern file {path}: {exc}") from exc
    return tuple(patterns)


def compile_bot_patterns(patterns: Iterable[str]) -> list[re.Pattern[str]]:
    compiled = []
    for pattern in patterns:
        try:
            compiled.append(re.compile(pattern, re.IGNORECASE))
        except re.error as exc:
            raise ConfigError(f"invalid bot pattern {pattern!r}: {exc}") from exc
    return compiled


def apply_filters(
    commits: Iterable[CommitRecord], config: FilterConfig
) -> tuple[list[CommitRecord], int, int]:
    """Drop bot-authored and (optionally) merge commits.

    Returns (kept, bot_excluded, merge_excluded); the three partition the input.
    Bot matching is case-insensitive over both author name and email.
    """
    patterns = compile_bot_patterns(config.bot_patterns)
    kept: list[CommitRecord] = []
    bots = 0
    merges = 0
    for commit in commits:
        if patterns and any(
            p.search(commit.author_name) or p.search(commit.author_email) for p in patterns
        ):
            bots += 1
        elif config.exclude_merges and commit.is_merge:
            merges += 1
        else:
            kept.append(commit)
    return kept, bots, merges


def read_repository_log(repo_path: str) -> list[str]:
    """Extract pipe-format lines from a local git repository.

    The merge flag is derived from the parent count of each commit; author
    timestamps are epoch seconds and therefore timezone-free.
    """
    command = [
        "git",
        "-C",
        repo_path,
        "log",
        "--no-color",
        f"--pretty=format:{GIT_PRETTY_FORMAT}",
    ]
    try:
        result = subprocess.run(command, capture_output=True, text=True, check=True)
    except FileNotFoundError as exc:
        raise IngestionError("git executable not found") from exc
    except subprocess.CalledProcessError as exc:
        detail = exc.stderr.strip() or f"exit status {exc.returncode}"
        raise IngestionError(f"git log failed for {repo_path}: {detail}") from exc

    lines = []
    for line in result.stdout.splitlines():
        if not line.strip():
            continue
        parts = line.split("|")
        # Parent hashes never contain pipes, so the last field is always %P.
        parents = parts[-1].split()
        flag = "1" if len(parents) > 1 else "0"
        lines.append("|".join(parts[:-1]) + "|" + flag)
    return lines
