"""Command-line behavior: flags, config files, outputs, and exit codes."""

from __future__ import annotations

import json
import os
import shutil
import subprocess
from datetime import date

import pytest

from conftest import REFERENCE_ACTIVITIES, write_reference_inputs
from vcseffort.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from vcseffort.stats import REPRESENTATIVENESS_CSV_HEADER


def run(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


REFERENCE_ARGS = ["--period-months", "1", "--anchor", "2013-02-01"]


def test_calibrate_reference_fixture(reference_inputs, tmp_path, capsys):
    out = tmp_path / "cal"
    code, stdout, _ = run(
        [
            "calibrate",
            "--log", str(reference_inputs["log"]),
            "--survey", str(reference_inputs["survey"]),
            *REFERENCE_ARGS,
            "--theta-max", "13",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert "theta range [9,11], selected 10, goodness 0.80" in stdout
    assert "labels: 8 (full-time 4, non-full-time 4); exclusions: 0" in stdout

    sweep_lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert len(sweep_lines) == 14
    assert sweep_lines[10].startswith("10,4,1,0,3,")

    selection = json.loads((out / "selection.json").read_text(encoding="utf-8"))
    assert selection["selected_theta"] == 10
    assert selection["argmax_range"] == [9, 11]
    assert selection["argmax_thetas"] == [9, 10, 11]
    assert selection["label_counts"] == {"full-time": 4, "non-full-time": 4}
    assert selection["window_end"] == "2013-02-01"

    run_record = json.loads((out / "run.json").read_text(encoding="utf-8"))
    assert run_record["command"] == "calibrate"
    assert run_record["config"]["period_months"] == 1
    assert run_record["ingest"]["parsed"] == sum(REFERENCE_ACTIVITIES.values())


def test_estimate_with_explicit_theta(reference_inputs, tmp_path, capsys):
    out = tmp_path / "est"
    code, stdout, _ = run(
        [
            "estimate",
            "--log", str(reference_inputs["log"]),
            "--theta", "10",
            "--theta-max", "13",
            "--alignment", "rolling",
            *REFERENCE_ARGS,
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert "total effort 6.60 PM (theta 10, upper bound 8.00 PM)" in stdout

    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    rows = {row["theta"]: row for row in report["thresholds"]}
    assert rows[10]["total_pm"] == "6.60"
    assert rows[10]["error_vs_selected"] == "--"
    assert rows[1]["total_pm"] == "8.00"
    assert rows[1]["error_vs_selected"] == "+21.21%"
    assert rows[13]["error_vs_selected"] == "-16.08%"

    activity_lines = (out / "activity.csv").read_text(encoding="utf-8").splitlines()
    assert activity_lines[0] == "developer_id,period_label,count"
    assert "d1@example.org,2013-01-01,12" in activity_lines

    run_record = json.loads((out / "run.json").read_text(encoding="utf-8"))
    assert run_record["result"]["theta_provenance"] == "explicit"
    assert run_record["result"]["total_pm"] == "6.60"


def test_estimate_calibrates_from_survey(reference_inputs, tmp_path, capsys):
    out = tmp_path / "est2"
    code, stdout, _ = run(
        [
            "estimate",
            "--log", str(reference_inputs["log"]),
            "--survey", str(reference_inputs["survey"]),
            "--alignment", "rolling",
            *REFERENCE_ARGS,
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert "total effort 6.60 PM (theta 10, upper bound 8.00 PM)" in stdout
    run_record = json.loads((out / "run.json").read_text(encoding="utf-8"))
    assert run_record["result"]["theta_provenance"] == "calibrated"
    assert run_record["result"]["calibration"]["selected_theta"] == 10


def test_estimate_markdown_and_csv_formats(reference_inputs, tmp_path, capsys):
    for fmt, filename in (("markdown", "report.md"), ("csv", "report.csv")):
        out = tmp_path / fmt
        code, _, _ = run(
            [
                "estimate",
                "--log", str(reference_inputs["log"]),
                "--theta", "10",
                "--alignment", "rolling",
                *REFERENCE_ARGS,
                "--format", fmt,
                "--out", str(out),
            ],
            capsys,
        )
        assert code == EXIT_OK
        text = (out / filename).read_text(encoding="utf-8")
        assert "6.60" in text


def test_estimate_requires_exactly_one_theta_source(reference_inputs, tmp_path, capsys):
    base = [
        "estimate",
        "--log", str(reference_inputs["log"]),
        "--alignment", "rolling",
        *REFERENCE_ARGS,
        "--out", str(tmp_path / "x"),
    ]
    code, _, err = run(base, capsys)
    assert code == EXIT_CONFIG
    assert "exactly one of --theta or --survey" in err
    code, _, err = run(
        base + ["--theta", "10", "--survey", str(reference_inputs["survey"])], capsys
    )
    assert code == EXIT_CONFIG


def test_exactly_one_commit_source_required(reference_inputs, tmp_path, capsys):
    code, _, err = run(
        ["calibrate", "--survey", str(reference_inputs["survey"]), "--out", str(tmp_path)],
        capsys,
    )
    assert code == EXIT_CONFIG
    assert "exactly one of --log, --commits, or --repo" in err


@pytest.mark.skipif(shutil.which("git") is None, reason="git not installed")
def test_estimate_reads_directly_from_git_repo(tmp_path, capsys):
    repo = tmp_path / "repo"
    repo.mkdir()
    # Pin commit dates so both land in the window before the 2013-02-01 anchor.
    env = dict(
        os.environ,
        GIT_AUTHOR_DATE="2013-01-10T00:00:00 +0000",
        GIT_COMMITTER_DATE="2013-01-10T00:00:00 +0000",
    )
    identity = ["-c", "user.name=Repo Dev", "-c", "user.email=repo@example.org"]

    def git(*args):
        subprocess.run(
            ["git", *identity, "-C", str(repo), *args],
            check=True,
            capture_output=True,
            env=env,
        )

    git("init", "-q")
    (repo / "a.txt").write_text("one\n")
    git("add", "a.txt")
    git("commit", "-q", "-m", "first")
    (repo / "a.txt").write_text("two\n")
    git("add", "a.txt")
    git("commit", "-q", "-m", "second")

    out = tmp_path / "est"
    code, stdout, _ = run(
        ["estimate", "--repo", str(repo), "--theta", "1", "--alignment", "rolling",
         *REFERENCE_ARGS, "--out", str(out)],
        capsys,
    )
    assert code == EXIT_OK
    assert "total effort 1.00 PM (theta 1, upper bound 1.00 PM)" in stdout
    activity = (out / "activity.csv").read_text(encoding="utf-8").splitlines()
    assert activity[1] == "repo@example.org,2013-01-01,2"


def test_missing_input_file_is_an_io_error(tmp_path, capsys):
    code, _, err = run(
        ["calibrate", "--log", str(tmp_path / "absent.log"), "--survey", "s.csv",
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == EXIT_IO
    assert "cannot read" in err


def test_excess_malformed_lines_is_io_error(tmp_path, capsys):
    log = tmp_path / "bad.log"
    log.write_text("garbage\nmore garbage\n", encoding="utf-8")
    code, _, err = run(
        ["calibrate", "--log", str(log), "--survey", "s.csv", "--out", str(tmp_path)],
        capsys,
    )
    assert code == EXIT_IO
    assert "malformed" in err


def test_argparse_rejects_bad_choice(reference_inputs, tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(
            [
                "estimate",
                "--log", str(reference_inputs["log"]),
                "--theta", "10",
                "--format", "yaml",
                "--out", str(tmp_path),
            ]
        )
    assert excinfo.value.code == 2


def test_unmatched_survey_is_config_error(reference_inputs, tmp_path, capsys):
    survey = tmp_path / "other.csv"
    survey.write_text(
        "email,self_class,hours_bucket,survey_date,suspect\n"
        "nobody@nowhere.org,full,,2013-02-01,\n",
        encoding="utf-8",
    )
    code, _, err = run(
        [
            "calibrate",
            "--log", str(reference_inputs["log"]),
            "--survey", str(survey),
            *REFERENCE_ARGS,
            "--out", str(tmp_path / "o"),
        ],
        capsys,
    )
    assert code == EXIT_CONFIG
    assert "no survey response matched" in err


def test_config_file_supplies_flags_and_cli_overrides(reference_inputs, tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text(
        f"log = {reference_inputs['log']}\n"
        f"survey = {reference_inputs['survey']}\n"
        "period-months = 1\n"
        "anchor = 2013-02-01\n"
        "# comment line\n"
        "select = max\n",
        encoding="utf-8",
    )
    out = tmp_path / "from-config"
    code, stdout, _ = run(
        ["calibrate", "--config", str(config), "--out", str(out)], capsys
    )
    assert code == EXIT_OK
    assert "selected 11" in stdout  # select = max picks the top of [9, 11]

    out2 = tmp_path / "override"
    code, stdout, _ = run(
        ["calibrate", "--config", str(config), "--select", "min", "--out", str(out2)],
        capsys,
    )
    assert code == EXIT_OK
    assert "selected 9" in stdout  # the flag wins over the config file


def test_config_file_unknown_key_rejected(tmp_path, capsys):
    config = tmp_path / "run.conf"
    config.write_text("volume = 11\n", encoding="utf-8")
    code, _, err = run(["calibrate", "--config", str(config)], capsys)
    assert code == EXIT_CONFIG
    assert "unknown option" in err


def test_bots_and_aliases_affect_the_pipeline(reference_inputs, tmp_path, capsys):
    log = tmp_path / "log.txt"
    base = reference_inputs["log"].read_text(encoding="utf-8")
    extra = "botc1|ci@bots.org|Build Bot|1357040000|0\n"
    log.write_text(base + extra, encoding="utf-8")

    aliases = tmp_path / "aliases.csv"
    aliases.write_text("d8@example.org,d4@example.org\n", encoding="utf-8")

    out = tmp_path / "filtered"
    code, stdout, _ = run(
        [
            "estimate",
            "--log", str(log),
            "--theta", "10",
            "--alignment", "rolling",
            *REFERENCE_ARGS,
            "--bots", "default",
            "--aliases", str(aliases),
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert "excluded 1 bot" in stdout
    activity = (out / "activity.csv").read_text(encoding="utf-8")
    # d8's five commits fold into d4's three: a single row with eight.
    assert "d4@example.org,2013-01-01,8" in activity
    assert "d8@example.org" not in activity


def test_representativeness_outputs(reference_inputs, tmp_path, capsys):
    out = tmp_path / "rep"
    code, stdout, _ = run(
        [
            "representativeness",
            "--log", str(reference_inputs["log"]),
            "--survey", str(reference_inputs["survey"]),
            *REFERENCE_ARGS,
            "--cutoffs", "0,4,100",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert "representativeness: 3 cutoffs, 1 insufficient" in stdout
    lines = (out / "representativeness.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(REPRESENTATIVENESS_CSV_HEADER)
    assert len(lines) == 7
    assert lines[1].startswith("0,all,8,")


def test_synth_then_calibrate_recovers_planted_range(tmp_path, capsys):
    fix = tmp_path / "fix"
    code, stdout, _ = run(
        [
            "synth",
            "--seed", "42",
            "--fulltime", "8",
            "--other", "40",
            "--theta-true", "12",
            "--anchor", "2020-07-01",
            "--out", str(fix),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert "generated 48 developers" in stdout

    out = tmp_path / "cal"
    code, stdout, _ = run(
        [
            "calibrate",
            "--log", str(fix / "commits.log"),
            "--survey", str(fix / "survey.csv"),
            "--anchor", "2020-07-01",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    truth = json.loads((fix / "ground_truth.json").read_text(encoding="utf-8"))
    low, high = truth["separating_range"]
    selection = json.loads((out / "selection.json").read_text(encoding="utf-8"))
    assert low <= selection["selected_theta"] <= high
    assert selection["max_goodness"] == 1.0


def test_synth_jsonl_feeds_commits_flag(tmp_path, capsys):
    fix = tmp_path / "fix"
    code, _, _ = run(
        ["synth", "--seed", "3", "--fulltime", "2", "--other", "6",
         "--theta-true", "5", "--anchor", "2020-07-01", "--log-format", "jsonl",
         "--out", str(fix)],
        capsys,
    )
    assert code == EXIT_OK
    out = tmp_path / "cal"
    code, stdout, _ = run(
        [
            "calibrate",
            "--commits", str(fix / "commits.jsonl"),
            "--survey", str(fix / "survey.csv"),
            "--anchor", "2020-07-01",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    assert (out / "sweep.csv").exists()


def test_invalid_synth_spec_is_config_error(tmp_path, capsys):
    code, _, err = run(
        ["synth", "--fulltime", "0", "--other", "5", "--theta-true", "1",
         "--out", str(tmp_path)],
        capsys,
    )
    assert code == EXIT_CONFIG
    assert "theta_true" in err


def test_calendar_estimate_over_reference_log(reference_inputs, tmp_path, capsys):
    # Default calendar alignment buckets all January commits into one half-year.
    out = tmp_path / "cal-est"
    code, stdout, _ = run(
        [
            "estimate",
            "--log", str(reference_inputs["log"]),
            "--theta", "10",
            "--period-months", "6",
            "--out", str(out),
        ],
        capsys,
    )
    assert code == EXIT_OK
    activity = (out / "activity.csv").read_text(encoding="utf-8")
    assert "d1@example.org,13s1,12" in activity
