"""Benchmark CLI: reports, comparisons, validation, replay."""

import json

import pytest
from click.testing import CliRunner

from sarswarm.bench import cli
from sarswarm.engine import RunLog, ScoreTally, compute_score
from sarswarm.scenario import (
    canonical_json,
    default_scenario,
    scenario_digest,
    scenario_to_obj,
)


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def write_scenario(tmp_path, name="scen.json", seed=5, mutate=None):
    doc = scenario_to_obj(default_scenario(seed=seed))
    if mutate is not None:
        mutate(doc)
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


# --- run -----------------------------------------------------------------

def test_run_default_scenario_report(runner):
    result = invoke(runner, "run", "--policy", "autonomous", "--seeds", "1")
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["kind"] == "bench_report"
    assert report["policy"] == "autonomous"
    assert report["scenario"]["source"] == "default"
    assert len(report["runs"]) == 1
    row = report["runs"][0]
    assert row["seed"] == 1
    assert row["accuracy"] == 1.0
    assert row["reason"] == "all_classified"
    assert report["aggregate"]["runs"] == 1
    assert report["aggregate"]["mean_score"] == row["score"]
    # stdout is exactly the canonical serialization
    assert result.stdout.strip() == canonical_json(report)
    # the human table goes to stderr, not stdout
    assert "mean score" in result.stderr


def test_run_reports_are_byte_identical(runner):
    a = invoke(runner, "run", "--seeds", "3")
    b = invoke(runner, "run", "--seeds", "3")
    assert a.exit_code == b.exit_code == 0
    assert a.stdout == b.stdout


def test_run_scripted_policy_rows(runner):
    result = invoke(runner, "run", "--policy", "scripted:0.7", "--seeds", "2")
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["policy"] == "scripted:0.7"
    assert [r["seed"] for r in report["runs"]] == [1, 2]
    assert all(r["accuracy"] == 1.0 for r in report["runs"])


def test_run_default_seeds_vary_layout(runner):
    report = json.loads(invoke(runner, "run", "--seeds", "3").stdout)
    digests = {r["scenario_digest"] for r in report["runs"]}
    assert len(digests) == 3  # fresh default layout per seed


def test_run_scenario_file_pins_layout(runner, tmp_path):
    path = write_scenario(tmp_path)
    result = invoke(runner, "run", "--scenario", str(path), "--seeds", "3")
    assert result.exit_code == 0
    report = json.loads(result.stdout)
    assert report["scenario"]["source"] == "scen.json"
    digests = {r["scenario_digest"] for r in report["runs"]}
    # same layout, only the rng seed differs per run
    assert len(digests) == 3
    positions = {  # layout identity: digest differences come from the seed only
        json.dumps(scenario_to_obj(default_scenario(seed=5))["targets"])
    }
    assert len(positions) == 1


def test_run_writes_report_and_logs(runner, tmp_path):
    out = tmp_path / "report.json"
    logs = tmp_path / "logs"
    result = invoke(runner, "run", "--seeds", "2", "--out", str(out),
                    "--logs", str(logs))
    assert result.exit_code == 0
    assert out.read_text(encoding="utf-8").strip() == result.stdout.strip()
    files = sorted(p.name for p in logs.iterdir())
    assert files == ["run-autonomous-seed1.ndjson", "run-autonomous-seed2.ndjson"]
    report = json.loads(result.stdout)
    for row, name in zip(report["runs"], files):
        log = RunLog.from_ndjson((logs / name).read_text(encoding="utf-8"))
        assert log.header["scenario_digest"] == row["scenario_digest"]
        tally = log.final_tally()
        rate, accuracy, score = compute_score(tally)
        assert (rate, accuracy, score) == (row["rate"], row["accuracy"], row["score"])


def test_run_missing_scenario_file(runner, tmp_path):
    missing = tmp_path / "nope.json"
    result = invoke(runner, "run", "--scenario", str(missing))
    assert result.exit_code == 1
    assert "nope.json" in result.stderr
    assert result.stdout == ""


def test_run_invalid_scenario_file(runner, tmp_path):
    path = write_scenario(tmp_path, mutate=lambda d: d["agents"][0].update(speed=-1.0))
    result = invoke(runner, "run", "--scenario", str(path))
    assert result.exit_code == 1
    assert "speed" in result.stderr


def test_run_rejects_bad_policy(runner):
    assert invoke(runner, "run", "--policy", "psychic").exit_code != 0
    assert invoke(runner, "run", "--policy", "scripted:2.0").exit_code != 0
    assert invoke(runner, "run", "--policy", "scripted:abc").exit_code != 0


# --- compare ---------------------------------------------------------------

def make_report(runner, tmp_path, name, policy, seeds=2):
    out = tmp_path / name
    result = invoke(runner, "run", "--policy", policy, "--seeds", str(seeds),
                    "--out", str(out))
    assert result.exit_code == 0
    return out


def test_compare_identical_reports_zero_delta(runner, tmp_path):
    report = make_report(runner, tmp_path, "a.json", "autonomous")
    result = invoke(runner, "compare", str(report), str(report))
    assert result.exit_code == 0
    cmp = json.loads(result.stdout)
    assert cmp["kind"] == "bench_comparison"
    assert all(d["delta"] == 0.0 for d in cmp["runs"])
    assert cmp["aggregate"]["mean_delta"] == 0.0


def test_compare_autonomous_vs_scripted(runner, tmp_path):
    auto = make_report(runner, tmp_path, "auto.json", "autonomous", seeds=3)
    human = make_report(runner, tmp_path, "human.json", "scripted:0.7", seeds=3)
    result = invoke(runner, "compare", str(auto), str(human))
    assert result.exit_code == 0
    cmp = json.loads(result.stdout)
    assert cmp["policy_a"] == "autonomous"
    assert cmp["policy_b"] == "scripted:0.7"
    assert len(cmp["runs"]) == 3
    for d in cmp["runs"]:
        assert d["delta"] == pytest.approx(d["score_b"] - d["score_a"])
    agg = cmp["aggregate"]
    assert agg["mean_delta"] == pytest.approx(
        agg["mean_score_b"] - agg["mean_score_a"])


def test_compare_digest_mismatch(runner, tmp_path):
    default_runs = make_report(runner, tmp_path, "a.json", "autonomous")
    other_file = write_scenario(tmp_path, "other.json", seed=99)
    result = invoke(runner, "run", "--scenario", str(other_file), "--seeds", "2",
                    "--out", str(tmp_path / "b.json"))
    assert result.exit_code == 0
    result = invoke(runner, "compare", str(default_runs), str(tmp_path / "b.json"))
    assert result.exit_code == 1
    assert "DigestMismatch" in result.stderr


def test_compare_run_count_mismatch(runner, tmp_path):
    two = make_report(runner, tmp_path, "two.json", "autonomous", seeds=2)
    three = make_report(runner, tmp_path, "three.json", "autonomous", seeds=3)
    result = invoke(runner, "compare", str(two), str(three))
    assert result.exit_code == 1
    assert "DigestMismatch" in result.stderr


def test_compare_rejects_malformed_report(runner, tmp_path):
    good = make_report(runner, tmp_path, "good.json", "autonomous")
    bad = tmp_path / "bad.json"
    bad.write_text("{\"kind\": \"something_else\"}", encoding="utf-8")
    result = invoke(runner, "compare", str(good), str(bad))
    assert result.exit_code == 1
    assert "MalformedReport" in result.stderr
    not_json = tmp_path / "garbage.json"
    not_json.write_text("{{{", encoding="utf-8")
    assert invoke(runner, "compare", str(good), str(not_json)).exit_code == 1
    missing = tmp_path / "missing.json"
    assert invoke(runner, "compare", str(good), str(missing)).exit_code == 1


# --- validate ---------------------------------------------------------------

def test_validate_good_scenario(runner, tmp_path):
    path = write_scenario(tmp_path)
    result = invoke(runner, "validate", str(path))
    assert result.exit_code == 0
    body = json.loads(result.stdout)
    assert body["valid"] is True
    assert body["digest"] == scenario_digest(default_scenario(seed=5))
    assert body["agents"] == 5 and body["targets"] == 12 and body["hazards"] == 2


def test_validate_duplicate_id_names_the_path(runner, tmp_path):
    def clone_id(doc):
        doc["agents"][1]["id"] = doc["agents"][0]["id"]

    path = write_scenario(tmp_path, mutate=clone_id)
    result = invoke(runner, "validate", str(path))
    assert result.exit_code == 1
    body = json.loads(result.stdout)
    assert body["valid"] is False
    assert "uav-1" in body["error"]["message"]
    assert "agents[1].id" in body["error"]["path"]


def test_validate_non_json_file(runner, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("not json at all", encoding="utf-8")
    result = invoke(runner, "validate", str(path))
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"]["type"] == "MalformedJson"


def test_validate_missing_file(runner, tmp_path):
    result = invoke(runner, "validate", str(tmp_path / "ghost.json"))
    assert result.exit_code == 1
    assert json.loads(result.stdout)["error"]["type"] == "FileNotFound"


def test_validate_invariant_violation_path(runner, tmp_path):
    path = write_scenario(
        tmp_path, mutate=lambda d: d["targets"][2].update(reward=-10.0))
    result = invoke(runner, "validate", str(path))
    assert result.exit_code == 1
    body = json.loads(result.stdout)
    assert body["error"]["type"] == "InvariantViolation"
    assert "targets[2].reward" in body["error"]["path"]


# --- replay ------------------------------------------------------------------

def test_replay_match(runner, tmp_path):
    logs = tmp_path / "logs"
    invoke(runner, "run", "--policy", "scripted:0.7", "--seeds", "1",
           "--logs", str(logs))
    log_file = next(logs.iterdir())
    result = invoke(runner, "replay", str(log_file))
    assert result.exit_code == 0
    body = json.loads(result.stdout)
    assert body["match"] is True
    assert body["original_tally"] == body["replayed_tally"]


def test_replay_detects_tampered_tally(runner, tmp_path):
    logs = tmp_path / "logs"
    invoke(runner, "run", "--seeds", "1", "--logs", str(logs))
    log_file = next(logs.iterdir())
    lines = log_file.read_text(encoding="utf-8").splitlines()
    final = json.loads(lines[-1])
    final["tally"]["correct"] -= 1
    lines[-1] = json.dumps(final)
    log_file.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = invoke(runner, "replay", str(log_file))
    assert result.exit_code == 1
    assert "diverged" in result.stderr
    assert json.loads(result.stdout)["match"] is False


def test_replay_missing_and_garbage_files(runner, tmp_path):
    assert invoke(runner, "replay", str(tmp_path / "none.ndjson")).exit_code == 1
    garbage = tmp_path / "garbage.ndjson"
    garbage.write_text("this is not ndjson\n", encoding="utf-8")
    assert invoke(runner, "replay", str(garbage)).exit_code == 1


# --- misc ---------------------------------------------------------------------

def test_version_flag(runner):
    result = invoke(runner, "--version")
    assert result.exit_code == 0
    assert "sarswarm" in result.stdout


def test_serve_rejects_missing_ui_dir(runner, tmp_path):
    result = invoke(runner, "serve", "--ui", str(tmp_path / "not-there"))
    assert result.exit_code == 1
    assert "no such UI directory" in result.stderr


def test_report_score_equals_metric_arithmetic(runner):
    report = json.loads(invoke(runner, "run", "--seeds", "1").stdout)
    row = report["runs"][0]
    tally = ScoreTally(row["classifications"], row["correct"], row["completion_time"])
    rate, accuracy, score = compute_score(tally)
    assert (rate, accuracy, score) == (row["rate"], row["accuracy"], row["score"])
