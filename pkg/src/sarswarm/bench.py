"""Headless benchmark CLI.

``run`` produces the autonomous baseline or scripted-human comparison runs,
``compare`` diffs two reports seed by seed, ``validate`` checks scenario
documents, ``replay`` re-simulates a recorded run log, and ``serve`` starts
the live session service. Reports are JSON on stdout (byte-reproducible:
no timestamps, canonical key order); the human-readable table goes to
stderr so pipelines stay clean. Exit codes: 1 invalid input, 2 runtime
failure.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .engine import ENGINE_VERSION, RunLog, ScriptedHuman, replay as replay_log, run_headless
from .errors import BenchError, DigestMismatch, MalformedReport, SarSwarmError, ScenarioError
from .scenario import (
    Scenario,
    canonical_json,
    default_scenario,
    load_scenario,
    scenario_digest,
)


def _parse_policy(text: str) -> ScriptedHuman | None:
    if text == "autonomous":
        return None
    if text == "scripted":
        return ScriptedHuman()
    if text.startswith("scripted:"):
        try:
            theta = float(text.split(":", 1)[1])
        except ValueError:
            raise click.BadParameter(f"bad threshold in {text!r}") from None
        if not 0.0 < theta <= 1.0:
            raise click.BadParameter("scripted threshold must lie in (0, 1]")
        return ScriptedHuman(theta=theta)
    raise click.BadParameter(
        f"unknown policy {text!r}; expected autonomous, scripted or scripted:<theta>")


def _seed_variant(base: Scenario | None, seed: int) -> Scenario:
    """Per-seed scenario: fresh default layout, or the given document with
    its rng seed swapped (the layout a file pins down stays fixed)."""
    if base is None:
        return default_scenario(seed=seed)
    return dataclasses.replace(
        base, mode_config=dataclasses.replace(base.mode_config, rng_seed=seed))


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _run_row(log: RunLog) -> dict:
    final = log.final
    return {
        "seed": log.header["seed"],
        "scenario_digest": log.header["scenario_digest"],
        "policy": log.header["policy"],
        "rate": final["metrics"]["rate"],
        "accuracy": final["metrics"]["accuracy"],
        "score": final["metrics"]["score"],
        "completion_time": final["sim_time"],
        "ticks": final["ticks"],
        "reason": final["reason"],
        "classifications": final["tally"]["classifications"],
        "correct": final["tally"]["correct"],
    }


def _aggregate(rows: list[dict]) -> dict:
    scores = [r["score"] for r in rows]
    return {
        "runs": len(rows),
        "mean_score": sum(scores) / len(scores),
        "min_score": min(scores),
        "max_score": max(scores),
        "mean_rate": sum(r["rate"] for r in rows) / len(rows),
        "mean_accuracy": sum(r["accuracy"] for r in rows) / len(rows),
    }


def _echo_run_table(report: dict) -> None:
    click.echo(f"policy {report['policy']}  scenario {report['scenario']['source']}", err=True)
    click.echo("seed  rate/min  accuracy  score  time(s)  reason", err=True)
    for r in report["runs"]:
        click.echo(
            f"{r['seed']:>4}  {r['rate']:>8.3f}  {r['accuracy']:>8.3f}  "
            f"{r['score']:>5.3f}  {r['completion_time']:>7.1f}  {r['reason']}",
            err=True)
    agg = report["aggregate"]
    click.echo(
        f"mean score {agg['mean_score']:.3f}  "
        f"(min {agg['min_score']:.3f}, max {agg['max_score']:.3f})",
        err=True)


@click.group()
@click.version_option(version=ENGINE_VERSION, prog_name="sarswarm")
def cli() -> None:
    """Benchmark and service harness for the search-and-rescue simulator."""


@cli.command("run")
@click.option("--scenario", "scenario_path", type=click.Path(), default=None,
              help="Scenario JSON file (omit for the built-in default scenario).")
@click.option("--policy", default="autonomous", show_default=True,
              help="autonomous, scripted, or scripted:<theta>.")
@click.option("--seeds", default=1, show_default=True, type=click.IntRange(min=1),
              help="Run seeds 1..k; the default scenario gets a fresh layout per seed.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the report JSON to this file.")
@click.option("--logs", "logs_dir", type=click.Path(), default=None,
              help="Write one NDJSON run log per seed into this directory.")
def cmd_run(scenario_path, policy, seeds, out_path, logs_dir) -> None:
    """Run headless simulations and emit a benchmark report."""
    policy_obj = _parse_policy(policy)
    base = None
    if scenario_path is not None:
        try:
            base = load_scenario(scenario_path)
        except FileNotFoundError:
            _fail(1, f"{scenario_path}: no such scenario file")
        except ScenarioError as exc:
            _fail(1, f"{scenario_path}: {type(exc).__name__}: {exc}")

    rows = []
    try:
        for seed in range(1, seeds + 1):
            scenario = _seed_variant(base, seed)
            log = run_headless(scenario, policy=policy_obj)
            rows.append(_run_row(log))
            if logs_dir is not None:
                directory = Path(logs_dir)
                directory.mkdir(parents=True, exist_ok=True)
                name = f"run-{log.header['policy'].replace(':', '_')}-seed{seed}.ndjson"
                (directory / name).write_text(log.to_ndjson(), encoding="utf-8")
    except SarSwarmError as exc:
        _fail(2, f"runtime failure: {type(exc).__name__}: {exc}")

    report = {
        "kind": "bench_report",
        "engine_version": ENGINE_VERSION,
        "scenario": {
            "source": Path(scenario_path).name if scenario_path else "default",
            "digest": scenario_digest(base) if base is not None else None,
        },
        "policy": rows[0]["policy"],
        "runs": rows,
        "aggregate": _aggregate(rows),
    }
    text = canonical_json(report)
    if out_path is not None:
        Path(out_path).write_text(text + "\n", encoding="utf-8")
    click.echo(text)
    _echo_run_table(report)


def _load_report(path: str) -> dict:
    try:
        body = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise MalformedReport(f"{path}: no such report file") from None
    except ValueError as exc:
        raise MalformedReport(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(body, dict) or body.get("kind") != "bench_report" \
            or not isinstance(body.get("runs"), list) or not body["runs"]:
        raise MalformedReport(f"{path}: not a bench report")
    return body


@cli.command("compare")
@click.argument("run_a", type=click.Path())
@click.argument("run_b", type=click.Path())
def cmd_compare(run_a, run_b) -> None:
    """Per-seed score deltas between two reports over the same scenarios."""
    try:
        a, b = _load_report(run_a), _load_report(run_b)
        if len(a["runs"]) != len(b["runs"]):
            raise DigestMismatch(
                f"run counts differ: {len(a['runs'])} vs {len(b['runs'])}")
        deltas = []
        for ra, rb in zip(a["runs"], b["runs"]):
            if ra["seed"] != rb["seed"] or ra["scenario_digest"] != rb["scenario_digest"]:
                raise DigestMismatch(
                    f"seed {ra['seed']} vs {rb['seed']}: scenario digests differ "
                    f"({ra['scenario_digest']} vs {rb['scenario_digest']})")
            deltas.append({
                "seed": ra["seed"],
                "scenario_digest": ra["scenario_digest"],
                "score_a": ra["score"],
                "score_b": rb["score"],
                "delta": rb["score"] - ra["score"],
            })
    except BenchError as exc:
        _fail(1, f"{type(exc).__name__}: {exc}")

    mean_a = a["aggregate"]["mean_score"]
    mean_b = b["aggregate"]["mean_score"]
    comparison = {
        "kind": "bench_comparison",
        "policy_a": a["policy"],
        "policy_b": b["policy"],
        "runs": deltas,
        "aggregate": {
            "mean_score_a": mean_a,
            "mean_score_b": mean_b,
            "mean_delta": mean_b - mean_a,
        },
    }
    click.echo(canonical_json(comparison))
    click.echo(f"{'seed':>4}  {a['policy']:>14}  {b['policy']:>14}  delta", err=True)
    for d in deltas:
        click.echo(f"{d['seed']:>4}  {d['score_a']:>14.3f}  {d['score_b']:>14.3f}  "
                   f"{d['delta']:>+.3f}", err=True)
    click.echo(f"mean  {mean_a:>14.3f}  {mean_b:>14.3f}  {mean_b - mean_a:>+.3f}", err=True)


@cli.command("validate")
@click.argument("path", type=click.Path())
def cmd_validate(path) -> None:
    """Validate a scenario document; diagnostics name the offending path."""
    try:
        scenario = load_scenario(path)
    except FileNotFoundError:
        click.echo(canonical_json({"valid": False, "error": {
            "type": "FileNotFound", "message": "no such file"}}))
        _fail(1, f"{path}: no such scenario file")
    except ScenarioError as exc:
        detail = {"type": type(exc).__name__, "message": str(exc)}
        json_path = getattr(exc, "path", None)
        if json_path is not None:
            detail["path"] = json_path
        click.echo(canonical_json({"valid": False, "error": detail}))
        _fail(1, f"{path}: {type(exc).__name__}: {exc}")
    click.echo(canonical_json({
        "valid": True,
        "name": scenario.name,
        "digest": scenario_digest(scenario),
        "agents": len(scenario.agents),
        "targets": len(scenario.targets),
        "hazards": len(scenario.hazards),
    }))


@cli.command("replay")
@click.argument("path", type=click.Path())
def cmd_replay(path) -> None:
    """Re-simulate a recorded run log and verify the final tally matches."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        _fail(1, f"{path}: no such run log")
    try:
        original = RunLog.from_ndjson(text)
        replayed = replay_log(original)
    except (ValueError, KeyError, SarSwarmError) as exc:
        _fail(1, f"{path}: unreadable run log: {exc}")

    match = replayed.final_tally() == original.final_tally()
    click.echo(canonical_json({
        "replayed": True,
        "match": match,
        "original_tally": original.final["tally"],
        "replayed_tally": replayed.final["tally"],
        "scenario_digest": original.header["scenario_digest"],
    }))
    if not match:
        _fail(1, f"{path}: replay tally diverged from the recorded run")


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--ui", "ui_dir", type=click.Path(), default=None,
              help="Serve a built operator console from this directory.")
def cmd_serve(host, port, ui_dir) -> None:
    """Start the live multi-client session service."""
    from .service import serve

    static_dir = None
    if ui_dir is not None:
        static_dir = Path(ui_dir)
        if not static_dir.is_dir():
            _fail(1, f"{ui_dir}: no such UI directory (build the console first)")
    click.echo(f"serving on http://{host}:{port}/ "
               f"(sessions API under /sessions)", err=True)
    serve(host=host, port=port, static_dir=static_dir)


def main() -> None:
    cli(prog_name="sarswarm")


if __name__ == "__main__":
    main()
