"""Shared generators and the acceptance-summary reporting hook."""

from __future__ import annotations

import math
import random

from sarswarm.scenario import (
    AgentSpec,
    GeoPosition,
    GroundTruth,
    HazardSpec,
    Mode,
    ModeConfig,
    Scenario,
    TargetSpec,
)

# measured results the acceptance tests want echoed next to their verdict
ACCEPTANCE_NOTES: dict[str, str] = {}

# one line per acceptance criterion printed at the end of the run
ACCEPTANCE_TITLES = {
    "test_solver_oracle_agreement": "solver-oracle agreement (500 instances, >=95% optimal, never below greedy, <10s)",
    "test_constraint_soundness": "constraint soundness (200 instances, zero violations; contradictory pins raise)",
    "test_human_teaming_gain": "human-teaming gain (20 paired seeds, scripted mean > autonomous mean, <60s)",
    "test_metric_arithmetic": "metric arithmetic (tabulated tallies 2.0 / 1.6 / 0.0, exact)",
    "test_determinism_replay": "determinism/replay (byte-identical logs; replay reproduces tally)",
    "test_scenario_round_trip": "scenario round-trip (100 scenarios; 20 path-named corruptions)",
    "test_mode_hot_switch": "mode hot-switch (tick 500 of 6000, only mode changes, run completes)",
    "test_perception_invariants": "perception invariants (clarity endpoints, monotonicity, level formula)",
    "test_multi_client_consistency": "multi-client consistency (identical streams, ack visible within 2 ticks)",
    "test_editor_round_trip": "editor round-trip (exported scenario validates and re-imports identically)",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL"),
                          ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1].split("[")[0]
            if name in ACCEPTANCE_TITLES and outcomes.get(name) != "FAIL":
                outcomes[name] = label
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, title in ACCEPTANCE_TITLES.items():
        label = outcomes.get(name, "NOT RUN")
        note = ACCEPTANCE_NOTES.get(name)
        suffix = f" — {note}" if note else ""
        terminalreporter.write_line(f"[{label}] {title}{suffix}")


def random_position(rng: random.Random, center=(44.0, -72.5), spread_m=1500.0) -> GeoPosition:
    dlat = rng.uniform(-spread_m, spread_m) / 111_195.0
    dlon = rng.uniform(-spread_m, spread_m) / (111_195.0 * math.cos(math.radians(center[0])))
    return GeoPosition(round(center[0] + dlat, 7), round(center[1] + dlon, 7),
                       round(rng.uniform(0.0, 120.0), 2))


def random_scenario(rng: random.Random) -> Scenario:
    """Valid scenario with randomized sizes and optional fields exercised."""
    n_agents = rng.randint(1, 6)
    n_targets = rng.randint(0, 14)
    n_hazards = rng.randint(0, 4)

    agents = []
    for i in range(n_agents):
        visibility = rng.uniform(60.0, 500.0)
        agents.append(AgentSpec(
            id=f"uav-{i + 1}",
            start=random_position(rng),
            speed=round(rng.uniform(3.0, 30.0), 3),
            energy_budget=round(rng.uniform(5_000.0, 50_000.0), 1),
            visibility_radius=round(visibility, 2),
            arrival_radius=round(rng.uniform(2.0, min(40.0, visibility)), 2),
        ))
    targets = tuple(
        TargetSpec(
            id=f"tgt-{i + 1:02d}",
            position=random_position(rng),
            ground_truth=rng.choice(list(GroundTruth)),
            reward=round(rng.uniform(0.0, 20_000.0), 2),
        )
        for i in range(n_targets)
    )
    hazards = tuple(
        HazardSpec(
            id=f"hz-{i + 1}",
            center=random_position(rng),
            radius=round(rng.uniform(50.0, 400.0), 1),
            penalty=round(rng.uniform(0.0, 800.0), 1),
        )
        for i in range(n_hazards)
    )
    mode_config = ModeConfig(
        mode=rng.choice(list(Mode)),
        tick_hz=rng.choice([5.0, 10.0, 20.0]),
        time_limit=round(rng.uniform(60.0, 900.0), 1),
        rng_seed=rng.randint(0, 2 ** 32),
    )
    return Scenario(
        name=f"random-{rng.randint(0, 10 ** 9)}",
        agents=tuple(agents),
        targets=targets,
        hazards=hazards,
        mode_config=mode_config,
    )
