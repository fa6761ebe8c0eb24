"""Scenario document round-trips, strict validation, and digests."""

from __future__ import annotations

import copy
import json
import random

import pytest

from conftest import random_scenario
from sarswarm.errors import (
    InvariantViolation,
    MalformedJson,
    ScenarioError,
    SchemaViolation,
)
from sarswarm.scenario import (
    DEFAULT_ARRIVAL_RADIUS,
    DEFAULT_REWARD,
    DEFAULT_VISIBILITY_RADIUS,
    GroundTruth,
    Mode,
    canonical_json,
    default_scenario,
    parse_scenario,
    scenario_digest,
    scenario_from_obj,
    scenario_to_obj,
    serialize_scenario,
)


def test_round_trip_semantic_equality_100_scenarios():
    rng = random.Random(123)
    for _ in range(100):
        scenario = random_scenario(rng)
        again = parse_scenario(serialize_scenario(scenario))
        assert again == scenario


def test_serialization_is_byte_deterministic():
    rng = random.Random(5)
    scenario = random_scenario(rng)
    assert serialize_scenario(scenario) == serialize_scenario(scenario)
    # a second parse/serialize cycle is a fixed point
    text = serialize_scenario(scenario)
    assert serialize_scenario(parse_scenario(text)) == text


def test_canonical_json_sorts_keys():
    assert canonical_json({"b": 1, "a": [2, 1.5]}) == '{"a": [2, 1.5], "b": 1}'


def test_digest_stable_and_sensitive():
    a = default_scenario(seed=1)
    assert scenario_digest(a) == scenario_digest(default_scenario(seed=1))
    assert scenario_digest(a) != scenario_digest(default_scenario(seed=2))
    assert len(scenario_digest(a)) == 16
    assert all(c in "0123456789abcdef" for c in scenario_digest(a))


def test_default_scenario_shape():
    s = default_scenario()
    assert len(s.agents) == 5
    assert len(s.targets) == 12
    no_casualty = sum(t.ground_truth is GroundTruth.NO_CASUALTY for t in s.targets)
    assert no_casualty / len(s.targets) >= 0.40
    assert s.mode_config.mode is Mode.AUTONOMOUS
    assert {a.id for a in s.agents} == {f"uav-{i}" for i in range(1, 6)}


def test_optional_fields_get_documented_defaults():
    doc = {
        "name": "minimal",
        "agents": [{"id": "a1", "start": {"lat": 1.0, "lon": 2.0},
                    "speed": 5.0, "energy_budget": 100.0}],
        "targets": [{"id": "t1", "position": {"lat": 1.0, "lon": 2.0},
                     "ground_truth": "casualty"}],
        "mode_config": {"mode": "autonomous"},
    }
    s = scenario_from_obj(doc)
    assert s.agents[0].visibility_radius == DEFAULT_VISIBILITY_RADIUS
    assert s.agents[0].arrival_radius == DEFAULT_ARRIVAL_RADIUS
    assert s.agents[0].start.alt == 0.0
    assert s.targets[0].reward == DEFAULT_REWARD
    assert s.hazards == ()
    assert s.mode_config.tick_hz == 10.0
    assert s.mode_config.time_limit == 600.0
    assert s.mode_config.rng_seed == 0


def test_serializer_writes_defaults_explicitly():
    doc = {
        "name": "minimal",
        "agents": [{"id": "a1", "start": {"lat": 1.0, "lon": 2.0},
                    "speed": 5.0, "energy_budget": 100.0}],
        "targets": [{"id": "t1", "position": {"lat": 1.0, "lon": 2.0},
                     "ground_truth": "casualty"}],
        "mode_config": {"mode": "autonomous"},
    }
    obj = scenario_to_obj(scenario_from_obj(doc))
    assert obj["agents"][0]["visibility_radius"] == DEFAULT_VISIBILITY_RADIUS
    assert obj["agents"][0]["arrival_radius"] == DEFAULT_ARRIVAL_RADIUS
    assert obj["targets"][0]["reward"] == DEFAULT_REWARD
    assert obj["mode_config"]["tick_hz"] == 10.0


def test_malformed_json_raises():
    with pytest.raises(MalformedJson):
        parse_scenario("{not json")


# Each entry: (mutation applied to a valid document, path fragment the error
# must name, expected error class).
CORRUPTIONS = [
    ("drop name", lambda d: d.pop("name"), "name", SchemaViolation),
    ("name not a string", lambda d: d.update(name=7), "name", SchemaViolation),
    ("unknown top field", lambda d: d.update(wind=3), "wind", SchemaViolation),
    ("agents not a list", lambda d: d.update(agents={}), "agents", SchemaViolation),
    ("no agents", lambda d: d.update(agents=[]), "agents", InvariantViolation),
    ("agent missing speed", lambda d: d["agents"][0].pop("speed"),
     "agents[0].speed", SchemaViolation),
    ("agent speed boolean", lambda d: d["agents"][0].update(speed=True),
     "agents[0].speed", SchemaViolation),
    ("agent speed zero", lambda d: d["agents"][0].update(speed=0),
     "agents[0].speed", InvariantViolation),
    ("agent energy negative", lambda d: d["agents"][0].update(energy_budget=-5),
     "agents[0].energy_budget", InvariantViolation),
    ("agent unknown field", lambda d: d["agents"][0].update(rotor_count=4),
     "agents[0].rotor_count", SchemaViolation),
    ("agent arrival beyond visibility",
     lambda d: d["agents"][0].update(visibility_radius=50, arrival_radius=60),
     "agents[0].arrival_radius", InvariantViolation),
    ("latitude out of range", lambda d: d["agents"][0]["start"].update(lat=91),
     "agents[0].start.lat", InvariantViolation),
    ("longitude not a number", lambda d: d["agents"][1]["start"].update(lon="east"),
     "agents[1].start.lon", SchemaViolation),
    ("target ground truth misspelled",
     lambda d: d["targets"][0].update(ground_truth="maybe"),
     "targets[0].ground_truth", SchemaViolation),
    ("target reward negative", lambda d: d["targets"][1].update(reward=-1),
     "targets[1].reward", InvariantViolation),
    ("target missing position", lambda d: d["targets"][2].pop("position"),
     "targets[2].position", SchemaViolation),
    ("duplicate target id",
     lambda d: d["targets"][1].update(id=d["targets"][0]["id"]),
     "targets[1].id", InvariantViolation),
    ("hazard radius zero", lambda d: d["hazards"][0].update(radius=0),
     "hazards[0].radius", InvariantViolation),
    ("mode misspelled", lambda d: d["mode_config"].update(mode="manual"),
     "mode_config.mode", SchemaViolation),
    ("tick_hz not finite", lambda d: d["mode_config"].update(tick_hz=float("inf")),
     "mode_config.tick_hz", InvariantViolation),
]


def _valid_doc() -> dict:
    rng = random.Random(31)
    while True:
        scenario = random_scenario(rng)
        if len(scenario.agents) >= 2 and len(scenario.targets) >= 3 and scenario.hazards:
            return scenario_to_obj(scenario)


@pytest.mark.parametrize("label,mutate,path,exc_type",
                         CORRUPTIONS, ids=[c[0] for c in CORRUPTIONS])
def test_single_field_corruptions_name_their_path(label, mutate, path, exc_type):
    doc = copy.deepcopy(_valid_doc())
    mutate(doc)
    with pytest.raises(exc_type) as info:
        scenario_from_obj(json.loads(json.dumps(doc)) if _is_json_safe(doc) else doc)
    assert info.value.path == path
    assert path in str(info.value)


def _is_json_safe(doc) -> bool:
    try:
        json.dumps(doc)
        return True
    except ValueError:
        return False


def test_corruption_catalog_has_twenty_entries():
    assert len(CORRUPTIONS) == 20
    assert len({c[0] for c in CORRUPTIONS}) == 20
