"""Scenario data model: world descriptions and their canonical JSON form.

A scenario is an experiment definition, so the decoder is deliberately
strict: unknown fields are rejected (silent typos corrupt studies), every
diagnostic names the JSON path it refers to, and serialization is canonical
(sorted keys, fixed separators, shortest round-trip floats) so equal
scenarios always produce byte-identical documents.

The schema is documented in docs/scenario-schema.md; the conventional file
extension is ``.scenario.json``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import random
from dataclasses import dataclass, field

from .errors import InvariantViolation, MalformedJson, SchemaViolation

DEFAULT_TICK_HZ = 10.0
DEFAULT_TIME_LIMIT = 600.0
DEFAULT_REWARD = 1000.0
DEFAULT_VISIBILITY_RADIUS = 300.0
DEFAULT_ARRIVAL_RADIUS = 10.0
DEFAULT_SCENARIO_SEED = 7


class GroundTruth(str, enum.Enum):
    CASUALTY = "casualty"
    NO_CASUALTY = "no_casualty"


class Mode(str, enum.Enum):
    AUTONOMOUS = "autonomous"
    HUMAN_TEAMING = "human_teaming"


@dataclass(frozen=True)
class GeoPosition:
    """WGS-84 style coordinate. ``alt`` is carried but ignored by distances."""

    lat: float
    lon: float
    alt: float = 0.0


@dataclass(frozen=True)
class AgentSpec:
    id: str
    start: GeoPosition
    speed: float
    energy_budget: float
    visibility_radius: float = DEFAULT_VISIBILITY_RADIUS
    arrival_radius: float = DEFAULT_ARRIVAL_RADIUS


@dataclass(frozen=True)
class TargetSpec:
    id: str
    position: GeoPosition
    ground_truth: GroundTruth
    reward: float = DEFAULT_REWARD


@dataclass(frozen=True)
class HazardSpec:
    id: str
    center: GeoPosition
    radius: float
    penalty: float


@dataclass(frozen=True)
class ModeConfig:
    mode: Mode
    tick_hz: float = DEFAULT_TICK_HZ
    time_limit: float = DEFAULT_TIME_LIMIT
    rng_seed: int = 0


@dataclass(frozen=True)
class Scenario:
    name: str
    agents: tuple[AgentSpec, ...]
    targets: tuple[TargetSpec, ...]
    hazards: tuple[HazardSpec, ...] = ()
    mode_config: ModeConfig = field(default_factory=lambda: ModeConfig(Mode.AUTONOMOUS))


# --- decoding -------------------------------------------------------------
#
# Small hand-rolled decoder instead of a schema library: the error contract
# (SchemaViolation vs InvariantViolation, both carrying an exact JSON path)
# is the point of this module, and the schema is tiny.

def _expect_object(value, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(value, dict):
        raise SchemaViolation(path, f"expected object, got {type(value).__name__}")
    for key in value:
        if key not in required and key not in optional:
            raise SchemaViolation(_join(path, key), "unknown field")
    for key in required:
        if key not in value:
            raise SchemaViolation(_join(path, key), "missing required field")
    return value


def _join(path: str, key: str) -> str:
    return key if path == "$" else f"{path}.{key}"


def _expect_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(path, f"expected string, got {type(value).__name__}")
    return value


def _expect_number(value, path: str) -> float:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(path, f"expected number, got {type(value).__name__}")
    out = float(value)
    if not math.isfinite(out):
        raise InvariantViolation(path, "value must be finite")
    return out


def _expect_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(path, f"expected integer, got {type(value).__name__}")
    return value


def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise SchemaViolation(path, f"expected array, got {type(value).__name__}")
    return value


def _positive(value: float, path: str) -> float:
    if value <= 0:
        raise InvariantViolation(path, "value must be > 0")
    return value


def _non_negative(value: float, path: str) -> float:
    if value < 0:
        raise InvariantViolation(path, "value must be >= 0")
    return value


def _decode_position(value, path: str) -> GeoPosition:
    obj = _expect_object(value, path, required=("lat", "lon"), optional=("alt",))
    lat = _expect_number(obj["lat"], _join(path, "lat"))
    lon = _expect_number(obj["lon"], _join(path, "lon"))
    alt = _expect_number(obj.get("alt", 0.0), _join(path, "alt"))
    if not -90.0 <= lat <= 90.0:
        raise InvariantViolation(_join(path, "lat"), "latitude must lie in [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise InvariantViolation(_join(path, "lon"), "longitude must lie in [-180, 180]")
    _non_negative(alt, _join(path, "alt"))
    return GeoPosition(lat, lon, alt)


def _decode_agent(value, path: str) -> AgentSpec:
    obj = _expect_object(
        value, path,
        required=("id", "start", "speed", "energy_budget"),
        optional=("visibility_radius", "arrival_radius"),
    )
    agent = AgentSpec(
        id=_expect_str(obj["id"], _join(path, "id")),
        start=_decode_position(obj["start"], _join(path, "start")),
        speed=_positive(_expect_number(obj["speed"], _join(path, "speed")), _join(path, "speed")),
        energy_budget=_positive(
            _expect_number(obj["energy_budget"], _join(path, "energy_budget")),
            _join(path, "energy_budget"),
        ),
        visibility_radius=_positive(
            _expect_number(obj.get("visibility_radius", DEFAULT_VISIBILITY_RADIUS),
                           _join(path, "visibility_radius")),
            _join(path, "visibility_radius"),
        ),
        arrival_radius=_positive(
            _expect_number(obj.get("arrival_radius", DEFAULT_ARRIVAL_RADIUS),
                           _join(path, "arrival_radius")),
            _join(path, "arrival_radius"),
        ),
    )
    if agent.arrival_radius > agent.visibility_radius:
        raise InvariantViolation(_join(path, "arrival_radius"),
                                 "arrival_radius must not exceed visibility_radius")
    return agent


def _decode_target(value, path: str) -> TargetSpec:
    obj = _expect_object(value, path,
                         required=("id", "position", "ground_truth"),
                         optional=("reward",))
    gt_raw = _expect_str(obj["ground_truth"], _join(path, "ground_truth"))
    try:
        ground_truth = GroundTruth(gt_raw)
    except ValueError:
        raise SchemaViolation(
            _join(path, "ground_truth"),
            f"expected one of {[m.value for m in GroundTruth]}, got {gt_raw!r}",
        ) from None
    return TargetSpec(
        id=_expect_str(obj["id"], _join(path, "id")),
        position=_decode_position(obj["position"], _join(path, "position")),
        ground_truth=ground_truth,
        reward=_non_negative(
            _expect_number(obj.get("reward", DEFAULT_REWARD), _join(path, "reward")),
            _join(path, "reward"),
        ),
    )


def _decode_hazard(value, path: str) -> HazardSpec:
    obj = _expect_object(value, path, required=("id", "center", "radius", "penalty"))
    return HazardSpec(
        id=_expect_str(obj["id"], _join(path, "id")),
        center=_decode_position(obj["center"], _join(path, "center")),
        radius=_positive(_expect_number(obj["radius"], _join(path, "radius")),
                         _join(path, "radius")),
        penalty=_non_negative(_expect_number(obj["penalty"], _join(path, "penalty")),
                              _join(path, "penalty")),
    )


def _decode_mode_config(value, path: str) -> ModeConfig:
    obj = _expect_object(value, path, required=("mode",),
                         optional=("tick_hz", "time_limit", "rng_seed"))
    mode_raw = _expect_str(obj["mode"], _join(path, "mode"))
    try:
        mode = Mode(mode_raw)
    except ValueError:
        raise SchemaViolation(
            _join(path, "mode"),
            f"expected one of {[m.value for m in Mode]}, got {mode_raw!r}",
        ) from None
    rng_seed = _expect_int(obj.get("rng_seed", 0), _join(path, "rng_seed"))
    if not 0 <= rng_seed < 2 ** 64:
        raise InvariantViolation(_join(path, "rng_seed"), "seed must fit in 64 unsigned bits")
    return ModeConfig(
        mode=mode,
        tick_hz=_positive(_expect_number(obj.get("tick_hz", DEFAULT_TICK_HZ),
                                         _join(path, "tick_hz")),
                          _join(path, "tick_hz")),
        time_limit=_positive(_expect_number(obj.get("time_limit", DEFAULT_TIME_LIMIT),
                                            _join(path, "time_limit")),
                             _join(path, "time_limit")),
        rng_seed=rng_seed,
    )


def scenario_from_obj(data) -> Scenario:
    """Decode an already-parsed JSON value into a validated Scenario."""
    obj = _expect_object(data, "$", required=("name", "agents", "targets", "mode_config"),
                         optional=("hazards",))
    name = _expect_str(obj["name"], "name")

    agents = tuple(
        _decode_agent(item, f"agents[{i}]")
        for i, item in enumerate(_expect_list(obj["agents"], "agents"))
    )
    targets = tuple(
        _decode_target(item, f"targets[{i}]")
        for i, item in enumerate(_expect_list(obj["targets"], "targets"))
    )
    hazards = tuple(
        _decode_hazard(item, f"hazards[{i}]")
        for i, item in enumerate(_expect_list(obj.get("hazards", []), "hazards"))
    )
    if not agents:
        raise InvariantViolation("agents", "a scenario needs at least one agent")

    seen: dict[str, str] = {}
    for kind, items in (("agents", agents), ("targets", targets), ("hazards", hazards)):
        for i, item in enumerate(items):
            if item.id in seen:
                raise InvariantViolation(f"{kind}[{i}].id",
                                         f"duplicate id {item.id!r} (first used by {seen[item.id]})")
            seen[item.id] = f"{kind}[{i}]"

    return Scenario(
        name=name,
        agents=agents,
        targets=targets,
        hazards=hazards,
        mode_config=_decode_mode_config(obj["mode_config"], "mode_config"),
    )


def parse_scenario(text: str) -> Scenario:
    """Parse a UTF-8 JSON document into a validated Scenario."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"invalid JSON: {exc}") from exc
    return scenario_from_obj(data)


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# --- encoding -------------------------------------------------------------

def scenario_to_obj(s: Scenario) -> dict:
    """Plain-dict form of a scenario, with every optional field made explicit."""
    return {
        "name": s.name,
        "agents": [
            {
                "id": a.id,
                "start": _position_to_obj(a.start),
                "speed": float(a.speed),
                "energy_budget": float(a.energy_budget),
                "visibility_radius": float(a.visibility_radius),
                "arrival_radius": float(a.arrival_radius),
            }
            for a in s.agents
        ],
        "targets": [
            {
                "id": t.id,
                "position": _position_to_obj(t.position),
                "ground_truth": t.ground_truth.value,
                "reward": float(t.reward),
            }
            for t in s.targets
        ],
        "hazards": [
            {
                "id": h.id,
                "center": _position_to_obj(h.center),
                "radius": float(h.radius),
                "penalty": float(h.penalty),
            }
            for h in s.hazards
        ],
        "mode_config": {
            "mode": s.mode_config.mode.value,
            "tick_hz": float(s.mode_config.tick_hz),
            "time_limit": float(s.mode_config.time_limit),
            "rng_seed": s.mode_config.rng_seed,
        },
    }


def _position_to_obj(p: GeoPosition) -> dict:
    return {"lat": float(p.lat), "lon": float(p.lon), "alt": float(p.alt)}


def canonical_json(value) -> str:
    """Canonical JSON encoding: sorted keys, single-space separators."""
    return json.dumps(value, sort_keys=True, separators=(", ", ": "), ensure_ascii=False)


def serialize_scenario(s: Scenario) -> str:
    return canonical_json(scenario_to_obj(s))


def scenario_digest(s: Scenario) -> str:
    """Stable content hash identifying a scenario (first 16 hex chars of SHA-256)."""
    return hashlib.sha256(serialize_scenario(s).encode("utf-8")).hexdigest()[:16]


# --- built-in default scenario ---------------------------------------------

def default_scenario(seed: int = DEFAULT_SCENARIO_SEED) -> Scenario:
    """Deterministic benchmark world: 5 UAVs and 12 targets in a ~2 km box.

    Agents launch from a cluster at the box centre. Five of the twelve
    targets are not casualties, so an autonomous sweep always includes
    journeys a human teammate could have cut short. The layout is a pure
    function of ``seed``; the benchmark CLI sweeps seeds to vary it.
    """
    rng = random.Random(seed)
    center_lat, center_lon = 44.0, -72.5
    # ~2 km box: 1 deg lat ~ 111.2 km, shrink lon by cos(lat)
    half_lat = 1000.0 / 111_195.0
    half_lon = half_lat / math.cos(math.radians(center_lat))

    def jitter(scale: float) -> tuple[float, float]:
        return (rng.uniform(-scale, scale), rng.uniform(-scale, scale))

    agents = []
    for i in range(5):
        dlat, dlon = jitter(half_lat * 0.03)
        agents.append(AgentSpec(
            id=f"uav-{i + 1}",
            start=GeoPosition(round(center_lat + dlat, 7), round(center_lon + dlon, 7), 60.0),
            speed=15.0,
            energy_budget=20_000.0,
        ))

    labels = [GroundTruth.NO_CASUALTY] * 5 + [GroundTruth.CASUALTY] * 7
    rng.shuffle(labels)
    targets = []
    for i in range(12):
        dlat, dlon = jitter(1.0)
        targets.append(TargetSpec(
            id=f"tgt-{i + 1:02d}",
            position=GeoPosition(round(center_lat + dlat * half_lat, 7),
                                 round(center_lon + dlon * half_lon, 7)),
            ground_truth=labels[i],
            # far above the worst-case flight energy in this box, so every
            # target is always worth visiting and sweeps run to completion
            reward=10_000.0,
        ))

    hazards = []
    for i in range(2):
        dlat, dlon = jitter(0.6)
        hazards.append(HazardSpec(
            id=f"hz-{i + 1}",
            center=GeoPosition(round(center_lat + dlat * half_lat, 7),
                               round(center_lon + dlon * half_lon, 7)),
            radius=rng.uniform(120.0, 220.0).__round__(1),
            penalty=250.0,
        ))

    return Scenario(
        name=f"default-sar-{seed}",
        agents=tuple(agents),
        targets=tuple(targets),
        hazards=tuple(hazards),
        mode_config=ModeConfig(mode=Mode.AUTONOMOUS, rng_seed=seed),
    )
