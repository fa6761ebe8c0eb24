"""Deterministic discrete-time world loop.

One tick applies queued commands in seq order, steps every tasked agent,
resolves arrivals, and rebuilds the allocation whenever the task set or
the constraint set changed. A run is fully determined by (scenario, seed,
command script); the NDJSON run log it produces is byte-reproducible and
replayable.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .allocation import (
    Allocation,
    ConstraintKind,
    ConstraintSource,
    OperatorConstraint,
    build_problem,
    run_max_sum,
)
from .allocation.problem import AgentNode, TaskNode, make_problem
from .errors import (
    AlreadyClassified,
    InfeasibleConstraint,
    MalformedCommand,
    ModeForbids,
    NoFeedAvailable,
    UnknownAgent,
    UnknownTarget,
    ZeroElapsed,
)
from .geo import EnergyModel, energy_cost, haversine_distance, step_towards
from .perception import (
    ActorKind,
    CameraFeed,
    ClassificationEvent,
    clarity_at,
    feed_for,
)
from .scenario import (
    AgentSpec,
    GeoPosition,
    GroundTruth,
    Mode,
    Scenario,
    TargetSpec,
    canonical_json,
    scenario_digest,
    scenario_from_obj,
    scenario_to_obj,
)

ENGINE_VERSION = "0.1.0"


# --- commands ---------------------------------------------------------------


class CommandKind(str, enum.Enum):
    CLASSIFY = "classify"
    REASSIGN = "reassign"
    SET_MODE = "set_mode"
    PAUSE = "pause"
    RESUME = "resume"


@dataclass(frozen=True)
class Command:
    """One operator command; seq gives the total order within a session."""

    kind: CommandKind
    seq: int
    issued_by: str
    target_id: str | None = None
    agent_id: str | None = None
    label: GroundTruth | None = None
    mode: Mode | None = None

    def to_obj(self) -> dict:
        obj: dict = {"type": self.kind.value, "seq": self.seq, "issued_by": self.issued_by}
        if self.kind is CommandKind.CLASSIFY:
            obj["target"] = self.target_id
            obj["label"] = self.label.value
        elif self.kind is CommandKind.REASSIGN:
            obj["agent"] = self.agent_id
            obj["target"] = self.target_id
        elif self.kind is CommandKind.SET_MODE:
            obj["mode"] = self.mode.value
        return obj


def command_from_obj(obj, *, seq: int | None = None, issued_by: str | None = None) -> Command:
    """Decode a command JSON object; raises MalformedCommand on any defect."""
    if not isinstance(obj, dict):
        raise MalformedCommand("command must be a JSON object")
    kind_name = obj.get("type")
    try:
        kind = CommandKind(kind_name)
    except ValueError:
        raise MalformedCommand(f"unknown command type {kind_name!r}") from None

    seq = obj.get("seq") if seq is None else seq
    issued_by = obj.get("issued_by") if issued_by is None else issued_by
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise MalformedCommand("command seq must be a non-negative integer")
    if not isinstance(issued_by, str) or not issued_by:
        raise MalformedCommand("command issued_by must be a non-empty string")

    def need_str(key: str) -> str:
        value = obj.get(key)
        if not isinstance(value, str) or not value:
            raise MalformedCommand(f"command field {key!r} must be a non-empty string")
        return value

    if kind is CommandKind.CLASSIFY:
        try:
            label = GroundTruth(obj.get("label"))
        except ValueError:
            raise MalformedCommand(f"unknown label {obj.get('label')!r}") from None
        return Command(kind, seq, issued_by, target_id=need_str("target"), label=label)
    if kind is CommandKind.REASSIGN:
        target = obj.get("target")
        if target is not None and (not isinstance(target, str) or not target):
            raise MalformedCommand("reassign target must be a target id or null for IDLE")
        return Command(kind, seq, issued_by, agent_id=need_str("agent"), target_id=target)
    if kind is CommandKind.SET_MODE:
        try:
            mode = Mode(obj.get("mode"))
        except ValueError:
            raise MalformedCommand(f"unknown mode {obj.get('mode')!r}") from None
        return Command(kind, seq, issued_by, mode=mode)
    return Command(kind, seq, issued_by)


# --- world state ------------------------------------------------------------


@dataclass
class AgentRuntime:
    spec: AgentSpec
    position: GeoPosition
    energy_used: float = 0.0
    task: str | None = None
    schedule: tuple[str, ...] = ()


@dataclass
class TargetRuntime:
    spec: TargetSpec
    event: ClassificationEvent | None = None

    @property
    def is_unknown(self) -> bool:
        return self.event is None


@dataclass
class ScoreTally:
    classifications: int = 0
    correct: int = 0
    elapsed: float = 0.0

    def to_obj(self) -> dict:
        return {
            "classifications": self.classifications,
            "correct": self.correct,
            "elapsed": self.elapsed,
        }


def compute_score(tally: ScoreTally) -> tuple[float, float, float]:
    """(rate per minute, accuracy, score = rate x accuracy)."""
    if tally.elapsed <= 0.0:
        raise ZeroElapsed("score undefined before any simulated time has elapsed")
    rate = tally.classifications / (tally.elapsed / 60.0)
    accuracy = tally.correct / tally.classifications if tally.classifications else 0.0
    return rate, accuracy, rate * accuracy


@dataclass
class WorldState:
    """Everything the single writer mutates; snapshots are derived dicts."""

    scenario: Scenario
    mode: Mode
    agents: list[AgentRuntime]
    targets: list[TargetRuntime]
    allocation: Allocation
    constraints: list[OperatorConstraint]
    tally: ScoreTally
    energy_model: EnergyModel
    tick_index: int = 0
    paused: bool = False

    @property
    def sim_time(self) -> float:
        return self.tick_index / self.scenario.mode_config.tick_hz

    @property
    def dt(self) -> float:
        return 1.0 / self.scenario.mode_config.tick_hz

    def agent(self, agent_id: str) -> AgentRuntime:
        for a in self.agents:
            if a.spec.id == agent_id:
                return a
        raise UnknownAgent(f"unknown agent {agent_id!r}")

    def target(self, target_id: str) -> TargetRuntime:
        for t in self.targets:
            if t.spec.id == target_id:
                return t
        raise UnknownTarget(f"unknown target {target_id!r}")

    def unknown_targets(self) -> list[TargetRuntime]:
        return [t for t in self.targets if t.is_unknown]


def init_world(scenario: Scenario, mode: Mode | None = None) -> WorldState:
    """Fresh world at tick 0 with the initial allocation already solved."""
    world = WorldState(
        scenario=scenario,
        mode=mode if mode is not None else scenario.mode_config.mode,
        agents=[AgentRuntime(spec=a, position=a.start)
                for a in sorted(scenario.agents, key=lambda a: a.id)],
        targets=[TargetRuntime(spec=t)
                 for t in sorted(scenario.targets, key=lambda t: t.id)],
        allocation=Allocation(assignment={}, objective=0.0),
        constraints=[],
        tally=ScoreTally(),
        energy_model=EnergyModel(),
    )
    _reallocate(world)
    return world


# --- perception hooks -------------------------------------------------------


def feeds_for_world(world: WorldState) -> list[CameraFeed]:
    """Current camera feeds for every observed unknown target, by target id."""
    observers = [(a.position, a.spec.visibility_radius) for a in world.agents]
    seed = world.scenario.mode_config.rng_seed
    feeds = []
    for t in world.targets:
        if not t.is_unknown:
            continue
        feed = feed_for(seed, t.spec.id, t.spec.ground_truth, t.spec.position, observers)
        if feed is not None:
            feeds.append(feed)
    return feeds


def best_clarity(world: WorldState, target: TargetRuntime) -> float:
    best = 0.0
    for a in world.agents:
        c = clarity_at(a.position, target.spec.position, a.spec.visibility_radius)
        if c > best:
            best = c
    return best


# --- classification ---------------------------------------------------------


def _record_classification(
    world: WorldState,
    actor_kind: ActorKind,
    actor_id: str,
    target: TargetRuntime,
    label: GroundTruth,
) -> ClassificationEvent:
    event = ClassificationEvent(
        actor_kind=actor_kind,
        actor_id=actor_id,
        target_id=target.spec.id,
        label=label,
        sim_time=world.sim_time,
        correct=label is target.spec.ground_truth,
    )
    target.event = event
    world.tally.classifications += 1
    if event.correct:
        world.tally.correct += 1
    # free any agent still flying toward the resolved target
    for a in world.agents:
        if a.task == target.spec.id:
            a.task = None
            a.schedule = ()
    return event


def classify(world: WorldState, client_id: str, target_id: str, label: GroundTruth) -> ClassificationEvent:
    """Human early classification; requires a live feed and teaming mode."""
    if world.mode is not Mode.HUMAN_TEAMING:
        raise ModeForbids("human classification requires human_teaming mode")
    target = world.target(target_id)
    if not target.is_unknown:
        raise AlreadyClassified(f"target {target_id!r} is already classified")
    if best_clarity(world, target) <= 0.0:
        raise NoFeedAvailable(f"no agent currently observes target {target_id!r}")
    return _record_classification(world, ActorKind.HUMAN, client_id, target, label)


def auto_resolve(world: WorldState, agent: AgentRuntime, target: TargetRuntime) -> ClassificationEvent:
    """On-arrival resolution: always the ground truth, always correct."""
    if not target.is_unknown:
        raise AlreadyClassified(f"target {target.spec.id!r} is already classified")
    return _record_classification(
        world, ActorKind.AUTONOMOUS, agent.spec.id, target, target.spec.ground_truth
    )


# --- allocation integration --------------------------------------------------


def _live_constraints(world: WorldState) -> list[OperatorConstraint]:
    """Drop constraints that refer to resolved targets; a manual pin's
    companion forbids fall with it."""
    unknown = {t.spec.id for t in world.unknown_targets()}
    alive = [c for c in world.constraints
             if c.task_id is None or c.task_id in unknown]
    pinned = {c.agent_id for c in alive
              if c.kind is ConstraintKind.PIN and c.source is ConstraintSource.MANUAL_REASSIGN}
    return [c for c in alive
            if not (c.kind is ConstraintKind.FORBID
                    and c.source is ConstraintSource.MANUAL_REASSIGN
                    and c.agent_id not in pinned)]


def _plan_schedules(world: WorldState) -> None:
    """Greedy multi-leg lookahead: repeatedly re-solve from virtual
    completion states until every remaining target is scheduled or no
    agent finds a worthwhile leg."""
    schedules: dict[str, list[str]] = {a.spec.id: [] for a in world.agents}
    virtual: dict[str, GeoPosition] = {a.spec.id: a.position for a in world.agents}
    remaining = {t.spec.id: t.spec for t in world.unknown_targets()}

    # an explicit hold-at-IDLE pin never expires, so exclude those agents
    held = {c.agent_id for c in world.constraints
            if c.kind is ConstraintKind.PIN
            and c.source is ConstraintSource.MANUAL_REASSIGN
            and c.task_id is None}
    for aid in held:
        del virtual[aid]

    for aid, task in sorted(world.allocation.assignment.items()):
        if task is not None:
            schedules[aid].append(task)
            virtual[aid] = remaining.pop(task).position

    hazards = world.scenario.hazards
    specs = {a.spec.id: a.spec for a in world.agents}
    while remaining:
        agents = [AgentNode(aid, virtual[aid], specs[aid].speed) for aid in sorted(virtual)]
        tasks = [TaskNode(t.id, t.position, t.reward) for t in remaining.values()]

        def cost(agent: AgentNode, task: TaskNode) -> float:
            return energy_cost(specs[agent.id], agent.position, task.position,
                               hazards, world.energy_model)

        alloc = run_max_sum(make_problem(agents, tasks, cost))
        assigned_any = False
        for aid, task in sorted(alloc.assignment.items()):
            if task is None:
                continue
            schedules[aid].append(task)
            virtual[aid] = remaining.pop(task).position
            assigned_any = True
        if not assigned_any:
            break

    for a in world.agents:
        a.schedule = tuple(schedules[a.spec.id])


def _reallocate(world: WorldState) -> Allocation:
    world.constraints = _live_constraints(world)
    problem = build_problem(world, world.constraints)
    world.allocation = run_max_sum(problem)
    for a in world.agents:
        a.task = world.allocation.assignment.get(a.spec.id)
    _plan_schedules(world)
    return world.allocation


# --- command application -----------------------------------------------------


def _apply_classify(world: WorldState, cmd: Command) -> list[dict]:
    event = classify(world, cmd.issued_by, cmd.target_id, cmd.label)
    return [{"type": "classification", **event.to_obj()}]


def _apply_reassign(world: WorldState, cmd: Command) -> list[dict]:
    if world.mode is not Mode.HUMAN_TEAMING:
        raise ModeForbids("manual reassignment requires human_teaming mode")
    agent = world.agent(cmd.agent_id)
    if cmd.target_id is not None:
        target = world.target(cmd.target_id)
        if not target.is_unknown:
            raise AlreadyClassified(f"target {cmd.target_id!r} is already classified")

    if cmd.target_id is not None:
        for c in world.constraints:
            if (c.kind is ConstraintKind.PIN and c.task_id == cmd.target_id
                    and c.agent_id != agent.spec.id):
                raise InfeasibleConstraint(
                    f"target {cmd.target_id!r} is already pinned to agent {c.agent_id!r}")

    displaced = agent.task
    world.constraints = [
        c for c in world.constraints
        if not (c.source is ConstraintSource.MANUAL_REASSIGN and c.agent_id == agent.spec.id)
    ]
    if displaced is not None and displaced != cmd.target_id:
        world.constraints.append(OperatorConstraint(
            ConstraintKind.FORBID, agent.spec.id, displaced,
            ConstraintSource.MANUAL_REASSIGN))
    world.constraints.append(OperatorConstraint(
        ConstraintKind.PIN, agent.spec.id, cmd.target_id,
        ConstraintSource.MANUAL_REASSIGN))
    return [{"type": "reassigned", "agent": agent.spec.id, "target": cmd.target_id}]


def set_mode(world: WorldState, mode: Mode) -> list[dict]:
    """Hot mode switch: touches nothing but the mode field."""
    if world.mode is mode:
        return []
    world.mode = mode
    return [{"type": "mode_changed", "mode": mode.value}]


def _apply_command(world: WorldState, cmd: Command) -> tuple[list[dict], bool]:
    """Events plus whether the allocation inputs changed."""
    if cmd.kind is CommandKind.CLASSIFY:
        return _apply_classify(world, cmd), True
    if cmd.kind is CommandKind.REASSIGN:
        return _apply_reassign(world, cmd), True
    if cmd.kind is CommandKind.SET_MODE:
        return set_mode(world, cmd.mode), False
    if cmd.kind is CommandKind.PAUSE:
        if world.paused:
            return [], False
        world.paused = True
        return [{"type": "paused"}], False
    if world.paused:
        world.paused = False
        return [{"type": "resumed"}], False
    return [], False


@dataclass(frozen=True)
class CommandOutcome:
    command: Command
    error: str | None = None
    message: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class TickResult:
    events: tuple[dict, ...]
    outcomes: tuple[CommandOutcome, ...]
    advanced: bool  # False while paused: commands applied, time frozen


def tick(world: WorldState, pending: list[Command]) -> TickResult:
    """Advance the world by one step; never raises on bad commands."""
    events: list[dict] = []
    outcomes: list[CommandOutcome] = []
    dirty = False

    for cmd in sorted(pending, key=lambda c: c.seq):
        try:
            cmd_events, changed = _apply_command(world, cmd)
        except (UnknownTarget, UnknownAgent, AlreadyClassified,
                NoFeedAvailable, ModeForbids, InfeasibleConstraint) as exc:
            outcomes.append(CommandOutcome(cmd, type(exc).__name__, str(exc)))
            events.append({
                "type": "command_rejected",
                "seq": cmd.seq,
                "issued_by": cmd.issued_by,
                "error": type(exc).__name__,
                "message": str(exc),
            })
        else:
            outcomes.append(CommandOutcome(cmd))
            events.extend(cmd_events)
            dirty = dirty or changed

    advanced = not world.paused
    if advanced:
        dt = world.dt
        for agent in world.agents:
            if agent.task is None:
                continue
            dest = world.target(agent.task).spec.position
            moved_to = step_towards(agent.position, dest, agent.spec.speed, dt)
            agent.energy_used += (haversine_distance(agent.position, moved_to)
                                  * world.energy_model.joules_per_meter)
            agent.position = moved_to

        for agent in world.agents:
            if agent.task is None:
                continue
            target = world.target(agent.task)
            if not target.is_unknown:
                continue
            if haversine_distance(agent.position, target.spec.position) <= agent.spec.arrival_radius:
                event = auto_resolve(world, agent, target)
                events.append({"type": "classification", **event.to_obj()})
                dirty = True

    if dirty:
        alloc = _reallocate(world)
        events.append({
            "type": "reallocation",
            "assignment": {aid: alloc.assignment[aid] for aid in sorted(alloc.assignment)},
            "objective": alloc.objective,
        })

    if advanced:
        world.tick_index += 1
        world.tally.elapsed = world.sim_time

    return TickResult(tuple(events), tuple(outcomes), advanced)


# --- snapshots ---------------------------------------------------------------


def _position_obj(p: GeoPosition) -> dict:
    return {"lat": p.lat, "lon": p.lon, "alt": p.alt}


def world_snapshot(world: WorldState) -> dict:
    """Operator-facing view: ground truth of unknown targets is stripped."""
    try:
        rate, accuracy, score = compute_score(world.tally)
    except ZeroElapsed:
        rate = accuracy = score = 0.0
    targets = []
    for t in world.targets:
        entry: dict = {"id": t.spec.id, "position": _position_obj(t.spec.position),
                       "reward": t.spec.reward}
        if t.is_unknown:
            entry["state"] = "unknown"
        else:
            entry["state"] = "classified"
            entry["classification"] = t.event.to_obj()
        targets.append(entry)
    return {
        "tick": world.tick_index,
        "sim_time": world.sim_time,
        "mode": world.mode.value,
        "paused": world.paused,
        "agents": [
            {
                "id": a.spec.id,
                "position": _position_obj(a.position),
                "energy_used": a.energy_used,
                "energy_budget": a.spec.energy_budget,
                "task": a.task,
                "schedule": list(a.schedule),
            }
            for a in world.agents
        ],
        "targets": targets,
        "feeds": [f.to_obj() for f in feeds_for_world(world)],
        "constraints": [c.to_obj() for c in world.constraints],
        "score": {
            "rate": rate,
            "accuracy": accuracy,
            "score": score,
            **world.tally.to_obj(),
        },
    }


# --- run logs ----------------------------------------------------------------


@dataclass(frozen=True)
class RunLog:
    """Header plus ordered step records; serializes to NDJSON."""

    header: dict
    records: tuple[dict, ...]

    def to_ndjson(self) -> str:
        lines = [canonical_json(self.header)]
        lines.extend(canonical_json(r) for r in self.records)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_ndjson(text: str) -> "RunLog":
        lines = [line for line in text.split("\n") if line]
        header = json.loads(lines[0])
        return RunLog(header=header, records=tuple(json.loads(l) for l in lines[1:]))

    @property
    def final(self) -> dict:
        return self.records[-1]

    def final_tally(self) -> ScoreTally:
        t = self.final["tally"]
        return ScoreTally(t["classifications"], t["correct"], t["elapsed"])

    def command_script(self) -> list[tuple[int, Command]]:
        """(step index, command) pairs in application order."""
        script = []
        for rec in self.records:
            if rec.get("kind") != "tick":
                continue
            for obj in rec["commands"]:
                script.append((rec["step"], command_from_obj(obj)))
        return script


def _tick_record(world: WorldState, step: int, tick_before: int,
                 commands: list[Command], result: TickResult) -> dict:
    return {
        "kind": "tick",
        "step": step,
        "tick": tick_before,
        "sim_time": world.sim_time,
        "commands": [c.to_obj() for c in commands],
        "events": list(result.events),
        "agents": [
            {
                "id": a.spec.id,
                "position": _position_obj(a.position),
                "energy_used": a.energy_used,
                "task": a.task,
                "schedule": list(a.schedule),
            }
            for a in world.agents
        ],
    }


@dataclass
class ScriptedHuman:
    """Idealized operator: classifies any feed at clarity >= theta, always
    correctly. Used for the human-teaming benchmark runs."""

    theta: float = 0.7
    client_id: str = "scripted-human"

    def commands_for(self, world: WorldState) -> list[dict]:
        commands = []
        for t in world.targets:
            if not t.is_unknown:
                continue
            if best_clarity(world, t) >= self.theta:
                commands.append({
                    "type": "classify",
                    "target": t.spec.id,
                    "label": t.spec.ground_truth.value,
                })
        return commands

    def describe(self) -> str:
        return f"scripted:{self.theta}"


def run_headless(
    scenario: Scenario,
    policy: ScriptedHuman | None = None,
    script: list[tuple[int, Command]] | None = None,
    start_mode: Mode | None = None,
) -> RunLog:
    """Simulate to the time limit or until every target is resolved.

    ``policy`` None is the fully autonomous baseline. ``script`` replays
    recorded commands at their original step indices (seq order preserved
    within a step). Runs as fast as possible; pacing is the session
    service's job.
    """
    if start_mode is None:
        start_mode = Mode.HUMAN_TEAMING if policy is not None else Mode.AUTONOMOUS
    world = init_world(scenario, mode=start_mode)

    header = {
        "kind": "header",
        "engine_version": ENGINE_VERSION,
        "scenario_digest": scenario_digest(scenario),
        "seed": scenario.mode_config.rng_seed,
        "mode": start_mode.value,
        "policy": policy.describe() if policy is not None else "autonomous",
        "scenario": scenario_to_obj(scenario),
    }

    scripted: dict[int, list[Command]] = {}
    next_seq = 0
    for step, cmd in script or []:
        scripted.setdefault(step, []).append(cmd)
        next_seq = max(next_seq, cmd.seq + 1)

    tick_hz = scenario.mode_config.tick_hz
    max_ticks = round(scenario.mode_config.time_limit * tick_hz)
    records: list[dict] = []
    queued: list[dict] = []
    step = 0

    while world.tick_index < max_ticks and world.unknown_targets():
        pending = list(scripted.get(step, ()))
        for obj in queued:
            pending.append(command_from_obj(obj, seq=next_seq, issued_by=policy.client_id))
            next_seq += 1
        queued = []

        tick_before = world.tick_index
        result = tick(world, pending)
        records.append(_tick_record(world, step, tick_before, pending, result))
        step += 1

        if policy is not None:
            queued = policy.commands_for(world)

    reason = "all_classified" if not world.unknown_targets() else "time_limit"
    try:
        rate, accuracy, score = compute_score(world.tally)
    except ZeroElapsed:
        rate = accuracy = score = 0.0
    records.append({
        "kind": "final",
        "reason": reason,
        "ticks": world.tick_index,
        "sim_time": world.sim_time,
        "tally": world.tally.to_obj(),
        "metrics": {"rate": rate, "accuracy": accuracy, "score": score},
    })
    return RunLog(header=header, records=tuple(records))


def replay(log: RunLog) -> RunLog:
    """Re-simulate a run log's scenario and command script.

    Determinism makes every step record identical to the original
    (the header's policy field records how the commands were produced,
    so it may differ); the replayed final tally is the check of record.
    """
    scenario = scenario_from_obj(log.header["scenario"])
    return run_headless(
        scenario,
        policy=None,
        script=log.command_script(),
        start_mode=Mode(log.header["mode"]),
    )
