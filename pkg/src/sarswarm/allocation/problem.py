"""Task-allocation problem structure, constraints, oracle and baseline.

An allocation assigns each agent at most one task (or IDLE). The global
objective rewards every task claimed by exactly one agent, charges each
agent its travel energy, and punishes double-claims with a large finite
penalty P that provably dominates any legal gain:

    objective = sum_t reward_t * [one claimant] - P * [several claimants]
                - sum_a cost(a, assignment_a)
    P = 10 * (max reward + max cost)

Agents and tasks are kept sorted by id so every tie-break in this package
reduces to index order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Iterable, Mapping, Sequence

from ..errors import ConstraintRefError, InfeasibleAllocation, InfeasibleConstraint, TooLarge
from ..scenario import GeoPosition

if TYPE_CHECKING:
    from ..engine import WorldState

#: Assignment value meaning "no task".
IDLE = None

BRUTE_FORCE_LIMIT = 10 ** 6


class ConstraintKind(str, enum.Enum):
    PIN = "pin"
    FORBID = "forbid"


class ConstraintSource(str, enum.Enum):
    MANUAL_REASSIGN = "manual_reassign"
    PREFERENCE = "preference"


@dataclass(frozen=True)
class OperatorConstraint:
    """Pin(agent -> task or IDLE) or Forbid(agent, task)."""

    kind: ConstraintKind
    agent_id: str
    task_id: str | None  # None only valid for a pin, meaning "hold at IDLE"
    source: ConstraintSource = ConstraintSource.PREFERENCE

    def __post_init__(self):
        if self.kind is ConstraintKind.FORBID and self.task_id is None:
            raise ConstraintRefError("forbid constraint needs a task id")

    def to_obj(self) -> dict:
        return {
            "kind": self.kind.value,
            "agent": self.agent_id,
            "task": self.task_id,
            "source": self.source.value,
        }


@dataclass(frozen=True)
class AgentNode:
    id: str
    position: GeoPosition
    speed: float


@dataclass(frozen=True)
class TaskNode:
    id: str
    position: GeoPosition
    reward: float


@dataclass(frozen=True)
class Allocation:
    """Feasible solved assignment: agent id -> task id or IDLE (None)."""

    assignment: Mapping[str, str | None]
    objective: float


@dataclass(frozen=True)
class AllocationProblem:
    """Agents, tasks, a dense cost matrix and operator constraints.

    ``costs[i][j]`` is the energy for agent i to serve task j, indices in
    sorted-id order. ``domains`` is filled in by :func:`apply_constraints`;
    column ``n_tasks`` stands for IDLE.
    """

    agents: tuple[AgentNode, ...]
    tasks: tuple[TaskNode, ...]
    costs: tuple[tuple[float, ...], ...]
    constraints: tuple[OperatorConstraint, ...] = ()
    domains: tuple[tuple[int, ...], ...] | None = None

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    def agent_index(self, agent_id: str) -> int:
        for i, a in enumerate(self.agents):
            if a.id == agent_id:
                return i
        raise ConstraintRefError(f"unknown agent {agent_id!r}")

    def task_index(self, task_id: str) -> int:
        for j, t in enumerate(self.tasks):
            if t.id == task_id:
                return j
        raise ConstraintRefError(f"unknown task {task_id!r}")

    def penalty_weight(self) -> float:
        max_reward = max((t.reward for t in self.tasks), default=0.0)
        max_cost = max((c for row in self.costs for c in row), default=0.0)
        return 10.0 * (max_reward + max_cost)

    def domain_of(self, agent_id: str) -> tuple[str | None, ...]:
        """Allowed choices for one agent as task ids (None = IDLE)."""
        domains = self.domains if self.domains is not None else _compute_domains(self)
        cols = domains[self.agent_index(agent_id)]
        return tuple(self.tasks[j].id if j < self.n_tasks else IDLE for j in cols)


def make_problem(
    agents: Iterable[AgentNode],
    tasks: Iterable[TaskNode],
    cost: Callable[[AgentNode, TaskNode], float] | Sequence[Sequence[float]],
    constraints: Iterable[OperatorConstraint] = (),
) -> AllocationProblem:
    """Normalize inputs into a validated AllocationProblem (ids sorted)."""
    agents = tuple(sorted(agents, key=lambda a: a.id))
    tasks = tuple(sorted(tasks, key=lambda t: t.id))
    if len({a.id for a in agents}) != len(agents):
        raise ConstraintRefError("duplicate agent ids in problem")
    if len({t.id for t in tasks}) != len(tasks):
        raise ConstraintRefError("duplicate task ids in problem")

    if callable(cost):
        matrix = tuple(tuple(float(cost(a, t)) for t in tasks) for a in agents)
    else:
        rows = [tuple(float(c) for c in row) for row in cost]
        if len(rows) != len(agents) or any(len(r) != len(tasks) for r in rows):
            raise ConstraintRefError("cost matrix shape does not match agents x tasks")
        matrix = tuple(rows)
    for row in matrix:
        for c in row:
            if not (c >= 0.0) or c != c or c == float("inf"):
                raise ConstraintRefError(f"costs must be finite and >= 0, got {c}")

    problem = AllocationProblem(agents=agents, tasks=tasks, costs=matrix,
                                constraints=tuple(constraints))
    _validate_constraint_refs(problem)
    return problem


def build_problem(world: "WorldState", constraints: Iterable[OperatorConstraint] = ()) -> AllocationProblem:
    """Allocation problem for the world's current unresolved targets.

    One task per target still Unknown; cost is the flight energy from each
    agent's current position, hazards included.
    """
    from ..geo import energy_cost

    agents = [AgentNode(a.spec.id, a.position, a.spec.speed) for a in world.agents]
    tasks = [
        TaskNode(t.spec.id, t.spec.position, t.spec.reward)
        for t in world.targets
        if t.is_unknown
    ]
    hazards = world.scenario.hazards
    model = world.energy_model
    specs = {a.spec.id: a.spec for a in world.agents}

    def cost(agent: AgentNode, task: TaskNode) -> float:
        return energy_cost(specs[agent.id], agent.position, task.position, hazards, model)

    return make_problem(agents, tasks, cost, constraints)


def _validate_constraint_refs(problem: AllocationProblem) -> None:
    agent_ids = {a.id for a in problem.agents}
    task_ids = {t.id for t in problem.tasks}
    for c in problem.constraints:
        if c.agent_id not in agent_ids:
            raise ConstraintRefError(f"constraint references unknown agent {c.agent_id!r}")
        if c.task_id is not None and c.task_id not in task_ids:
            raise ConstraintRefError(f"constraint references unknown task {c.task_id!r}")


def _compute_domains(problem: AllocationProblem) -> tuple[tuple[int, ...], ...]:
    n, m = problem.n_agents, problem.n_tasks
    idle = m
    allowed = [set(range(m)) | {idle} for _ in range(n)]

    pins: dict[int, int] = {}  # agent index -> pinned column
    pinned_tasks: dict[int, int] = {}  # task column -> pinning agent
    for c in problem.constraints:
        ai = problem.agent_index(c.agent_id)
        if c.kind is ConstraintKind.PIN:
            col = idle if c.task_id is None else problem.task_index(c.task_id)
            if ai in pins and pins[ai] != col:
                raise InfeasibleConstraint(
                    f"agent {c.agent_id!r} pinned to two different choices")
            if col != idle:
                prior = pinned_tasks.get(col)
                if prior is not None and prior != ai:
                    raise InfeasibleConstraint(
                        f"task {c.task_id!r} pinned to two agents")
                pinned_tasks[col] = ai
            pins[ai] = col

    for ai, col in pins.items():
        allowed[ai] = {col}
    for col, ai in pinned_tasks.items():
        for other in range(n):
            if other != ai:
                allowed[other].discard(col)

    for c in problem.constraints:
        if c.kind is ConstraintKind.FORBID:
            ai = problem.agent_index(c.agent_id)
            col = problem.task_index(c.task_id)
            allowed[ai].discard(col)

    for ai, dom in enumerate(allowed):
        if not dom:
            raise InfeasibleConstraint(
                f"agent {problem.agents[ai].id!r} has an empty choice set")
    return tuple(tuple(sorted(dom)) for dom in allowed)


def apply_constraints(problem: AllocationProblem) -> AllocationProblem:
    """Resolve Pin/Forbid constraints into explicit per-agent domains.

    Pin(a, t) shrinks a's domain to {t} and removes t everywhere else;
    Forbid(a, t) removes t from a's domain; IDLE stays available for every
    non-pinned agent. Raises InfeasibleConstraint on contradictions.
    """
    _validate_constraint_refs(problem)
    return replace(problem, domains=_compute_domains(problem))


def _ensure_domains(problem: AllocationProblem) -> AllocationProblem:
    return problem if problem.domains is not None else apply_constraints(problem)


def _objective_of_columns(problem: AllocationProblem, columns: Sequence[int]) -> float:
    """Objective of a column assignment, double-claims included (-P each)."""
    m = problem.n_tasks
    penalty = problem.penalty_weight()
    claims = [0] * m
    for col in columns:
        if col < m:
            claims[col] += 1
    total = 0.0
    for j in range(m):
        if claims[j] == 1:
            total += problem.tasks[j].reward
        elif claims[j] > 1:
            total -= penalty
    for i, col in enumerate(columns):
        if col < m:
            total -= problem.costs[i][col]
    return total


def _columns_of(problem: AllocationProblem, alloc: Allocation) -> list[int]:
    m = problem.n_tasks
    cols = []
    for agent in problem.agents:
        if agent.id not in alloc.assignment:
            raise InfeasibleAllocation(f"agent {agent.id!r} missing from allocation")
        task = alloc.assignment[agent.id]
        cols.append(m if task is IDLE else problem.task_index(task))
    if len(alloc.assignment) != problem.n_agents:
        raise InfeasibleAllocation("allocation names agents outside the problem")
    return cols


def allocation_objective(problem: AllocationProblem, alloc: Allocation) -> float:
    """Objective of a feasible allocation; raises InfeasibleAllocation otherwise."""
    problem = _ensure_domains(problem)
    cols = _columns_of(problem, alloc)
    seen: set[int] = set()
    for i, col in enumerate(cols):
        if col not in problem.domains[i]:
            raise InfeasibleAllocation(
                f"agent {problem.agents[i].id!r} assigned outside its constrained domain")
        if col < problem.n_tasks:
            if col in seen:
                raise InfeasibleAllocation(
                    f"task {problem.tasks[col].id!r} assigned to more than one agent")
            seen.add(col)
    return _objective_of_columns(problem, cols)


def _allocation_from_columns(problem: AllocationProblem, cols: Sequence[int]) -> Allocation:
    assignment = {
        agent.id: (IDLE if col == problem.n_tasks else problem.tasks[col].id)
        for agent, col in zip(problem.agents, cols)
    }
    return Allocation(assignment=assignment, objective=_objective_of_columns(problem, cols))


def brute_force_allocation(problem: AllocationProblem) -> Allocation:
    """Exact optimum by exhaustive enumeration (verification oracle).

    Enumerates each agent's constrained domain in column order (IDLE last),
    skipping double-claims, and keeps the first assignment reaching the
    maximum, which makes ties lexicographic in (agent id, task id).
    """
    problem = _ensure_domains(problem)
    n, m = problem.n_agents, problem.n_tasks
    size = 1
    for dom in problem.domains:
        size *= len(dom)
        if size > BRUTE_FORCE_LIMIT:
            raise TooLarge(f"enumeration would visit more than {BRUTE_FORCE_LIMIT} assignments")

    best_cols: list[int] | None = None
    best = float("-inf")
    cols = [0] * n

    def recurse(i: int, used: int) -> None:
        nonlocal best, best_cols
        if i == n:
            value = _objective_of_columns(problem, cols)
            if value > best:
                best = value
                best_cols = cols.copy()
            return
        for col in problem.domains[i]:
            if col < m and used & (1 << col):
                continue
            cols[i] = col
            recurse(i + 1, used | (1 << col) if col < m else used)

    recurse(0, 0)
    if best_cols is None:  # cannot happen: IDLE or a pin is always available
        raise InfeasibleConstraint("no feasible assignment")
    return _allocation_from_columns(problem, best_cols)


def greedy_nearest_allocation(problem: AllocationProblem) -> Allocation:
    """Baseline: agents in id order take the cheapest remaining worthwhile task.

    A task is worthwhile when reward exceeds cost; otherwise the agent
    idles. Pins are honored. This is the floor the solver must beat.
    """
    problem = _ensure_domains(problem)
    m = problem.n_tasks
    claimed: set[int] = set()
    cols: list[int] = []
    for i, dom in enumerate(problem.domains):
        if len(dom) == 1:  # pinned (to a task or to IDLE)
            cols.append(dom[0])
            if dom[0] < m:
                claimed.add(dom[0])
            continue
        pick = m
        pick_cost = float("inf")
        for col in dom:
            if col >= m or col in claimed:
                continue
            cost = problem.costs[i][col]
            if problem.tasks[col].reward - cost > 0.0 and cost < pick_cost:
                pick, pick_cost = col, cost
        cols.append(pick)
        if pick < m:
            claimed.add(pick)
    return _allocation_from_columns(problem, cols)
