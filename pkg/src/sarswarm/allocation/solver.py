"""Damped synchronous max-sum solver over the agent-task factor graph.

The message rounds run in a compiled kernel when the extension built, with
a pure-Python fallback selected at import (override with the environment
variable SARSWARM_KERNEL=python|cython). Decode and collision repair are
shared Python on either path, so the kernels only have to agree on the
message tables -- which they do bit-for-bit.
"""

from __future__ import annotations

import os

from . import _kernel_py
from .problem import (
    Allocation,
    AllocationProblem,
    _allocation_from_columns,
    _ensure_domains,
)

try:
    from . import _kernel_cy
except ImportError:
    _kernel_cy = None

DEFAULT_MAX_ITERS = 100
DEFAULT_DAMPING = 0.5
CONVERGENCE_TOL = 1e-9


def _select_kernel():
    forced = os.environ.get("SARSWARM_KERNEL", "").strip().lower()
    if forced == "python":
        return _kernel_py, "python"
    if forced == "cython":
        if _kernel_cy is None:
            raise ImportError("SARSWARM_KERNEL=cython but the compiled kernel is not built")
        return _kernel_cy, "cython"
    if forced:
        raise ValueError(f"unknown SARSWARM_KERNEL value {forced!r}")
    if _kernel_cy is not None:
        return _kernel_cy, "cython"
    return _kernel_py, "python"


_KERNEL, ACTIVE_KERNEL = _select_kernel()


def _tables(problem: AllocationProblem):
    """allowed mask and utility table in column layout (IDLE = last column)."""
    n, m = problem.n_agents, problem.n_tasks
    width = m + 1
    allowed = [[0] * width for _ in range(n)]
    utilities = [[0.0] * width for _ in range(n)]
    for i, dom in enumerate(problem.domains):
        for col in dom:
            allowed[i][col] = 1
            utilities[i][col] = -problem.costs[i][col] if col < m else 0.0
    rewards = [t.reward for t in problem.tasks]
    return allowed, utilities, rewards


def _decode(problem: AllocationProblem, beliefs) -> list[int]:
    """Per-agent argmax over its domain, first maximum in column order."""
    cols = []
    for i, dom in enumerate(problem.domains):
        best_col = dom[0]
        best = beliefs[i][dom[0]]
        for col in dom[1:]:
            if beliefs[i][col] > best:
                best = beliefs[i][col]
                best_col = col
        cols.append(best_col)
    return cols


def _repair_collisions(problem: AllocationProblem, cols: list[int]) -> list[int]:
    """Give each over-claimed task to its cheapest claimant, move the rest.

    Displaced agents take their best unclaimed option by net utility
    (reward - cost, IDLE = 0), which never decreases the objective: every
    move removes a -P collision term.
    """
    m = problem.n_tasks
    claimants: dict[int, list[int]] = {}
    for i, col in enumerate(cols):
        if col < m:
            claimants.setdefault(col, []).append(i)

    claimed = {col for col, who in claimants.items() if who}
    for col in sorted(claimants):
        who = claimants[col]
        if len(who) < 2:
            continue
        keep = min(who, key=lambda i: (problem.costs[i][col], i))
        for i in who:
            if i == keep:
                continue
            best_col = m
            best = 0.0
            for cand in problem.domains[i]:
                if cand >= m or cand in claimed:
                    continue
                gain = problem.tasks[cand].reward - problem.costs[i][cand]
                if gain > best:
                    best = gain
                    best_col = cand
            cols[i] = best_col
            if best_col < m:
                claimed.add(best_col)
    return cols


def run_max_sum(
    problem: AllocationProblem,
    max_iters: int = DEFAULT_MAX_ITERS,
    damping: float = DEFAULT_DAMPING,
    trace: list | None = None,
) -> Allocation:
    """Solve the allocation problem; always returns a feasible Allocation.

    Synchronous message rounds with normalization and damping, stopping at
    ``max_iters`` or when the largest message change drops below 1e-9,
    then per-variable argmax decode plus greedy collision repair.
    """
    if not 0.0 <= damping < 1.0:
        raise ValueError("damping must lie in [0, 1)")
    problem = _ensure_domains(problem)
    n, m = problem.n_agents, problem.n_tasks
    if m == 0:
        return _allocation_from_columns(problem, [m] * n)

    allowed, utilities, rewards = _tables(problem)
    kernel = _kernel_py if trace is not None else _KERNEL
    beliefs, _, _ = kernel.max_sum_rounds(
        n, m, allowed, utilities, rewards,
        problem.penalty_weight(), damping, max_iters, CONVERGENCE_TOL,
        trace,
    )
    cols = _repair_collisions(problem, _decode(problem, beliefs))
    return _allocation_from_columns(problem, cols)


def dump_factor_graph(problem: AllocationProblem) -> dict:
    """JSON-ready factor-graph structure dump for test tooling."""
    problem = _ensure_domains(problem)
    m = problem.n_tasks
    return {
        "variables": [
            {
                "agent": agent.id,
                "domain": [problem.tasks[c].id if c < m else "IDLE"
                           for c in problem.domains[i]],
                "unary_cost": {problem.tasks[c].id: problem.costs[i][c]
                               for c in problem.domains[i] if c < m},
            }
            for i, agent in enumerate(problem.agents)
        ],
        "factors": [
            {
                "task": task.id,
                "reward": task.reward,
                "connected_agents": [a.id for i, a in enumerate(problem.agents)
                                     if j in problem.domains[i]],
            }
            for j, task in enumerate(problem.tasks)
        ],
        "collision_penalty": problem.penalty_weight(),
    }


def solve_with_trace(
    problem: AllocationProblem,
    max_iters: int = DEFAULT_MAX_ITERS,
    damping: float = DEFAULT_DAMPING,
) -> tuple[Allocation, dict]:
    """Solve while recording per-round message tables (debug dump format)."""
    trace: list = []
    alloc = run_max_sum(problem, max_iters, damping, trace=trace)
    dump = dump_factor_graph(problem)
    dump["rounds"] = trace
    dump["assignment"] = dict(alloc.assignment)
    dump["objective"] = alloc.objective
    return alloc, dump
