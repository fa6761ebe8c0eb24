"""Decentralized task allocation: factor graph, max-sum solver and oracle."""

from .problem import (
    IDLE,
    AgentNode,
    Allocation,
    AllocationProblem,
    ConstraintKind,
    ConstraintSource,
    OperatorConstraint,
    TaskNode,
    allocation_objective,
    apply_constraints,
    brute_force_allocation,
    build_problem,
    greedy_nearest_allocation,
    make_problem,
)
from .solver import (
    ACTIVE_KERNEL,
    DEFAULT_DAMPING,
    DEFAULT_MAX_ITERS,
    dump_factor_graph,
    run_max_sum,
    solve_with_trace,
)

__all__ = [
    "IDLE",
    "ACTIVE_KERNEL",
    "AgentNode",
    "Allocation",
    "AllocationProblem",
    "ConstraintKind",
    "ConstraintSource",
    "DEFAULT_DAMPING",
    "DEFAULT_MAX_ITERS",
    "OperatorConstraint",
    "TaskNode",
    "allocation_objective",
    "apply_constraints",
    "brute_force_allocation",
    "build_problem",
    "dump_factor_graph",
    "greedy_nearest_allocation",
    "make_problem",
    "run_max_sum",
    "solve_with_trace",
]
