"""Compare the compiled and pure-Python max-sum kernels.

Generates random allocation problems at several sizes, times both kernels
on identical inputs, and verifies their message tables agree exactly —
the compiled kernel is a line-for-line port and must be bit-identical,
not merely close.

Run:  python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import random
import time

from sarswarm.allocation import _kernel_py
from sarswarm.allocation.solver import CONVERGENCE_TOL, DEFAULT_DAMPING, DEFAULT_MAX_ITERS

try:
    from sarswarm.allocation import _kernel_cy
except ImportError:
    _kernel_cy = None


def random_inputs(rng: random.Random, n: int, m: int):
    allowed = [[1] * (m + 1) for _ in range(n)]
    utilities = [[-rng.uniform(0.0, 2000.0) for _ in range(m)] + [0.0] for _ in range(n)]
    rewards = [rng.uniform(100.0, 10_000.0) for _ in range(m)]
    penalty = 10.0 * (max(rewards) + max(-u for row in utilities for u in row[:-1]))
    return allowed, utilities, rewards, penalty


def run_kernel(kernel, inputs, repeats: int):
    allowed, utilities, rewards, penalty = inputs
    n, m = len(allowed), len(rewards)
    start = time.perf_counter()
    result = None
    for _ in range(repeats):
        result = kernel.max_sum_rounds(
            n, m, allowed, utilities, rewards, penalty,
            DEFAULT_DAMPING, DEFAULT_MAX_ITERS, CONVERGENCE_TOL, None)
    elapsed = (time.perf_counter() - start) / repeats
    return result, elapsed


def main() -> None:
    rng = random.Random(20260814)
    sizes = [(5, 12), (10, 25), (20, 50), (40, 100)]
    repeats = [50, 20, 5, 2]

    print(f"{'agents x tasks':>15}  {'python':>10}  {'compiled':>10}  {'speedup':>8}  identical")
    for (n, m), reps in zip(sizes, repeats):
        inputs = random_inputs(rng, n, m)
        (py_beliefs, py_iters, _), py_time = run_kernel(_kernel_py, inputs, reps)
        if _kernel_cy is None:
            print(f"{n:>6} x {m:<6}  {py_time * 1e3:>8.2f}ms  {'absent':>10}")
            continue
        (cy_beliefs, cy_iters, _), cy_time = run_kernel(_kernel_cy, inputs, reps)
        identical = py_beliefs == cy_beliefs and py_iters == cy_iters
        print(f"{n:>6} x {m:<6}  {py_time * 1e3:>8.2f}ms  {cy_time * 1e3:>8.2f}ms"
              f"  {py_time / cy_time:>7.1f}x  {identical}")
        if not identical:
            raise SystemExit("kernel outputs diverged — the port is broken")

    if _kernel_cy is None:
        print("compiled kernel not built; install with Cython available to compare")


if __name__ == "__main__":
    main()
