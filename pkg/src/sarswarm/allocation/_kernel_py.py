"""Pure-Python max-sum message rounds (fallback kernel).

Synchronous (flooding) schedule over the bipartite factor graph: every
round recomputes all variable->factor and factor->variable tables from the
previous round, normalizes each table by its maximum, and blends with the
previous value (damping). The compiled kernel in _kernel_cy.pyx mirrors
this file operation for operation; keep the arithmetic order identical in
both so results stay bit-for-bit equal.

Message tables are indexed by column: tasks 0..M-1 in problem order, M is
IDLE. A factor->variable table for the exactly-one-claimant factor only
distinguishes "agent takes the task" from "agent does anything else", and
is computed exactly (up to the additive constant removed by normalization)
from each eligible agent's switch gain

    delta_a = q_a(t) - max_{x != t} q_a(x),

via running aggregates that allow excluding the receiving agent.
"""

from __future__ import annotations

NEG_INF = float("-inf")


def max_sum_rounds(
    n_agents: int,
    n_tasks: int,
    allowed: list[list[int]],
    utilities: list[list[float]],
    rewards: list[float],
    penalty: float,
    damping: float,
    max_iters: int,
    tol: float,
    trace: list | None = None,
):
    """Run message rounds; returns (beliefs, iterations, converged).

    beliefs[a][x] = utility plus all incoming factor messages, NEG_INF at
    disallowed columns.
    """
    n, m = n_agents, n_tasks
    width = m + 1
    keep = damping
    mix = 1.0 - damping

    dom = [[x for x in range(width) if allowed[a][x]] for a in range(n)]
    elig = [[a for a in range(n) if allowed[a][t]] for t in range(m)]

    q_cur = [[[0.0] * width for _ in range(m)] for _ in range(n)]
    q_new = [[[0.0] * width for _ in range(m)] for _ in range(n)]
    r_cur = [[[0.0] * width for _ in range(n)] for _ in range(m)]
    r_new = [[[0.0] * width for _ in range(n)] for _ in range(m)]

    delta = [0.0] * n
    belief = [0.0] * width

    iterations = 0
    converged = False
    for _ in range(max_iters):
        change = 0.0

        # variable -> factor from previous factor -> variable
        for a in range(n):
            dom_a = dom[a]
            u_a = utilities[a]
            for x in dom_a:
                acc = u_a[x]
                for t in range(m):
                    if allowed[a][t]:
                        acc = acc + r_cur[t][a][x]
                belief[x] = acc
            for t in range(m):
                if not allowed[a][t]:
                    continue
                r_ta = r_cur[t][a]
                q_old = q_cur[a][t]
                q_out = q_new[a][t]
                mx = NEG_INF
                for x in dom_a:
                    raw = belief[x] - r_ta[x]
                    q_out[x] = raw
                    if raw > mx:
                        mx = raw
                for x in dom_a:
                    value = keep * q_old[x] + mix * (q_out[x] - mx)
                    diff = value - q_old[x]
                    if diff < 0.0:
                        diff = -diff
                    if diff > change:
                        change = diff
                    q_out[x] = value

        # factor -> variable from previous variable -> factor
        for t in range(m):
            elig_t = elig[t]
            reward = rewards[t]
            top1 = NEG_INF
            top1_at = -1
            top2 = NEG_INF
            sum_pos = 0.0
            cnt_pos = 0
            np1 = NEG_INF
            np1_at = -1
            np2 = NEG_INF
            np2_at = -1
            np3 = NEG_INF
            np3_at = -1
            for a in elig_t:
                q_at = q_cur[a][t]
                m1 = NEG_INF
                for x in dom[a]:
                    if x != t and q_at[x] > m1:
                        m1 = q_at[x]
                d = q_at[t] - m1 if m1 != NEG_INF else 0.0
                delta[a] = d
                if d > top1:
                    top2 = top1
                    top1 = d
                    top1_at = a
                elif d > top2:
                    top2 = d
                if d > 0.0:
                    sum_pos = sum_pos + d
                    cnt_pos += 1
                else:
                    if d > np1:
                        np3, np3_at = np2, np2_at
                        np2, np2_at = np1, np1_at
                        np1, np1_at = d, a
                    elif d > np2:
                        np3, np3_at = np2, np2_at
                        np2, np2_at = d, a
                    elif d > np3:
                        np3, np3_at = d, a

            n_elig = len(elig_t)
            for a in elig_t:
                d_self = delta[a]
                others = n_elig - 1
                dmax_o = top2 if top1_at == a else top1
                if d_self > 0.0:
                    sum_pos_o = sum_pos - d_self
                    cnt_pos_o = cnt_pos - 1
                else:
                    sum_pos_o = sum_pos
                    cnt_pos_o = cnt_pos
                # two best non-positive switch gains among the other agents
                npa = NEG_INF
                npb = NEG_INF
                if np1_at != a and np1_at >= 0:
                    npa = np1
                    if np2_at != a and np2_at >= 0:
                        npb = np2
                    elif np3_at >= 0:
                        npb = np3
                elif np2_at >= 0:
                    npa = np2
                    if np3_at >= 0:
                        npb = np3

                if cnt_pos_o >= 1:
                    best1 = sum_pos_o
                elif others >= 1:
                    best1 = dmax_o
                else:
                    best1 = NEG_INF
                if others < 2:
                    best2 = NEG_INF
                elif cnt_pos_o >= 2:
                    best2 = sum_pos_o
                elif cnt_pos_o == 1:
                    best2 = sum_pos_o + npa
                else:
                    best2 = npa + npb

                r_take = -penalty + best1
                if reward > r_take:
                    r_take = reward
                r_other = 0.0
                if others >= 1:
                    cand = reward + dmax_o
                    if cand > r_other:
                        r_other = cand
                cand = -penalty + best2
                if cand > r_other:
                    r_other = cand

                mx = r_take if r_take > r_other else r_other
                if len(dom[a]) == 1:  # pinned: the only column is t
                    mx = r_take
                r_old = r_cur[t][a]
                r_out = r_new[t][a]
                for x in dom[a]:
                    raw = r_take if x == t else r_other
                    value = keep * r_old[x] + mix * (raw - mx)
                    diff = value - r_old[x]
                    if diff < 0.0:
                        diff = -diff
                    if diff > change:
                        change = diff
                    r_out[x] = value

        q_cur, q_new = q_new, q_cur
        r_cur, r_new = r_new, r_cur
        iterations += 1
        if trace is not None:
            trace.append({
                "round": iterations,
                "max_change": change,
                "variable_to_factor": [[list(q_cur[a][t]) for t in range(m)] for a in range(n)],
                "factor_to_variable": [[list(r_cur[t][a]) for a in range(n)] for t in range(m)],
            })
        if change < tol:
            converged = True
            break

    beliefs = [[NEG_INF] * width for _ in range(n)]
    for a in range(n):
        u_a = utilities[a]
        for x in dom[a]:
            acc = u_a[x]
            for t in range(m):
                if allowed[a][t]:
                    acc = acc + r_cur[t][a][x]
            beliefs[a][x] = acc
    return beliefs, iterations, converged
