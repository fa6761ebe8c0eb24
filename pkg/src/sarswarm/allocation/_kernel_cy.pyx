# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled max-sum message rounds.

Line-for-line port of _kernel_py.max_sum_rounds. The arithmetic order must
stay identical to the Python kernel (and the extension is built with
-ffp-contract=off) so both produce bit-identical messages; the parity test
in tests/test_kernel_parity.py holds them to that.
"""

from libc.stdlib cimport free, malloc
from libc.math cimport INFINITY


def max_sum_rounds(
    int n_agents,
    int n_tasks,
    allowed,
    utilities,
    rewards,
    double penalty,
    double damping,
    int max_iters,
    double tol,
    trace=None,
):
    if trace is not None:
        raise ValueError("message tracing is only supported by the Python kernel")

    cdef int n = n_agents
    cdef int m = n_tasks
    cdef int width = m + 1
    cdef double keep = damping
    cdef double mix = 1.0 - damping

    cdef int a, t, x, i, j, k
    cdef int table = n * m * width

    cdef char *allow = <char *> malloc(n * width * sizeof(char))
    cdef double *u = <double *> malloc(n * width * sizeof(double))
    cdef double *rew = <double *> malloc((m if m > 0 else 1) * sizeof(double))
    cdef int *dom_items = <int *> malloc(n * width * sizeof(int))
    cdef int *dom_len = <int *> malloc(n * sizeof(int))
    cdef int *elig_items = <int *> malloc((m * n if m > 0 else 1) * sizeof(int))
    cdef int *elig_len = <int *> malloc((m if m > 0 else 1) * sizeof(int))
    cdef double *q_cur = <double *> malloc((table if table > 0 else 1) * sizeof(double))
    cdef double *q_new = <double *> malloc((table if table > 0 else 1) * sizeof(double))
    cdef double *r_cur = <double *> malloc((table if table > 0 else 1) * sizeof(double))
    cdef double *r_new = <double *> malloc((table if table > 0 else 1) * sizeof(double))
    cdef double *delta = <double *> malloc(n * sizeof(double))
    cdef double *belief = <double *> malloc(width * sizeof(double))
    cdef double *swap

    cdef double change, acc, raw, mx, value, diff
    cdef double m1, d, d_self, reward
    cdef double top1, top2, sum_pos, np1, np2, np3
    cdef double dmax_o, sum_pos_o, npa, npb, best1, best2, r_take, r_other, cand
    cdef int top1_at, np1_at, np2_at, np3_at, cnt_pos, cnt_pos_o, others, n_elig
    cdef int base, qa, ra, iterations, converged

    try:
        for a in range(n):
            row = allowed[a]
            urow = utilities[a]
            k = 0
            for x in range(width):
                allow[a * width + x] = 1 if row[x] else 0
                u[a * width + x] = urow[x]
                if row[x]:
                    dom_items[a * width + k] = x
                    k += 1
            dom_len[a] = k
        for t in range(m):
            rew[t] = rewards[t]
            k = 0
            for a in range(n):
                if allow[a * width + t]:
                    elig_items[t * n + k] = a
                    k += 1
            elig_len[t] = k
        for i in range(table):
            q_cur[i] = 0.0
            q_new[i] = 0.0
            r_cur[i] = 0.0
            r_new[i] = 0.0

        iterations = 0
        converged = 0
        while iterations < max_iters:
            change = 0.0

            # variable -> factor from previous factor -> variable
            for a in range(n):
                for i in range(dom_len[a]):
                    x = dom_items[a * width + i]
                    acc = u[a * width + x]
                    for t in range(m):
                        if allow[a * width + t]:
                            acc = acc + r_cur[(t * n + a) * width + x]
                    belief[x] = acc
                for t in range(m):
                    if not allow[a * width + t]:
                        continue
                    ra = (t * n + a) * width
                    qa = (a * m + t) * width
                    mx = -INFINITY
                    for i in range(dom_len[a]):
                        x = dom_items[a * width + i]
                        raw = belief[x] - r_cur[ra + x]
                        q_new[qa + x] = raw
                        if raw > mx:
                            mx = raw
                    for i in range(dom_len[a]):
                        x = dom_items[a * width + i]
                        value = keep * q_cur[qa + x] + mix * (q_new[qa + x] - mx)
                        diff = value - q_cur[qa + x]
                        if diff < 0.0:
                            diff = -diff
                        if diff > change:
                            change = diff
                        q_new[qa + x] = value

            # factor -> variable from previous variable -> factor
            for t in range(m):
                n_elig = elig_len[t]
                reward = rew[t]
                top1 = -INFINITY
                top1_at = -1
                top2 = -INFINITY
                sum_pos = 0.0
                cnt_pos = 0
                np1 = -INFINITY
                np1_at = -1
                np2 = -INFINITY
                np2_at = -1
                np3 = -INFINITY
                np3_at = -1
                for j in range(n_elig):
                    a = elig_items[t * n + j]
                    qa = (a * m + t) * width
                    m1 = -INFINITY
                    for i in range(dom_len[a]):
                        x = dom_items[a * width + i]
                        if x != t and q_cur[qa + x] > m1:
                            m1 = q_cur[qa + x]
                    if m1 != -INFINITY:
                        d = q_cur[qa + t] - m1
                    else:
                        d = 0.0
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
                            np3 = np2
                            np3_at = np2_at
                            np2 = np1
                            np2_at = np1_at
                            np1 = d
                            np1_at = a
                        elif d > np2:
                            np3 = np2
                            np3_at = np2_at
                            np2 = d
                            np2_at = a
                        elif d > np3:
                            np3 = d
                            np3_at = a

                for j in range(n_elig):
                    a = elig_items[t * n + j]
                    d_self = delta[a]
                    others = n_elig - 1
                    dmax_o = top2 if top1_at == a else top1
                    if d_self > 0.0:
                        sum_pos_o = sum_pos - d_self
                        cnt_pos_o = cnt_pos - 1
                    else:
                        sum_pos_o = sum_pos
                        cnt_pos_o = cnt_pos
                    npa = -INFINITY
                    npb = -INFINITY
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
                        best1 = -INFINITY
                    if others < 2:
                        best2 = -INFINITY
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
                    if dom_len[a] == 1:
                        mx = r_take
                    ra = (t * n + a) * width
                    for i in range(dom_len[a]):
                        x = dom_items[a * width + i]
                        raw = r_take if x == t else r_other
                        value = keep * r_cur[ra + x] + mix * (raw - mx)
                        diff = value - r_cur[ra + x]
                        if diff < 0.0:
                            diff = -diff
                        if diff > change:
                            change = diff
                        r_new[ra + x] = value

            swap = q_cur
            q_cur = q_new
            q_new = swap
            swap = r_cur
            r_cur = r_new
            r_new = swap
            iterations += 1
            if change < tol:
                converged = 1
                break

        beliefs = []
        for a in range(n):
            row_out = [-INFINITY] * width
            for i in range(dom_len[a]):
                x = dom_items[a * width + i]
                acc = u[a * width + x]
                for t in range(m):
                    if allow[a * width + t]:
                        acc = acc + r_cur[(t * n + a) * width + x]
                row_out[x] = acc
            beliefs.append(row_out)
        return beliefs, iterations, bool(converged)
    finally:
        free(allow)
        free(u)
        free(rew)
        free(dom_items)
        free(dom_len)
        free(elig_items)
        free(elig_len)
        free(q_cur)
        free(q_new)
        free(r_cur)
        free(r_new)
        free(delta)
        free(belief)
