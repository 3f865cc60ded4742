"""Greedy construction, large neighborhood search and an exhaustive oracle."""
from __future__ import annotations

import math
import time

import numpy as np

from .. import _kernels
from .model import InfeasibleError, PushbackInstance, Solution

_EPS = 1e-9


def _finish(inst: PushbackInstance, routes: list[list[int]]) -> Solution:
    starts, total = [], 0.0
    for p, r in enumerate(routes):
        ok, c, w = _kernels.route_eval(np.asarray(r, dtype=np.int64), inst.cost[p], inst.travel,
                                       inst.op, inst.tw_a, inst.tw_b)
        if not ok:
            raise AssertionError(f"internal error: vehicle {p} route became infeasible")
        starts.append([float(x) for x in w])
        total += c
    return Solution([list(r) for r in routes], starts, float(total))


def _check_qualified(inst: PushbackInstance):
    bad = inst.unqualified_nodes()
    if bad:
        raise InfeasibleError(f"node {bad[0]} has no qualified vehicle (skill {inst.skill[bad[0]]}, mode {inst.mode.value})")


def _repair(inst: PushbackInstance, routes: list[list[int]], pending) -> list[list[int]] | None:
    """Cheapest feasible insertion, one node at a time, until ``pending`` is empty.

    Ties go to the lowest node id, then the lowest vehicle id. Returns None
    when some node cannot be inserted anywhere.
    """
    routes = [list(r) for r in routes]
    pending = sorted(pending)
    arrs = [np.asarray(r, dtype=np.int64) for r in routes]
    qual = {j: [p for p in range(inst.n_vehicles) if inst.qualified(p, j)] for j in pending}
    cache: dict[tuple[int, int], tuple[float, int]] = {}

    def probe(j, p):
        key = (j, p)
        if key not in cache:
            d, pos = _kernels.best_insertion(arrs[p], j, inst.cost[p], inst.travel, inst.op, inst.tw_a, inst.tw_b)
            cache[key] = (float(d), int(pos))
        return cache[key]

    while pending:
        best = None
        for j in pending:
            any_ok = False
            for p in qual[j]:
                d, pos = probe(j, p)
                if pos < 0:
                    continue
                any_ok = True
                if best is None or d < best[0] - _EPS:
                    best = (d, j, p, pos)
            if not any_ok:
                return None
        _, j, p, pos = best
        routes[p].insert(pos, j)
        arrs[p] = np.asarray(routes[p], dtype=np.int64)
        pending.remove(j)
        for key in [k for k in cache if k[1] == p]:
            del cache[key]
    return routes


def greedy_construct(inst: PushbackInstance) -> Solution:
    _check_qualified(inst)
    routes = _repair(inst, [[] for _ in range(inst.n_vehicles)], list(inst.customers))
    if routes is None:
        # name the first node that fails on its own, for a useful message
        for j in inst.customers:
            if all(_kernels.best_insertion(np.zeros(0, dtype=np.int64), j, inst.cost[p], inst.travel,
                                           inst.op, inst.tw_a, inst.tw_b)[1] < 0
                   for p in range(inst.n_vehicles) if inst.qualified(p, j)):
                raise InfeasibleError(f"node {j}: window [{inst.tw_a[j]:g}, {inst.tw_b[j]:g}] "
                                      f"cannot be reached by any qualified vehicle")
        raise InfeasibleError("greedy insertion could not place every node within its window")
    return _finish(inst, routes)


def lns_solve(inst: PushbackInstance, destroy_fraction: float = 0.25, time_limit_s: float | None = 2.0,
              seed: int = 0, max_iterations: int | None = None, initial: Solution | None = None) -> Solution:
    """Destroy-and-repair search accepting only strictly cheaper solutions.

    Stops at ``time_limit_s`` or after ``max_iterations`` rounds, whichever
    comes first. With a fixed ``max_iterations`` and no time limit the run
    is reproducible bit for bit.
    """
    if time_limit_s is None and max_iterations is None:
        raise ValueError("set a time limit, an iteration cap, or both")
    if not 0 < destroy_fraction <= 1:
        raise ValueError("destroy fraction must lie in (0, 1]")
    t0 = time.perf_counter()
    cur = initial if initial is not None else greedy_construct(inst)
    best = cur
    trace = [best.cost]
    n_cust = inst.n_nodes - 1
    k = max(1, math.ceil(destroy_fraction * n_cust)) if n_cust else 0
    rng = np.random.default_rng(seed)
    it = 0
    while n_cust:
        if max_iterations is not None and it >= max_iterations:
            break
        if time_limit_s is not None and time.perf_counter() - t0 >= time_limit_s:
            break
        it += 1
        removed = set(int(x) for x in rng.choice(np.arange(1, inst.n_nodes), size=k, replace=False))
        partial = [[j for j in r if j not in removed] for r in cur.routes]
        routes = _repair(inst, partial, removed)
        if routes is not None:
            cand = _finish(inst, routes)
            if cand.cost < cur.cost - _EPS:
                cur = cand
            if cand.cost < best.cost - _EPS:
                best = cand
        trace.append(best.cost)
    out = Solution(best.routes, best.starts, best.cost, trace, it, time.perf_counter() - t0)
    return out


# ---------------------------------------------------------------------------
# exhaustive oracle


def _vehicle_subsets(inst: PushbackInstance, p: int, cust: list[int]):
    """Cheapest feasible route for every subset (bitmask over ``cust``) vehicle p can serve."""
    best: dict[int, tuple[float, tuple[int, ...]]] = {0: (0.0, ())}
    allowed = [i for i, j in enumerate(cust) if inst.qualified(p, j)]
    c, tr, op, a, b = inst.cost[p], inst.travel, inst.op, inst.tw_a, inst.tw_b

    def dfs(mask, last, t, acc, seq):
        for i in allowed:
            if mask >> i & 1:
                continue
            j = cust[i]
            arr = t + tr[last, j] + (op[last] if last else 0.0)
            w = arr if arr > a[j] else a[j]
            if w > b[j] + 1e-9:
                continue
            nacc = acc + c[last, j]
            nmask = mask | (1 << i)
            nseq = seq + (j,)
            total = nacc + c[j, 0]
            if nmask not in best or total < best[nmask][0] - _EPS:
                best[nmask] = (total, nseq)
            dfs(nmask, j, w, nacc, nseq)

    dfs(0, 0, 0.0, 0.0, ())
    return best


def exact_oracle(inst: PushbackInstance, max_nodes: int = 9) -> Solution:
    """Provable optimum by enumeration; raises InfeasibleError if none exists."""
    if inst.n_nodes > max_nodes:
        raise ValueError(f"oracle limited to {max_nodes} nodes including the depot")
    cust = list(inst.customers)
    full = (1 << len(cust)) - 1
    INF = math.inf
    dp = {0: (0.0, ())}
    for p in range(inst.n_vehicles):
        sub = _vehicle_subsets(inst, p, cust)
        nxt: dict[int, tuple[float, tuple]] = {}
        for mask, (cost0, plan) in dp.items():
            for s, (cs, seq) in sub.items():
                if mask & s:
                    continue
                m = mask | s
                v = cost0 + cs
                if v < nxt.get(m, (INF,))[0] - _EPS:
                    nxt[m] = (v, plan + (seq,))
        dp = nxt
    if full not in dp:
        raise InfeasibleError("no feasible assignment of nodes to vehicles")
    _, plan = dp[full]
    return _finish(inst, [list(s) for s in plan])
