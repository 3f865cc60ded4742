"""Numeric hot loops, compiled with numba when available.

Set ``AIRSIDEKIT_DISABLE_NUMBA=1`` before import to force the pure-numpy
path (useful for debugging and for the benchmark in ``benchmarks/``).
Both paths return identical results; the test-suite runs them against each
other.
"""
import math
import os

import numpy as np

_DISABLED = os.environ.get("AIRSIDEKIT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


BACKEND = "numba" if HAVE_NUMBA else "numpy"
EARTH_RADIUS_KM = 6371.0


# ---------------------------------------------------------------------------
# prefix / suffix maxima (profitability envelope, Gilbo staircase)


@njit(cache=True)
def _prefix_max_nb(x):
    out = np.empty_like(x)
    if x.shape[0] == 0:
        return out
    cur = x[0]
    for i in range(x.shape[0]):
        if x[i] > cur:
            cur = x[i]
        out[i] = cur
    return out


def _prefix_max_np(x):
    return np.maximum.accumulate(x) if x.shape[0] else x.copy()


def prefix_max(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _prefix_max_nb(x) if HAVE_NUMBA else _prefix_max_np(x)


def suffix_max(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return prefix_max(x[::-1].copy())[::-1].copy()


# ---------------------------------------------------------------------------
# great-circle distances


@njit(cache=True)
def _haversine_matrix_nb(lat, lon, radius):
    n = lat.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        p1 = math.radians(lat[i])
        for j in range(i + 1, n):
            p2 = math.radians(lat[j])
            dphi = p2 - p1
            dlmb = math.radians(lon[j] - lon[i])
            h = math.sin(dphi / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2.0) ** 2
            if h > 1.0:
                h = 1.0
            d = 2.0 * radius * math.asin(math.sqrt(h))
            out[i, j] = d
            out[j, i] = d
    return out


def _haversine_matrix_np(lat, lon, radius):
    phi = np.radians(lat)
    lmb = np.radians(lon)
    dphi = phi[None, :] - phi[:, None]
    dlmb = lmb[None, :] - lmb[:, None]
    h = np.sin(dphi / 2.0) ** 2 + np.cos(phi[:, None]) * np.cos(phi[None, :]) * np.sin(dlmb / 2.0) ** 2
    d = 2.0 * radius * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))
    # exact symmetry, matching the loop version
    d = np.triu(d, 1)
    return d + d.T


def haversine_matrix(lat, lon, radius=EARTH_RADIUS_KM):
    lat = np.ascontiguousarray(lat, dtype=np.float64)
    lon = np.ascontiguousarray(lon, dtype=np.float64)
    if HAVE_NUMBA:
        return _haversine_matrix_nb(lat, lon, float(radius))
    return _haversine_matrix_np(lat, lon, float(radius))


# ---------------------------------------------------------------------------
# vehicle routes with time windows
#
# A route is an int array of customer nodes; the depot (node 0) is implicit
# at both ends. Vehicles leave the depot at time 0 and may wait for a window
# to open.


@njit(cache=True)
def _route_eval_nb(route, cost, travel, op, tw_a, tw_b):
    k = route.shape[0]
    starts = np.zeros(k)
    if k == 0:
        return True, 0.0, starts
    total = 0.0
    t = 0.0
    prev = 0
    ok = True
    for idx in range(k):
        j = route[idx]
        arr = t + travel[prev, j]
        if prev != 0:
            arr += op[prev]
        w = arr if arr > tw_a[j] else tw_a[j]
        if w > tw_b[j] + 1e-9:
            ok = False
        starts[idx] = w
        total += cost[prev, j]
        t = w
        prev = j
    total += cost[prev, 0]
    return ok, total, starts


def route_eval(route, cost, travel, op, tw_a, tw_b):
    """Return (feasible, cost, service start times) for one vehicle route."""
    route = np.ascontiguousarray(route, dtype=np.int64)
    return _route_eval_nb(route, cost, travel, op, tw_a, tw_b)


@njit(cache=True)
def _best_insertion_nb(route, node, cost, travel, op, tw_a, tw_b):
    """Cheapest feasible position for ``node`` in ``route``.

    Returns (delta_cost, position); position -1 when no feasible slot.
    Uses forward start times plus backward latest-start bounds so each
    candidate position is checked in O(1).
    """
    k = route.shape[0]
    # forward earliest starts
    starts = np.empty(k)
    t = 0.0
    prev = 0
    for idx in range(k):
        j = route[idx]
        arr = t + travel[prev, j]
        if prev != 0:
            arr += op[prev]
        t = arr if arr > tw_a[j] else tw_a[j]
        starts[idx] = t
        prev = j
    # backward latest starts that keep the suffix feasible
    latest = np.empty(k)
    nxt_latest = np.inf
    for idx in range(k - 1, -1, -1):
        j = route[idx]
        lim = tw_b[j]
        if idx < k - 1:
            nj = route[idx + 1]
            cand = nxt_latest - op[j] - travel[j, nj]
            if cand < lim:
                lim = cand
        latest[idx] = lim
        nxt_latest = lim

    best = np.inf
    best_pos = -1
    for pos in range(k + 1):
        prev = 0 if pos == 0 else route[pos - 1]
        t_prev = 0.0 if pos == 0 else starts[pos - 1]
        arr = t_prev + travel[prev, node]
        if prev != 0:
            arr += op[prev]
        w = arr if arr > tw_a[node] else tw_a[node]
        if w > tw_b[node] + 1e-9:
            continue
        if pos < k:
            nj = route[pos]
            arr_n = w + op[node] + travel[node, nj]
            w_n = arr_n if arr_n > tw_a[nj] else tw_a[nj]
            if w_n > latest[pos] + 1e-9:
                continue
            succ = nj
        else:
            succ = 0
        delta = cost[prev, node] + cost[node, succ] - cost[prev, succ]
        if delta < best - 1e-12:
            best = delta
            best_pos = pos
    return best, best_pos


def best_insertion(route, node, cost, travel, op, tw_a, tw_b):
    route = np.ascontiguousarray(route, dtype=np.int64)
    return _best_insertion_nb(route, int(node), cost, travel, op, tw_a, tw_b)


# ---------------------------------------------------------------------------
# runway log auditing and cumulative diagrams


@njit(cache=True)
def _count_violations_nb(times, required, tol):
    n = 0
    for i in range(1, times.shape[0]):
        if times[i] - times[i - 1] < required[i] - tol:
            n += 1
    return n


def _count_violations_np(times, required, tol):
    if times.shape[0] < 2:
        return 0
    return int(np.count_nonzero(np.diff(times) < required[1:] - tol))


def count_gap_violations(times, required, tol=1e-6):
    """Count consecutive pairs whose gap is below the required minimum.

    ``required[i]`` is the minimum gap between event ``i-1`` and event ``i``.
    """
    times = np.ascontiguousarray(times, dtype=np.float64)
    required = np.ascontiguousarray(required, dtype=np.float64)
    if HAVE_NUMBA:
        return int(_count_violations_nb(times, required, tol))
    return _count_violations_np(times, required, tol)


@njit(cache=True)
def _step_area_nb(times, heights):
    area = 0.0
    for i in range(times.shape[0] - 1):
        area += heights[i] * (times[i + 1] - times[i])
    return area


def step_area(times, heights):
    """Integral of a right-continuous step function sampled at its jumps."""
    times = np.ascontiguousarray(times, dtype=np.float64)
    heights = np.ascontiguousarray(heights, dtype=np.float64)
    if HAVE_NUMBA:
        return float(_step_area_nb(times, heights))
    if times.shape[0] < 2:
        return 0.0
    return float(np.sum(heights[:-1] * np.diff(times)))
