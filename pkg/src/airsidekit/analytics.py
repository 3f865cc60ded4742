"""Punctuality, Little's Law, cumulative diagrams, Gilbo envelopes, delay fits."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from . import _kernels
from .core import Direction

DELAY_COST_EUR_PER_MIN = 42.0


@dataclass(frozen=True)
class DelaySample:
    flight_id: str
    delay_min: float
    direction: Direction = Direction.ARRIVAL

    def __post_init__(self):
        if not math.isfinite(self.delay_min):
            raise ValueError(f"{self.flight_id}: delay must be finite")


@dataclass
class Punctuality:
    pct_on_time: float
    mean_delay: float
    bin_edges: np.ndarray
    counts: np.ndarray


def _delays(samples) -> np.ndarray:
    vals = [s.delay_min if isinstance(s, DelaySample) else float(s) for s in samples]
    return np.asarray(vals, dtype=float)


def punctuality(samples: Iterable[DelaySample | float], threshold_min: float = 15.0,
                clamp_negative: bool = False) -> Punctuality:
    """On-time share (delay strictly below threshold), mean delay and 1-min histogram.

    Early movements count as on time. ``clamp_negative`` replaces negative
    delays with zero before the mean is taken (operational-delay view).
    """
    d = _delays(samples)
    if d.size == 0:
        raise ValueError("punctuality needs at least one sample")
    if clamp_negative:
        d = np.maximum(d, 0.0)
    lo = math.floor(d.min())
    hi = math.floor(d.max()) + 1
    edges = np.arange(lo, hi + 1, dtype=float)
    counts, _ = np.histogram(d, bins=edges)
    return Punctuality(100.0 * np.count_nonzero(d < threshold_min) / d.size, float(d.mean()), edges, counts)


def littles_law(L: float | None = None, lam: float | None = None, W: float | None = None) -> float:
    """Solve L = lam * W for whichever quantity is left as ``None``."""
    missing = [n for n, v in (("L", L), ("lam", lam), ("W", W)) if v is None]
    if len(missing) != 1:
        raise ValueError("give exactly two of L, lam, W")
    if missing[0] == "W":
        if not lam > 0:
            raise ValueError("arrival rate must be positive")
        return L / lam
    if missing[0] == "L":
        return lam * W
    if not W > 0:
        raise ValueError("waiting time must be positive")
    return L / W


# ---------------------------------------------------------------------------
# cumulative (Newell) diagrams


@dataclass
class CumulativeDiagram:
    times: np.ndarray
    cum_demand: np.ndarray
    cum_served: np.ndarray
    demand_sorted: np.ndarray
    served_sorted: np.ndarray

    def queue_length(self, t: float) -> int:
        """Vertical gap: units demanded but not yet served at ``t``."""
        return int(np.searchsorted(self.demand_sorted, t, side="right")
                   - np.searchsorted(self.served_sorted, t, side="right"))

    def wait_of_nth(self, n: int) -> float:
        """Horizontal gap at count ``n`` (1-based)."""
        if not 1 <= n <= len(self.demand_sorted):
            raise IndexError(n)
        return float(self.served_sorted[n - 1] - self.demand_sorted[n - 1])

    def area_between(self) -> float:
        return _kernels.step_area(self.times, (self.cum_demand - self.cum_served).astype(float))

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["time", "cum_demand", "cum_served"])
        for t, a, b in zip(self.times, self.cum_demand, self.cum_served):
            w.writerow([f"{t:.6g}", int(a), int(b)])


def cumulative_diagram(demand_times: Sequence[float], service_times: Sequence[float]) -> CumulativeDiagram:
    d = np.asarray(demand_times, dtype=float)
    s = np.asarray(service_times, dtype=float)
    if d.shape != s.shape:
        raise ValueError("need one service time per demand")
    if np.any(s < d):
        raise ValueError("a unit cannot be served before it is demanded")
    ds, ss = np.sort(d), np.sort(s)
    times = np.unique(np.concatenate([ds, ss]))
    cd = np.searchsorted(ds, times, side="right")
    cs = np.searchsorted(ss, times, side="right")
    return CumulativeDiagram(times, cd, cs, ds, ss)


@dataclass(frozen=True)
class LittleCheck:
    L: float
    lam: float
    W: float

    @property
    def relative_error(self) -> float:
        return abs(self.L - self.lam * self.W) / max(self.L, 1e-12)


def littles_law_window(demand_times, service_times, t0: float, t1: float) -> LittleCheck:
    """Measure L (time-average in system), lam and W over [t0, t1)."""
    d = np.asarray(demand_times, dtype=float)
    s = np.asarray(service_times, dtype=float)
    T = t1 - t0
    if not T > 0:
        raise ValueError("empty window")
    # time each unit spends inside the window while in the system
    overlap = np.clip(np.minimum(s, t1) - np.maximum(d, t0), 0.0, None)
    L = overlap.sum() / T
    inside = (d >= t0) & (d < t1)
    lam = inside.sum() / T
    W = float((s[inside] - d[inside]).mean()) if inside.any() else 0.0
    return LittleCheck(L, lam, W)


def pool_little(checks: Iterable[LittleCheck]) -> LittleCheck:
    """Combine same-length windows (e.g. one per replication); W is count-weighted."""
    checks = list(checks)
    if not checks:
        raise ValueError("nothing to pool")
    lam = sum(c.lam for c in checks) / len(checks)
    L = sum(c.L for c in checks) / len(checks)
    n = sum(c.lam for c in checks)
    W = sum(c.W * c.lam for c in checks) / n if n > 0 else 0.0
    return LittleCheck(L, lam, W)


# ---------------------------------------------------------------------------
# Gilbo capacity envelope


@dataclass
class GilboEnvelope:
    frontier: list[tuple[float, float]]

    def dominates(self, arr: float, dep: float) -> bool:
        return any(a >= arr and d >= dep for a, d in self.frontier)

    def balanced_capacity(self) -> float:
        """Total flights/h where the 45-degree line meets the envelope."""
        k = max(min(a, d) for a, d in self.frontier)
        return 2 * k

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["arrivals_per_h", "max_departures_per_h"])
        for a, d in self.frontier:
            w.writerow([f"{a:g}", f"{d:g}"])


def gilbo_envelope(hourly_points: Iterable[tuple[float, float]]) -> GilboEnvelope:
    """Staircase frontier: for each observed arrival count, max departures at arrivals >= it."""
    pts = np.asarray(list(hourly_points), dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("need at least one hourly point")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    arr, dep = pts[order, 0], pts[order, 1]
    best_from_here = _kernels.suffix_max(dep)
    # keep the last index of each distinct arrival value
    last = np.r_[arr[1:] != arr[:-1], True]
    return GilboEnvelope([(float(a), float(d)) for a, d in zip(arr[last], best_from_here[last])])


# ---------------------------------------------------------------------------
# delay costs and exponential delay-demand curves


def delay_cost_eur(total_delay_min: float, rate_eur_per_min: float = DELAY_COST_EUR_PER_MIN) -> float:
    if total_delay_min < 0:
        raise ValueError("delay must be non-negative")
    return total_delay_min * rate_eur_per_min


@dataclass(frozen=True)
class DelayFit:
    a: float
    b: float
    r2: float = 1.0

    def __call__(self, flights):
        return self.a * np.exp(self.b * np.asarray(flights, dtype=float))


def fit_delay_curve(points: Iterable[tuple[float, float]]) -> DelayFit:
    """Least squares on ln(delay) = ln(a) + b * flights; r2 is in log space."""
    pts = np.asarray(list(points), dtype=float).reshape(-1, 2)
    if pts.shape[0] < 3:
        raise ValueError("need at least three points")
    if np.any(pts[:, 1] <= 0):
        raise ValueError("delays must be positive for a log-space fit")
    x, y = pts[:, 0], np.log(pts[:, 1])
    A = np.column_stack([np.ones_like(x), x])
    (lna, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (lna + b * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return DelayFit(float(math.exp(lna)), float(b), r2)


def practical_capacity(fit: DelayFit, los_min: float) -> float:
    """Daily flights at which the fitted average delay reaches ``los_min``."""
    if fit.b <= 0:
        raise ValueError("delay curve is flat or decreasing; no practical capacity")
    if los_min <= fit.a:
        raise ValueError("level of service is below the curve's intercept")
    return math.log(los_min / fit.a) / fit.b


def write_histogram_csv(p: Punctuality, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["bin_start_min", "bin_end_min", "count"])
    for lo, hi, c in zip(p.bin_edges[:-1], p.bin_edges[1:], p.counts):
        w.writerow([f"{lo:g}", f"{hi:g}", int(c)])
