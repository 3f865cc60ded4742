"""Traffic growth by cloning, growth sweeps and delay-cause breakdown."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, replace
from datetime import timedelta, timezone
from typing import TextIO

import numpy as np

from ..core import Direction, Flight
from .log import CAUSES

# Baseline hourly clone factors (hours 00-23) of the reference study day.
BASELINE_CLONE_FACTORS = (0.2,) * 5 + (0.4, 0.4, 0.3, 0.3, 0.4, 0.4) + (0.2,) * 9 + (0.1,) * 4


def _hour(f: Flight) -> int:
    return f.sched_time.astimezone(timezone.utc).hour


def clone_flights(schedule: list[Flight], factors, rng: np.random.Generator,
                  jitter_min: float = 7.5) -> list[Flight]:
    """Add ``floor(f)`` clones per flight plus one more with probability ``frac(f)``.

    ``f`` is the factor of the flight's scheduled hour. Clones get a fresh
    id, no tail and a time shifted uniformly within +-``jitter_min``.
    """
    factors = [float(x) for x in factors]
    if len(factors) != 24 or any(not (x >= 0 and math.isfinite(x)) for x in factors):
        raise ValueError("need 24 finite non-negative clone factors")
    out = list(schedule)
    for f in schedule:
        fac = factors[_hour(f)]
        whole = int(math.floor(fac))
        n = whole + (1 if rng.random() < fac - whole else 0)
        for k in range(n):
            dt = float(rng.uniform(-jitter_min, jitter_min)) if jitter_min > 0 else 0.0
            shift = timedelta(seconds=round(dt * 60.0))
            out.append(replace(f, flight_id=f"{f.flight_id}~c{k + 1}", tail="",
                               sched_time=f.sched_time + shift,
                               actual_time=None if f.actual_time is None else f.actual_time + shift))
    return out


def thin_flights(schedule: list[Flight], keep_prob: float, rng: np.random.Generator) -> list[Flight]:
    return [f for f in schedule if rng.random() < keep_prob]


def growth_factors(profile, growth_pct: float) -> tuple[float, ...]:
    """Scale an hourly profile so that +100 % growth applies it once."""
    return tuple(max(0.0, growth_pct / 100.0 * p) for p in profile)


def apply_growth(sc, rng: np.random.Generator, growth_pct: float | None) -> list[Flight]:
    """Demand for one iteration: baseline clone factors, or a growth step."""
    if growth_pct is None:
        if not any(sc.clone_factors):
            return list(sc.schedule)
        return clone_flights(sc.schedule, sc.clone_factors, rng, sc.clone_time_jitter_min)
    if growth_pct < 0:
        return thin_flights(sc.schedule, 1.0 + growth_pct / 100.0, rng)
    if growth_pct == 0:
        return list(sc.schedule)
    profile = sc.clone_factors if any(sc.clone_factors) else (1.0,) * 24
    norm = np.mean([profile[_hour(f)] for f in sc.schedule]) if sc.schedule else 1.0
    # normalise so that the expected clone count equals growth_pct of the base day
    scaled = growth_factors([p / norm for p in profile], growth_pct)
    return clone_flights(sc.schedule, scaled, rng, sc.clone_time_jitter_min)


@dataclass
class SweepStep:
    growth_pct: float
    daily_flights: float
    avg_delay_min: float
    hourly_counts: list[float]
    hourly_mean_delay: list[float]
    peak_hour_throughput: float
    n_ok: int
    n_gridlocked: int
    saturated: bool

    def to_dict(self) -> dict:
        return asdict(self)


def summarize_step(growth_pct: float, results) -> SweepStep:
    ok = [r for r in results if not r.gridlocked]
    if not ok:
        return SweepStep(growth_pct, float("nan"), float("nan"), [], [], float("nan"), 0, len(results), True)
    nh = max(len(r.hourly_counts) for r in ok)
    counts = np.zeros(nh)
    for r in ok:
        counts[: len(r.hourly_counts)] += r.hourly_counts
    counts /= len(ok)
    # delay averaged over every flight of every kept iteration
    tot = sum(r.mean_delay_min * r.daily_flights for r in ok)
    nflt = sum(r.daily_flights for r in ok)
    hd = np.mean([r.hourly_mean_delay for r in ok], axis=0)
    return SweepStep(
        growth_pct=growth_pct,
        daily_flights=nflt / len(ok),
        avg_delay_min=tot / nflt if nflt else 0.0,
        hourly_counts=[float(x) for x in counts],
        hourly_mean_delay=[float(x) for x in hd],
        peak_hour_throughput=float(np.mean([r.peak_hour_count for r in ok])),
        n_ok=len(ok),
        n_gridlocked=len(results) - len(ok),
        saturated=False,
    )


def growth_sweep(sc, steps, workers: int = 1) -> list[SweepStep]:
    from .engine import simulate
    steps = list(steps)
    if steps != sorted(steps):
        raise ValueError("growth steps must be sorted")
    return [summarize_step(g, simulate(sc, growth_pct=g, workers=workers)) for g in steps]


def ultimate_throughput(sweep: list[SweepStep]) -> float:
    """Highest mean peak clock-hour runway count seen across the sweep."""
    vals = [s.peak_hour_throughput for s in sweep if not s.saturated]
    return max(vals) if vals else float("nan")


def write_sweep_csv(sweep: list[SweepStep], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["growth_pct", "daily_flights", "avg_delay_min", "peak_hour_throughput", "n_ok", "n_gridlocked",
                "saturated"])
    for s in sweep:
        w.writerow([s.growth_pct, f"{s.daily_flights:.2f}", f"{s.avg_delay_min:.2f}", f"{s.peak_hour_throughput:.2f}",
                    s.n_ok, s.n_gridlocked, int(s.saturated)])


def write_sweep_json(sweep: list[SweepStep], stream: TextIO) -> None:
    def clean(x):
        return None if isinstance(x, float) and not math.isfinite(x) else x
    rows = [{k: clean(v) for k, v in s.to_dict().items()} for s in sweep]
    json.dump(rows, stream, indent=1)


# ---------------------------------------------------------------------------


@dataclass
class DelayBreakdown:
    shares_pct: dict            # direction -> cause -> percent, or None when no delay
    totals_min: dict            # direction -> cause -> minutes

    def share(self, direction: str, cause: str) -> float | None:
        d = self.shares_pct.get(direction)
        return None if d is None else d[cause]


def delay_breakdown(results) -> DelayBreakdown:
    """Per-direction share of each delay cause over completed iterations."""
    ok = [r for r in results if not r.gridlocked]
    if not ok:
        raise ValueError("delay breakdown needs at least one completed iteration")
    totals = {d.value: dict.fromkeys(CAUSES, 0.0) for d in Direction}
    for r in ok:
        for d, causes in r.cause_totals_min.items():
            for c, v in causes.items():
                totals[d][c] += v
    shares = {}
    for d, causes in totals.items():
        s = sum(causes.values())
        shares[d] = None if s <= 1e-12 else {c: 100.0 * v / s for c, v in causes.items()}
    return DelayBreakdown(shares, totals)
