"""Analytic runway and terminal capacity.

Separation matrices are indexed ``[leading][trailing]`` by wake class.
Distances are nautical miles on the approach, times are seconds between
departures; 1 NM = 1.852 km.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Mapping, Sequence

from .core import WtcClass

NM_KM = 1.852
CLASS_ORDER = (WtcClass.HEAVY, WtcClass.MEDIUM, WtcClass.LIGHT)
_IDX = {c: i for i, c in enumerate(CLASS_ORDER)}


class DomainError(ValueError):
    pass


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_positive(**kw):
    for name, v in kw.items():
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")


def headway_s(sep_nm: float, speed_kmh: float) -> float:
    _check_positive(sep_nm=sep_nm, speed_kmh=speed_kmh)
    return sep_nm * NM_KM / speed_kmh * 3600.0


def capacity_per_h(sep_nm: float, speed_kmh: float) -> int:
    _check_positive(sep_nm=sep_nm, speed_kmh=speed_kmh)
    return round_half_up(speed_kmh / (sep_nm * NM_KM))


@dataclass(frozen=True)
class HeadwayRow:
    sep_nm: float
    sep_km: float
    speed_kmh: float
    headway_s: int
    capacity_per_h: int


def headway_table_row(sep_nm: float, speed_kmh: float) -> HeadwayRow:
    """Printed headway-table convention.

    The separation is first rounded to 0.1 km, the headway to whole seconds,
    and capacity is taken as 3600 / headway. This differs from
    ``capacity_per_h`` by one flight for a few table cells.
    """
    _check_positive(sep_nm=sep_nm, speed_kmh=speed_kmh)
    km = round_half_up(sep_nm * NM_KM * 10.0) / 10.0
    h = round_half_up(km / speed_kmh * 3600.0)
    return HeadwayRow(sep_nm, km, speed_kmh, h, round_half_up(3600.0 / h))


# ---------------------------------------------------------------------------
# separation policy


def _default_arrival():
    # leading H: H 4, M 5, L 6; leading M: L 5; everything else 3
    return ((4.0, 5.0, 6.0), (3.0, 3.0, 5.0), (3.0, 3.0, 3.0))


def _default_departure():
    return ((120.0, 120.0, 120.0), (60.0, 60.0, 120.0), (50.0, 50.0, 50.0))


@dataclass(frozen=True)
class SeparationPolicy:
    arrival_nm: tuple = field(default_factory=_default_arrival)
    departure_s: tuple = field(default_factory=_default_departure)
    min_final_approach_nm: float = 2.5

    def __post_init__(self):
        for name in ("arrival_nm", "departure_s"):
            m = getattr(self, name)
            if len(m) != 3 or any(len(r) != 3 for r in m):
                raise ValueError(f"{name} must be 3x3")
            if any(not v > 0 for r in m for v in r):
                raise ValueError(f"{name} entries must be positive")
        _check_positive(min_final_approach_nm=self.min_final_approach_nm)

    def arr_nm(self, leading: WtcClass, trailing: WtcClass) -> float:
        return self.arrival_nm[_IDX[leading]][_IDX[trailing]]

    def dep_s(self, leading: WtcClass, trailing: WtcClass) -> float:
        return self.departure_s[_IDX[leading]][_IDX[trailing]]

    def to_dict(self) -> dict:
        order = [c.value for c in CLASS_ORDER]
        return {
            "class_order": order,
            "arrival_nm": [list(r) for r in self.arrival_nm],
            "departure_s": [list(r) for r in self.departure_s],
            "min_final_approach_nm": self.min_final_approach_nm,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SeparationPolicy":
        order = d.get("class_order", [c.value for c in CLASS_ORDER])
        perm = [order.index(c.value) for c in CLASS_ORDER]

        def reorder(m):
            if len(m) != 3 or any(len(r) != 3 for r in m):
                raise ValueError("separation matrices must be 3x3")
            return tuple(tuple(float(m[i][j]) for j in perm) for i in perm)

        base = cls()
        return cls(
            arrival_nm=reorder(d["arrival_nm"]) if "arrival_nm" in d else base.arrival_nm,
            departure_s=reorder(d["departure_s"]) if "departure_s" in d else base.departure_s,
            min_final_approach_nm=float(d.get("min_final_approach_nm", base.min_final_approach_nm)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "SeparationPolicy":
        return cls.from_dict(json.loads(text))


def sequence_separation(classes: Sequence[WtcClass], policy: SeparationPolicy | None = None):
    """Total and mean separation (NM) along an arrival sequence.

    The mean is ``None`` for a single movement (no pairs to average).
    """
    policy = policy or SeparationPolicy()
    if len(classes) < 1:
        raise ValueError("sequence must hold at least one movement")
    total = 0.0
    for lead, trail in zip(classes, classes[1:]):
        total += policy.arr_nm(lead, trail)
    if len(classes) == 1:
        return 0.0, None
    return total, total / (len(classes) - 1)


def schedule_capacity_estimate(classes: Sequence[WtcClass], speed_kmh: float,
                               policy: SeparationPolicy | None = None) -> int:
    _, avg = sequence_separation(classes, policy)
    if avg is None:
        raise ValueError("capacity estimate needs at least two movements")
    return capacity_per_h(avg, speed_kmh)


def grouped_sequence(classes: Sequence[WtcClass]) -> list[WtcClass]:
    """Bundle identical classes, lightest first (L block, M block, H block)."""
    order = {WtcClass.LIGHT: 0, WtcClass.MEDIUM: 1, WtcClass.HEAVY: 2}
    return sorted(classes, key=order.__getitem__)


# ---------------------------------------------------------------------------
# traffic mix


@dataclass(frozen=True)
class TrafficMix:
    pct_heavy: float
    pct_medium: float
    pct_light: float

    def __post_init__(self):
        for v in (self.pct_heavy, self.pct_medium, self.pct_light):
            if not 0.0 <= v <= 100.0:
                raise ValueError("shares must lie in [0, 100]")
        if abs(self.pct_heavy + self.pct_medium + self.pct_light - 100.0) > 1e-6:
            raise ValueError("shares must sum to 100")

    @classmethod
    def from_counts(cls, heavy: int, medium: int, light: int) -> "TrafficMix":
        n = heavy + medium + light
        if n <= 0 or min(heavy, medium, light) < 0:
            raise ValueError("need non-negative counts with a positive total")
        return cls(100.0 * heavy / n, 100.0 * medium / n, 100.0 * light / n)


def mix_index(mix: TrafficMix) -> float:
    return 3.0 * mix.pct_heavy + mix.pct_medium


def capacity_utilization(demand, capacity):
    """Demand over capacity in percent. Works on ints, floats or Fractions."""
    if not capacity > 0:
        raise DomainError("capacity must be positive")
    return 100 * demand / capacity


# ---------------------------------------------------------------------------
# design peak


@dataclass(frozen=True)
class DesignPeak:
    day: date
    daily_count: int
    hourly_counts: tuple[int, ...] | None = None

    @property
    def peak_hour(self) -> int | None:
        if self.hourly_counts is None:
            return None
        return max(range(24), key=lambda h: (self.hourly_counts[h], -h))

    @property
    def peak_count(self) -> int | None:
        return None if self.hourly_counts is None else max(self.hourly_counts)


def select_design_peak(counts: Mapping[date, int | Sequence[int]], exclude_top_fridays: bool = False) -> DesignPeak:
    """Pick the design day: busy, but never the single absolute peak.

    ``counts`` maps a date to a daily total or to 24 hourly counts. By
    default the second-busiest day is returned (the earliest one on ties,
    and the earliest of the busiest days when the maximum is shared). With
    ``exclude_top_fridays`` the busiest non-Friday is returned instead.
    """
    if len(counts) < 2:
        raise ValueError("design peak selection needs at least two distinct days")
    daily = {}
    hourly = {}
    for d, v in counts.items():
        if isinstance(v, (int, float)):
            daily[d] = int(v)
        else:
            if len(v) != 24:
                raise ValueError(f"{d}: hourly profile must have 24 entries")
            hourly[d] = tuple(int(x) for x in v)
            daily[d] = sum(hourly[d])
    ranked = sorted(daily, key=lambda d: (-daily[d], d))
    if exclude_top_fridays:
        pool = [d for d in ranked if d.weekday() != 4]
        if not pool:
            raise ValueError("no non-Friday days to choose from")
        pick = pool[0]
    elif daily[ranked[0]] > daily[ranked[1]]:
        pick = ranked[1]
    else:
        pick = ranked[0]
    return DesignPeak(pick, daily[pick], hourly.get(pick))


def design_hour_factor(peak_hour_volume: float, annual_volume: float) -> float:
    _check_positive(annual_volume=annual_volume)
    return 100.0 * peak_hour_volume / annual_volume


def peak_from_factor(annual_volume: float, factor_pct: float) -> float:
    _check_positive(annual_volume=annual_volume)
    return annual_volume * factor_pct / 100.0


# ---------------------------------------------------------------------------
# terminal


class Facility(str, enum.Enum):
    CHECK_IN_ECONOMY = "CheckInEconomy"
    CHECK_IN_BUSINESS = "CheckInBusiness"
    PASSPORT_IN = "PassportIn"
    PASSPORT_OUT = "PassportOut"
    BAGGAGE_CLAIM = "BaggageClaim"
    SECURITY = "Security"


class LosBand(str, enum.Enum):
    A_TO_C = "A_to_C"
    D_TO_E = "D_to_E"
    F = "F"


# upper bounds (minutes) of the A-C and D-E waiting-time bands
LOS_WAIT_LIMITS = {
    Facility.CHECK_IN_ECONOMY: (12.0, 30.0),
    Facility.CHECK_IN_BUSINESS: (3.0, 5.0),
    Facility.PASSPORT_IN: (7.0, 15.0),
    Facility.PASSPORT_OUT: (5.0, 10.0),
    Facility.BAGGAGE_CLAIM: (12.0, 18.0),
    Facility.SECURITY: (3.0, 7.0),
}


def terminal_occupancy(hourly_pax: float, dwell_h: float) -> float:
    """Estimated passengers present at once (volume x dwell)."""
    if hourly_pax < 0 or dwell_h < 0:
        raise DomainError("volume and dwell time must be non-negative")
    return hourly_pax * dwell_h


def terminal_los(facility: Facility | str, wait_min: float) -> LosBand:
    if wait_min < 0:
        raise DomainError("waiting time must be non-negative")
    ac, de = LOS_WAIT_LIMITS[Facility(facility)]
    if wait_min <= ac:
        return LosBand.A_TO_C
    if wait_min <= de:
        return LosBand.D_TO_E
    return LosBand.F
