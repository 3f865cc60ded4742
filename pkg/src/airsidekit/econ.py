"""Airport economics: profitability envelopes, PSO subsidy calculus, growth.

PSO residuals follow the sign convention of the tender data: a negative
value is a subsidy (loss), a positive value a profit.
"""
from __future__ import annotations

import csv
import enum
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, TextIO

import numpy as np

from . import _kernels
from .core import Airport, Flight, great_circle_km

DISTANCE_EXPONENT = 0.36


class Unit(str, enum.Enum):
    PAX = "PAX"
    WLU = "WLU"


def wlu(pax: float, cargo_kg: float = 0.0) -> float:
    """Workload units: one passenger or 100 kg of cargo."""
    return pax + cargo_kg / 100.0


@dataclass(frozen=True)
class AirportYear:
    airport: str
    year: int
    pax: int
    ebit: float
    cargo_kg: float = 0.0

    def __post_init__(self):
        if self.pax < 0 or self.cargo_kg < 0:
            raise ValueError(f"{self.airport} {self.year}: traffic must be non-negative")

    @property
    def wlu(self) -> float:
        return wlu(self.pax, self.cargo_kg)

    def volume(self, unit: Unit) -> float:
        return self.pax if Unit(unit) is Unit.PAX else self.wlu


@dataclass(frozen=True)
class EnvelopePoint:
    airport: str
    year: int
    volume: float
    ratio: float
    benchmark: float


def profitability_envelope(data: Iterable[AirportYear], unit: Unit | str = Unit.PAX) -> list[EnvelopePoint]:
    """Sort by traffic and carry the best EBIT-per-unit seen so far."""
    unit = Unit(unit)
    rows = []
    for r in data:
        v = r.volume(unit)
        if v <= 0:
            warnings.warn(f"{r.airport} {r.year}: zero traffic, excluded from envelope", stacklevel=2)
            continue
        rows.append((v, r.airport, r.year, r.ebit / v))
    if not rows:
        raise ValueError("envelope needs at least one record with traffic")
    rows.sort(key=lambda t: (t[0], t[1], t[2]))
    ratios = np.array([t[3] for t in rows])
    bench = _kernels.prefix_max(ratios)
    return [EnvelopePoint(a, y, v, float(q), float(b)) for (v, a, y, q), b in zip(rows, bench)]


def break_even_bracket(envelope: Sequence[EnvelopePoint]):
    """Volumes of the last loss-making and first non-negative benchmark, or None."""
    for prev, cur in zip(envelope, envelope[1:]):
        if prev.benchmark < 0 <= cur.benchmark:
            return prev.volume, cur.volume
    return None


@dataclass(frozen=True)
class EfficiencyGain:
    airport: str
    year: int
    gain: float


def efficiency_gains(envelope: Sequence[EnvelopePoint]) -> tuple[list[EfficiencyGain], float]:
    """Per-airport gain if each reached the benchmark at its own volume."""
    gains = [EfficiencyGain(p.airport, p.year, (p.benchmark - p.ratio) * p.volume) for p in envelope]
    return gains, sum(g.gain for g in gains)


PANEL_COLUMNS = ("airport", "year", "pax", "cargo_kg", "ebit")


def parse_panel(stream: TextIO) -> list[AirportYear]:
    rd = csv.DictReader(stream)
    missing = [c for c in ("airport", "year", "pax", "ebit") if c not in (rd.fieldnames or [])]
    if missing:
        raise ValueError(f"financial panel is missing column {missing[0]!r}")
    out = []
    for row in rd:
        out.append(AirportYear(row["airport"], int(row["year"]), int(float(row["pax"])),
                               float(row["ebit"]), float(row.get("cargo_kg") or 0.0)))
    return out


def write_envelope_csv(envelope: Iterable[EnvelopePoint], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["airport", "year", "volume", "ebit_per_unit", "benchmark"])
    for p in envelope:
        w.writerow([p.airport, p.year, f"{p.volume:g}", f"{p.ratio:.6g}", f"{p.benchmark:.6g}"])


# ---------------------------------------------------------------------------
# PSO networks


@dataclass(frozen=True)
class PsoRoute:
    origin: str
    destination: str
    distance_km: float
    revenue: float
    pax: float

    @property
    def rpk(self) -> float:
        return self.pax * self.distance_km

    @property
    def fare(self) -> float:
        return self.revenue / self.pax

    @property
    def rrpk(self) -> float:
        return self.revenue / self.rpk


@dataclass(frozen=True)
class PsoNetwork:
    routes: tuple[PsoRoute, ...]
    subsidy: float | None = None

    def __post_init__(self):
        if self.rpk_total <= 0:
            raise ValueError("network RPK must be positive")

    @property
    def revenue_total(self) -> float:
        return sum(r.revenue for r in self.routes)

    @property
    def pax_total(self) -> float:
        return sum(r.pax for r in self.routes)

    @property
    def rpk_total(self) -> float:
        return sum(r.rpk for r in self.routes)

    @property
    def mean_distance(self) -> float:
        return sum(r.distance_km for r in self.routes) / len(self.routes)


def pso_average_cost(net: PsoNetwork, total_cost: float) -> float:
    return total_cost / net.rpk_total


def pso_breakeven_cost(net: PsoNetwork) -> float:
    return net.revenue_total / net.rpk_total


def pso_residual(net: PsoNetwork, crpk: float | Callable[[PsoRoute], float]) -> float:
    """Network profit (+) or subsidy (-) at a flat or per-route unit cost."""
    if callable(crpk):
        return sum((r.rrpk - crpk(r)) * r.rpk for r in net.routes)
    return net.revenue_total - crpk * net.rpk_total


def distance_cost(lam: float, exponent: float = DISTANCE_EXPONENT) -> Callable[[PsoRoute], float]:
    return lambda r: lam / r.distance_km ** exponent


def _lambda_weight(net: PsoNetwork, exponent: float) -> float:
    if any(r.distance_km <= 0 for r in net.routes):
        raise ValueError("route distances must be positive")
    w = sum(r.rpk * r.distance_km ** -exponent for r in net.routes)
    if w == 0:
        raise ValueError("degenerate network: zero distance-weighted RPK")
    return w


def pso_lambda_solve(net: PsoNetwork, target_subsidy: float, exponent: float = DISTANCE_EXPONENT) -> float:
    """Scale of c_i = lam / d_i^exponent that yields the target network residual."""
    return (net.revenue_total - target_subsidy) / _lambda_weight(net, exponent)


def pso_lambda_bisect(net: PsoNetwork, target_subsidy: float, exponent: float = DISTANCE_EXPONENT,
                      tol: float = 1e-12, max_iter: int = 400) -> float:
    """Goal-seek the same root by bisection on the (decreasing) residual."""
    w = _lambda_weight(net, exponent)
    R = net.revenue_total

    def f(lam):
        return R - lam * w - target_subsidy

    lo, hi = 0.0, 1.0
    while f(lo) < 0:
        lo = -2.0 * (abs(lo) + 1.0)
    while f(hi) > 0:
        hi *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def weighted_mean_cost(net: PsoNetwork, crpk_fn: Callable[[PsoRoute], float]) -> float:
    return sum(r.rpk * crpk_fn(r) for r in net.routes) / net.rpk_total


@dataclass(frozen=True)
class RouteSubsidy:
    origin: str
    destination: str
    unit_result: float
    route_result: float
    per_pax: float


def subsidy_per_pax(net: PsoNetwork, crpk: float | Callable[[PsoRoute], float]) -> list[RouteSubsidy]:
    fn = crpk if callable(crpk) else (lambda r, c=crpk: c)
    out = []
    for r in net.routes:
        if r.pax <= 0:
            raise ValueError(f"{r.origin}-{r.destination}: passengers must be positive")
        s = r.rrpk - fn(r)
        out.append(RouteSubsidy(r.origin, r.destination, s, s * r.rpk, s * r.rpk / r.pax))
    return out


def parse_pso_network(stream: TextIO, airports: Mapping[str, Airport] | None = None,
                      subsidy: float | None = None) -> PsoNetwork:
    """Columns origin, destination, revenue, pax and optional distance_km.

    Missing distances are computed from the airport table.
    """
    rd = csv.DictReader(stream)
    for c in ("origin", "destination", "revenue", "pax"):
        if c not in (rd.fieldnames or []):
            raise ValueError(f"PSO network file is missing column {c!r}")
    routes = []
    for row in rd:
        d = (row.get("distance_km") or "").strip()
        if d:
            dist = float(d)
        else:
            if airports is None or row["origin"] not in airports or row["destination"] not in airports:
                raise ValueError(f"no distance or coordinates for {row['origin']}-{row['destination']}")
            dist = great_circle_km(airports[row["origin"]], airports[row["destination"]])
        routes.append(PsoRoute(row["origin"], row["destination"], dist, float(row["revenue"]), float(row["pax"])))
    if not routes:
        raise ValueError("PSO network file has no routes")
    return PsoNetwork(tuple(routes), subsidy)


def write_subsidy_csv(rows: Iterable[RouteSubsidy], stream: TextIO, layout: str = "long") -> None:
    """Long form (one row per route) or an origin x destination matrix of per-pax values."""
    rows = list(rows)
    w = csv.writer(stream, lineterminator="\n")
    if layout == "long":
        w.writerow(["origin", "destination", "unit_result", "route_result", "per_pax"])
        for r in rows:
            w.writerow([r.origin, r.destination, f"{r.unit_result:.6g}", f"{r.route_result:.2f}", f"{r.per_pax:.2f}"])
        return
    if layout != "matrix":
        raise ValueError(f"unknown layout {layout!r}")
    codes = sorted({r.origin for r in rows} | {r.destination for r in rows})
    cell = {(r.origin, r.destination): r.per_pax for r in rows}
    w.writerow(["FROM"] + codes)
    for o in codes:
        w.writerow([o] + [f"{cell[(o, d)]:.0f}" if (o, d) in cell else "" for d in codes])


# ---------------------------------------------------------------------------
# growth and flow matrices


def compound_growth(base: float, rate: float, years: float) -> float:
    if not rate > -1:
        raise ValueError("rate must exceed -100%")
    return base * (1.0 + rate) ** years


def growth_factor(rate: float, years: float) -> float:
    return compound_growth(1.0, rate, years)


@dataclass
class OdMatrix:
    origins: list[str]
    destinations: list[str]
    shares_pct: np.ndarray

    def share(self, origin: str, destination: str) -> float:
        return float(self.shares_pct[self.origins.index(origin), self.destinations.index(destination)])


def od_matrix(flows: Iterable[Flight | tuple]) -> OdMatrix:
    """Origin x destination shares (percent of the total weight).

    Accepts flights (weight 1 each) or (origin, destination[, weight]) tuples.
    """
    acc: dict[tuple[str, str], float] = defaultdict(float)
    for f in flows:
        if isinstance(f, Flight):
            acc[(f.origin, f.destination)] += 1.0
        else:
            o, d, *rest = f
            acc[(o, d)] += float(rest[0]) if rest else 1.0
    total = sum(acc.values())
    if total <= 0:
        raise ValueError("flow matrix needs positive total weight")
    origins = sorted({o for o, _ in acc})
    dests = sorted({d for _, d in acc})
    m = np.zeros((len(origins), len(dests)))
    for (o, d), v in acc.items():
        m[origins.index(o), dests.index(d)] = 100.0 * v / total
    return OdMatrix(origins, dests, m)
