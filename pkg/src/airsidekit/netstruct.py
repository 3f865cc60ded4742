"""Carrier network structure: connectivity index, topology classes, propagation."""
from __future__ import annotations

import csv
import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .core import Flight, Rotation


@dataclass(frozen=True)
class CarrierNetwork:
    carrier: str
    period: str
    dests: Mapping[str, frozenset[str]] = field(default_factory=dict)
    extra_airports: frozenset[str] = frozenset()

    @property
    def airports(self) -> frozenset[str]:
        s = set(self.extra_airports) | set(self.dests)
        for d in self.dests.values():
            s |= d
        return frozenset(s)

    @property
    def n(self) -> int:
        return len(self.airports)

    @property
    def k_total(self) -> int:
        return sum(len(d - {o}) for o, d in self.dests.items())

    @classmethod
    def from_routes(cls, carrier: str, period: str, routes: Iterable[tuple[str, str]],
                    directed: bool = True) -> "CarrierNetwork":
        acc: dict[str, set[str]] = defaultdict(set)
        for o, d in routes:
            if o == d:
                continue
            acc[o].add(d)
            if not directed:
                acc[d].add(o)
        return cls(carrier, period, {o: frozenset(v) for o, v in acc.items()})


def networks_from_flights(flights: Iterable[Flight], directed: bool = True) -> list[CarrierNetwork]:
    """One network per (carrier, month of scheduled time)."""
    acc: dict[tuple[str, str], list[tuple[str, str]]] = defaultdict(list)
    for f in flights:
        t = f.sched_time or f.actual_time
        month = t.strftime("%Y-%m") if t is not None else ""
        acc[(f.carrier, month)].append((f.origin, f.destination))
    return [CarrierNetwork.from_routes(c, m, r, directed) for (c, m), r in sorted(acc.items())]


def cindex(net: CarrierNetwork) -> float:
    """Sum of per-airport destination counts over N(N-1), in percent."""
    n = net.n
    if n < 2:
        raise ValueError(f"{net.carrier} {net.period}: connectivity index needs at least two airports")
    return 100.0 * net.k_total / (n * (n - 1))


class NetworkClass(str, enum.Enum):
    HUB_AND_SPOKE = "H&S"
    HYBRID = "Hybrid"
    POINT_TO_POINT = "P2P"


def classify(values: Sequence[float]) -> list[NetworkClass]:
    """Tercile classes; a value at or below a cut point falls in the lower class."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ValueError("classification needs at least three observations")
    lo, hi = np.percentile(v, [33.0, 66.0])
    out = []
    for x in v:
        if x <= lo:
            out.append(NetworkClass.HUB_AND_SPOKE)
        elif x <= hi:
            out.append(NetworkClass.HYBRID)
        else:
            out.append(NetworkClass.POINT_TO_POINT)
    return out


@dataclass(frozen=True)
class CindexRow:
    carrier: str
    period: str
    n: int
    k_total: int
    cindex: float
    network_class: NetworkClass | None


def cindex_report(networks: Sequence[CarrierNetwork]) -> list[CindexRow]:
    vals = [cindex(n) for n in networks]
    classes = classify(vals) if len(vals) >= 3 else [None] * len(vals)
    return [CindexRow(n.carrier, n.period, n.n, n.k_total, v, c) for n, v, c in zip(networks, vals, classes)]


def write_cindex_csv(rows: Iterable[CindexRow], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["carrier", "month", "N", "sum_k", "cindex", "class"])
    for r in rows:
        w.writerow([r.carrier, r.period, r.n, r.k_total, f"{r.cindex:.4f}",
                    "" if r.network_class is None else r.network_class.value])


@dataclass(frozen=True)
class PropagationRecord:
    flight_id: str
    tail: str
    leg_index: int
    inbound_delay_min: float
    own_arrival_delay_min: float | None


def _clamped_delay(f: Flight) -> float | None:
    d = f.delay_min
    return None if d is None else max(0.0, d)


def propagation(rotations: Iterable[Rotation]) -> list[PropagationRecord]:
    """Inbound delay of each leg is the (non-negative) delay of the tail's previous leg."""
    out = []
    for rot in rotations:
        prev = None
        for i, leg in enumerate(rot.legs, 1):
            inbound = 0.0 if prev is None else (_clamped_delay(prev) or 0.0)
            out.append(PropagationRecord(leg.flight_id, rot.tail, i, inbound, _clamped_delay(leg)))
            prev = leg
    return out


def hub_flags(flights: Iterable[Flight], hub_map: Mapping[str, Iterable[str]]) -> list[bool]:
    hubs = {c: set(a) for c, a in hub_map.items()}
    return [f.origin in hubs.get(f.carrier, ()) for f in flights]
