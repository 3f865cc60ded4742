"""Event logs, per-flight delay records and an independent separation auditor."""
from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from typing import NamedTuple, TextIO

from ..capacity import NM_KM, SeparationPolicy
from ..core import Direction, WtcClass
from ..emissions import TaxiSpan

CAUSES = ("airspace", "ground", "departure_queue", "gate")


class Event(NamedTuple):
    time_s: float
    flight_id: str
    kind: str
    where: str = ""


@dataclass
class FlightRecord:
    flight_id: str
    direction: Direction
    wtc: WtcClass
    aircraft_code: str
    sched_s: float
    demand_s: float = 0.0          # injection (arrivals) or ready time (departures)
    unimpeded_s: float = 0.0       # terminal event time without any waiting
    terminal_s: float | None = None
    runway: str = ""
    speed_kmh: float = 0.0
    delays_s: dict = field(default_factory=lambda: dict.fromkeys(CAUSES, 0.0))

    @property
    def completed(self) -> bool:
        return self.terminal_s is not None

    @property
    def total_delay_min(self) -> float:
        return sum(self.delays_s.values()) / 60.0

    def delay_min(self, cause: str) -> float:
        return self.delays_s[cause] / 60.0


@dataclass
class EventLog:
    events: list[Event] = field(default_factory=list)
    flights: dict[str, FlightRecord] = field(default_factory=dict)

    def add(self, t: float, fid: str, kind: str, where: str = "") -> None:
        self.events.append(Event(float(t), fid, kind, where))

    def of_flight(self, fid: str) -> list[Event]:
        return [e for e in self.events if e.flight_id == fid]

    def times(self, kind: str) -> dict[str, float]:
        return {e.flight_id: e.time_s for e in self.events if e.kind == kind}

    def write_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["time_s", "flight_id", "event", "where"])
        for e in self.events:
            w.writerow([f"{e.time_s:.3f}", e.flight_id, e.kind, e.where])

    def write_flights_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["flight_id", "direction", "wtc", "aircraft_code", "runway", "speed_kmh", "sched_s",
                    "demand_s", "unimpeded_s", "terminal_s"] + [f"{c}_min" for c in CAUSES] + ["total_min"])
        for r in self.flights.values():
            w.writerow([r.flight_id, r.direction.value, r.wtc.value, r.aircraft_code, r.runway,
                        f"{r.speed_kmh:.3f}", f"{r.sched_s:.3f}", f"{r.demand_s:.3f}", f"{r.unimpeded_s:.3f}",
                        "" if r.terminal_s is None else f"{r.terminal_s:.3f}"]
                       + [f"{r.delay_min(c):.2f}" for c in CAUSES] + [f"{r.total_delay_min:.2f}"])

    def digest(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        self.write_flights_csv(buf)
        return hashlib.sha256(buf.getvalue().encode()).hexdigest()

    def taxi_out_spans(self) -> list[TaxiSpan]:
        """Off-block to brakes release for every departure that took off."""
        push = self.times("pushback_start")
        off = self.times("takeoff")
        out = []
        for fid, r in self.flights.items():
            if r.direction is Direction.DEPARTURE and fid in push and fid in off:
                ground = (r.delays_s["ground"] + r.delays_s["departure_queue"]) / 60.0
                out.append(TaxiSpan(fid, r.aircraft_code, push[fid], off[fid], ground))
        return out


# ---------------------------------------------------------------------------
# separation auditor
#
# Replays runway events only; it does not reuse any spacing code from the
# engine. Arrival spacing is checked geometrically along the common approach
# path while the leading aircraft is on it.


@dataclass(frozen=True)
class SeparationViolation:
    runway: str
    leading: str
    trailing: str
    kind: str
    required: float
    actual: float


def audit_separation(log: EventLog, policy: SeparationPolicy, common_path_nm: float,
                     mixed_buffer_s: float | None = None, tol: float = 1e-6) -> list[SeparationViolation]:
    ops: dict[str, list[tuple[float, str, str]]] = {}
    for e in log.events:
        if e.kind in ("touchdown", "takeoff"):
            ops.setdefault(e.where, []).append((e.time_s, e.kind, e.flight_id))
    L = common_path_nm * NM_KM * 1000.0
    bad = []
    for rwy, seq in ops.items():
        seq.sort()
        last_arr = last_dep = None
        for t, kind, fid in seq:
            rec = log.flights[fid]
            if kind == "touchdown":
                if last_arr is not None:
                    lt, lfid = last_arr
                    lead = log.flights[lfid]
                    req_m = policy.arr_nm(lead.wtc, rec.wtc) * NM_KM * 1000.0
                    vi, vj = lead.speed_kmh / 3.6, rec.speed_kmh / 3.6
                    # distance from trailing to leading while leading flies the path
                    gaps = []
                    for tau in (lt - L / vi, lt):
                        gaps.append(vj * (t - tau) - vi * (lt - tau))
                    got = min(gaps)
                    if got < req_m - 1e-3:
                        bad.append(SeparationViolation(rwy, lfid, fid, "arrival_distance_m", req_m, got))
                if last_dep is not None and mixed_buffer_s is not None and t - last_dep[0] < mixed_buffer_s - tol:
                    bad.append(SeparationViolation(rwy, last_dep[1], fid, "departure_arrival_s",
                                                   mixed_buffer_s, t - last_dep[0]))
                last_arr = (t, fid)
            else:
                if last_dep is not None:
                    lead = log.flights[last_dep[1]]
                    req = policy.dep_s(lead.wtc, rec.wtc)
                    if t - last_dep[0] < req - tol:
                        bad.append(SeparationViolation(rwy, last_dep[1], fid, "departure_s", req, t - last_dep[0]))
                if last_arr is not None and (last_dep is None or last_arr[0] > last_dep[0]):
                    lead = log.flights[last_arr[1]]
                    req = policy.dep_s(lead.wtc, rec.wtc)
                    if t - last_arr[0] < req - tol:
                        bad.append(SeparationViolation(rwy, last_arr[1], fid, "arrival_departure_s",
                                                       req, t - last_arr[0]))
                last_dep = (t, fid)
    return bad
