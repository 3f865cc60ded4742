"""Synthetic design day and a schematic twin-parallel-runway airfield.

Real airfield geometry and the full design-day schedule are not public, so
the bundled scenario is built here: hourly movement counts per wake class
follow a published design-day profile, flight details are drawn from a
seeded generator.
"""
from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np

from ..core import AircraftType, Direction, Flight, default_fleet
from .graph import AirfieldGraph, Link, Node, NodeKind, Runway

# Movements per hour 00-23 and wake class on the design day.
DESIGN_DAY_HEAVY = (0, 0, 0, 0, 0, 0, 0, 1, 1, 2, 0, 1, 1, 1, 1, 1, 0, 0, 1, 1, 0, 0, 0, 1)
DESIGN_DAY_MEDIUM = (2, 1, 0, 1, 1, 2, 24, 26, 46, 43, 34, 39, 25, 31, 32, 32, 37, 41, 42, 44, 46, 35, 21, 4)
DESIGN_DAY_LIGHT = (0, 0, 0, 0, 0, 0, 0, 2, 1, 0, 2, 1, 0, 1, 0, 2, 0, 1, 2, 1, 1, 0, 0, 0)

_TYPES = {"H": ("767300", "A300", "747400"), "M": ("737300", "A320", "737500", "DHC8", "F10062", "MD82"),
          "L": ("DHC6",)}
_CARRIERS = ("AB", "BC", "CD", "DE", "EF")
_STATIONS = ("FRA", "MUC", "LHR", "CDG", "VIE", "ZRH", "CPH", "OSL", "ARN", "AMS")


def design_day(seed: int = 0, day: str = "2024-06-14", home: str = "XXX",
               fleet: dict[str, AircraftType] | None = None) -> list[Flight]:
    fleet = default_fleet() if fleet is None else fleet
    rng = np.random.default_rng(seed)
    d0 = datetime.fromisoformat(day).replace(tzinfo=timezone.utc)
    flights = []
    n = 0
    for h in range(24):
        slots = (["H"] * DESIGN_DAY_HEAVY[h] + ["M"] * DESIGN_DAY_MEDIUM[h] + ["L"] * DESIGN_DAY_LIGHT[h])
        rng.shuffle(slots)
        minutes = np.sort(rng.integers(0, 60, size=len(slots)))
        for k, (cls, m) in enumerate(zip(slots, minutes)):
            n += 1
            code = _TYPES[cls][int(rng.integers(len(_TYPES[cls])))]
            direction = Direction.ARRIVAL if (n % 2) else Direction.DEPARTURE
            other = _STATIONS[int(rng.integers(len(_STATIONS)))]
            carrier = _CARRIERS[int(rng.integers(len(_CARRIERS)))]
            flights.append(Flight(
                flight_id=f"{carrier}{n:04d}", carrier=carrier,
                origin=other if direction is Direction.ARRIVAL else home,
                destination=home if direction is Direction.ARRIVAL else other,
                direction=direction, aircraft=fleet[code],
                sched_time=d0 + timedelta(hours=h, minutes=int(m)),
            ))
    return flights


def twin_parallel_graph(n_gates: int = 8, stands_per_gate: int = 20) -> AirfieldGraph:
    """Two parallel runways north and south of a central apron.

    Each runway has one exit onto its own parallel taxiway and a departure
    queue at the opposite end; gates sit between the two taxiways.
    """
    nodes = {}
    links = []

    def node(nid, kind, x, y, **kw):
        nodes[nid] = Node(nid, kind, float(x), float(y), **kw)

    def both(a, b, length, speed=20.0):
        links.append(Link(a, b, length, speed))
        links.append(Link(b, a, length, speed))

    spacing = 400.0
    for side, y in (("N", 300.0), ("S", -300.0)):
        for k in range(n_gates + 2):
            node(f"{side}{k}", NodeKind.TAXI_JUNCTION, k * spacing, y)
        for k in range(n_gates + 1):
            both(f"{side}{k}", f"{side}{k + 1}", spacing)
    for k in range(1, n_gates + 1):
        gid = f"G{k}"
        node(gid, NodeKind.GATE, k * spacing, 0.0, stands=stands_per_gate,
             concourse="A" if k <= n_gates // 2 else "B")
        both(gid, f"N{k}", 300.0, 10.0)
        both(gid, f"S{k}", 300.0, 10.0)
    east = (n_gates + 1) * spacing
    runways = []
    for rid, side, y in (("R1", "N", 1000.0), ("R2", "S", -1000.0)):
        node(f"TH{rid}", NodeKind.RUNWAY_THRESHOLD, -500.0, y)
        node(f"EX{rid}", NodeKind.TAXI_JUNCTION, east, y)
        node(f"Q{rid}", NodeKind.DEPARTURE_QUEUE, -200.0, y)
        node(f"FIX{rid}", NodeKind.AIRSPACE_FIX, -20000.0, y)
        links.append(Link(f"EX{rid}", f"{side}{n_gates + 1}", 700.0, 20.0))
        links.append(Link(f"{side}0", f"Q{rid}", 700.0, 20.0))
        runways.append(Runway(rid, f"TH{rid}", f"EX{rid}", f"Q{rid}", f"FIX{rid}"))
    return AirfieldGraph(nodes, links, runways)
