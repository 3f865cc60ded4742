"""Simulation scenario: schedule, airfield, separation policy and run settings."""
from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from ..capacity import SeparationPolicy
from ..core import Flight, default_fleet, parse_fleet, parse_schedule, write_schedule
from .graph import AirfieldGraph


class Mode(str, enum.Enum):
    SEGREGATED = "Segregated"
    MIXED_PARALLEL = "MixedParallel"


class TurnaroundMatcher(str, enum.Enum):
    CARRIER_TYPE = "carrier_type"
    TAIL = "tail"


@dataclass
class Scenario:
    schedule: list[Flight]
    graph: AirfieldGraph
    separation: SeparationPolicy = field(default_factory=SeparationPolicy)
    mode: Mode = Mode.SEGREGATED
    arrival_runways: tuple[str, ...] = ()
    departure_runways: tuple[str, ...] = ()
    clone_factors: tuple[float, ...] = (0.0,) * 24
    injection_jitter_min: tuple[float, float] = (0.0, 15.0)
    departure_jitter_min: tuple[float, float] = (0.0, 15.0)
    approach_speed_kmh: tuple[float, float] = (250.0, 250.0)
    departure_speed_kmh: tuple[float, float] = (250.0, 250.0)
    departure_distance_spacing: bool = True
    common_path_nm: float = 10.0
    mixed_gap_buffer_s: float = 30.0
    pushback_s: float = 180.0
    runway_exit_s: float = 50.0
    taxi_speed_kn: float = 25.0
    gridlock_threshold_min: float = 60.0
    unlinked_stand_min: float = 30.0
    min_turnaround_min: float = 15.0
    turnaround_matcher: TurnaroundMatcher = TurnaroundMatcher.CARRIER_TYPE
    clone_time_jitter_min: float = 7.5
    los_threshold_min: float = 5.0
    seed: int = 0
    iterations: int = 10
    name: str = ""

    def __post_init__(self):
        self.mode = Mode(self.mode)
        self.turnaround_matcher = TurnaroundMatcher(self.turnaround_matcher)
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if len(self.clone_factors) != 24:
            raise ValueError("clone factors need one value per hour (24)")
        if any(not (f >= 0 and f < float("inf")) for f in self.clone_factors):
            raise ValueError("clone factors must be finite and non-negative")
        for name in ("approach_speed_kmh", "departure_speed_kmh"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must be a positive (low, high) range")
        ids = [r.id for r in self.graph.runways]
        if not self.arrival_runways:
            self.arrival_runways = tuple(ids if self.mode is Mode.MIXED_PARALLEL else ids[:1])
        if not self.departure_runways:
            self.departure_runways = tuple(ids if self.mode is Mode.MIXED_PARALLEL else ids[-1:])

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


_SETTINGS = [f.name for f in fields(Scenario) if f.name not in ("schedule", "graph", "separation")]


def _read_ref(ref: str, base: Path | None) -> str:
    """Resolve a file reference; ``package:`` refers to bundled data."""
    if ref.startswith("package:"):
        return resources.files("airsidekit.data").joinpath(ref[len("package:"):]).read_text()
    p = Path(ref)
    if not p.is_absolute() and base is not None:
        p = base / p
    return p.read_text()


def scenario_from_dict(d: dict, base: Path | None = None) -> Scenario:
    fleet = default_fleet()
    if "fleet_file" in d:
        fleet = parse_fleet(io.StringIO(_read_ref(d["fleet_file"], base)))
    if "graph" in d:
        graph = AirfieldGraph.from_dict(d["graph"])
    else:
        graph = AirfieldGraph.from_dict(json.loads(_read_ref(d["graph_file"], base)))
    if "schedule_file" in d:
        res = parse_schedule(io.StringIO(_read_ref(d["schedule_file"], base)), fleet)
    else:
        from ..core import SCHEDULE_COLUMNS
        buf = io.StringIO()
        w = csv.DictWriter(buf, SCHEDULE_COLUMNS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        w.writerows(d.get("schedule", []))
        res = parse_schedule(io.StringIO(buf.getvalue()), fleet)
    if res.errors:
        e = res.errors[0]
        raise ValueError(f"schedule row {e.line}: {e.message}")
    kw = {}
    for k in _SETTINGS:
        if k in d:
            v = d[k]
            kw[k] = tuple(v) if isinstance(v, list) else v
    sep = SeparationPolicy.from_dict(d["separation"]) if "separation" in d else SeparationPolicy()
    return Scenario(schedule=res.flights, graph=graph, separation=sep, **kw)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return scenario_from_dict(json.loads(path.read_text()), path.parent)


def scenario_to_dict(sc: Scenario) -> dict:
    """Self-contained form with the schedule embedded as rows."""
    buf = io.StringIO()
    write_schedule(sc.schedule, buf)
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    d = {}
    for k in _SETTINGS:
        v = getattr(sc, k)
        d[k] = v.value if isinstance(v, enum.Enum) else (list(v) if isinstance(v, tuple) else v)
    d["separation"] = sc.separation.to_dict()
    d["graph"] = sc.graph.to_dict()
    d["schedule"] = rows
    return d


def bundled_scenario(name: str = "twin_parallel") -> Scenario:
    text = resources.files("airsidekit.data").joinpath(f"scenario_{name}.json").read_text()
    return scenario_from_dict(json.loads(text))
