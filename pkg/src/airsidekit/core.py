"""Domain types, schedule/weather ingestion, rotations and geodesy.

Every timestamp handled here is a timezone-aware UTC ``datetime`` with
minute resolution. Schedule files carry local clock times plus a
``utc_offset_min`` column; ingestion converts them.
"""
from __future__ import annotations

import bisect
import csv
import enum
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone
from importlib import resources
from typing import Iterable, TextIO

import numpy as np

from . import _kernels

HEAVY_MIN_MTOW_T = 136.0
LIGHT_MAX_MTOW_T = 7.0


class IngestionError(ValueError):
    """Raised when an input file cannot be read at all (e.g. missing column)."""


class WtcClass(str, enum.Enum):
    HEAVY = "H"
    MEDIUM = "M"
    LIGHT = "L"

    @classmethod
    def from_mtow(cls, mtow_tonnes: float) -> "WtcClass":
        if not mtow_tonnes > 0 or not math.isfinite(mtow_tonnes):
            raise ValueError(f"MTOW must be positive and finite, got {mtow_tonnes!r}")
        if mtow_tonnes > HEAVY_MIN_MTOW_T:
            return cls.HEAVY
        if mtow_tonnes < LIGHT_MAX_MTOW_T:
            return cls.LIGHT
        return cls.MEDIUM

    @classmethod
    def parse(cls, text: str) -> "WtcClass":
        t = text.strip().upper()
        for member in cls:
            if t in (member.value, member.name):
                return member
        raise ValueError(f"unknown wake turbulence class {text!r}")


class Direction(str, enum.Enum):
    ARRIVAL = "A"
    DEPARTURE = "D"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        t = text.strip().upper()
        if t in ("A", "ARR", "ARRIVAL"):
            return cls.ARRIVAL
        if t in ("D", "DEP", "DEPARTURE"):
            return cls.DEPARTURE
        raise ValueError(f"unknown direction {text!r}")


@dataclass(frozen=True)
class AircraftType:
    code: str
    mtow_tonnes: float
    seats: int = 0
    engines: int = 2
    fuel_flow_idle_kg_per_s: float = 0.0
    ei_hc_g_per_kg: float = 0.0
    ei_co_g_per_kg: float = 0.0
    ei_nox_g_per_kg: float = 0.0
    engine_id: str = ""
    share_pct: float | None = None

    def __post_init__(self):
        if self.engines < 1:
            raise ValueError(f"{self.code}: engines must be >= 1")
        if self.seats < 0:
            raise ValueError(f"{self.code}: seats must be >= 0")
        for name in ("fuel_flow_idle_kg_per_s", "ei_hc_g_per_kg", "ei_co_g_per_kg", "ei_nox_g_per_kg"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{self.code}: {name} must be finite and non-negative")
        WtcClass.from_mtow(self.mtow_tonnes)

    @property
    def wtc(self) -> WtcClass:
        return WtcClass.from_mtow(self.mtow_tonnes)


@dataclass(frozen=True)
class Flight:
    flight_id: str
    carrier: str
    origin: str
    destination: str
    direction: Direction
    aircraft: AircraftType
    sched_time: datetime | None = None
    actual_time: datetime | None = None
    tail: str | None = None

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValueError(f"{self.flight_id}: origin equals destination ({self.origin})")

    @property
    def delay_min(self) -> float | None:
        if self.sched_time is None or self.actual_time is None:
            return None
        return (self.actual_time - self.sched_time).total_seconds() / 60.0

    @property
    def station(self) -> str:
        """Airport where this movement touches the ground."""
        return self.destination if self.direction is Direction.ARRIVAL else self.origin


@dataclass(frozen=True)
class Rotation:
    tail: str
    day: date
    legs: tuple[Flight, ...]
    # indices i where legs[i].destination != legs[i+1].origin
    breaks: tuple[int, ...] = ()

    @property
    def panel_index(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.legs) + 1))


@dataclass(frozen=True)
class Airport:
    iata: str
    lat_deg: float
    lon_deg: float
    icao: str | None = None
    name: str = ""

    def __post_init__(self):
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"{self.iata}: latitude out of range")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ValueError(f"{self.iata}: longitude out of range")


class WeatherCondition(str, enum.Enum):
    SUN = "Sun"
    CLOUD = "Cloud"
    FOG = "Fog"
    HAZE = "Haze"
    RAIN = "Rain"
    SNOW = "Snow"
    THUNDER = "Thunder"

    @classmethod
    def parse(cls, text: str) -> "WeatherCondition":
        t = text.strip().lower()
        for member in cls:
            if member.value.lower() == t:
                return member
        raise ValueError(f"unknown weather condition {text!r}")


@dataclass(frozen=True)
class WeatherRecord:
    airport: str
    time: datetime
    condition: WeatherCondition
    temperature_c: float
    wind_speed: float | None = None
    visibility: float | None = None
    pressure: float | None = None
    humidity: float | None = None


@dataclass
class RowError:
    line: int
    message: str


@dataclass
class IngestResult:
    flights: list[Flight] = field(default_factory=list)
    errors: list[RowError] = field(default_factory=list)


# ---------------------------------------------------------------------------
# fleet (aircraft type table)

FLEET_COLUMNS = (
    "Aircraft Type",
    "Percentage of Total Flights %",
    "Engine Identification",
    "No of Engines",
    "Hydrocarbon (HC) emission index at idle condition g/kg",
    "Carbon Monoxide (CO) emission index at idle condition g/kg",
    "Oxides of nitrogen (NOx) emission index at idle condition g/kg",
    "Fuel flow at idle condition kg/sec",
    "MTOW t",
    "Seats",
)


def _opt_float(text):
    text = (text or "").strip().rstrip("%")
    return float(text) if text else None


def parse_fleet(stream: TextIO) -> dict[str, AircraftType]:
    reader = csv.DictReader(stream)
    missing = [c for c in FLEET_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise IngestionError(f"fleet table is missing column {missing[0]!r}")
    fleet = {}
    for row in reader:
        ac = AircraftType(
            code=row["Aircraft Type"].strip(),
            mtow_tonnes=float(row["MTOW t"]),
            seats=int(row["Seats"]),
            engines=int(row["No of Engines"]),
            fuel_flow_idle_kg_per_s=float(row["Fuel flow at idle condition kg/sec"]),
            ei_hc_g_per_kg=float(row[FLEET_COLUMNS[4]]),
            ei_co_g_per_kg=float(row[FLEET_COLUMNS[5]]),
            ei_nox_g_per_kg=float(row[FLEET_COLUMNS[6]]),
            engine_id=row["Engine Identification"].strip(),
            share_pct=_opt_float(row["Percentage of Total Flights %"]),
        )
        fleet[ac.code] = ac
    return fleet


def write_fleet(fleet: Iterable[AircraftType], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(FLEET_COLUMNS)
    for ac in fleet:
        share = "" if ac.share_pct is None else f"{ac.share_pct:g}"
        w.writerow([ac.code, share, ac.engine_id, ac.engines, f"{ac.ei_hc_g_per_kg:g}",
                    f"{ac.ei_co_g_per_kg:g}", f"{ac.ei_nox_g_per_kg:g}",
                    f"{ac.fuel_flow_idle_kg_per_s:g}", f"{ac.mtow_tonnes:g}", ac.seats])


def default_fleet() -> dict[str, AircraftType]:
    """OSL aircraft mix with idle emission factors (plus MTOW and seats)."""
    text = resources.files("airsidekit").joinpath("data/fleet_osl.csv").read_text()
    return parse_fleet(io.StringIO(text))


def default_airports() -> dict[str, Airport]:
    text = resources.files("airsidekit").joinpath("data/airports.csv").read_text()
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        out[row["iata"]] = Airport(row["iata"], float(row["lat_deg"]), float(row["lon_deg"]),
                                   row["icao"] or None, row["name"])
    return out


# ---------------------------------------------------------------------------
# schedules

SCHEDULE_COLUMNS = ("date", "flight_id", "carrier", "tail", "origin", "destination", "direction",
                    "sched_time", "actual_time", "aircraft_code", "utc_offset_min")
_MANDATORY = ("date", "flight_id", "carrier", "origin", "destination", "direction", "sched_time",
              "aircraft_code")


def _parse_hhmm(day: date, text: str, offset_min: int) -> datetime:
    hh, mm = text.strip().split(":")
    h, m = int(hh), int(mm)
    if not (0 <= h <= 23 and 0 <= m <= 59):
        raise ValueError(f"bad clock time {text!r}")
    local = datetime(day.year, day.month, day.day, h, m, tzinfo=timezone.utc)
    return local - timedelta(minutes=offset_min)


def parse_schedule(stream: TextIO, fleet: dict[str, AircraftType] | None = None) -> IngestResult:
    """Read a schedule CSV. Bad rows land in ``result.errors``, never silently dropped."""
    fleet = default_fleet() if fleet is None else fleet
    reader = csv.DictReader(stream)
    cols = reader.fieldnames or []
    for c in _MANDATORY:
        if c not in cols:
            raise IngestionError(f"schedule is missing mandatory column {c!r}")
    result = IngestResult()
    for lineno, row in enumerate(reader, start=2):
        try:
            offset = int(row.get("utc_offset_min") or 0)
            day = date.fromisoformat(row["date"].strip())
            sched = _parse_hhmm(day, row["sched_time"], offset)
            actual = None
            if (row.get("actual_time") or "").strip():
                actual = _parse_hhmm(day, row["actual_time"], offset)
                # clock times that wrap past midnight
                if actual - sched < timedelta(hours=-12):
                    actual += timedelta(days=1)
                elif actual - sched > timedelta(hours=12):
                    actual -= timedelta(days=1)
            code = row["aircraft_code"].strip()
            if code not in fleet:
                raise ValueError(f"unknown aircraft type {code!r}")
            tail = (row.get("tail") or "").strip() or None
            flight = Flight(
                flight_id=row["flight_id"].strip(),
                carrier=row["carrier"].strip(),
                origin=row["origin"].strip(),
                destination=row["destination"].strip(),
                direction=Direction.parse(row["direction"]),
                aircraft=fleet[code],
                sched_time=sched,
                actual_time=actual,
                tail=tail,
            )
        except (ValueError, KeyError, AttributeError) as exc:
            result.errors.append(RowError(lineno, str(exc)))
            continue
        result.flights.append(flight)
    return result


def write_schedule(flights: Iterable[Flight], stream: TextIO) -> None:
    """Serialize flights in UTC (offset 0); ``parse_schedule`` round-trips it."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SCHEDULE_COLUMNS)
    for f in flights:
        if f.sched_time is None:
            raise ValueError(f"{f.flight_id}: cannot serialize a flight without scheduled time")
        s = f.sched_time.astimezone(timezone.utc)
        a = f.actual_time.astimezone(timezone.utc).strftime("%H:%M") if f.actual_time else ""
        w.writerow([s.date().isoformat(), f.flight_id, f.carrier, f.tail or "", f.origin,
                    f.destination, f.direction.value, s.strftime("%H:%M"), a, f.aircraft.code, 0])


def parse_weather(stream: TextIO) -> list[WeatherRecord]:
    reader = csv.DictReader(stream)
    for c in ("airport", "timestamp_utc", "condition", "temperature_c"):
        if c not in (reader.fieldnames or []):
            raise IngestionError(f"weather file is missing column {c!r}")
    out = []
    for row in reader:
        ts = datetime.fromisoformat(row["timestamp_utc"].strip().replace("Z", "+00:00"))
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        out.append(WeatherRecord(
            airport=row["airport"].strip(),
            time=ts.astimezone(timezone.utc),
            condition=WeatherCondition.parse(row["condition"]),
            temperature_c=float(row["temperature_c"]),
            wind_speed=_opt_float(row.get("wind_speed")),
            visibility=_opt_float(row.get("visibility")),
            pressure=_opt_float(row.get("pressure")),
            humidity=_opt_float(row.get("humidity")),
        ))
    out.sort(key=lambda r: (r.airport, r.time))
    return out


# ---------------------------------------------------------------------------
# rotations and turnarounds


def _order_key(f: Flight):
    return (f.sched_time, f.flight_id, f.origin, f.destination)


def build_rotations(flights: Iterable[Flight]) -> tuple[list[Rotation], int]:
    """Group legs by (tail, UTC day), ordered by scheduled time.

    Returns the rotations and the number of flights left out for lacking a
    tail id or a scheduled time.
    """
    groups: dict[tuple[str, date], list[Flight]] = defaultdict(list)
    excluded = 0
    for f in flights:
        if not f.tail or f.sched_time is None:
            excluded += 1
            continue
        groups[(f.tail, f.sched_time.date())].append(f)
    rotations = []
    for (tail, day) in sorted(groups):
        legs = tuple(sorted(groups[(tail, day)], key=_order_key))
        breaks = tuple(i for i in range(len(legs) - 1) if legs[i].destination != legs[i + 1].origin)
        rotations.append(Rotation(tail, day, legs, breaks))
    return rotations, excluded


@dataclass
class TurnaroundLinks:
    pairs: list[tuple[Flight, Flight]]
    unmatched_arrivals: list[Flight]
    unmatched_departures: list[Flight]


def _link(arrivals, departures, min_turnaround_min, same):
    gap = timedelta(minutes=min_turnaround_min)
    deps = sorted((d for d in departures if d.sched_time is not None), key=_order_key)
    used = [False] * len(deps)
    pairs, lonely = [], []
    for arr in sorted((a for a in arrivals if a.sched_time is not None), key=_order_key):
        ready = arr.sched_time + gap
        for k, dep in enumerate(deps):
            if used[k] or dep.sched_time < ready or not same(arr, dep):
                continue
            used[k] = True
            pairs.append((arr, dep))
            break
        else:
            lonely.append(arr)
    rest = [d for k, d in enumerate(deps) if not used[k]]
    return TurnaroundLinks(pairs, lonely, rest)


def link_turnarounds(arrivals, departures, min_turnaround_min: float = 15.0) -> TurnaroundLinks:
    """Match each arrival to the earliest free departure of the same carrier and type.

    A departure qualifies when scheduled at or after arrival + minimum
    turnaround (inclusive boundary).
    """
    return _link(arrivals, departures, min_turnaround_min,
                 lambda a, d: a.carrier == d.carrier and a.aircraft.code == d.aircraft.code)


def link_turnarounds_by_tail(arrivals, departures, min_turnaround_min: float = 15.0) -> TurnaroundLinks:
    return _link(arrivals, departures, min_turnaround_min,
                 lambda a, d: a.tail is not None and a.tail == d.tail)


# ---------------------------------------------------------------------------
# geodesy and weather


def great_circle_km(a: Airport, b: Airport, radius_km: float = _kernels.EARTH_RADIUS_KM) -> float:
    p1, p2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dphi = p2 - p1
    dlmb = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlmb / 2) ** 2
    return 2.0 * radius_km * math.asin(math.sqrt(min(1.0, h)))


def distance_matrix_km(airports: list[Airport]) -> np.ndarray:
    lat = np.array([a.lat_deg for a in airports])
    lon = np.array([a.lon_deg for a in airports])
    return _kernels.haversine_matrix(lat, lon)


def join_weather(flights: Iterable[Flight], weather: Iterable[WeatherRecord],
                 window_min: float = 30.0) -> list[tuple[Flight, WeatherRecord | None]]:
    """Pair each flight with the latest report at its station in [t - window, t]."""
    by_airport: dict[str, list[WeatherRecord]] = defaultdict(list)
    for rec in weather:
        by_airport[rec.airport].append(rec)
    for recs in by_airport.values():
        recs.sort(key=lambda r: r.time)
    keys = {ap: [r.time for r in recs] for ap, recs in by_airport.items()}
    window = timedelta(minutes=window_min)
    out = []
    for f in flights:
        t = f.sched_time
        recs = by_airport.get(f.station)
        match = None
        if t is not None and recs:
            i = bisect.bisect_right(keys[f.station], t) - 1
            if i >= 0 and recs[i].time >= t - window:
                match = recs[i]
        out.append((f, match))
    return out


def with_times(flight: Flight, sched: datetime | None = None, actual: datetime | None = None) -> Flight:
    return replace(flight, sched_time=sched or flight.sched_time, actual_time=actual or flight.actual_time)
