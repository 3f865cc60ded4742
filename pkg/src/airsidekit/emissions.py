"""Taxi-out fuel burn and engine emissions, plus noise quota counts.

Emission indices are in g per kg of fuel and fuel flow in kg/s per engine
at idle. Fuel and CO2 are reported in tonnes, HC/CO/NOx in kilograms.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from .core import AircraftType

CO2_PER_KG_FUEL = 3.157


@dataclass(frozen=True)
class FlightEmissions:
    fuel_kg: float
    hc_g: float
    co_g: float
    nox_g: float
    co2_kg: float


def flight_emissions(taxi_seconds: float, aircraft: AircraftType,
                     co2_factor: float = CO2_PER_KG_FUEL) -> FlightEmissions:
    if not taxi_seconds >= 0:
        raise ValueError("taxi time must be non-negative")
    fuel = taxi_seconds * aircraft.fuel_flow_idle_kg_per_s * aircraft.engines
    return FlightEmissions(
        fuel_kg=fuel,
        hc_g=fuel * aircraft.ei_hc_g_per_kg,
        co_g=fuel * aircraft.ei_co_g_per_kg,
        nox_g=fuel * aircraft.ei_nox_g_per_kg,
        co2_kg=fuel * co2_factor,
    )


@dataclass(frozen=True)
class TaxiSpan:
    """Off-block (pushback start) to brakes release for one departure."""
    flight_id: str
    aircraft_code: str
    start_s: float
    end_s: float
    ground_delay_min: float = 0.0

    @property
    def seconds(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class EmissionTotals:
    taxi_out_min: float = 0.0
    fuel_t: float = 0.0
    hc_kg: float = 0.0
    co_kg: float = 0.0
    nox_kg: float = 0.0
    co2_t: float = 0.0
    ground_delay_min: float = 0.0
    departures: int = 0
    iteration: int | None = None

    @property
    def avg_delay_per_departure(self) -> float:
        return self.ground_delay_min / self.departures if self.departures else 0.0


def aggregate_iteration(spans, fleet: Mapping[str, AircraftType], iteration: int | None = None,
                        co2_factor: float = CO2_PER_KG_FUEL) -> EmissionTotals:
    """Sum per-departure taxi emissions.

    ``spans`` is an iterable of TaxiSpan, or any object with a
    ``taxi_out_spans()`` method (a simulator event log).
    """
    if hasattr(spans, "taxi_out_spans"):
        spans = spans.taxi_out_spans()
    taxi = fuel = hc = co = nox = co2 = delay = 0.0
    n = 0
    for s in spans:
        if s.seconds < 0:
            raise ValueError(f"{s.flight_id}: brakes release precedes off-block")
        try:
            ac = fleet[s.aircraft_code]
        except KeyError:
            raise KeyError(f"{s.flight_id}: aircraft type {s.aircraft_code!r} not in fleet table") from None
        e = flight_emissions(s.seconds, ac, co2_factor)
        taxi += s.seconds / 60.0
        fuel += e.fuel_kg
        hc += e.hc_g
        co += e.co_g
        nox += e.nox_g
        co2 += e.co2_kg
        delay += s.ground_delay_min
        n += 1
    return EmissionTotals(taxi, fuel / 1000.0, hc / 1000.0, co / 1000.0, nox / 1000.0,
                          co2 / 1000.0, delay, n, iteration)


def rank_iterations(totals: Sequence[EmissionTotals]) -> list[EmissionTotals]:
    """Lowest externalities first: CO2, then fuel, then ground delay (stable)."""
    return sorted(totals, key=lambda t: (t.co2_t, t.fuel_t, t.ground_delay_min))


TOTALS_COLUMNS = ("Rank", "Iteration", "Taxi-out duration min.", "fuel burn tons", "HC", "CO", "NOx",
                  "CO2", "Ground delay min.", "Departures", "Average delay per departure")


def write_totals_csv(ranked: Iterable[EmissionTotals], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(TOTALS_COLUMNS)
    for rank, t in enumerate(ranked, 1):
        w.writerow([rank, "" if t.iteration is None else t.iteration, f"{t.taxi_out_min:.1f}",
                    f"{t.fuel_t:.2f}", f"{t.hc_kg:.2f}", f"{t.co_kg:.2f}", f"{t.nox_kg:.2f}",
                    f"{t.co2_t:.2f}", f"{t.ground_delay_min:.0f}", t.departures,
                    f"{t.avg_delay_per_departure:.2f}"])


# ---------------------------------------------------------------------------
# noise quota


class DayPeriod(str, enum.Enum):
    DAY = "Day"
    EVENING = "Evening"
    NIGHT = "Night"


PERIOD_PENALTY_DB = {DayPeriod.DAY: 0.0, DayPeriod.EVENING: 5.0, DayPeriod.NIGHT: 10.0}


def eqc(epndb: float, period: DayPeriod | str = DayPeriod.DAY) -> float:
    """Enhanced quota count from a certified EPNdB level."""
    if not math.isfinite(epndb):
        raise ValueError("EPNdB must be finite")
    p = PERIOD_PENALTY_DB[DayPeriod(period)]
    return 0.25 * 10.0 ** (0.1 * (epndb - 84.0 + p))
