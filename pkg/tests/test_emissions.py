import io
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from airsidekit.core import default_fleet
from airsidekit.emissions import (
    CO2_PER_KG_FUEL, DayPeriod, EmissionTotals, TaxiSpan, TOTALS_COLUMNS, aggregate_iteration, eqc,
    flight_emissions, rank_iterations, write_totals_csv,
)

FLEET = default_fleet()
B737 = FLEET["737"]


def test_zero_taxi_is_zero():
    e = flight_emissions(0, B737)
    assert (e.fuel_kg, e.hc_g, e.co_g, e.nox_g, e.co2_kg) == (0, 0, 0, 0, 0)


def test_737_ten_minute_hand_example():
    e = flight_emissions(600, B737)
    assert e.fuel_kg == pytest.approx(158.4, abs=1e-9)
    assert e.hc_g == pytest.approx(494.208, abs=0.1)
    assert e.co_g == pytest.approx(2233.44, abs=0.1)
    assert e.nox_g == pytest.approx(459.36, abs=0.1)
    assert e.co2_kg == pytest.approx(500.0688, abs=0.01)


def test_negative_taxi_rejected():
    with pytest.raises(ValueError):
        flight_emissions(-1, B737)


@given(st.floats(0, 5000), st.floats(0, 5000), st.integers(1, 4))
def test_linearity(t1, t2, engines):
    ac = replace(B737, engines=engines)
    a, b, ab = flight_emissions(t1, ac), flight_emissions(t2, ac), flight_emissions(t1 + t2, ac)
    assert ab.fuel_kg == pytest.approx(a.fuel_kg + b.fuel_kg, rel=1e-12, abs=1e-9)
    one = flight_emissions(t1, replace(B737, engines=1))
    assert a.nox_g == pytest.approx(engines * one.nox_g, rel=1e-12, abs=1e-9)
    if a.fuel_kg > 0:
        assert a.co2_kg / a.fuel_kg == pytest.approx(CO2_PER_KG_FUEL)


def test_aggregate_is_sum_of_flights():
    spans = [TaxiSpan("F1", "737", 0, 600, 2.0), TaxiSpan("F2", "A320", 100, 1000, 5.0),
             TaxiSpan("F3", "747400", 50, 1250, 0.0)]
    tot = aggregate_iteration(spans, FLEET, iteration=3)
    per = [flight_emissions(s.seconds, FLEET[s.aircraft_code]) for s in spans]
    assert tot.fuel_t == pytest.approx(sum(e.fuel_kg for e in per) / 1000, abs=1e-9)
    assert tot.nox_kg == pytest.approx(sum(e.nox_g for e in per) / 1000, abs=1e-9)
    assert tot.co2_t == pytest.approx(CO2_PER_KG_FUEL * tot.fuel_t, abs=1e-9)
    assert tot.departures == 3 and tot.ground_delay_min == 7.0 and tot.iteration == 3
    assert tot.taxi_out_min == pytest.approx((600 + 900 + 1200) / 60)


def test_aggregate_empty_and_errors():
    assert aggregate_iteration([], FLEET) == EmissionTotals()
    with pytest.raises(KeyError, match="ZZZ"):
        aggregate_iteration([TaxiSpan("F", "ZZZ", 0, 1)], FLEET)
    with pytest.raises(ValueError):
        aggregate_iteration([TaxiSpan("F", "737", 10, 1)], FLEET)


def test_ranking_and_csv():
    a = EmissionTotals(fuel_t=42.01, co2_t=42.01 * CO2_PER_KG_FUEL, iteration=1)
    b = EmissionTotals(fuel_t=40.12, co2_t=40.12 * CO2_PER_KG_FUEL, iteration=13)
    c = EmissionTotals(fuel_t=40.12, co2_t=40.12 * CO2_PER_KG_FUEL, ground_delay_min=5, iteration=2)
    assert [t.iteration for t in rank_iterations([a, c, b])] == [13, 2, 1]
    assert round(b.co2_t, 2) == 126.66 and round(a.co2_t, 2) == 132.63
    buf = io.StringIO()
    write_totals_csv(rank_iterations([a, b]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(TOTALS_COLUMNS)
    assert lines[1].startswith("1,13,") and "126.66" in lines[1]


def test_ranking_stable_on_ties():
    ts = [EmissionTotals(co2_t=1.0, iteration=i) for i in range(5)]
    assert [t.iteration for t in rank_iterations(ts)] == list(range(5))


def test_eqc():
    assert eqc(84, DayPeriod.DAY) == 0.25
    assert eqc(94, "Day") == pytest.approx(2.5)
    assert eqc(84, DayPeriod.NIGHT) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        eqc(84, "Dusk")


@given(st.floats(60, 110))
def test_eqc_decade_law(x):
    assert eqc(x + 10) == pytest.approx(10 * eqc(x), rel=1e-12)
    assert eqc(x + 0.5) > eqc(x)
