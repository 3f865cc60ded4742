import io
import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from airsidekit.capacity import capacity_per_h
from airsidekit.core import Direction, Flight, default_fleet
from airsidekit.sim import (
    AirfieldGraph, EventLog, Link, Mode, Node, NodeKind, Runway, Scenario, ValidationError, apply_growth,
    audit_separation, bundled_scenario, clone_flights, delay_breakdown, design_day, growth_sweep, iteration_rng,
    run_iteration, scenario_from_dict, scenario_to_dict, simulate, twin_parallel_graph,
)
from airsidekit.sim.log import CAUSES

FLEET = default_fleet()
D0 = datetime(2024, 6, 14, tzinfo=timezone.utc)


def fl(fid, direction, h, m=0, s=0, code="A320", carrier="AB"):
    other = "FRA"
    o, d = (other, "XXX") if direction is Direction.ARRIVAL else ("XXX", other)
    return Flight(fid, carrier, o, d, direction, FLEET[code], D0 + timedelta(hours=h, minutes=m, seconds=s))


def mini_graph(stands=50, ab_len=200.0):
    n = {}
    for nid, kind in (("FIX", NodeKind.AIRSPACE_FIX), ("TH", NodeKind.RUNWAY_THRESHOLD), ("EX", NodeKind.TAXI_JUNCTION),
                      ("A", NodeKind.TAXI_JUNCTION), ("B", NodeKind.TAXI_JUNCTION), ("Q", NodeKind.DEPARTURE_QUEUE)):
        n[nid] = Node(nid, kind)
    n["G"] = Node("G", NodeKind.GATE, stands=stands)
    links = [Link("EX", "A", 200.0), Link("A", "B", ab_len), Link("B", "A", ab_len), Link("B", "G", 200.0),
             Link("G", "B", 200.0), Link("A", "Q", 200.0)]
    return AirfieldGraph(n, links, [Runway("R", "TH", "EX", "Q", "FIX")])


def mini(schedule, **kw):
    base = dict(injection_jitter_min=(0.0, 0.0), departure_jitter_min=(0.0, 0.0), iterations=1, seed=1,
                approach_speed_kmh=(250.0, 250.0), departure_speed_kmh=(250.0, 250.0))
    base.update(kw)
    graph = base.pop("graph", None) or mini_graph()
    return Scenario(schedule=schedule, graph=graph, **base)


# -- airfield graph -------------------------------------------------------------------------


def test_graph_roundtrip_and_paths():
    g = twin_parallel_graph()
    back = AirfieldGraph.from_dict(json.loads(json.dumps(g.to_dict())))
    assert back.to_dict() == g.to_dict()
    p = g.path("EXR1", "G3")
    assert p[0].src == "EXR1" and p[-1].dst == "G3"
    g.validate(["R1"], ["R2"])


def test_graph_validation_errors():
    with pytest.raises(ValidationError):
        AirfieldGraph({"A": Node("A", NodeKind.GATE)}, [Link("A", "Z", 10.0)], [])
    g = mini_graph()
    g.links.remove(next(l for l in g.links if l.dst == "G"))
    g = AirfieldGraph(g.nodes, g.links, g.runways)
    with pytest.raises(ValidationError, match="unreachable"):
        g.validate(["R"], [])
    with pytest.raises(ValidationError):
        Link("A", "B", 0.0)


def test_scenario_json_roundtrip(tmp_path):
    sc = mini([fl("A1", Direction.ARRIVAL, 8), fl("D1", Direction.DEPARTURE, 9)], mode=Mode.SEGREGATED)
    path = tmp_path / "sc.json"
    path.write_text(json.dumps(scenario_to_dict(sc)))
    back = scenario_from_dict(json.loads(path.read_text()))
    assert back.schedule == sc.schedule
    assert back.graph.to_dict() == sc.graph.to_dict()
    assert scenario_to_dict(back) == scenario_to_dict(sc)


def test_scenario_validation():
    with pytest.raises(ValueError):
        mini([], clone_factors=(1.0,) * 23)
    with pytest.raises(ValueError):
        mini([], approach_speed_kmh=(300.0, 250.0))


# -- single-flight mechanics ------------------------------------------------------------------


def test_lone_arrival_is_unimpeded():
    res = run_iteration(mini([fl("A1", Direction.ARRIVAL, 8)]), 0)
    rec = res.log.flights["A1"]
    assert rec.completed and rec.total_delay_min == 0
    kinds = [e.kind for e in res.log.of_flight("A1")]
    assert kinds[0] == "injection" and kinds[-1] == "gate_on" and "touchdown" in kinds
    assert res.log.times("touchdown")["A1"] == pytest.approx(8 * 3600)


def test_empty_schedule():
    res = run_iteration(mini([]), 0)
    assert res.completed and res.daily_flights == 0 and res.mean_delay_min == 0


def test_stand_shortage_gives_gate_delay():
    sc = mini([fl("A1", Direction.ARRIVAL, 8), fl("A2", Direction.ARRIVAL, 8, 5)], graph=mini_graph(stands=1))
    res = run_iteration(sc, 0)
    a2 = res.log.flights["A2"]
    assert 20 <= a2.delay_min("gate") <= 30
    on = res.log.times("gate_on")
    assert on["A2"] >= on["A1"] + 30 * 60


def test_linked_departure_waits_for_turnaround():
    sc = mini([fl("A1", Direction.ARRIVAL, 10), fl("D1", Direction.DEPARTURE, 10, 15)])
    res = run_iteration(sc, 0)
    on = res.log.times("gate_on")["A1"]
    push = res.log.times("pushback_start")["D1"]
    assert push == pytest.approx(on + 15 * 60)
    assert res.log.flights["D1"].delay_min("gate") > 0


def test_head_on_deadlock_is_detected():
    # arrival holds A->B and needs B->G; departure pushes back G->B and needs B->A
    sc = mini([fl("A1", Direction.ARRIVAL, 8), fl("D1", Direction.DEPARTURE, 8, 1)], gridlock_threshold_min=10)
    res = run_iteration(sc, 0)
    assert res.gridlocked and not res.completed
    assert all(r.iteration == 0 for r in simulate(sc))


def test_opening_case_spacing():
    # slow trailer behind a fast leader needs more than the bare separation at threshold
    sc = mini([fl("A1", Direction.ARRIVAL, 8), fl("A2", Direction.ARRIVAL, 8, 0, 1)],
              approach_speed_kmh=(200.0, 300.0))
    for i in range(5):
        res = run_iteration(sc, i)
        assert audit_separation(res.log, sc.separation, sc.common_path_nm) == []


def test_auditor_flags_constructed_violation():
    res = run_iteration(mini([fl("A1", Direction.ARRIVAL, 8), fl("A2", Direction.ARRIVAL, 8, 10)]), 0)
    log = res.log
    t1 = log.times("touchdown")["A1"]
    forged = EventLog([e._replace(time_s=t1 + 30.0) if (e.kind == "touchdown" and e.flight_id == "A2") else e
                       for e in log.events], log.flights)
    bad = audit_separation(forged, mini([]).separation, 10.0)
    assert len(bad) == 1 and bad[0].kind == "arrival_distance_m" and bad[0].trailing == "A2"


# -- saturation -------------------------------------------------------------------------------


def _arrival_wave(n, start_h=8, span_min=60):
    return [fl(f"A{k:03d}", Direction.ARRIVAL, start_h, 0, int(k * span_min * 60 / n)) for k in range(n)]


def test_single_runway_arrival_plateau():
    sc = mini(_arrival_wave(120), graph=mini_graph(stands=500))
    res = run_iteration(sc, 0)
    ceiling = capacity_per_h(3, 250)
    assert res.completed
    assert ceiling - 2 <= res.peak_hour_count <= ceiling
    assert audit_separation(res.log, sc.separation, sc.common_path_nm) == []


def test_arrival_congestion_is_airspace_delay():
    sc = mini(_arrival_wave(120), graph=mini_graph(stands=500), iterations=2)
    br = delay_breakdown(simulate(sc))
    assert br.share("A", "airspace") > 90
    assert br.share("D", "airspace") is None


# -- bundled scenario --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def bundled():
    return bundled_scenario()


@pytest.fixture(scope="module")
def bundled_runs(bundled):
    return [run_iteration(bundled, i) for i in range(2)]


def test_bundled_scenario_shape(bundled):
    assert len(bundled.schedule) == 635
    assert bundled.mode is Mode.SEGREGATED
    assert bundled.arrival_runways == ("R1",) and bundled.departure_runways == ("R2",)


def test_determinism(bundled, bundled_runs):
    again = run_iteration(bundled, 0)
    assert again.log.digest() == bundled_runs[0].log.digest()
    assert bundled_runs[1].log.digest() != bundled_runs[0].log.digest()


def test_delay_conservation(bundled_runs):
    for res in bundled_runs:
        assert res.completed
        for r in res.log.flights.values():
            assert (r.terminal_s - r.unimpeded_s) / 60 == pytest.approx(r.total_delay_min, abs=1e-6)
            assert all(v >= -1e-9 for v in r.delays_s.values())


def test_bundled_audit_and_counts(bundled, bundled_runs):
    for res in bundled_runs:
        assert audit_separation(res.log, bundled.separation, bundled.common_path_nm) == []
        assert sum(res.hourly_counts) == res.daily_flights == 635
        assert set(res.cause_totals_min) == {"A", "D"} and set(res.cause_totals_min["A"]) == set(CAUSES)


def test_mixed_mode_audit(bundled):
    sc = bundled.with_(mode=Mode.MIXED_PARALLEL, arrival_runways=("R1", "R2"), departure_runways=("R1", "R2"))
    res = run_iteration(sc, 0, growth_pct=100)
    assert res.completed
    assert audit_separation(res.log, sc.separation, sc.common_path_nm, sc.mixed_gap_buffer_s) == []
    used = {e.where for e in res.log.events if e.kind in ("touchdown", "takeoff")}
    assert used == {"R1", "R2"}


def test_event_csv_and_taxi_spans(bundled_runs):
    log = bundled_runs[0].log
    buf = io.StringIO()
    log.write_csv(buf)
    assert buf.getvalue().splitlines()[0] == "time_s,flight_id,event,where"
    spans = log.taxi_out_spans()
    assert len(spans) == sum(1 for r in log.flights.values() if r.direction is Direction.DEPARTURE)
    assert all(s.seconds >= 180 for s in spans)


def test_workers_do_not_change_results():
    sc = mini(_arrival_wave(30) + [fl(f"D{k}", Direction.DEPARTURE, 9, k) for k in range(10)],
              graph=mini_graph(stands=100), iterations=3, injection_jitter_min=(0.0, 10.0))
    one = [r.log.digest() for r in simulate(sc, workers=1)]
    two = [r.log.digest() for r in simulate(sc, workers=2)]
    assert one == two


# -- growth ------------------------------------------------------------------------------------


def test_growth_counts():
    sc = Scenario(schedule=design_day(0), graph=twin_parallel_graph())
    n = len(sc.schedule)
    grown = [len(apply_growth(sc, iteration_rng(5, i), 100)) for i in range(20)]
    assert np.mean(grown) == pytest.approx(2 * n, rel=0.03)
    thin = [len(apply_growth(sc, iteration_rng(5, i), -20)) for i in range(20)]
    assert np.mean(thin) == pytest.approx(0.8 * n, rel=0.03)
    assert apply_growth(sc, iteration_rng(5, 0), 0) == sc.schedule
    assert apply_growth(sc, iteration_rng(5, 0), None) == sc.schedule


def test_clones_are_fresh_flights():
    base = design_day(0)[:50]
    out = clone_flights(base, (1.0,) * 24, np.random.default_rng(0), jitter_min=7.5)
    clones = out[50:]
    assert len(clones) == 50
    assert len({f.flight_id for f in out}) == 100
    for c in clones:
        src = next(f for f in base if c.flight_id.startswith(f.flight_id + "~"))
        assert abs((c.sched_time - src.sched_time).total_seconds()) <= 7.5 * 60
        assert c.tail == "" and c.direction is src.direction
    with pytest.raises(ValueError):
        clone_flights(base, (-1.0,) * 24, np.random.default_rng(0))


def test_sweep_guards():
    sc = mini([fl("A1", Direction.ARRIVAL, 8)])
    with pytest.raises(ValueError):
        growth_sweep(sc, [20, 0])
    with pytest.raises(ValueError):
        delay_breakdown([])
