"""Command-line entry point: ``airsidekit <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 solver or simulation failure. Every run writes ``run_manifest.json`` to
the output directory next to its CSV/JSON results.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
import time
import warnings
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .analytics import (DELAY_COST_EUR_PER_MIN, cumulative_diagram, delay_cost_eur, fit_delay_curve,
                        gilbo_envelope, practical_capacity, punctuality, write_histogram_csv)
from .capacity import (TrafficMix, capacity_per_h, headway_table_row, mix_index,
                       sequence_separation)
from .core import (Direction, IngestionError, WtcClass, build_rotations, default_airports, default_fleet,
                   parse_fleet, parse_schedule)
from .econ import (DISTANCE_EXPONENT, break_even_bracket, distance_cost, efficiency_gains, parse_panel,
                   parse_pso_network, profitability_envelope, pso_average_cost, pso_breakeven_cost,
                   pso_lambda_bisect, pso_lambda_solve, pso_residual, subsidy_per_pax, write_envelope_csv,
                   write_subsidy_csv)
from .emissions import CO2_PER_KG_FUEL, aggregate_iteration, rank_iterations, write_totals_csv
from .netstruct import cindex_report, networks_from_flights, propagation, write_cindex_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FAILURE = 0, 1, 2, 3
OUT_ENV = "AIRSIDEKIT_OUT"
DEFAULT_STEPS = "-20,0,20,40,60,80,100,120,140,160"


class DataError(Exception):
    pass


class RunFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# output helpers


class Output:
    def __init__(self, args):
        self.dir = Path(args.out or os.environ.get(OUT_ENV) or "airsidekit_out")
        self.fmt = args.format
        self.files: list[str] = []

    def open(self, name):
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return open(self.dir / name, "w", newline="")

    def json(self, name, obj):
        with self.open(name) as f:
            json.dump(obj, f, indent=1, sort_keys=True, default=_json_default)
            f.write("\n")

    def table(self, stem, header, rows):
        """Write rows as ``stem.csv`` or ``stem.json`` depending on --format."""
        if self.fmt == "json":
            self.json(f"{stem}.json", [dict(zip(header, r)) for r in rows])
        else:
            with self.open(f"{stem}.csv") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)


def _clean(x):
    """NaN and inf become null so outputs stay strict JSON."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _fleet(args):
    if getattr(args, "fleet", None):
        return parse_fleet(io.StringIO(_read(args.fleet)))
    return default_fleet()


def _schedule(path, fleet, strict=True):
    res = parse_schedule(io.StringIO(_read(path)), fleet)
    for e in res.errors:
        print(f"{path}:{e.line}: {e.message}", file=sys.stderr)
    if res.errors and strict:
        raise DataError(f"{len(res.errors)} bad schedule row(s) in {path}")
    return res.flights


# ---------------------------------------------------------------------------
# capacity


def cmd_capacity(args, out: Output):
    if args.what == "headway":
        row = headway_table_row(args.sep_nm, args.speed_kmh)
        print(f"headway {row.headway_s} s / capacity {row.capacity_per_h} per h "
              f"({args.sep_nm:g} NM at {args.speed_kmh:g} km/h)")
        out.table("capacity", ["sep_nm", "speed_kmh", "headway_s", "capacity_per_h"],
                  [[args.sep_nm, args.speed_kmh, row.headway_s, row.capacity_per_h]])
    elif args.what == "table":
        seps = [float(x) for x in args.seps.split(",")]
        speeds = [float(x) for x in args.speeds.split(",")]
        rows = []
        for s in seps:
            for v in speeds:
                r = headway_table_row(s, v)
                rows.append([s, v, r.headway_s, r.capacity_per_h])
                print(f"{s:>5g} NM {v:>5g} km/h  {r.headway_s:>4} s  {r.capacity_per_h:>3} per h")
        out.table("capacity", ["sep_nm", "speed_kmh", "headway_s", "capacity_per_h"], rows)
    elif args.what == "mix":
        mi = mix_index(TrafficMix(args.heavy_pct, args.medium_pct, 100.0 - args.heavy_pct - args.medium_pct))
        print(f"mix index {mi:g}")
        out.json("mix_index.json", {"heavy_pct": args.heavy_pct, "medium_pct": args.medium_pct, "mix_index": mi})
    elif args.what == "sequence":
        classes = [WtcClass.parse(c) for c in args.classes.replace(",", "")]
        total, avg = sequence_separation(classes)
        cap = capacity_per_h(avg, args.speed_kmh) if avg is not None else None
        print(f"sequence length {total:g} NM" + (f", average {avg:g} NM, capacity {cap} per h at "
                                                 f"{args.speed_kmh:g} km/h" if avg is not None else ""))
        out.json("sequence.json", {"classes": [c.value for c in classes], "total_nm": total,
                                   "average_nm": avg, "capacity_per_h": cap})


# ---------------------------------------------------------------------------
# analyze: punctuality, cumulative diagram, Gilbo envelope


def cmd_analyze(args, out: Output):
    fleet = _fleet(args)
    flights = _schedule(args.schedule, fleet)
    timed = [f for f in flights if f.actual_time is not None]
    if not timed:
        raise DataError("analysis needs flights with actual times")
    p = punctuality([f.delay_min for f in timed], args.threshold_min, args.clamp_negative)
    total_delay = float(sum(max(f.delay_min, 0.0) for f in timed))
    summary = {"flights": len(timed), "pct_on_time": p.pct_on_time, "mean_delay_min": p.mean_delay,
               "threshold_min": args.threshold_min, "total_positive_delay_min": total_delay,
               "delay_cost_eur": delay_cost_eur(total_delay, args.cost_per_min)}
    print(f"{len(timed)} flights, {p.pct_on_time:.1f}% on time (< {args.threshold_min:g} min), "
          f"mean delay {p.mean_delay:.2f} min, delay cost EUR {summary['delay_cost_eur']:,.0f}")
    t0 = min(f.sched_time for f in timed)
    demand = [(f.sched_time - t0).total_seconds() / 60.0 for f in timed]
    # an early movement is served when demanded, it cannot leave the queue before joining it
    served = [max(s, (f.actual_time - t0).total_seconds() / 60.0) for s, f in zip(demand, timed)]
    cd = cumulative_diagram(demand, served)
    summary["queue_area_flight_min"] = cd.area_between()
    with out.open("histogram.csv") as f:
        write_histogram_csv(p, f)
    with out.open("cumulative.csv") as f:
        cd.write_csv(f)
    hours = Counter()
    for fl in timed:
        h = fl.actual_time.replace(minute=0, second=0, microsecond=0)
        hours[(h, fl.direction)] += 1
    points = sorted({h for h, _ in hours})
    env = gilbo_envelope([(hours[(h, Direction.ARRIVAL)], hours[(h, Direction.DEPARTURE)]) for h in points])
    summary["gilbo_frontier"] = env.frontier
    summary["balanced_capacity_per_h"] = env.balanced_capacity()
    with out.open("gilbo.csv") as f:
        env.write_csv(f)
    out.json("analysis.json", summary)


# ---------------------------------------------------------------------------
# simulation


def _scenario(args):
    from .sim import Mode, bundled_scenario, load_scenario
    try:
        sc = load_scenario(args.scenario) if args.scenario else bundled_scenario()
    except (OSError, KeyError, ValueError, IngestionError) as exc:
        raise DataError(f"scenario: {exc}") from None
    kw = {}
    if args.schedule:
        kw["schedule"] = _schedule(args.schedule, _fleet(args))
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.iterations is not None:
        kw["iterations"] = args.iterations
    if args.mode:
        kw["mode"] = Mode(args.mode)
        ids = tuple(r.id for r in sc.graph.runways)
        if kw["mode"] is Mode.MIXED_PARALLEL:
            kw["arrival_runways"] = kw["departure_runways"] = ids
        else:
            kw["arrival_runways"], kw["departure_runways"] = ids[:1], ids[-1:]
    for flag, field in (("los_min", "los_threshold_min"), ("turnaround_min", "min_turnaround_min"),
                        ("gridlock_min", "gridlock_threshold_min"), ("pushback_s", "pushback_s")):
        v = getattr(args, flag, None)
        if v is not None:
            kw[field] = v
    try:
        return sc.with_(**kw) if kw else sc
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _run_sim(sc, growth, workers):
    from .sim import ValidationError, simulate
    try:
        return simulate(sc, growth_pct=growth, workers=workers)
    except (ValidationError, ValueError) as exc:
        raise DataError(f"scenario validation: {exc}") from None


def cmd_simulate(args, out: Output):
    from .sim import CAUSES, audit_separation, delay_breakdown
    sc = _scenario(args)
    results = _run_sim(sc, args.growth, args.workers)
    ok = [r for r in results if not r.gridlocked]
    rows = []
    for r in results:
        c = r.cause_totals_min
        rows.append([r.iteration, int(r.gridlocked), r.demand_flights, r.daily_flights,
                     round(r.mean_delay_min, 2), r.peak_hour_count]
                    + [round(c[d.value][k], 2) for d in Direction for k in CAUSES])
    out.table("iterations", ["iteration", "gridlocked", "demand_flights", "flights", "mean_delay_min",
                             "peak_hour_movements"] + [f"{d.value}_{k}_min" for d in Direction for k in CAUSES], rows)
    violations = 0
    buffer = sc.mixed_gap_buffer_s if sc.mode.value == "MixedParallel" else None
    for r in ok:
        violations += len(audit_separation(r.log, sc.separation, sc.common_path_nm, buffer))
    if args.events and results:
        r0 = results[0]
        with out.open("events_iter0.csv") as f:
            r0.log.write_csv(f)
        with out.open("flights_iter0.csv") as f:
            r0.log.write_flights_csv(f)
    summary = {
        "scenario": sc.name, "seed": sc.seed, "iterations": len(results), "gridlocked": len(results) - len(ok),
        "growth_pct": args.growth, "mode": sc.mode.value,
        "mean_delay_min": round(float(np.mean([r.mean_delay_min for r in ok])), 2) if ok else None,
        "daily_flights": float(np.mean([r.daily_flights for r in ok])) if ok else None,
        "separation_violations": violations,
        "digests": [r.log.digest() for r in results],
    }
    if ok:
        bd = delay_breakdown(ok)
        summary["delay_shares_pct"] = {d: (None if v is None else {k: round(x, 2) for k, x in v.items()})
                                       for d, v in bd.shares_pct.items()}
    out.json("summary.json", summary)
    if results[0].demand_flights == 0:
        print("empty schedule: no movements, zero delay")
    else:
        print(f"{len(ok)}/{len(results)} iterations gridlock-free, mean delay "
              f"{summary['mean_delay_min']} min over {summary['daily_flights']} flights")
    if not ok:
        raise RunFailure("every iteration gridlocked")


def cmd_sweep(args, out: Output):
    from .sim import growth_sweep, ultimate_throughput, write_sweep_csv, write_sweep_json
    sc = _scenario(args)
    try:
        steps = [float(x) for x in args.steps.split(",")]
    except ValueError:
        raise DataError(f"bad --steps {args.steps!r}") from None
    try:
        sweep = growth_sweep(sc, steps, workers=args.workers)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    with out.open("sweep.json" if args.format == "json" else "sweep.csv") as f:
        (write_sweep_json if args.format == "json" else write_sweep_csv)(sweep, f)
    ok = [s for s in sweep if not s.saturated]
    res = {"steps": steps, "ultimate_throughput_per_h": ultimate_throughput(sweep), "los_min": sc.los_threshold_min}
    for s in sweep:
        print(f"{s.growth_pct:+6.0f}%  {s.daily_flights:7.1f} flights  {s.avg_delay_min:7.2f} min  "
              f"peak {s.peak_hour_throughput:5.1f}/h  {'saturated' if s.saturated else ''}")
    if len(ok) >= 2:
        fit = fit_delay_curve([(s.daily_flights, s.avg_delay_min) for s in ok])
        res.update(fit_a=fit.a, fit_b=fit.b, fit_r2=fit.r2,
                   practical_capacity_flights=practical_capacity(fit, sc.los_threshold_min))
        print(f"delay = {fit.a:.4g} exp({fit.b:.4g} x), r2 {fit.r2:.3f}; practical capacity "
              f"{res['practical_capacity_flights']:.0f} flights at {sc.los_threshold_min:g} min")
    out.json("fit.json", _clean(res))
    if not ok:
        raise RunFailure("every growth step saturated")


def cmd_emissions(args, out: Output):
    sc = _scenario(args)
    fleet = _fleet(args)
    results = _run_sim(sc, args.growth, args.workers)
    totals = [aggregate_iteration(r.log, fleet, r.iteration, args.co2_factor) for r in results if not r.gridlocked]
    if not totals:
        raise RunFailure("every iteration gridlocked")
    ranked = rank_iterations(totals)
    with out.open("emissions.csv") as f:
        write_totals_csv(ranked, f)
    best, worst = ranked[0], ranked[-1]
    print(f"CO2 {best.co2_t:.2f} t (iteration {best.iteration}) .. {worst.co2_t:.2f} t "
          f"(iteration {worst.iteration}) over {len(ranked)} iterations")


# ---------------------------------------------------------------------------
# pushback routing


def cmd_pushback(args, out: Output):
    from .pushback import (InfeasibleError, PushbackInstance, SkillMode, check_feasible, exact_oracle, generate_paper_instance,
                           generate_random_instance, greedy_construct, lns_solve)
    seed = 0 if args.seed is None else args.seed
    if args.instance:
        try:
            inst = PushbackInstance.loads(_read(args.instance))
        except (ValueError, KeyError) as exc:
            raise DataError(f"instance: {exc}") from None
    elif args.generate == "random":
        inst = generate_random_instance(seed)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            inst = generate_paper_instance(seed, SkillMode.LEVELS, add_skill1_vehicle=args.add_skill1_vehicle)
    if args.mode:
        inst = inst.with_mode(SkillMode(args.mode))
    bad = inst.unqualified_nodes()
    if bad:
        raise DataError(f"nodes {bad} have no qualified vehicle in {inst.mode.value} mode")
    with out.open("instance.json") as f:
        f.write(inst.dumps())
    try:
        if args.exact:
            sol = exact_oracle(inst)
        else:
            sol = lns_solve(inst, destroy_fraction=args.destroy_fraction, time_limit_s=args.time_limit_s,
                            seed=seed, max_iterations=args.max_iterations)
    except InfeasibleError as exc:
        raise RunFailure(f"solver failed: {exc}") from None
    except ValueError as exc:       # e.g. instance too large for the exact oracle
        raise DataError(str(exc)) from None
    try:
        greedy_cost = greedy_construct(inst).cost
    except InfeasibleError:
        greedy_cost = None          # the oracle can solve instances greedy insertion cannot
    viol = check_feasible(inst, sol)
    with out.open("solution.json") as f:
        f.write(sol.dumps())
    out.json("pushback_summary.json", {"cost": sol.cost, "greedy_cost": greedy_cost, "routes": sol.n_routes,
                                       "jobs": sol.n_jobs, "iterations": sol.iterations,
                                       "mode": inst.mode.value, "violations": [v.detail for v in viol]})
    if not args.exact:
        out.table("trace", ["iteration", "best_cost"], [[i, c] for i, c in enumerate(sol.trace)])
    gtxt = "n/a" if greedy_cost is None else f"{greedy_cost:.2f}"
    print(f"{inst.mode.value}: cost {sol.cost:.2f} (greedy {gtxt}), {sol.n_routes} routes, "
          f"{sol.n_jobs} jobs, {len(viol)} violations")
    if viol:
        raise RunFailure("returned solution fails the feasibility audit")


# ---------------------------------------------------------------------------
# economics and network structure


def cmd_econ_envelope(args, out: Output):
    try:
        panel = parse_panel(io.StringIO(_read(args.panel)))
        env = profitability_envelope(panel, args.unit)
    except (ValueError, KeyError) as exc:
        raise DataError(str(exc)) from None
    with out.open("envelope.csv") as f:
        write_envelope_csv(env, f)
    bracket = break_even_bracket(env)
    gains, total = efficiency_gains(env)
    out.table("gains", ["airport", "year", "gain"], [[g.airport, g.year, round(g.gain, 2)] for g in gains])
    out.json("envelope_summary.json", {"unit": args.unit, "points": len(env), "break_even_bracket": bracket,
                                       "total_efficiency_gain": total})
    print(f"{len(env)} points; break-even between {bracket[0]:,.0f} and {bracket[1]:,.0f}" if bracket
          else f"{len(env)} points; no break-even crossing")


def cmd_econ_pso(args, out: Output):
    try:
        net = parse_pso_network(io.StringIO(_read(args.network)), default_airports())
    except ValueError as exc:
        raise DataError(str(exc)) from None
    res = {"routes": len(net.routes), "revenue": net.revenue_total, "rpk": net.rpk_total,
           "breakeven_crpk": pso_breakeven_cost(net)}
    print(f"{len(net.routes)} routes, RPK {net.rpk_total:,.0f}, break-even CRPK {res['breakeven_crpk']:.4f}")
    flat = None
    if args.total_cost is not None:
        flat = pso_average_cost(net, args.total_cost)
        res["average_crpk"] = flat
        res["residual_at_average"] = pso_residual(net, flat)
        print(f"average CRPK {flat:.4f}")
    if args.crpk is not None:
        flat = args.crpk
        res["residual_at_crpk"] = pso_residual(net, flat)
        print(f"residual at CRPK {flat:g}: {res['residual_at_crpk']:,.0f}")
    cost_fn = flat
    if args.closed_form or args.bisect_check:
        if args.target is None:
            raise DataError("--target (network residual to hit) is required to solve for lambda")
        lam = pso_lambda_solve(net, args.target, args.exponent)
        res["lambda_closed_form"] = lam
        print(f"lambda (closed form) {lam:.12g}")
        if args.bisect_check:
            lb = pso_lambda_bisect(net, args.target, args.exponent)
            res["lambda_bisection"] = lb
            print(f"lambda (bisection)   {lb:.12g}")
            if abs(lb - lam) > 1e-9 * max(1.0, abs(lam)):
                raise RunFailure("closed form and bisection disagree")
        cost_fn = distance_cost(lam, args.exponent)
    if cost_fn is not None:
        with out.open("subsidy.csv") as f:
            write_subsidy_csv(subsidy_per_pax(net, cost_fn), f, args.layout)
    out.json("pso.json", res)


def cmd_cindex(args, out: Output):
    flights = _schedule(args.schedule, _fleet(args), strict=not args.skip_bad_rows)
    nets = networks_from_flights(flights, directed=not args.undirected)
    try:
        rows = cindex_report(nets)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    with out.open("cindex.csv") as f:
        write_cindex_csv(rows, f)
    for r in rows:
        cls = "" if r.network_class is None else r.network_class.value
        print(f"{r.carrier} {r.period}: N={r.n} Cindex={r.cindex:.2f} {cls}")
    if args.propagation:
        rots, _ = build_rotations(flights)
        recs = propagation(rots)
        out.table("propagation", ["tail", "leg", "flight_id", "inbound_delay_min", "own_delay_min"],
                  [[p.tail, p.leg_index, p.flight_id, p.inbound_delay_min, p.own_arrival_delay_min]
                   for p in recs])


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: scenario seed, else 0)")
    common.add_argument("--iterations", type=int, default=None, help="simulation iterations (default: scenario)")
    common.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV} or ./airsidekit_out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="tabular output format")
    common.add_argument("--fleet", default=None, help="fleet CSV (default: bundled fleet table)")

    sim_opts = argparse.ArgumentParser(add_help=False)
    sim_opts.add_argument("--scenario", default=None, help="scenario JSON (default: bundled twin-parallel day)")
    sim_opts.add_argument("--schedule", default=None, help="replace the scenario schedule with this CSV")
    sim_opts.add_argument("--mode", choices=("Segregated", "MixedParallel"), default=None)
    sim_opts.add_argument("--workers", type=int, default=1, help="parallel iteration workers")
    sim_opts.add_argument("--los-min", type=float, default=None, help="level-of-service delay threshold (5)")
    sim_opts.add_argument("--turnaround-min", type=float, default=None, help="minimum turnaround (15)")
    sim_opts.add_argument("--gridlock-min", type=float, default=None, help="gridlock wait threshold (60)")
    sim_opts.add_argument("--pushback-s", type=float, default=None, help="pushback duration (180)")

    p = _Parser(prog="airsidekit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"airsidekit {__version__} ({_kernels.BACKEND})")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("capacity", parents=[common], help="runway headway, capacity and mix index")
    cs = c.add_subparsers(dest="what", required=True, parser_class=_Parser)
    h = cs.add_parser("headway", parents=[common])
    h.add_argument("--sep-nm", type=float, required=True)
    h.add_argument("--speed-kmh", type=float, required=True)
    t = cs.add_parser("table", parents=[common])
    t.add_argument("--seps", default="2.5,3,4,5,6")
    t.add_argument("--speeds", default="250,275,300")
    m = cs.add_parser("mix", parents=[common])
    m.add_argument("--heavy-pct", type=float, required=True)
    m.add_argument("--medium-pct", type=float, required=True)
    q = cs.add_parser("sequence", parents=[common])
    q.add_argument("--classes", required=True, help="e.g. HLHLHL")
    q.add_argument("--speed-kmh", type=float, default=250.0)

    a = sub.add_parser("analyze", parents=[common], help="punctuality, cumulative diagram, Gilbo envelope")
    a.add_argument("--schedule", required=True, help="schedule CSV with actual times")
    a.add_argument("--threshold-min", type=float, default=15.0, help="on-time threshold (15)")
    a.add_argument("--cost-per-min", type=float, default=DELAY_COST_EUR_PER_MIN, help="delay cost EUR/min (42)")
    a.add_argument("--clamp-negative", action="store_true", help="treat early movements as zero delay")

    s = sub.add_parser("simulate", parents=[common, sim_opts], help="run the airside simulation")
    s.add_argument("--growth", type=float, default=None, help="traffic growth percent (default: baseline)")
    s.add_argument("--events", action="store_true", help="also write the event log of iteration 0")

    w = sub.add_parser("sweep", parents=[common, sim_opts], help="growth sweep and delay-curve fit")
    w.add_argument("--steps", default=DEFAULT_STEPS, help=f"growth percents (default {DEFAULT_STEPS})")

    e = sub.add_parser("emissions", parents=[common, sim_opts], help="taxi-out emissions per iteration")
    e.add_argument("--growth", type=float, default=None)
    e.add_argument("--co2-factor", type=float, default=CO2_PER_KG_FUEL, help="kg CO2 per kg fuel (3.157)")

    b = sub.add_parser("pushback", parents=[common], help="skill VRP with time windows for pushback trucks")
    src = b.add_mutually_exclusive_group()
    src.add_argument("--instance", default=None, help="instance JSON")
    src.add_argument("--generate", choices=("benchmark", "random"), default="benchmark")
    b.add_argument("--mode", choices=("Levels", "Sets"), default=None)
    b.add_argument("--add-skill1-vehicle", action="store_true", help="generated instance: add a skill-1 truck")
    b.add_argument("--time-limit-s", type=float, default=2.0)
    b.add_argument("--max-iterations", type=int, default=None)
    b.add_argument("--destroy-fraction", type=float, default=0.25)
    b.add_argument("--exact", action="store_true", help="exhaustive oracle (small instances only)")

    ev = sub.add_parser("econ-envelope", parents=[common], help="profitability envelope and break-even")
    ev.add_argument("--panel", required=True, help="CSV airport,year,pax,cargo_kg,ebit")
    ev.add_argument("--unit", choices=("PAX", "WLU"), default="PAX")

    ps = sub.add_parser("econ-pso", parents=[common], help="PSO network subsidy calculus")
    ps.add_argument("--network", required=True, help="CSV origin,destination,revenue,pax[,distance_km]")
    ps.add_argument("--total-cost", type=float, default=None, help="network operating cost")
    ps.add_argument("--crpk", type=float, default=None, help="flat cost per RPK")
    ps.add_argument("--target", type=float, default=None, help="network residual for the lambda solve")
    ps.add_argument("--exponent", type=float, default=DISTANCE_EXPONENT, help="distance exponent (0.36)")
    ps.add_argument("--closed-form", action="store_true")
    ps.add_argument("--bisect-check", action="store_true")
    ps.add_argument("--layout", choices=("long", "matrix"), default="long")

    ci = sub.add_parser("cindex", parents=[common], help="carrier network concentration")
    ci.add_argument("--schedule", required=True)
    ci.add_argument("--undirected", action="store_true")
    ci.add_argument("--propagation", action="store_true", help="also write previous-leg delays per rotation")
    ci.add_argument("--skip-bad-rows", action="store_true")
    return p


COMMANDS = {
    "capacity": cmd_capacity, "analyze": cmd_analyze, "simulate": cmd_simulate, "sweep": cmd_sweep,
    "emissions": cmd_emissions, "pushback": cmd_pushback, "econ-envelope": cmd_econ_envelope,
    "econ-pso": cmd_econ_pso, "cindex": cmd_cindex,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(args)
    t0 = time.perf_counter()
    code, message = EXIT_OK, None
    try:
        COMMANDS[args.command](args, out)
    except (DataError, IngestionError) as exc:
        code, message = EXIT_DATA, str(exc)
    except RunFailure as exc:
        code, message = EXIT_FAILURE, str(exc)
    except ValueError as exc:
        code, message = EXIT_DATA, str(exc)
    if message:
        print(f"airsidekit {args.command}: {message}", file=sys.stderr)
    manifest = {
        "command": args.command, "argv": argv, "exit_code": code, "error": message,
        "seed": getattr(args, "seed", None), "iterations": getattr(args, "iterations", None),
        "inputs": {k: v for k, v in vars(args).items()
                   if k in ("scenario", "schedule", "fleet", "instance", "panel", "network") and v},
        "outputs": out.files, "wall_time_s": round(time.perf_counter() - t0, 4),
        "versions": {"airsidekit": __version__, "python": platform.python_version(), "numpy": np.__version__,
                     "backend": _kernels.BACKEND},
    }
    try:
        out.json("run_manifest.json", manifest)
    except OSError as exc:
        print(f"airsidekit: cannot write manifest: {exc}", file=sys.stderr)
        code = code or EXIT_DATA
    return code


if __name__ == "__main__":
    sys.exit(main())
