"""Discrete-event FCFS airside simulation.

Arrivals are injected at an airspace fix, sequenced first come first served
and spaced along a common approach path (overtaking and opening cases both
respected). After landing they taxi to a stand. Departures become ready at
their jittered scheduled time, push back, taxi to the runway queue and take
off under the departure spacing. Times are seconds since midnight (UTC) of
the first schedule day.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from ..capacity import NM_KM
from ..core import Direction, Flight, link_turnarounds, link_turnarounds_by_tail
from .graph import KN_TO_MS, Link, PriorityRule
from .log import CAUSES, EventLog, FlightRecord
from .scenario import Mode, Scenario, TurnaroundMatcher


class GridlockError(RuntimeError):
    pass


@dataclass
class IterationResult:
    iteration: int
    seed_used: tuple[int, int]
    completed: bool
    gridlocked: bool
    demand_flights: int
    daily_flights: int
    hourly_counts: list[int]
    hourly_mean_delay: list[float]
    cause_totals_min: dict
    mean_delay_min: float
    log: EventLog = field(repr=False, default=None)

    @property
    def peak_hour_count(self) -> int:
        return max(self.hourly_counts) if self.hourly_counts else 0

    @property
    def total_delay_min(self) -> float:
        return sum(v for d in self.cause_totals_min.values() for v in d.values())


def iteration_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(i)]))


def day_origin(flights) -> datetime | None:
    ts = [f.sched_time for f in flights if f.sched_time is not None]
    if not ts:
        return None
    d = min(ts).astimezone(timezone.utc).date()
    return datetime(d.year, d.month, d.day, tzinfo=timezone.utc)


# ---------------------------------------------------------------------------


class _Ac:
    __slots__ = ("i", "f", "rec", "path", "k", "link", "wait_since", "wait_cause", "waiting_for",
                 "gate", "runway", "speed_ms", "dep_speed_ms", "linked", "partner_on_gate",
                 "ready_s", "holding_stand", "state")

    def __init__(self, i, f, rec):
        self.i, self.f, self.rec = i, f, rec
        self.path: list[Link] = []
        self.k = 0
        self.link: Link | None = None
        self.wait_since = None
        self.wait_cause = None
        self.waiting_for = None
        self.gate = None
        self.runway = None
        self.speed_ms = 0.0
        self.dep_speed_ms = 0.0
        self.linked = None
        self.partner_on_gate = None
        self.ready_s = None
        self.holding_stand = False
        self.state = "new"


class _Segment:
    __slots__ = ("cap", "occupants", "direction", "waiters")

    def __init__(self, cap):
        self.cap = cap
        self.occupants: list[int] = []
        self.direction = None
        self.waiters: list[int] = []


class _RunwayState:
    __slots__ = ("id", "last_arr", "last_dep", "last_landed", "planned", "queue", "retry_at")

    def __init__(self, rid):
        self.id = rid
        self.last_arr = None     # (touchdown_s, ac index), planned
        self.last_dep = None     # (takeoff_s, ac index)
        self.last_landed = None
        self.planned: list[tuple[float, int]] = []   # future touchdowns
        self.queue: list[int] = []
        self.retry_at = None


class _Sim:
    def __init__(self, sc: Scenario, flights: list[Flight], rng: np.random.Generator):
        self.sc = sc
        self.g = sc.graph
        self.pol = sc.separation
        self.rng = rng
        self.log = EventLog()
        self.heap = []
        self.seq = 0
        self.now = 0.0
        self.gridlocked = False
        self.L_m = sc.common_path_nm * NM_KM * 1000.0
        self.segs = {}
        for l in self.g.links:
            s = self.segs.get(l.segment)
            if s is None:
                self.segs[l.segment] = _Segment(l.capacity)
            else:
                s.cap = max(s.cap, l.capacity)
        self.stands = {g.id: g.stands for g in self.g.gates}
        self.stand_waiters: list[int] = []
        self.runways = {r.id: _RunwayState(r.id) for r in self.g.runways}
        self.mixed = sc.mode is Mode.MIXED_PARALLEL
        origin = day_origin(flights)
        self.acs: list[_Ac] = []
        for i, f in enumerate(flights):
            t = (f.sched_time - origin).total_seconds()
            rec = FlightRecord(f.flight_id, f.direction, f.aircraft.wtc, f.aircraft.code, t)
            self.acs.append(_Ac(i, f, rec))
            self.log.flights[f.flight_id] = rec
        self._link_pairs(flights)

    # -- plumbing -------------------------------------------------------------

    def push(self, t, kind, i=-1, extra=None):
        self.seq += 1
        heapq.heappush(self.heap, (t, self.seq, kind, i, extra))

    def _link_pairs(self, flights):
        arr = [f for f in flights if f.direction is Direction.ARRIVAL]
        dep = [f for f in flights if f.direction is Direction.DEPARTURE]
        matcher = link_turnarounds_by_tail if self.sc.turnaround_matcher is TurnaroundMatcher.TAIL else link_turnarounds
        links = matcher(arr, dep, self.sc.min_turnaround_min)
        idx = {id(f): i for i, f in enumerate(flights)}
        for a, d in links.pairs:
            ia, id_ = idx[id(a)], idx[id(d)]
            self.acs[ia].linked = id_
            self.acs[id_].linked = ia

    def _u(self, lo_hi):
        lo, hi = lo_hi
        return float(self.rng.uniform(lo, hi)) if hi > lo else float(lo)

    def _free_taxi_s(self, path, skip_first=False):
        t = 0.0
        for n, l in enumerate(path):
            if skip_first and n == 0:
                t += self.sc.pushback_s
            else:
                t += l.length_m / (min(l.speed_limit_kn, self.sc.taxi_speed_kn) * KN_TO_MS)
        return t

    # -- setup ---------------------------------------------------------------

    def seed_events(self):
        # draw random numbers in flight order so results do not depend on event order
        for ac in self.acs:
            rec = ac.rec
            if rec.direction is Direction.ARRIVAL:
                jitter = self._u(self.sc.injection_jitter_min) * 60.0
                v = self._u(self.sc.approach_speed_kmh)
                ac.speed_ms = v / 3.6
                rec.speed_kmh = v
                transit = self.L_m / ac.speed_ms
                t_inj = rec.sched_s + jitter - transit
                rec.demand_s = t_inj
                self.push(t_inj, "inject", ac.i)
            else:
                jitter = self._u(self.sc.departure_jitter_min) * 60.0
                v = self._u(self.sc.departure_speed_kmh)
                ac.dep_speed_ms = v / 3.6
                rec.speed_kmh = v
                ac.ready_s = rec.sched_s + jitter
                rec.demand_s = ac.ready_s
                self.push(ac.ready_s, "ready", ac.i)

    # -- arrivals ------------------------------------------------------------

    def _load(self, rs: _RunwayState):
        return len(rs.planned) + len(rs.queue)

    def _pick_runway(self, ids):
        if len(ids) == 1:
            return ids[0]
        return min(ids, key=lambda r: (self._load(self.runways[r]), ids.index(r)))

    def _arrival_gap(self, lead: _Ac, trail: _Ac) -> float:
        d = self.pol.arr_nm(lead.rec.wtc, trail.rec.wtc) * NM_KM * 1000.0
        vi, vj = lead.speed_ms, trail.speed_ms
        gap = d / vj
        if vi > vj:
            gap += self.L_m * (1.0 / vj - 1.0 / vi)
        return gap

    def on_inject(self, ac: _Ac, t):
        rid = self._pick_runway(list(self.sc.arrival_runways))
        rs = self.runways[rid]
        ac.runway = rid
        ac.rec.runway = rid
        unimpeded = t + self.L_m / ac.speed_ms
        land = unimpeded
        if rs.last_arr is not None:
            lt, li = rs.last_arr
            land = max(land, lt + self._arrival_gap(self.acs[li], ac))
        if rs.last_dep is not None:
            land = max(land, rs.last_dep[0] + self.sc.mixed_gap_buffer_s)
        rs.last_arr = (land, ac.i)
        rs.planned.append((land, ac.i))
        ac.rec.delays_s["airspace"] = land - unimpeded
        self.log.add(t, ac.rec.flight_id, "injection", self.g.runway(rid).fix)
        if land > unimpeded + 1e-9:
            self.log.add(t, ac.rec.flight_id, "hold_enter", self.g.runway(rid).fix)
            self.log.add(land - self.L_m / ac.speed_ms, ac.rec.flight_id, "hold_exit", self.g.runway(rid).fix)
        # taxi-in leg is added once a stand is known
        ac.rec.unimpeded_s = unimpeded + self.sc.runway_exit_s
        self.push(land, "touchdown", ac.i)

    def on_touchdown(self, ac: _Ac, t):
        rs = self.runways[ac.runway]
        rs.planned = [(x, i) for x, i in rs.planned if i != ac.i]
        rs.last_landed = (t, ac.i)
        self.log.add(t, ac.rec.flight_id, "touchdown", ac.runway)
        self.push(t + self.sc.runway_exit_s, "exit", ac.i)
        if rs.queue:
            self.try_release(rs, t)

    def _choose_stand(self):
        """Gate with the most free stands, ties by lowest id."""
        best = max(self.stands.values(), default=0)
        if best <= 0:
            return None
        return min(gid for gid, n in self.stands.items() if n == best)

    def on_exit(self, ac: _Ac, t):
        self.log.add(t, ac.rec.flight_id, "runway_exit", self.g.runway(ac.runway).exit)
        gid = self._choose_stand()
        if gid is None:
            ac.wait_since, ac.wait_cause = t, "gate"
            self.stand_waiters.append(ac.i)
            self.log.add(t, ac.rec.flight_id, "stand_wait", self.g.runway(ac.runway).exit)
            return
        self._start_taxi_in(ac, gid, t)

    def _start_taxi_in(self, ac: _Ac, gid, t):
        self.stands[gid] -= 1
        ac.gate = gid
        ac.holding_stand = True
        ac.path = self.g.path(self.g.runway(ac.runway).exit, gid)
        ac.rec.unimpeded_s += self._free_taxi_s(ac.path)
        ac.k = 0
        ac.state = "taxi"
        self.advance(ac, t)

    def _release_stand(self, gid, t):
        self.stands[gid] += 1
        while self.stand_waiters and self.stands[gid] > 0:
            i = self.stand_waiters.pop(0)
            ac = self.acs[i]
            ac.rec.delays_s["gate"] += t - ac.wait_since
            ac.wait_since = None
            self._start_taxi_in(ac, gid, t)

    # -- taxiing -------------------------------------------------------------

    def _can_enter(self, l: Link) -> bool:
        s = self.segs[l.segment]
        if len(s.occupants) >= s.cap:
            return False
        return s.direction is None or s.direction == (l.src, l.dst)

    def advance(self, ac: _Ac, t):
        """Move onto the next link of the path, or finish the taxi."""
        if ac.k >= len(ac.path):
            self._leave_link(ac, t)
            self._arrive(ac, t)
            return
        l = ac.path[ac.k]
        if not self._can_enter(l):
            if ac.wait_since is None:
                ac.wait_since = t
                ac.wait_cause = "gate" if (ac.k == 0 and ac.rec.direction is Direction.DEPARTURE) else "ground"
                ac.waiting_for = l.segment
                self.segs[l.segment].waiters.append(ac.i)
                self.push(t + self.sc.gridlock_threshold_min * 60.0, "gridcheck", ac.i, ac.k)
            return
        if ac.wait_since is not None:
            ac.rec.delays_s[ac.wait_cause] += t - ac.wait_since
            ac.wait_since = None
            ac.waiting_for = None
        old = ac.link
        s = self.segs[l.segment]
        s.occupants.append(ac.i)
        s.direction = (l.src, l.dst)
        ac.link = l
        first_push = ac.k == 0 and ac.rec.direction is Direction.DEPARTURE
        if first_push:
            self.log.add(t, ac.rec.flight_id, "pushback_start", ac.gate)
            self._on_pushback(ac, t)
            dur = self.sc.pushback_s
            self.log.add(t + dur, ac.rec.flight_id, "pushback_end", l.dst)
        else:
            self.log.add(t, ac.rec.flight_id, "link_enter", f"{l.src}>{l.dst}")
            dur = l.length_m / (min(l.speed_limit_kn, self.sc.taxi_speed_kn) * KN_TO_MS)
        ac.k += 1
        if old is not None:
            self._free(old, ac, t)
        self.push(t + dur, "link_end", ac.i)

    def _leave_link(self, ac: _Ac, t):
        if ac.link is not None:
            old = ac.link
            ac.link = None
            self._free(old, ac, t)

    def _free(self, l: Link, ac: _Ac, t):
        s = self.segs[l.segment]
        s.occupants.remove(ac.i)
        if l is not ac.path[0] or ac.rec.direction is Direction.ARRIVAL:
            self.log.add(t, ac.rec.flight_id, "link_exit", f"{l.src}>{l.dst}")
        if not s.occupants:
            s.direction = None
        if s.waiters:
            self._wake(s, l, t)

    def _wake(self, s: _Segment, l: Link, t):
        rule = self.g.rule_at(l.src)

        def key(i):
            a = self.acs[i]
            is_arr = a.rec.direction is Direction.ARRIVAL
            if rule is PriorityRule.ARRIVALS_FIRST:
                pri = 0 if is_arr else 1
            elif rule is PriorityRule.DEPARTURES_FIRST:
                pri = 1 if is_arr else 0
            else:
                pri = 0
            return (pri, a.wait_since, i)

        for i in sorted(s.waiters, key=key):
            a = self.acs[i]
            if i in s.waiters and self._can_enter(a.path[a.k]):
                s.waiters.remove(i)
                self.advance(a, t)

    def on_link_end(self, ac: _Ac, t):
        self.advance(ac, t)

    def _arrive(self, ac: _Ac, t):
        if ac.rec.direction is Direction.ARRIVAL:
            ac.state = "done"
            ac.rec.terminal_s = t
            self.log.add(t, ac.rec.flight_id, "gate_on", ac.gate)
            if ac.linked is not None:
                dep = self.acs[ac.linked]
                dep.partner_on_gate = t
                if dep.state == "wait_inbound":
                    self.push(t + self.sc.min_turnaround_min * 60.0, "ready_inbound", dep.i)
            else:
                self.push(t + self.sc.unlinked_stand_min * 60.0, "stand_free", ac.i)
        else:
            ac.state = "queue"
            rs = self.runways[ac.runway]
            self.log.add(t, ac.rec.flight_id, "queue_enter", self.g.runway(ac.runway).queue)
            ac.wait_since = t
            rs.queue.append(ac.i)
            self.try_release(rs, t)

    # -- departures ----------------------------------------------------------

    def on_ready(self, ac: _Ac, t):
        self.log.add(t, ac.rec.flight_id, "ready", "")
        if ac.linked is not None:
            arr = self.acs[ac.linked]
            ac.gate = arr.gate
            if arr.state != "done" or t < arr.rec.terminal_s + self.sc.min_turnaround_min * 60.0:
                ac.state = "wait_inbound"
                ac.wait_since = t
                ac.wait_cause = "gate"
                if arr.state == "done":
                    self.push(arr.rec.terminal_s + self.sc.min_turnaround_min * 60.0, "ready_inbound", ac.i)
                return
        self._begin_departure(ac, t)

    def on_ready_inbound(self, ac: _Ac, t):
        if ac.state != "wait_inbound":
            return
        arr = self.acs[ac.linked]
        ac.gate = arr.gate
        ac.rec.delays_s["gate"] += t - ac.wait_since
        ac.wait_since = None
        self._begin_departure(ac, t)

    def _begin_departure(self, ac: _Ac, t):
        if ac.gate is None:
            # unlinked departures start from the least busy gate but hold no stand
            best = max(self.stands.values())
            ac.gate = min(gid for gid, n in self.stands.items() if n == best)
        rid = self._pick_runway(list(self.sc.departure_runways))
        ac.runway = rid
        ac.rec.runway = rid
        ac.path = self.g.path(ac.gate, self.g.runway(rid).queue)
        ac.rec.unimpeded_s = ac.ready_s + self._free_taxi_s(ac.path, skip_first=True)
        ac.k = 0
        ac.state = "taxi"
        self.advance(ac, t)

    def _on_pushback(self, ac: _Ac, t):
        if ac.linked is not None:
            arr = self.acs[ac.linked]
            if arr.holding_stand:
                arr.holding_stand = False
                self._release_stand(arr.gate, t)

    def on_stand_free(self, ac: _Ac, t):
        if ac.holding_stand:
            ac.holding_stand = False
            self._release_stand(ac.gate, t)

    def _dep_gap(self, lead: _Ac, trail: _Ac) -> float:
        gap = self.pol.dep_s(lead.rec.wtc, trail.rec.wtc)
        if self.sc.departure_distance_spacing and lead.rec.direction is Direction.DEPARTURE:
            d = self.pol.arr_nm(lead.rec.wtc, trail.rec.wtc) * NM_KM * 1000.0
            gap = max(gap, d / trail.dep_speed_ms)
        return gap

    def try_release(self, rs: _RunwayState, t):
        if not rs.queue:
            return
        ac = self.acs[rs.queue[0]]
        e = t
        if rs.last_dep is not None:
            e = max(e, rs.last_dep[0] + self._dep_gap(self.acs[rs.last_dep[1]], ac))
        if rs.last_landed is not None:
            lx, li = rs.last_landed
            e = max(e, lx + self.pol.dep_s(self.acs[li].rec.wtc, ac.rec.wtc))
        # arrivals keep priority: fit in only ahead of a planned touchdown with buffer to spare
        for x, i in sorted(rs.planned):
            if x - e >= self.sc.mixed_gap_buffer_s:
                break
            e = max(e, x + self.pol.dep_s(self.acs[i].rec.wtc, ac.rec.wtc))
        if e > t + 1e-9:
            if rs.retry_at is None or rs.retry_at > e or rs.retry_at < t:
                rs.retry_at = e
                self.push(e, "retry", -1, rs.id)
            return
        rs.queue.pop(0)
        ac.rec.delays_s["departure_queue"] += t - ac.wait_since
        ac.wait_since = None
        ac.state = "done"
        ac.rec.terminal_s = t
        rs.last_dep = (t, ac.i)
        self.log.add(t, ac.rec.flight_id, "queue_exit", self.g.runway(rs.id).queue)
        self.log.add(t, ac.rec.flight_id, "takeoff", rs.id)
        self.try_release(rs, t)

    # -- gridlock ------------------------------------------------------------

    def on_gridcheck(self, ac: _Ac, t, k):
        if ac.wait_since is None or ac.k != k or ac.waiting_for is None:
            return
        if t - ac.wait_since < self.sc.gridlock_threshold_min * 60.0 - 1e-9:
            return
        if self._in_cycle(ac.i):
            self.gridlocked = True
            return
        self.push(t + 60.0, "gridcheck", ac.i, k)

    def _in_cycle(self, start) -> bool:
        def blockers(i):
            a = self.acs[i]
            if a.waiting_for is None:
                return []
            return [j for j in self.segs[a.waiting_for].occupants if self.acs[j].waiting_for is not None]

        stack = [(start, iter(blockers(start)))]
        on_path = {start}
        seen = set()
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_path.discard(node)
                seen.add(node)
                continue
            if nxt in on_path:
                return True
            if nxt not in seen:
                on_path.add(nxt)
                stack.append((nxt, iter(blockers(nxt))))
        return False

    # -- main loop -----------------------------------------------------------

    def run(self):
        self.seed_events()
        handlers = {
            "inject": self.on_inject, "touchdown": self.on_touchdown, "exit": self.on_exit,
            "link_end": self.on_link_end, "ready": self.on_ready, "ready_inbound": self.on_ready_inbound,
            "stand_free": self.on_stand_free,
        }
        while self.heap and not self.gridlocked:
            t, _, kind, i, extra = heapq.heappop(self.heap)
            self.now = t
            if kind == "retry":
                rs = self.runways[extra]
                if rs.retry_at is not None and abs(rs.retry_at - t) < 1e-9:
                    rs.retry_at = None
                self.try_release(rs, t)
            elif kind == "gridcheck":
                self.on_gridcheck(self.acs[i], t, extra)
            else:
                handlers[kind](self.acs[i], t)
        unfinished = [a for a in self.acs if a.rec.terminal_s is None]
        if unfinished and not self.gridlocked:
            # nothing left to happen yet aircraft remain: circular wait
            self.gridlocked = True
        return self.log


# ---------------------------------------------------------------------------


def _summarize(i, seed, sc: Scenario, flights, log: EventLog, gridlocked: bool) -> IterationResult:
    recs = list(log.flights.values())
    done = [r for r in recs if r.completed]
    runway_t = [e.time_s for e in log.events if e.kind in ("touchdown", "takeoff")]
    nh = max([24] + [int(t // 3600) + 1 for t in runway_t])
    hourly = [0] * nh
    for t in runway_t:
        hourly[int(max(t, 0.0) // 3600)] += 1
    dsum = [0.0] * 24
    dcnt = [0] * 24
    for r in done:
        h = int(r.sched_s // 3600) % 24
        dsum[h] += r.total_delay_min
        dcnt[h] += 1
    causes = {d.value: {c: 0.0 for c in CAUSES} for d in Direction}
    for r in done:
        for c in CAUSES:
            causes[r.direction.value][c] += r.delay_min(c)
    mean = sum(r.total_delay_min for r in done) / len(done) if done else 0.0
    return IterationResult(
        iteration=i, seed_used=(seed, i), completed=not gridlocked, gridlocked=gridlocked,
        demand_flights=len(recs), daily_flights=len(done), hourly_counts=hourly,
        hourly_mean_delay=[dsum[h] / dcnt[h] if dcnt[h] else 0.0 for h in range(24)],
        cause_totals_min=causes, mean_delay_min=mean, log=log,
    )


def validate(sc: Scenario) -> None:
    sc.graph.validate(sc.arrival_runways, sc.departure_runways)
    for f in sc.schedule:
        if f.sched_time is None:
            raise ValueError(f"{f.flight_id}: simulation needs a scheduled time")
    ids = [f.flight_id for f in sc.schedule]
    if len(set(ids)) != len(ids):
        raise ValueError("flight ids must be unique within a scenario")


def run_iteration(sc: Scenario, i: int, growth_pct: float | None = None) -> IterationResult:
    from .growth import apply_growth
    rng = iteration_rng(sc.seed, i)
    flights = apply_growth(sc, rng, growth_pct)
    sim = _Sim(sc, flights, rng)
    if not flights:
        return _summarize(i, sc.seed, sc, flights, sim.log, False)
    log = sim.run()
    return _summarize(i, sc.seed, sc, flights, log, sim.gridlocked)


def _run_one(args):
    sc, i, growth = args
    return run_iteration(sc, i, growth)


def simulate(sc: Scenario, growth_pct: float | None = None, workers: int = 1) -> list[IterationResult]:
    """Run every iteration; results are ordered by iteration index."""
    validate(sc)
    jobs = [(sc, i, growth_pct) for i in range(sc.iterations)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_run_one, jobs))
    else:
        out = [_run_one(j) for j in jobs]
    return sorted(out, key=lambda r: r.iteration)
