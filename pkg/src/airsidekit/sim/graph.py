"""Airfield network: nodes, directed taxi links, runways and priority rules."""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable

KN_TO_MS = 1852.0 / 3600.0
METERS_PER_SLOT = 200.0   # one aircraft per 200 m of taxiway per lane


class NodeKind(str, enum.Enum):
    GATE = "Gate"
    TAXI_JUNCTION = "TaxiJunction"
    RUNWAY_THRESHOLD = "RunwayThreshold"
    DEPARTURE_QUEUE = "DepartureQueue"
    AIRSPACE_FIX = "AirspaceFix"
    HOLDING_STACK = "HoldingStack"


class PriorityRule(str, enum.Enum):
    FCFS = "fcfs"
    ARRIVALS_FIRST = "arrivals_first"
    DEPARTURES_FIRST = "departures_first"


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    kind: NodeKind
    x: float = 0.0
    y: float = 0.0
    stands: int = 1
    concourse: str = ""


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    length_m: float
    speed_limit_kn: float = 20.0
    lane_count: int = 1

    def __post_init__(self):
        if not self.speed_limit_kn > 0:
            raise ValidationError(f"link {self.src}->{self.dst}: speed limit must be positive")
        if not self.length_m > 0 or self.lane_count < 1:
            raise ValidationError(f"link {self.src}->{self.dst}: length and lanes must be positive")

    @property
    def segment(self) -> tuple[str, str]:
        """Undirected key; opposite links share pavement."""
        return (self.src, self.dst) if self.src < self.dst else (self.dst, self.src)

    @property
    def capacity(self) -> int:
        return self.lane_count * max(1, int(self.length_m // METERS_PER_SLOT))


@dataclass(frozen=True)
class Runway:
    id: str
    threshold: str     # RunwayThreshold node
    exit: str          # first taxi node after landing
    queue: str         # DepartureQueue node feeding take-offs
    fix: str = ""      # AirspaceFix where arrivals are injected


@dataclass
class AirfieldGraph:
    nodes: dict[str, Node]
    links: list[Link]
    runways: list[Runway]
    priority: dict[str, PriorityRule] = field(default_factory=dict)
    default_priority: PriorityRule = PriorityRule.ARRIVALS_FIRST

    def __post_init__(self):
        self._out: dict[str, list[Link]] = {n: [] for n in self.nodes}
        for l in self.links:
            if l.src not in self.nodes or l.dst not in self.nodes:
                raise ValidationError(f"link {l.src}->{l.dst} references an unknown node")
            self._out[l.src].append(l)
        for r in self.runways:
            for nid in (r.threshold, r.exit, r.queue):
                if nid not in self.nodes:
                    raise ValidationError(f"runway {r.id} references unknown node {nid}")
            if r.fix and r.fix not in self.nodes:
                raise ValidationError(f"runway {r.id} references unknown fix {r.fix}")
        self._paths: dict[tuple[str, str], list[Link] | None] = {}

    @property
    def gates(self) -> list[Node]:
        return [n for n in self.nodes.values() if n.kind is NodeKind.GATE]

    def runway(self, rid: str) -> Runway:
        for r in self.runways:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def rule_at(self, node: str) -> PriorityRule:
        return self.priority.get(node, self.default_priority)

    def path(self, src: str, dst: str) -> list[Link] | None:
        """Quickest route at link speed limits (Dijkstra, ties by node id)."""
        key = (src, dst)
        if key in self._paths:
            return self._paths[key]
        dist = {src: 0.0}
        prev: dict[str, Link] = {}
        heap = [(0.0, src)]
        done = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == dst:
                break
            for l in self._out[u]:
                nd = d + l.length_m / (l.speed_limit_kn * KN_TO_MS)
                if nd < dist.get(l.dst, math.inf) - 1e-12:
                    dist[l.dst] = nd
                    prev[l.dst] = l
                    heapq.heappush(heap, (nd, l.dst))
        if dst not in done:
            self._paths[key] = None
            return None
        out = []
        cur = dst
        while cur != src:
            l = prev[cur]
            out.append(l)
            cur = l.src
        out.reverse()
        self._paths[key] = out
        return out

    def validate(self, arrival_runways: Iterable[str], departure_runways: Iterable[str]) -> None:
        gates = self.gates
        if not gates:
            raise ValidationError("airfield has no gates")
        for rid in arrival_runways:
            r = self.runway(rid)
            for g in gates:
                if self.path(r.exit, g.id) is None:
                    raise ValidationError(f"gate {g.id} is unreachable from runway {rid} exit {r.exit}")
        for rid in departure_runways:
            r = self.runway(rid)
            for g in gates:
                if self.path(g.id, r.queue) is None:
                    raise ValidationError(f"gate {g.id} cannot reach departure queue {r.queue} of runway {rid}")

    # -- JSON ---------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n.id, "kind": n.kind.value, "x": n.x, "y": n.y, "stands": n.stands,
                       "concourse": n.concourse} for n in self.nodes.values()],
            "links": [{"from": l.src, "to": l.dst, "length_m": l.length_m, "speed_limit_kn": l.speed_limit_kn,
                       "lane_count": l.lane_count} for l in self.links],
            "runways": [{"id": r.id, "threshold": r.threshold, "exit": r.exit, "queue": r.queue, "fix": r.fix}
                        for r in self.runways],
            "priority": {k: v.value for k, v in self.priority.items()},
            "default_priority": self.default_priority.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AirfieldGraph":
        nodes = {}
        for n in d["nodes"]:
            nodes[n["id"]] = Node(n["id"], NodeKind(n["kind"]), float(n.get("x", 0.0)), float(n.get("y", 0.0)),
                                  int(n.get("stands", 1)), n.get("concourse", ""))
        links = []
        for l in d["links"]:
            lk = Link(l["from"], l["to"], float(l["length_m"]), float(l.get("speed_limit_kn", 20.0)),
                      int(l.get("lane_count", 1)))
            links.append(lk)
            if l.get("bidirectional"):
                links.append(Link(lk.dst, lk.src, lk.length_m, lk.speed_limit_kn, lk.lane_count))
        runways = [Runway(r["id"], r["threshold"], r["exit"], r["queue"], r.get("fix", "")) for r in d["runways"]]
        prio = {k: PriorityRule(v) for k, v in d.get("priority", {}).items()}
        return cls(nodes, links, runways, prio, PriorityRule(d.get("default_priority", "arrivals_first")))
