"""Skill vehicle routing with time windows for pushback trucks.

Node 0 is the depot; customers are 1..n-1 (one gate each). Every vehicle
leaves the depot at time 0, serves its route in order and returns. Service
at node ``i`` takes ``op[i]``; a vehicle may wait for a window to open.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

TIME_TOL = 1e-6


class SkillMode(str, enum.Enum):
    LEVELS = "Levels"   # vehicle serves any node with skill <= its own
    SETS = "Sets"       # vehicle serves only nodes of exactly its skill


class InfeasibleError(ValueError):
    pass


def _enc(x):
    # open-ended windows are written as null to keep the file strict JSON
    return None if not np.isfinite(x) else float(x)


@dataclass
class PushbackInstance:
    skill: np.ndarray            # (n,) required skill per node, depot entry ignored
    vehicle_skill: np.ndarray    # (m,)
    cost: np.ndarray             # (m, n, n) per-vehicle arc cost
    travel: np.ndarray           # (n, n)
    op: np.ndarray               # (n,)
    tw_a: np.ndarray             # (n,)
    tw_b: np.ndarray             # (n,)
    mode: SkillMode = SkillMode.LEVELS
    positions: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.skill = np.asarray(self.skill, dtype=np.int64)
        self.vehicle_skill = np.asarray(self.vehicle_skill, dtype=np.int64)
        self.travel = np.ascontiguousarray(self.travel, dtype=np.float64)
        n = self.travel.shape[0]
        cost = np.asarray(self.cost, dtype=np.float64)
        if cost.ndim == 2:
            cost = np.broadcast_to(cost, (len(self.vehicle_skill), n, n))
        self.cost = np.ascontiguousarray(cost)
        self.op = np.ascontiguousarray(self.op, dtype=np.float64)
        self.tw_a = np.ascontiguousarray(self.tw_a, dtype=np.float64)
        self.tw_b = np.ascontiguousarray(self.tw_b, dtype=np.float64)
        self.mode = SkillMode(self.mode)
        if self.travel.shape != (n, n) or self.cost.shape != (len(self.vehicle_skill), n, n):
            raise ValueError("cost/travel matrix shapes do not match the node count")
        for name in ("skill", "op", "tw_a", "tw_b"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have one entry per node")
        if np.any(self.tw_a > self.tw_b):
            raise ValueError("time windows need a <= b")
        if np.any(self.cost < 0) or np.any(self.travel < 0) or np.any(self.op < 0):
            raise ValueError("costs, travel and operation times must be non-negative")

    @property
    def n_nodes(self) -> int:
        return self.travel.shape[0]

    @property
    def n_vehicles(self) -> int:
        return len(self.vehicle_skill)

    @property
    def customers(self) -> range:
        return range(1, self.n_nodes)

    def qualified(self, p: int, j: int) -> bool:
        if self.mode is SkillMode.LEVELS:
            return bool(self.vehicle_skill[p] >= self.skill[j])
        return bool(self.vehicle_skill[p] == self.skill[j])

    def unqualified_nodes(self) -> list[int]:
        return [j for j in self.customers if not any(self.qualified(p, j) for p in range(self.n_vehicles))]

    def with_mode(self, mode: SkillMode) -> "PushbackInstance":
        return PushbackInstance(self.skill, self.vehicle_skill, self.cost, self.travel, self.op,
                                self.tw_a, self.tw_b, mode, self.positions, self.name)

    # -- JSON -------------------------------------------------------------

    def to_dict(self) -> dict:
        shared = all(np.array_equal(self.cost[0], self.cost[p]) for p in range(self.n_vehicles))
        d = {
            "name": self.name,
            "mode": self.mode.value,
            "depot": 0,
            "nodes": [
                {"id": i, "skill": int(self.skill[i]), "op": float(self.op[i]),
                 "window": [float(self.tw_a[i]), _enc(self.tw_b[i])]}
                for i in range(self.n_nodes)
            ],
            "vehicles": [{"id": p, "skill": int(s)} for p, s in enumerate(self.vehicle_skill)],
            "travel": self.travel.tolist(),
        }
        if shared and self.n_vehicles:
            d["cost"] = self.cost[0].tolist()
        else:
            d["cost_per_vehicle"] = self.cost.tolist()
        if self.positions is not None:
            d["positions"] = np.asarray(self.positions).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PushbackInstance":
        nodes = sorted(d["nodes"], key=lambda x: x["id"])
        if [x["id"] for x in nodes] != list(range(len(nodes))):
            raise ValueError("node ids must be 0..n-1 with the depot at 0")
        travel = np.asarray(d["travel"], dtype=float)
        if "cost_per_vehicle" in d:
            cost = np.asarray(d["cost_per_vehicle"], dtype=float)
        else:
            cost = np.asarray(d.get("cost", d["travel"]), dtype=float)
        pos = d.get("positions")
        return cls(
            skill=[x.get("skill", 0) for x in nodes],
            vehicle_skill=[v["skill"] for v in sorted(d["vehicles"], key=lambda v: v["id"])],
            cost=cost,
            travel=travel,
            op=[x.get("op", 0.0) for x in nodes],
            tw_a=[x["window"][0] for x in nodes],
            tw_b=[np.inf if x["window"][1] is None else x["window"][1] for x in nodes],
            mode=d.get("mode", SkillMode.LEVELS.value),
            positions=None if pos is None else np.asarray(pos, dtype=float),
            name=d.get("name", ""),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "PushbackInstance":
        return cls.from_dict(json.loads(text))


@dataclass
class Solution:
    routes: list[list[int]]
    starts: list[list[float]]
    cost: float
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    elapsed_s: float = 0.0

    @property
    def n_routes(self) -> int:
        return sum(1 for r in self.routes if r)

    @property
    def n_jobs(self) -> int:
        return sum(len(r) for r in self.routes)

    def to_dict(self) -> dict:
        return {
            "cost": self.cost,
            "routes": [{"vehicle": p, "nodes": [int(x) for x in r], "starts": [float(x) for x in s]}
                       for p, (r, s) in enumerate(zip(self.routes, self.starts))],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Solution":
        rs = sorted(d["routes"], key=lambda r: r["vehicle"])
        return cls([list(r["nodes"]) for r in rs], [list(r.get("starts", [])) for r in rs], float(d["cost"]))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "Solution":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# independent auditor (plain Python on purpose; shares no code with solvers)


@dataclass(frozen=True)
class Violation:
    kind: str       # coverage | skill | window | temporal | cost | shape
    vehicle: int | None
    node: int | None
    detail: str


def check_feasible(inst: PushbackInstance, sol: Solution, cost_tol: float = 1e-6) -> list[Violation]:
    """Return every violated constraint; an empty list means feasible."""
    out: list[Violation] = []
    if len(sol.routes) != inst.n_vehicles:
        out.append(Violation("shape", None, None,
                             f"{len(sol.routes)} routes for {inst.n_vehicles} vehicles"))
        return out
    seen: dict[int, int] = {}
    total = 0.0
    for p, route in enumerate(sol.routes):
        starts = sol.starts[p] if p < len(sol.starts) else []
        if len(starts) != len(route):
            out.append(Violation("shape", p, None, "one start time per visited node required"))
            starts = None
        prev, t_prev = 0, None
        for k, j in enumerate(route):
            j = int(j)
            if not 1 <= j < inst.n_nodes:
                out.append(Violation("shape", p, j, "node id out of range or depot inside route"))
                continue
            seen[j] = seen.get(j, 0) + 1
            if not inst.qualified(p, j):
                out.append(Violation("skill", p, j,
                                     f"vehicle skill {inst.vehicle_skill[p]} cannot serve node skill {inst.skill[j]}"))
            total += float(inst.cost[p, prev, j])
            if starts is not None:
                w = float(starts[k])
                if w < inst.tw_a[j] - TIME_TOL or w > inst.tw_b[j] + TIME_TOL:
                    out.append(Violation("window", p, j, f"start {w:g} outside [{inst.tw_a[j]:g}, {inst.tw_b[j]:g}]"))
                ready = (float(inst.travel[0, j]) if t_prev is None
                         else t_prev + float(inst.op[prev]) + float(inst.travel[prev, j]))
                if w < ready - TIME_TOL:
                    out.append(Violation("temporal", p, j,
                                         f"start {w:g} before predecessor {prev} allows ({ready:g})"))
                t_prev = w
            prev = j
        if route:
            total += float(inst.cost[p, prev, 0])
    for j in inst.customers:
        c = seen.get(j, 0)
        if c != 1:
            out.append(Violation("coverage", None, j, f"served {c} times"))
    if abs(total - sol.cost) > cost_tol * max(1.0, abs(total)):
        out.append(Violation("cost", None, None, f"reported {sol.cost:g}, recomputed {total:g}"))
    return out
