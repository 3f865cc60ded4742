"""Random instances: the 17-gate benchmark shape and small test instances."""
from __future__ import annotations

import warnings

import numpy as np

from .model import PushbackInstance, SkillMode

BENCHMARK_VEHICLE_SKILLS = (2, 2, 2, 2, 3, 3)
BENCHMARK_SKILL_CENSUS = (3, 7, 7)     # gates needing skill 1, 2, 3
BENCHMARK_WINDOW_START = (0.0, 100.0)
BENCHMARK_WINDOW_LENGTH = 25.0


def _euclid(pos: np.ndarray) -> np.ndarray:
    d = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(-1))
    return (d + d.T) / 2.0


def generate_paper_instance(seed: int, mode: SkillMode | str = SkillMode.LEVELS, add_skill1_vehicle: bool = False,
                            vehicle_skills=BENCHMARK_VEHICLE_SKILLS, census=BENCHMARK_SKILL_CENSUS,
                            window_start=BENCHMARK_WINDOW_START, window_length: float = BENCHMARK_WINDOW_LENGTH,
                            area: float = 10.0, op_time: float = 2.0) -> PushbackInstance:
    """Gates and depot placed uniformly in a square apron; costs equal travel times.

    Skill census and window law follow the benchmark description. In Sets
    mode skill-1 gates have no matching vehicle; ``add_skill1_vehicle``
    appends one so the instance becomes solvable.
    """
    rng = np.random.default_rng(seed)
    mode = SkillMode(mode)
    n_gates = int(sum(census))
    skills = np.concatenate([np.full(c, s + 1) for s, c in enumerate(census)])
    rng.shuffle(skills)
    pos = rng.uniform(0.0, area, size=(n_gates + 1, 2))
    travel = _euclid(pos)
    a = np.concatenate([[0.0], rng.uniform(window_start[0], window_start[1], n_gates)])
    b = a + window_length
    b[0] = np.inf
    op = np.full(n_gates + 1, op_time)
    op[0] = 0.0
    vs = list(vehicle_skills) + ([1] if add_skill1_vehicle else [])
    inst = PushbackInstance(np.concatenate([[0], skills]), vs, travel, travel, op, a, b, mode, pos,
                            name=f"benchmark-shape seed={seed} mode={mode.value}")
    bad = inst.unqualified_nodes()
    if bad:
        warnings.warn(f"{len(bad)} gates have no qualified vehicle in {mode.value} mode "
                      f"(nodes {bad}); pass add_skill1_vehicle=True to repair", stacklevel=2)
    return inst


def generate_random_instance(seed: int, n_customers: int = 6, n_vehicles: int = 2, max_skill: int = 3,
                             horizon: float = 60.0, window_length: float = 25.0, area: float = 10.0,
                             op_time: float = 2.0, mode: SkillMode | str = SkillMode.LEVELS) -> PushbackInstance:
    """Small instance for oracle comparisons; one vehicle always has the top skill."""
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0.0, area, size=(n_customers + 1, 2))
    travel = _euclid(pos)
    skills = np.concatenate([[0], rng.integers(1, max_skill + 1, n_customers)])
    vskills = rng.integers(1, max_skill + 1, n_vehicles)
    vskills[0] = max_skill
    a = np.concatenate([[0.0], rng.uniform(0.0, horizon, n_customers)])
    b = a + window_length
    b[0] = np.inf
    op = np.full(n_customers + 1, op_time)
    op[0] = 0.0
    return PushbackInstance(skills, vskills, travel, travel, op, a, b, mode, pos, name=f"random seed={seed}")
