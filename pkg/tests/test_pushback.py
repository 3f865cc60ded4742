import warnings

import numpy as np
import pytest

from airsidekit.pushback import (
    InfeasibleError, PushbackInstance, SkillMode, Solution, check_feasible, exact_oracle, generate_paper_instance,
    generate_random_instance, greedy_construct, lns_solve,
)
from airsidekit.pushback.generate import BENCHMARK_SKILL_CENSUS


def tiny(n_cust, skills, vskills, travel=None, a=None, b=None, op=1.0, cost=None, mode=SkillMode.LEVELS):
    n = n_cust + 1
    if travel is None:
        travel = np.full((n, n), 5.0)
        np.fill_diagonal(travel, 0.0)
    a = np.zeros(n) if a is None else np.asarray(a, float)
    b = np.full(n, np.inf) if b is None else np.asarray(b, float)
    ops = np.full(n, op)
    ops[0] = 0
    return PushbackInstance([0] + list(skills), vskills, travel if cost is None else cost, travel, ops, a, b, mode)


def test_depot_only():
    inst = tiny(0, [], [2])
    sol = Solution([[]], [[]], 0.0)
    assert check_feasible(inst, sol) == []
    assert exact_oracle(inst).cost == 0
    assert greedy_construct(inst).cost == 0


def test_skill_violation_named():
    inst = tiny(1, [3], [2])
    bad = Solution([[1]], [[5.0]], 10.0)
    assert any(v.kind == "skill" and v.node == 1 for v in check_feasible(inst, bad))
    with pytest.raises(InfeasibleError):
        greedy_construct(inst)


def test_temporal_violation_named():
    inst = tiny(2, [1, 1], [1])
    bad = Solution([[1, 2]], [[5.0, 6.0]], 15.0)      # 6 < 5 + op 1 + travel 5
    kinds = {v.kind for v in check_feasible(inst, bad)}
    assert "temporal" in kinds
    good = Solution([[1, 2]], [[5.0, 11.0]], 15.0)
    assert check_feasible(inst, good) == []


def test_coverage_and_cost_violations():
    inst = tiny(2, [1, 1], [1])
    sol = Solution([[1]], [[5.0]], 99.0)
    kinds = {v.kind for v in check_feasible(inst, sol)}
    assert kinds == {"coverage", "cost"}


def test_greedy_single_node():
    cost = np.array([[0, 3.0], [4.0, 0]])
    inst = tiny(1, [1], [1], travel=np.array([[0, 5.0], [5.0, 0]]), cost=cost)
    sol = greedy_construct(inst)
    assert sol.routes == [[1]] and sol.cost == 7.0


def test_unreachable_window():
    inst = tiny(1, [1], [1], travel=np.array([[0, 30.0], [30.0, 0]]), a=[0, 0], b=[np.inf, 25])
    with pytest.raises(InfeasibleError, match="node 1"):
        greedy_construct(inst)
    with pytest.raises(InfeasibleError):
        exact_oracle(inst)


def test_oracle_picks_cheaper_vehicle():
    n = 2
    cost = np.zeros((2, n, n))
    cost[0] = [[0, 5], [5, 0]]
    cost[1] = [[0, 3], [4, 0]]
    inst = tiny(1, [1], [1, 1], cost=cost)
    sol = exact_oracle(inst)
    assert sol.cost == 7.0 and sol.routes == [[], [1]]


def test_greedy_within_twice_oracle_on_metric_triangle():
    pos = np.array([[0, 0], [3, 0], [0, 4], [3, 4]], float)
    d = np.sqrt(((pos[:, None] - pos[None]) ** 2).sum(-1))
    inst = tiny(3, [1, 1, 1], [1, 1], travel=d)
    g, o = greedy_construct(inst), exact_oracle(inst)
    assert o.cost <= g.cost <= 2 * o.cost


def test_lns_zero_time_returns_greedy():
    inst = generate_random_instance(3)
    g = greedy_construct(inst)
    sol = lns_solve(inst, time_limit_s=0.0)
    assert sol.cost == g.cost and sol.routes == g.routes


@pytest.mark.parametrize("seed", range(10))
def test_lns_properties(seed):
    inst = generate_random_instance(seed, n_customers=8, n_vehicles=3)
    g = greedy_construct(inst)
    sol = lns_solve(inst, time_limit_s=None, max_iterations=150, seed=seed)
    assert all(b <= a for a, b in zip(sol.trace, sol.trace[1:]))
    assert sol.cost <= g.cost
    assert check_feasible(inst, sol) == []
    again = lns_solve(inst, time_limit_s=None, max_iterations=150, seed=seed)
    assert again.routes == sol.routes and again.cost == sol.cost


@pytest.mark.parametrize("seed", range(15))
def test_oracle_is_lower_bound(seed):
    inst = generate_random_instance(seed, n_customers=5)
    o = exact_oracle(inst)
    assert check_feasible(inst, o) == []
    try:
        greedy_construct(inst)
    except InfeasibleError:
        return      # the insertion heuristic is incomplete; the oracle is not
    assert o.cost <= lns_solve(inst, time_limit_s=None, max_iterations=60).cost + 1e-9


def test_oracle_size_guard():
    with pytest.raises(ValueError):
        exact_oracle(generate_random_instance(0, n_customers=12), max_nodes=9)


def test_benchmark_instance_shape():
    inst = generate_paper_instance(7)
    assert inst.n_nodes - 1 == 17 and inst.n_vehicles == 6
    census = tuple(int(np.sum(inst.skill[1:] == s)) for s in (1, 2, 3))
    assert census == BENCHMARK_SKILL_CENSUS
    assert np.allclose(inst.tw_b[1:] - inst.tw_a[1:], 25.0)


def test_benchmark_instance_sets_mode():
    with pytest.warns(UserWarning, match="no qualified vehicle"):
        inst = generate_paper_instance(1, mode="Sets")
    assert len(inst.unqualified_nodes()) == 3
    with pytest.raises(InfeasibleError):
        greedy_construct(inst)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fixed = generate_paper_instance(1, mode="Sets", add_skill1_vehicle=True)
    assert fixed.unqualified_nodes() == []


def test_instance_and_solution_json_roundtrip():
    inst = generate_paper_instance(2)
    back = PushbackInstance.loads(inst.dumps())
    for name in ("skill", "vehicle_skill", "cost", "travel", "op", "tw_a", "tw_b"):
        assert np.array_equal(getattr(back, name), getattr(inst, name))
    assert back.mode is inst.mode
    sol = lns_solve(inst, time_limit_s=None, max_iterations=20)
    sol2 = Solution.loads(sol.dumps())
    assert check_feasible(back, sol2) == []


def test_instance_validation():
    with pytest.raises(ValueError):
        tiny(1, [1], [1], a=[0, 10], b=[np.inf, 5])
