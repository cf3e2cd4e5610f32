from __future__ import annotations

import random

import pytest

from ovensched import (
    Instance,
    Job,
    Machine,
    check_feasibility,
    exact_solve,
    gac_plus,
    generate_instance,
    min_clique_cover,
    objective_lb,
)
from ovensched.oracle import BudgetExceeded, Infeasible, OracleLimits

from conftest import EXAMPLE_OBJECTIVE, EXAMPLE_OPTIMAL, tiny_config


def test_min_clique_cover_worked_example():
    assert min_clique_cover([(50, 50, 11), (11, 50, 11), (10, 50, 6)], 20) == (2, 61)


def test_min_clique_cover_disjoint_intervals():
    units = [(1, 2), (4, 5), (7, 8), (10, 11)]
    assert min_clique_cover(units, 3) == (4, 22)


def test_min_clique_cover_matches_gac_plus_randomly():
    rng = random.Random(21)
    for _ in range(120):
        n = rng.randint(1, 7)
        units = []
        for _ in range(n):
            lo = rng.randint(1, 10)
            units.append((lo, rng.randint(lo, 10)))
        capacity = rng.randint(1, 4)
        assert min_clique_cover(units, capacity) == gac_plus(units, capacity)


def test_min_clique_cover_validation():
    with pytest.raises(ValueError):
        min_clique_cover([(1, 2)], 0)
    with pytest.raises(ValueError):
        min_clique_cover([(i, i) for i in range(20)], 2)


def test_exact_solve_golden(example):
    result = exact_solve(example, limits=OracleLimits(max_jobs=10))
    cost = result.cost
    assert (cost.proc_time, cost.tardy, cost.setup_cost) == EXAMPLE_OPTIMAL
    assert cost.objective == pytest.approx(EXAMPLE_OBJECTIVE, abs=1e-12)
    assert check_feasibility(example, result.solution) == []
    assert cost.objective >= objective_lb(example).objective_lb


def test_exact_solve_single_job():
    inst = Instance(
        machines=(Machine(1, 10, 1, ((5, 100),)),),
        jobs=(Job(1, 1, 4, 2, 60, 7, 9, frozenset({1})),),
        attribute_count=1,
        setup_times=((2,),),
        setup_costs=((3,),),
    )
    result = exact_solve(inst)
    batch = result.solution.batches[0][0]
    assert batch.start == 7  # window 5 plus setup 2
    assert result.cost.setup_cost == 3
    assert result.cost.tardy == 0


def test_pruning_neutrality_small():
    for seed in range(10):
        inst = generate_instance(tiny_config(6, 5000 + seed))
        pruned = exact_solve(inst, prune_with_lb=True)
        unpruned = exact_solve(inst, prune_with_lb=False)
        assert pruned.cost == unpruned.cost
        assert pruned.solution == unpruned.solution
        assert pruned.nodes <= unpruned.nodes


def test_permutation_invariance():
    base = generate_instance(tiny_config(6, 77))
    perm = [3, 1, 6, 2, 5, 4]  # new id of old job i+1
    relabeled_jobs = sorted(
        (
            Job(perm[i], j.attribute, j.size, j.release, j.due, j.min_time, j.max_time, j.eligible)
            for i, j in enumerate(base.jobs)
        ),
        key=lambda j: j.id,
    )
    relabeled = Instance(
        base.machines, tuple(relabeled_jobs), base.attribute_count,
        base.setup_times, base.setup_costs,
    )
    a = exact_solve(base)
    b = exact_solve(relabeled)
    assert a.cost.objective == pytest.approx(b.cost.objective, abs=1e-12)
    assert (a.cost.proc_time, a.cost.tardy, a.cost.setup_cost) == (
        b.cost.proc_time, b.cost.tardy, b.cost.setup_cost,
    )


def test_oracle_respects_limits(example):
    with pytest.raises(BudgetExceeded):
        exact_solve(example)  # 10 jobs > default max_jobs 9
    with pytest.raises(BudgetExceeded):
        exact_solve(example, limits=OracleLimits(max_jobs=10, node_budget=50))
    with pytest.raises(BudgetExceeded):
        exact_solve(example, limits=OracleLimits(max_jobs=10, max_time_horizon=100))


def test_oracle_infeasible():
    # two jobs forced on one machine whose lone window only fits one of them
    inst = Instance(
        machines=(Machine(1, 4, 1, ((0, 15),)),),
        jobs=(
            Job(1, 1, 3, 0, 99, 10, 10, frozenset({1})),
            Job(2, 1, 3, 0, 99, 10, 10, frozenset({1})),
        ),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    with pytest.raises(Infeasible):
        exact_solve(inst)


def test_monotonicity_of_cover_under_removal():
    rng = random.Random(33)
    for _ in range(40):
        n = rng.randint(2, 7)
        units = []
        for _ in range(n):
            lo = rng.randint(1, 10)
            units.append((lo, rng.randint(lo, 10)))
        capacity = rng.randint(1, 4)
        count, proc = min_clique_cover(units, capacity)
        drop = rng.randrange(n)
        sub_count, sub_proc = min_clique_cover(units[:drop] + units[drop + 1 :], capacity)
        assert sub_count <= count
        assert sub_proc <= proc
