from __future__ import annotations

import pytest

from ovensched import (
    Instance,
    Job,
    Machine,
    batch_lb_capacity,
    batch_lb_eligibility,
    classify_large_small,
    gac_plus,
    generate_instance,
    objective_lb,
    proc_lb_eligibility,
    tardy_lb,
)
from ovensched.bounds import NoFeasiblePlacement, attribute_bounds, combine_overall, setup_cost_lb

from conftest import EXAMPLE_OBJECTIVE_LB, tiny_config


def test_classify_large_small(example):
    large2, small2 = classify_large_small(example, 2)
    assert large2 == frozenset({1, 2, 3, 6})
    assert small2 == frozenset({5, 7, 8})
    large1, small1 = classify_large_small(example, 1)
    assert large1 == frozenset()
    assert small1 == frozenset({4, 9, 10})


def test_lone_job_counts_as_large():
    inst = Instance(
        machines=(Machine(1, 20, 1, ((0, 100),)),),
        jobs=(Job(1, 1, 1, 0, 50, 5, 10, frozenset({1})),),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    large, small = classify_large_small(inst, 1)
    assert large == frozenset({1}) and small == frozenset()


def test_batch_lb_capacity(example):
    eq1_a1, eq2_a1 = batch_lb_capacity(example, 1)
    eq1_a2, eq2_a2 = batch_lb_capacity(example, 2)
    assert eq1_a1 == 1  # ceil(20 / 20)
    assert eq1_a1 + eq1_a2 == 6
    assert eq2_a2 == 6
    assert eq1_a1 <= eq2_a1 and eq1_a2 <= eq2_a2


def test_batch_lb_capacity_no_jobs():
    inst = Instance(
        machines=(Machine(1, 5, 1, ((0, 10),)),),
        jobs=(),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    assert batch_lb_capacity(inst, 1) == (0, 0)


def test_batch_lb_eligibility(example):
    total1, forced1, spill1 = batch_lb_eligibility(example, 1)
    assert forced1 == {1: 1, 2: 1}  # job 4 on machine 1, job 9 on machine 2
    assert spill1 == 0
    assert total1 == 2
    total2, forced2, spill2 = batch_lb_eligibility(example, 2)
    assert forced2 == {1: 1}  # job 8
    assert spill2 == 1  # jobs 5 and 7 exceed the residual room of 7
    assert total2 == 2


def test_batch_lb_eligibility_single_spill():
    # all small jobs multi-eligible, total size within the largest capacity
    inst = Instance(
        machines=(Machine(1, 10, 1, ((0, 200),)), Machine(2, 12, 1, ((0, 200),))),
        jobs=(
            Job(1, 1, 3, 0, 100, 5, 10, frozenset({1, 2})),
            Job(2, 1, 4, 0, 100, 5, 10, frozenset({1, 2})),
        ),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    total, forced, spill = batch_lb_eligibility(inst, 1)
    assert forced == {} and spill == 1 and total == 1


def test_proc_lb_eligibility(example):
    assert proc_lb_eligibility(example, 1) == 38  # 19 + 19
    assert proc_lb_eligibility(example, 2) == 60  # 50 forced + 10 spill
    # no small jobs -> 0
    inst = Instance(
        machines=(Machine(1, 5, 1, ((0, 100),)),),
        jobs=(Job(1, 1, 5, 0, 50, 7, 9, frozenset({1})),),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    assert proc_lb_eligibility(inst, 1) == 0


def test_proc_lb_longest_small_job_replacement():
    # spill batch would run for 7, but some small job needs at least 30:
    # the bound lifts the largest summed term to 30
    inst = Instance(
        machines=(Machine(1, 10, 1, ((0, 500),)), Machine(2, 10, 1, ((0, 500),))),
        jobs=(
            Job(1, 1, 4, 0, 400, 5, 40, frozenset({1})),
            Job(2, 1, 4, 0, 400, 30, 40, frozenset({1, 2})),
            Job(3, 1, 4, 0, 400, 7, 40, frozenset({1, 2})),
        ),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    total, forced, spill = batch_lb_eligibility(inst, 1)
    assert forced == {1: 1} and spill == 1 and total == 2
    # naive terms are [5, 7]; 7 is replaced by the overall largest 30
    assert proc_lb_eligibility(inst, 1) == 35
    # shrink the multi-eligible jobs so they fit the forced leftover: the
    # single term 5 is lifted to 30
    jobs = (
        inst.jobs[0],
        Job(2, 1, 3, 0, 400, 30, 40, frozenset({1, 2})),
        Job(3, 1, 3, 0, 400, 7, 40, frozenset({1, 2})),
    )
    inst2 = Instance(inst.machines, jobs, 1, inst.setup_times, inst.setup_costs)
    assert batch_lb_eligibility(inst2, 1).spill == 0
    assert proc_lb_eligibility(inst2, 1) == 30


def test_gac_plus_examples():
    # worked example, attribute 2: 11x[50,50], 11x[11,50], 6x[10,50], cap 20
    assert gac_plus([(50, 50, 11), (11, 50, 11), (10, 50, 6)], 20) == (2, 61)
    # attribute 1: 2x[19,19], 4x[19,19], 14x[11,50], cap 20
    assert gac_plus([(19, 19, 2), (19, 19, 4), (11, 50, 14)], 20) == (1, 19)
    # mutually incompatible unit jobs: one batch each
    units = [(1, 1), (3, 3), (5, 5), (7, 7)]
    assert gac_plus(units, 3) == (4, 16)
    assert gac_plus([], 5) == (0, 0)
    with pytest.raises(ValueError):
        gac_plus([(1, 2)], 0)
    with pytest.raises(ValueError):
        gac_plus([(3, 1)], 2)


def test_combine_overall(example):
    details = [attribute_bounds(example, r) for r in (1, 2)]
    batches, proc = combine_overall(details)
    assert batches == 8
    assert proc == 158
    assert combine_overall([]) == (0, 0)


def test_setup_cost_lb(example):
    bound = setup_cost_lb(example, {1: 2, 2: 6}, 8)
    assert bound.before == 60  # 2*6 + 6*8
    assert bound.after == 68  # 3*6 + 5*10
    assert bound.best == 68


def test_setup_cost_lb_degenerate():
    inst = Instance(
        machines=(Machine(1, 5, 1, ((0, 100),)),),
        jobs=(Job(1, 1, 2, 0, 50, 5, 9, frozenset({1})),),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((5,),),
    )
    bound = setup_cost_lb(inst, {1: 1}, 1)
    assert bound == (5, 5, 5)
    zero = Instance(inst.machines, inst.jobs, 1, inst.setup_times, ((0,),))
    assert setup_cost_lb(zero, {1: 1}, 1).best == 0


def test_tardy_lb(example):
    count, flagged = tardy_lb(example)
    assert count == 7
    assert flagged == frozenset({1, 2, 3, 4, 6, 9, 10})
    assert 5 not in flagged  # completes by 49 on machine 1, due 55
    # the setup-free variant can only be weaker
    weak_count, weak_flagged = tardy_lb(example, include_min_setup=False)
    assert weak_flagged <= flagged
    assert weak_count <= count


def test_tardy_lb_huge_due_never_flagged(example):
    jobs = list(example.jobs)
    jobs[0] = Job(1, 2, 18, 2, 10**9, 11, 11, frozenset({1, 2}))
    inst = Instance(example.machines, jobs, 2, example.setup_times, example.setup_costs)
    _, flagged = tardy_lb(inst)
    assert 1 not in flagged


def test_tardy_lb_no_placement_raises():
    inst = Instance(
        machines=(Machine(1, 5, 1, ((0, 3),)),),  # window too short for min_time 10
        jobs=(Job(1, 1, 2, 0, 50, 10, 20, frozenset({1})),),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    with pytest.raises(NoFeasiblePlacement):
        tardy_lb(inst)


def test_objective_lb_golden(example):
    report = objective_lb(example)
    assert report.batches_lb == 8
    assert report.proc_lb == 158
    assert report.setup_lb == 68
    assert (report.setup_lb_before, report.setup_lb_after) == (60, 68)
    assert report.tardy_lb == 7
    assert report.objective_lb == pytest.approx(EXAMPLE_OBJECTIVE_LB, abs=1e-12)
    assert report.wall_time >= 0


def test_objective_lb_single_job():
    inst = Instance(
        machines=(Machine(1, 5, 1, ((0, 100),)),),
        jobs=(Job(1, 1, 2, 0, 90, 7, 9, frozenset({1})),),
        attribute_count=1,
        setup_times=((0,),),
        setup_costs=((0,),),
    )
    report = objective_lb(inst)
    assert report.batches_lb == 1
    assert report.proc_lb == 7
    assert report.tardy_lb == 0
    w_sum = 4 + 100 + 1
    assert report.objective_lb == pytest.approx((4 * 7 / 7) / w_sum)


def test_dominance_chain_on_random_instances():
    for seed in range(30):
        inst = generate_instance(tiny_config(9, seed + 1000))
        for attribute in range(1, inst.attribute_count + 1):
            detail = attribute_bounds(inst, attribute)
            eq1, eq2 = batch_lb_capacity(inst, attribute)
            assert eq1 <= eq2
            assert eq2 <= len(detail.large_jobs) + detail.b_elig_small
            assert eq1 <= len(detail.large_jobs) + detail.b_gac_small
            assert detail.b_best >= detail.b_capacity
            assert detail.p_best >= 0


def test_gac_plus_tie_break_is_input_order():
    # equal min_times: the earlier entry labels the batch and is filled first
    a = gac_plus([(5, 5, 2), (5, 9, 2)], 2)
    b = gac_plus([(5, 9, 2), (5, 5, 2)], 2)
    assert a == b == (2, 10)
