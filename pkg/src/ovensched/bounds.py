"""Fast problem-specific lower bounds on the optimal schedule cost.

Per attribute, the number of batches and their cumulative processing time
are bounded along two independent routes: a machine-eligibility argument
(jobs tied to a single machine force batches there) and a processing-time
compatibility argument (a greedy clique cover of the unit-size relaxation).
The better of the two is kept per attribute. Setup-cost and tardy-job
bounds build on top, and everything is aggregated into a bound on the
normalized objective.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .model import (
    Instance,
    ObjectiveWeights,
    earliest_solo_completion,
)


class NoFeasiblePlacement(Exception):
    """A job fits in no availability window of any eligible machine."""

    def __init__(self, job_id: int):
        self.job_id = job_id
        super().__init__(f"job {job_id} fits in no availability window")


@dataclass(frozen=True)
class AttributeBoundDetail:
    """Batch-count and processing-time bounds for one attribute."""

    attribute: int
    large_jobs: frozenset[int]
    small_jobs: frozenset[int]
    b_capacity: int
    b_large_small: int
    b_elig_small: int
    b_gac_small: int
    p_large: int
    p_elig_small: int
    p_gac_small: int

    @property
    def b_best(self) -> int:
        return len(self.large_jobs) + max(self.b_elig_small, self.b_gac_small)

    @property
    def p_best(self) -> int:
        return self.p_large + max(self.p_elig_small, self.p_gac_small)


@dataclass(frozen=True)
class BoundReport:
    """All lower bounds of an instance plus the aggregated objective bound."""

    per_attribute: tuple[AttributeBoundDetail, ...]
    batches_lb: int
    proc_lb: int
    setup_lb: int
    setup_lb_before: int
    setup_lb_after: int
    tardy_lb: int
    tardy_jobs: frozenset[int]
    objective_lb: float
    wall_time: float


class EligibilityBound(NamedTuple):
    total: int
    forced: dict[int, int]
    spill: int


class SetupCostBound(NamedTuple):
    best: int
    before: int
    after: int


def classify_large_small(
    instance: Instance, attribute: int
) -> tuple[frozenset[int], frozenset[int]]:
    """Split the attribute's jobs into large (can never share a batch) and small.

    A job is large when, on every machine it may use, adding any other job of
    the same attribute would exceed the capacity. A lone job of an attribute
    counts as large (the condition is vacuous).
    """
    jobs = instance.jobs_with_attribute(attribute)
    sizes = sorted(j.size for j in jobs)
    large = set()
    for j in jobs:
        cap = max(instance.machine(m).capacity for m in j.eligible)
        # smallest size among the *other* jobs of the attribute
        if len(jobs) == 1:
            smallest_other = None
        elif j.size == sizes[0] and sizes.count(j.size) == 1:
            smallest_other = sizes[1]
        else:
            smallest_other = sizes[0]
        if smallest_other is None or j.size + smallest_other > cap:
            large.add(j.id)
    small = {j.id for j in jobs} - large
    return frozenset(large), frozenset(small)


def batch_lb_capacity(instance: Instance, attribute: int) -> tuple[int, int]:
    """Capacity-based batch-count bounds: plain and with large jobs set aside."""
    jobs = instance.jobs_with_attribute(attribute)
    if not jobs:
        return 0, 0
    cap = instance.max_capacity
    plain = math.ceil(sum(j.size for j in jobs) / cap)
    large, small = classify_large_small(instance, attribute)
    small_total = sum(instance.job(j).size for j in small)
    refined = len(large) + math.ceil(small_total / cap)
    return plain, refined


def batch_lb_eligibility(instance: Instance, attribute: int) -> EligibilityBound:
    """Batch-count bound for small jobs from single-machine eligibility.

    Jobs eligible on exactly one machine force ceil(size/capacity) batches
    there; multi-eligible jobs first fill the leftover room in those batches
    and any remainder is packed into spill batches of the largest machine.
    """
    _, small = classify_large_small(instance, attribute)
    small_jobs = [instance.job(j) for j in sorted(small)]
    forced: dict[int, int] = {}
    leftover_room = 0
    for machine in instance.machines:
        pinned = [j for j in small_jobs if j.eligible == {machine.id}]
        if not pinned:
            continue
        total = sum(j.size for j in pinned)
        count = -(-total // machine.capacity)
        forced[machine.id] = count
        leftover_room += count * machine.capacity - total
    multi_total = sum(j.size for j in small_jobs if len(j.eligible) > 1)
    overflow = multi_total - leftover_room
    spill = -(-overflow // instance.max_capacity) if overflow > 0 else 0
    return EligibilityBound(sum(forced.values()) + spill, forced, spill)


def proc_lb_eligibility(instance: Instance, attribute: int) -> int:
    """Processing-time bound for small jobs matching batch_lb_eligibility.

    Sums the smallest minimal processing times that the forced and spill
    batches must run for, then accounts for the batch that necessarily runs
    as long as the small job with the largest minimal processing time.
    """
    _, small = classify_large_small(instance, attribute)
    small_jobs = [instance.job(j) for j in sorted(small)]
    if not small_jobs:
        return 0
    _, forced, spill = batch_lb_eligibility(instance, attribute)
    terms: list[int] = []
    for machine_id, count in forced.items():
        pinned = sorted(
            j.min_time for j in small_jobs if j.eligible == {machine_id}
        )
        terms.extend(pinned[:count])
    multi = sorted(j.min_time for j in small_jobs if len(j.eligible) > 1)
    terms.extend(multi[:spill])
    if terms:
        longest = max(j.min_time for j in small_jobs)
        if longest > max(terms):
            terms.remove(max(terms))
            terms.append(longest)
    return sum(terms)


def _normalize_units(units: Sequence[tuple]) -> list[tuple[int, int, int]]:
    """Accept (lo, hi) or (lo, hi, count) entries; drop zero counts."""
    normalized = []
    for entry in units:
        if len(entry) == 2:
            lo, hi = entry
            count = 1
        else:
            lo, hi, count = entry
        if lo > hi:
            raise ValueError(f"bad processing interval [{lo}, {hi}]")
        if count < 0:
            raise ValueError("negative multiplicity")
        if count:
            normalized.append((int(lo), int(hi), int(count)))
    return normalized


def gac_plus(units: Sequence[tuple], capacity: int) -> tuple[int, int]:
    """Greedy clique cover of unit jobs, longest minimal processing time first.

    units holds (min_time, max_time) or (min_time, max_time, multiplicity)
    entries; a multiplicity of s stands for s identical unit-size copies.
    Opens a batch labeled with the first unplaced unit and fills it with the
    first `capacity` unplaced units whose interval contains the label. For
    unit jobs on a single machine this minimizes both the batch count and
    the cumulative batch processing time. Ties in min_time keep input order.

    Returns (batch count, sum of batch processing times).
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    items = _normalize_units(units)
    order = sorted(range(len(items)), key=lambda i: (-items[i][0], i))
    remaining = {i: items[i][2] for i in range(len(items))}
    batches = 0
    total_time = 0
    first = 0
    while True:
        while first < len(order) and remaining[order[first]] == 0:
            first += 1
        if first == len(order):
            break
        label = items[order[first]][0]
        batches += 1
        total_time += label
        room = capacity
        for pos in range(first, len(order)):
            idx = order[pos]
            count = remaining[idx]
            if count == 0:
                continue
            lo, hi, _ = items[idx]
            if lo <= label <= hi:
                take = count if count < room else room
                remaining[idx] = count - take
                room -= take
                if room == 0:
                    break
    return batches, total_time


def _gac_bounds(instance: Instance, attribute: int) -> tuple[int, int]:
    """Clique-cover bounds for the attribute's small jobs (unit expansion)."""
    _, small = classify_large_small(instance, attribute)
    units = [
        (j.min_time, j.max_time, j.size)
        for j in (instance.job(i) for i in sorted(small))
    ]
    if not units:
        return 0, 0
    return gac_plus(units, instance.max_capacity)


def attribute_bounds(instance: Instance, attribute: int) -> AttributeBoundDetail:
    """Assemble every per-attribute bound."""
    large, small = classify_large_small(instance, attribute)
    b_plain, b_refined = batch_lb_capacity(instance, attribute)
    elig = batch_lb_eligibility(instance, attribute)
    p_elig = proc_lb_eligibility(instance, attribute)
    b_gac, p_gac = _gac_bounds(instance, attribute)
    return AttributeBoundDetail(
        attribute=attribute,
        large_jobs=large,
        small_jobs=small,
        b_capacity=b_plain,
        b_large_small=b_refined,
        b_elig_small=elig.total,
        b_gac_small=b_gac,
        p_large=sum(instance.job(j).min_time for j in large),
        p_elig_small=p_elig,
        p_gac_small=p_gac,
    )


def combine_overall(details: Sequence[AttributeBoundDetail]) -> tuple[int, int]:
    """Total batch-count and processing-time bounds over all attributes."""
    return sum(d.b_best for d in details), sum(d.p_best for d in details)


def setup_cost_lb(
    instance: Instance, batches_per_attribute: Mapping[int, int], total_batches: int
) -> SetupCostBound:
    """Setup-cost bound given per-attribute batch counts.

    before: every batch is preceded by the cheapest setup into its attribute.
    after: every non-final batch is followed by the cheapest setup out of its
    attribute and every used machine pays the cheapest setup out of its
    initial state; the sum of the total_batches smallest such entries bounds
    the cost from below.
    """
    a = instance.attribute_count
    before = 0
    pool: list[int] = []
    for attribute, count in sorted(batches_per_attribute.items()):
        if count == 0:
            continue
        cheapest_in = min(instance.setup_cost(q, attribute) for q in range(1, a + 1))
        cheapest_out = min(instance.setup_cost(attribute, q) for q in range(1, a + 1))
        before += count * cheapest_in
        pool.extend([cheapest_out] * count)
    for machine in instance.machines:
        pool.append(
            min(instance.setup_cost(machine.initial_attribute, q) for q in range(1, a + 1))
        )
    pool.sort()
    after = sum(pool[:total_batches])
    return SetupCostBound(max(before, after), before, after)


def tardy_lb(
    instance: Instance, include_min_setup: bool = True
) -> tuple[int, frozenset[int]]:
    """Jobs that finish late in every feasible solution.

    Schedules each job alone as early as any eligible machine allows,
    assuming the smallest conceivable preceding setup (disable via
    include_min_setup for the weaker, setup-free variant). Raises
    NoFeasiblePlacement when a job fits nowhere at all.
    """
    flagged = set()
    for job in instance.jobs:
        best = None
        for machine_id in sorted(job.eligible):
            machine = instance.machine(machine_id)
            completion = earliest_solo_completion(instance, job, machine, include_min_setup)
            if completion is not None and (best is None or completion < best):
                best = completion
        if best is None:
            raise NoFeasiblePlacement(job.id)
        if best > job.due:
            flagged.add(job.id)
    return len(flagged), frozenset(flagged)


def objective_lb(
    instance: Instance,
    weights: ObjectiveWeights | None = None,
    include_min_setup: bool = True,
) -> BoundReport:
    """Compute all component bounds and the aggregated objective bound."""
    start = time.perf_counter()
    if weights is None:
        weights = ObjectiveWeights.for_instance(instance)
    details = tuple(
        attribute_bounds(instance, r) for r in range(1, instance.attribute_count + 1)
    )
    batches, proc = combine_overall(details)
    setup = setup_cost_lb(instance, {d.attribute: d.b_best for d in details}, batches)
    tardy_count, tardy_jobs = tardy_lb(instance, include_min_setup)
    objective = weights.objective(proc, tardy_count, setup.best, instance.n_jobs)
    return BoundReport(
        per_attribute=details,
        batches_lb=batches,
        proc_lb=proc,
        setup_lb=setup.best,
        setup_lb_before=setup.before,
        setup_lb_after=setup.after,
        tardy_lb=tardy_count,
        tardy_jobs=tardy_jobs,
        objective_lb=objective,
        wall_time=time.perf_counter() - start,
    )
