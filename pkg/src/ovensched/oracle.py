"""Exhaustive exact solver for tiny instances.

Ground truth for bound soundness and solver quality checks. Enumerates all
attribute-homogeneous batchings, all batch-to-machine assignments, and all
batch orders per machine; schedules each candidate deterministically and
keeps the cheapest. Lower bounds from the bounds module can prune batchings
whose bound already exceeds the incumbent. Also houses the brute-force
minimum clique cover used to verify the greedy cover algorithm.

Objective comparisons use an integer rescaling of the normalized objective,
so incumbent updates, tie-breaking and pruning are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .bounds import NoFeasiblePlacement, setup_cost_lb, tardy_lb, _normalize_units
from .model import CostBreakdown, Instance, Machine, ObjectiveWeights, Solution
from .schedule import machine_cost, schedule_machine


@dataclass(frozen=True)
class OracleLimits:
    max_jobs: int = 9
    max_time_horizon: int = 10**9
    node_budget: int = 5_000_000

    def __post_init__(self) -> None:
        if min(self.max_jobs, self.max_time_horizon, self.node_budget) <= 0:
            raise ValueError("all oracle limits must be positive")


class BudgetExceeded(Exception):
    """The search ran out of its node budget (or a hard limit tripped)."""


class Infeasible(Exception):
    """No complete feasible schedule exists for the instance."""


@dataclass(frozen=True)
class OracleResult:
    solution: Solution
    cost: CostBreakdown
    nodes: int


def _attribute_partitions(instance: Instance, attribute: int) -> list[tuple[tuple[int, ...], ...]]:
    """All batchings of one attribute's jobs into feasible blocks.

    Blocks are pruned while growing: members must have pairwise-compatible
    processing times and some machine must be eligible for all of them with
    enough capacity. Partitions are generated in restricted-growth order, so
    the result is deterministic and duplicate-free.
    """
    jobs = sorted(instance.jobs_with_attribute(attribute), key=lambda j: j.id)
    if not jobs:
        return [()]

    def block_feasible(ids: tuple[int, ...]) -> bool:
        members = [instance.job(i) for i in ids]
        if max(m.min_time for m in members) > min(m.max_time for m in members):
            return False
        shared = frozenset.intersection(*(m.eligible for m in members))
        total = sum(m.size for m in members)
        return any(instance.machine(m).capacity >= total for m in shared)

    partitions: list[tuple[tuple[int, ...], ...]] = []

    def grow(index: int, blocks: list[list[int]]) -> None:
        if index == len(jobs):
            partitions.append(tuple(tuple(b) for b in blocks))
            return
        job_id = jobs[index].id
        for block in blocks:
            block.append(job_id)
            if block_feasible(tuple(block)):
                grow(index + 1, blocks)
            block.pop()
        blocks.append([job_id])
        if block_feasible((job_id,)):
            grow(index + 1, blocks)
        blocks.pop()

    grow(0, [])
    return partitions


def _layout_key(layout: Sequence[Sequence[Sequence[int]]]) -> tuple:
    """Canonical encoding used to break ties among equal-cost optima."""
    return tuple(tuple(tuple(sorted(b)) for b in machine) for machine in layout)


@dataclass(frozen=True)
class _Block:
    jobs: tuple[int, ...]
    attribute: int
    size: int
    release: int
    proc: int
    late_count_by_end: tuple[tuple[int, int], ...]  # (end threshold, tardy among members)
    machines: tuple[int, ...]  # feasible machine ids

    def tardy_at(self, end: int) -> int:
        tardy = 0
        for due, count in self.late_count_by_end:
            if end > due:
                tardy += count
        return tardy


def _make_block(instance: Instance, ids: tuple[int, ...]) -> _Block:
    members = [instance.job(i) for i in ids]
    shared = frozenset.intersection(*(m.eligible for m in members))
    total = sum(m.size for m in members)
    dues: dict[int, int] = {}
    for m in members:
        dues[m.due] = dues.get(m.due, 0) + 1
    return _Block(
        jobs=ids,
        attribute=members[0].attribute,
        size=total,
        release=max(m.release for m in members),
        proc=max(m.min_time for m in members),
        late_count_by_end=tuple(sorted(dues.items())),
        machines=tuple(
            sorted(m for m in shared if instance.machine(m).capacity >= total)
        ),
    )


def _place_after(
    machine: Machine, setup: int, prev_end: int, block: _Block
) -> int | None:
    """Earliest start of the block after the given machine state, or None."""
    lower = max(block.release, prev_end + setup)
    for win_start, win_end in machine.availability:
        candidate = max(lower, win_start + setup)
        if candidate + block.proc <= win_end:
            return candidate
    return None


def _block_tardy_floor(instance: Instance, block: _Block) -> int:
    """Members of the block that are late wherever the whole block runs."""
    best_end = None
    for machine_id in block.machines:
        machine = instance.machine(machine_id)
        st_min = instance.min_setup_time_into(block.attribute)
        for win_start, win_end in machine.availability:
            start = max(block.release, win_start + st_min)
            if start + block.proc <= win_end:
                end = start + block.proc
                if best_end is None or end < best_end:
                    best_end = end
                break
    if best_end is None:
        return None  # block fits nowhere; the batching is infeasible
    return block.tardy_at(best_end)


class _MachineOrderSearch:
    """Best batch order on one machine: minimal weighted tardy+setup score.

    Depth-first over block sequences in canonical order; prefixes that
    cannot be scheduled are skipped, and a running setup-cost floor cuts
    subtrees that cannot beat the incumbent. Ties keep the first (hence
    lexicographically smallest) complete order. Results are memoized per
    block set.
    """

    def __init__(self, instance: Instance, weights: ObjectiveWeights, budget: int):
        self.instance = instance
        self.weights = weights
        self.budget = budget
        self.nodes = 0
        self.cache: dict[tuple, tuple | None] = {}
        pn, sn = weights.proc_norm, weights.setup_norm
        self.tardy_scale = weights.w_tardy * pn * sn
        self.setup_scale = weights.w_setup * pn
        self.min_in_cost = {
            r: min(instance.setup_cost(q, r) for q in range(1, instance.attribute_count + 1))
            for r in range(1, instance.attribute_count + 1)
        }

    def _spend(self, count: int = 1) -> None:
        self.nodes += count
        if self.nodes > self.budget:
            raise BudgetExceeded(f"node budget {self.budget} exhausted")

    def best_order(self, machine: Machine, blocks: tuple[_Block, ...]):
        """Return (score, order, (proc, tardy, setup)) or None if unschedulable."""
        key = (machine.id, tuple(sorted(b.jobs for b in blocks)))
        if key in self.cache:
            return self.cache[key]
        blocks = tuple(sorted(blocks, key=lambda b: b.jobs))
        suffix_floor = sum(self.setup_scale * self.min_in_cost[b.attribute] for b in blocks)
        best: list = [None]

        def descend(remaining: tuple[_Block, ...], order, prev_end, prev_attr,
                    score, tardy, setup, floor) -> None:
            self._spend()
            if best[0] is not None and score + floor >= best[0][0]:
                return
            if not remaining:
                best[0] = (score, order, tardy, setup)
                return
            for idx, block in enumerate(remaining):
                setup_time = self.instance.setup_time(prev_attr, block.attribute)
                start = _place_after(machine, setup_time, prev_end, block)
                if start is None:
                    continue
                end = start + block.proc
                block_tardy = block.tardy_at(end)
                block_setup = self.instance.setup_cost(prev_attr, block.attribute)
                descend(
                    remaining[:idx] + remaining[idx + 1 :],
                    order + (block.jobs,),
                    end,
                    block.attribute,
                    score + self.tardy_scale * block_tardy + self.setup_scale * block_setup,
                    tardy + block_tardy,
                    setup + block_setup,
                    floor - self.setup_scale * self.min_in_cost[block.attribute],
                )

        descend(blocks, (), 0, machine.initial_attribute, 0, 0, 0, suffix_floor)
        if best[0] is None:
            result = None
        else:
            score, order, tardy, setup = best[0]
            proc = sum(b.proc for b in blocks)
            result = (score, order, (proc, tardy, setup))
        self.cache[key] = result
        return result


def exact_solve(
    instance: Instance,
    weights: ObjectiveWeights | None = None,
    limits: OracleLimits | None = None,
    prune_with_lb: bool = True,
) -> OracleResult:
    """Find the minimum-objective feasible schedule by exhaustive search.

    Ties between equal-cost optima go to the lexicographically smallest
    canonical layout. With prune_with_lb, batchings whose lower bound
    (fixed processing time, setup-cost bound, necessarily-tardy members)
    strictly exceeds the incumbent are cut, which never changes the result.
    """
    if weights is None:
        weights = ObjectiveWeights.for_instance(instance)
    if limits is None:
        limits = OracleLimits()
    if instance.n_jobs > limits.max_jobs:
        raise BudgetExceeded(
            f"instance has {instance.n_jobs} jobs, oracle limited to {limits.max_jobs}"
        )
    horizon = max(
        (end for m in instance.machines for _, end in m.availability), default=0
    )
    if horizon > limits.max_time_horizon:
        raise BudgetExceeded(f"availability horizon {horizon} exceeds the oracle limit")

    pn, sn = weights.proc_norm, weights.setup_norm

    def score_of(proc: int, tardy: int, setup: int) -> int:
        return (
            weights.w_proc * proc * sn
            + weights.w_setup * setup * pn
            + weights.w_tardy * tardy * pn * sn
        )

    try:
        global_tardy_floor, _ = tardy_lb(instance)
    except NoFeasiblePlacement as exc:
        raise Infeasible(str(exc)) from exc

    machine_index = {m.id: idx for idx, m in enumerate(instance.machines)}
    search = _MachineOrderSearch(instance, weights, limits.node_budget)

    best_score: int | None = None
    best_key: tuple | None = None
    best_layout: list | None = None
    best_components: tuple[int, int, int] | None = None

    per_attribute = [
        _attribute_partitions(instance, r) for r in range(1, instance.attribute_count + 1)
    ]
    block_cache: dict[tuple[int, ...], _Block] = {}

    def block_of(ids: tuple[int, ...]) -> _Block:
        if ids not in block_cache:
            block_cache[ids] = _make_block(instance, ids)
        return block_cache[ids]

    for combo in itertools.product(*per_attribute):
        search._spend()
        blocks = [block_of(ids) for parts in combo for ids in parts]
        proc_fixed = sum(b.proc for b in blocks)

        batching_tardy_floor = global_tardy_floor
        infeasible_block = False
        if prune_with_lb:
            blockwise = 0
            for block in blocks:
                floor = _block_tardy_floor(instance, block)
                if floor is None:
                    infeasible_block = True
                    break
                blockwise += floor
            if infeasible_block:
                continue
            batching_tardy_floor = max(global_tardy_floor, blockwise)
            if best_score is not None:
                counts = {r + 1: len(parts) for r, parts in enumerate(combo)}
                setup_floor = setup_cost_lb(instance, counts, len(blocks)).best
                if score_of(proc_fixed, batching_tardy_floor, setup_floor) > best_score:
                    continue

        for assignment in itertools.product(*(b.machines for b in blocks)):
            search._spend()
            per_machine: list[list[_Block]] = [[] for _ in instance.machines]
            for block, machine_id in zip(blocks, assignment):
                per_machine[machine_index[machine_id]].append(block)
            orders = []
            feasible = True
            total_score = score_of(proc_fixed, 0, 0)
            for machine, machine_blocks in zip(instance.machines, per_machine):
                outcome = search.best_order(machine, tuple(machine_blocks))
                if outcome is None:
                    feasible = False
                    break
                total_score += outcome[0]
                orders.append(outcome)
            if not feasible:
                continue
            layout = [list(o[1]) for o in orders]
            key = _layout_key(layout)
            if (
                best_score is None
                or total_score < best_score
                or (total_score == best_score and key < best_key)
            ):
                best_score = total_score
                best_key = key
                best_layout = layout
                best_components = (
                    proc_fixed,
                    sum(o[2][1] for o in orders),
                    sum(o[2][2] for o in orders),
                )

    if best_layout is None:
        raise Infeasible("no complete feasible schedule exists")

    solution = Solution(
        tuple(
            schedule_machine(instance, machine, machine_blocks)
            for machine, machine_blocks in zip(instance.machines, best_layout)
        )
    )
    proc, tardy, setup = best_components
    # the decomposed search and the scheduler must agree
    rebuilt = [
        machine_cost(instance, machine, batches)
        for machine, batches in zip(instance.machines, solution.batches)
    ]
    assert (proc, tardy, setup) == tuple(map(sum, zip(*rebuilt)))
    cost = CostBreakdown(
        proc_time=proc,
        tardy=tardy,
        setup_cost=setup,
        objective=weights.objective(proc, tardy, setup, instance.n_jobs),
    )
    return OracleResult(solution=solution, cost=cost, nodes=search.nodes)


def min_clique_cover(
    intervals: Sequence[tuple], capacity: int
) -> tuple[int, int]:
    """Exact minimum clique cover of unit jobs with a clique-size cap.

    intervals holds (lo, hi) or (lo, hi, multiplicity) entries. Among all
    partitions into compatible groups of at most `capacity` units, minimizes
    the group count and, among those, the total of per-group minimal
    processing times (each group must run for its largest lo). Reference
    oracle for gac_plus; identical units are collapsed, so inputs with large
    multiplicities stay tractable as long as few distinct intervals appear.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    items = _normalize_units(intervals)
    distinct: dict[tuple[int, int], int] = {}
    for lo, hi, count in items:
        distinct[(lo, hi)] = distinct.get((lo, hi), 0) + count
    kinds = sorted(distinct)
    counts = tuple(distinct[k] for k in kinds)
    if len(kinds) > 14:
        raise ValueError("too many distinct intervals for exhaustive cover")

    memo: dict[tuple[int, ...], tuple[int, int]] = {}

    def solve(state: tuple[int, ...]) -> tuple[int, int]:
        if not any(state):
            return 0, 0
        if state in memo:
            return memo[state]
        first = next(i for i, c in enumerate(state) if c)
        best: tuple[int, int] | None = None

        # enumerate multiset groups containing at least one unit of `first`
        def pick(index: int, taken: list[int], used: int, lo_max: int, hi_min: int) -> None:
            nonlocal best
            if index == len(kinds):
                if used == 0:
                    return
                rest = tuple(c - t for c, t in zip(state, taken + [0] * (len(kinds) - len(taken))))
                sub_count, sub_time = solve(rest)
                candidate = (1 + sub_count, lo_max + sub_time)
                if best is None or candidate < best:
                    best = candidate
                return
            lo, hi = kinds[index]
            floor = 1 if index == first else 0
            limit = min(state[index], capacity - used)
            for take in range(floor, limit + 1):
                if take:
                    new_lo = max(lo_max, lo)
                    new_hi = min(hi_min, hi)
                    if new_lo > new_hi:
                        break
                else:
                    new_lo, new_hi = lo_max, hi_min
                taken.append(take)
                pick(index + 1, taken, used + take, new_lo, new_hi)
                taken.pop()

        pick(first, [0] * first, 0, -(10**9), 10**9)
        assert best is not None
        memo[state] = best
        return best

    return solve(counts)
