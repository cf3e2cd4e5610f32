"""Domain model for the oven batch scheduling problem.

An instance consists of ovens (machines) with capacities, initial states and
availability windows, plus jobs carrying an attribute (job family), a size,
release/due dates, a feasible processing-time interval and a set of eligible
machines. Setup times and costs between consecutive batches on a machine
depend on the (previous attribute, next attribute) matrix entries.

All ids (machines, jobs, attributes) are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Machine:
    """An oven: capacity in size units, initial attribute, availability windows.

    Availability windows are closed integer intervals [start, end]; a batch's
    setup plus processing span must fit entirely inside one window.
    """

    id: int
    capacity: int
    initial_attribute: int
    availability: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "availability", tuple((int(s), int(e)) for s, e in self.availability)
        )


@dataclass(frozen=True)
class Job:
    id: int
    attribute: int
    size: int
    release: int
    due: int
    min_time: int
    max_time: int
    eligible: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "eligible", frozenset(int(m) for m in self.eligible))


@dataclass(frozen=True)
class Instance:
    """Immutable problem input; safe to share across concurrent readers."""

    machines: tuple[Machine, ...]
    jobs: tuple[Job, ...]
    attribute_count: int
    setup_times: tuple[tuple[int, ...], ...]
    setup_costs: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "machines", tuple(self.machines))
        object.__setattr__(self, "jobs", tuple(self.jobs))
        object.__setattr__(self, "setup_times", tuple(tuple(row) for row in self.setup_times))
        object.__setattr__(self, "setup_costs", tuple(tuple(row) for row in self.setup_costs))

    @property
    def n_jobs(self) -> int:
        return len(self.jobs)

    @property
    def n_machines(self) -> int:
        return len(self.machines)

    @cached_property
    def _machines_by_id(self) -> dict[int, Machine]:
        return {m.id: m for m in self.machines}

    @cached_property
    def _jobs_by_id(self) -> dict[int, Job]:
        return {j.id: j for j in self.jobs}

    def machine(self, machine_id: int) -> Machine:
        return self._machines_by_id[machine_id]

    def job(self, job_id: int) -> Job:
        return self._jobs_by_id[job_id]

    def has_job(self, job_id: int) -> bool:
        return job_id in self._jobs_by_id

    @cached_property
    def max_capacity(self) -> int:
        """Largest machine capacity, 0 if there are no machines."""
        return max((m.capacity for m in self.machines), default=0)

    def jobs_with_attribute(self, attribute: int) -> tuple[Job, ...]:
        return tuple(j for j in self.jobs if j.attribute == attribute)

    def setup_time(self, prev_attribute: int, next_attribute: int) -> int:
        return self.setup_times[prev_attribute - 1][next_attribute - 1]

    def setup_cost(self, prev_attribute: int, next_attribute: int) -> int:
        return self.setup_costs[prev_attribute - 1][next_attribute - 1]

    def min_setup_time_into(self, attribute: int) -> int:
        """Smallest setup time that can precede a batch of the given attribute."""
        return min(self.setup_times[q][attribute - 1] for q in range(self.attribute_count))


@dataclass(frozen=True)
class Batch:
    """Jobs processed together: shared start time and processing time."""

    jobs: frozenset[int]
    start: int
    processing_time: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "jobs", frozenset(int(j) for j in self.jobs))

    @property
    def end(self) -> int:
        return self.start + self.processing_time


@dataclass(frozen=True)
class Solution:
    """Per-machine ordered batch lists, aligned with Instance.machines."""

    batches: tuple[tuple[Batch, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "batches", tuple(tuple(bs) for bs in self.batches))

    def iter_batches(self) -> Iterator[tuple[int, Batch]]:
        """Yield (machine index, batch) over all machines in order."""
        for idx, machine_batches in enumerate(self.batches):
            for batch in machine_batches:
                yield idx, batch

    @property
    def batch_count(self) -> int:
        return sum(len(bs) for bs in self.batches)

    def layout(self) -> list[list[list[int]]]:
        """Job-id layout (sorted within batches) matching the batch order."""
        return [[sorted(b.jobs) for b in machine_batches] for machine_batches in self.batches]


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights and normalizers of the aggregated objective.

    objective = (w_proc*p/proc_norm + w_setup*sc/setup_norm + w_tardy*t)
                / (n * (w_proc + w_tardy + w_setup))
    """

    w_proc: int = 4
    w_tardy: int = 100
    w_setup: int = 1
    proc_norm: int = 1
    setup_norm: int = 1

    def __post_init__(self) -> None:
        if min(self.w_proc, self.w_tardy, self.w_setup) < 0:
            raise ValueError("weights must be non-negative")
        if self.w_proc + self.w_tardy + self.w_setup <= 0:
            raise ValueError("at least one weight must be positive")
        if self.proc_norm < 1 or self.setup_norm < 1:
            raise ValueError("normalizers must be positive")

    @classmethod
    def for_instance(
        cls, instance: Instance, w_proc: int = 4, w_tardy: int = 100, w_setup: int = 1
    ) -> "ObjectiveWeights":
        """Derive normalizers from the instance.

        proc_norm is the mean minimal processing time rounded up; setup_norm is
        the largest setup-cost entry (1 when the matrix is all zero).
        """
        if instance.n_jobs:
            proc_norm = math.ceil(sum(j.min_time for j in instance.jobs) / instance.n_jobs)
        else:
            proc_norm = 1
        setup_norm = max((c for row in instance.setup_costs for c in row), default=0)
        return cls(
            w_proc=w_proc,
            w_tardy=w_tardy,
            w_setup=w_setup,
            proc_norm=max(1, proc_norm),
            setup_norm=max(1, setup_norm),
        )

    @property
    def weight_sum(self) -> int:
        return self.w_proc + self.w_tardy + self.w_setup

    def objective(self, proc_time: int, tardy: int, setup_cost: int, n_jobs: int) -> float:
        if n_jobs == 0:
            return 0.0
        weighted = (
            self.w_proc * proc_time / self.proc_norm
            + self.w_setup * setup_cost / self.setup_norm
            + self.w_tardy * tardy
        )
        return weighted / (n_jobs * self.weight_sum)


@dataclass(frozen=True)
class CostBreakdown:
    """Objective components of a schedule plus the normalized aggregate."""

    proc_time: int
    tardy: int
    setup_cost: int
    objective: float


@dataclass(frozen=True)
class Violation:
    """One broken rule, naming the offending entity."""

    entity: str
    rule: str
    detail: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.entity}: {self.rule}: {self.detail}"


def errors_only(violations: Iterable[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]


def compatible(job_i: Job, job_j: Job) -> bool:
    """True iff the two processing-time intervals intersect."""
    return max(job_i.min_time, job_j.min_time) <= min(job_i.max_time, job_j.max_time)


def earliest_solo_completion(
    instance: Instance, job: Job, machine: Machine, include_min_setup: bool = True
) -> int | None:
    """Earliest completion of the job batched alone on the machine.

    Assumes the smallest conceivable preceding setup; the setup plus
    processing span must fit inside a single availability window. Returns
    None when no window of the machine can host the job.
    """
    if machine.capacity < job.size:
        return None
    st_min = instance.min_setup_time_into(job.attribute) if include_min_setup else 0
    for win_start, win_end in machine.availability:
        start = max(job.release, win_start + st_min)
        if start + job.min_time <= win_end:
            # windows are sorted, so the first fit is the earliest completion
            return start + job.min_time
    return None


def job_completions(instance: Instance, solution: Solution) -> dict[int, int]:
    """Completion time per scheduled job id."""
    completions: dict[int, int] = {}
    for _, batch in solution.iter_batches():
        for job_id in batch.jobs:
            completions[job_id] = batch.end
    return completions


def validate_instance(instance: Instance) -> list[Violation]:
    """Check all structural invariants; empty result means a usable instance.

    Warnings (severity "warning") do not make the instance invalid; use
    errors_only() to test validity.
    """
    violations: list[Violation] = []
    a = instance.attribute_count

    def err(entity: str, rule: str, detail: str) -> None:
        violations.append(Violation(entity, rule, detail))

    if a < 1:
        err("instance", "attributes", f"attribute_count must be >= 1, got {a}")

    for name, matrix in (("setup_times", instance.setup_times), ("setup_costs", instance.setup_costs)):
        if len(matrix) != a or any(len(row) != a for row in matrix):
            shape = f"{len(matrix)}x{len(matrix[0]) if matrix else 0}"
            err("instance", "matrix-shape", f"{name} must be {a}x{a}, got {shape}")
        elif any(v < 0 for row in matrix for v in row):
            err("instance", "matrix-value", f"{name} entries must be non-negative")

    matrices_ok = not any(v.rule.startswith("matrix") for v in violations)

    machine_ids = set()
    for pos, m in enumerate(instance.machines):
        entity = f"machine {m.id}"
        if m.id != pos + 1:
            err(entity, "id", f"expected id {pos + 1} at position {pos}")
        machine_ids.add(m.id)
        if m.capacity < 1:
            err(entity, "capacity", f"capacity must be >= 1, got {m.capacity}")
        if not 1 <= m.initial_attribute <= a:
            err(entity, "initial-attribute", f"{m.initial_attribute} not in [1, {a}]")
        prev_end = None
        for w_start, w_end in m.availability:
            if w_start < 0 or w_end < w_start:
                err(entity, "availability", f"bad window [{w_start}, {w_end}]")
            if prev_end is not None and w_start <= prev_end:
                err(entity, "availability", f"window [{w_start}, {w_end}] overlaps or is unsorted")
            prev_end = w_end

    for pos, j in enumerate(instance.jobs):
        entity = f"job {j.id}"
        if j.id != pos + 1:
            err(entity, "id", f"expected id {pos + 1} at position {pos}")
        if j.size < 1:
            err(entity, "size", f"size must be >= 1, got {j.size}")
        if j.release < 0 or j.due < 0:
            err(entity, "dates", "release and due dates must be non-negative")
        if not 1 <= j.min_time:
            err(entity, "processing-time", f"min_time must be >= 1, got {j.min_time}")
        if j.min_time > j.max_time:
            err(entity, "processing-time", f"min_time {j.min_time} > max_time {j.max_time}")
        if not 1 <= j.attribute <= a:
            err(entity, "attribute", f"{j.attribute} not in [1, {a}]")
        if not j.eligible:
            err(entity, "eligibility", "no eligible machine")
            continue
        unknown = j.eligible - machine_ids
        if unknown:
            err(entity, "eligibility", f"unknown machine ids {sorted(unknown)}")
            continue
        if j.due < j.release:
            violations.append(
                Violation(entity, "dates", f"due {j.due} before release {j.release}", "warning")
            )
        eligible = [instance.machine(m) for m in sorted(j.eligible)]
        if j.size > max(m.capacity for m in eligible):
            err(entity, "capacity", f"size {j.size} exceeds every eligible capacity")
        elif matrices_ok and j.min_time <= j.max_time and 1 <= j.attribute <= a:
            fits = any(
                earliest_solo_completion(instance, j, m) is not None for m in eligible
            )
            if not fits:
                err(entity, "availability", "fits in no availability window of any eligible machine")

    return violations
