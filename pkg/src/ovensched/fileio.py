"""Serialization of instances, solutions and result tables, plus a random
instance generator.

Instance files are line oriented and mirror the tabular form the problem is
usually presented in::

    osp-instance v1
    machines 2
    jobs 10
    attributes 2
    setup-times
    0 0
    3 8
    setup-costs
    6 8
    10 10
    machine 1 capacity 18 initial-attribute 1 windows 21..250
    machine 2 capacity 20 initial-attribute 2 windows 103..259
    job 1 attribute 2 size 18 release 2 due 16 min-time 11 max-time 11 eligible 1 2
    ...

Solution files list scheduled batches per machine::

    osp-solution v1
    machine 1
    batch start 21 processing 11 jobs 1
    machine 2
    ...

Blank lines and lines starting with '#' are ignored in both formats.
Writing then parsing either format reproduces the original object exactly.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import asdict, dataclass
from typing import Iterable

from .model import (
    Batch,
    Instance,
    Job,
    Machine,
    Solution,
    Violation,
    errors_only,
    validate_instance,
)

INSTANCE_HEADER = "osp-instance v1"
SOLUTION_HEADER = "osp-solution v1"

RESULT_COLUMNS = (
    "instance",
    "method",
    "objective",
    "proc_time",
    "tardy",
    "setup_cost",
    "objective_lb",
    "gap_pct",
    "seed",
    "elapsed_s",
)


class ParseError(Exception):
    """Malformed input text; carries the line number and what was expected."""

    def __init__(self, line_no: int, expected: str):
        self.line_no = line_no
        self.expected = expected
        super().__init__(f"line {line_no}: expected {expected}")


class ValidationError(Exception):
    """A parsed instance violates structural invariants."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class GenerationRetryExceeded(Exception):
    """The generator could not produce a valid instance within its retries."""


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((no, stripped))
    return lines


class _LineReader:
    def __init__(self, text: str):
        self.lines = _content_lines(text)
        self.pos = 0

    def next(self, expected: str) -> tuple[int, str]:
        if self.pos >= len(self.lines):
            raise ParseError(self.lines[-1][0] + 1 if self.lines else 1, expected)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    @property
    def done(self) -> bool:
        return self.pos >= len(self.lines)


def _int_field(tokens: list[str], key: str, line_no: int) -> int:
    try:
        idx = tokens.index(key)
        return int(tokens[idx + 1])
    except (ValueError, IndexError):
        raise ParseError(line_no, f"'{key} <integer>'") from None


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance document.

    Raises ParseError on malformed text and ValidationError when the parsed
    instance breaks a structural invariant.
    """
    reader = _LineReader(text)
    no, line = reader.next(f"header '{INSTANCE_HEADER}'")
    if line != INSTANCE_HEADER:
        raise ParseError(no, f"header '{INSTANCE_HEADER}'")

    counts = {}
    for key in ("machines", "jobs", "attributes"):
        no, line = reader.next(f"'{key} <count>'")
        tokens = line.split()
        if len(tokens) != 2 or tokens[0] != key or not tokens[1].lstrip("-").isdigit():
            raise ParseError(no, f"'{key} <count>'")
        counts[key] = int(tokens[1])

    def read_matrix(name: str) -> list[list[int]]:
        no, line = reader.next(f"'{name}' section")
        if line != name:
            raise ParseError(no, f"'{name}' section")
        rows = []
        for _ in range(counts["attributes"]):
            no, line = reader.next(f"{name} row of {counts['attributes']} integers")
            try:
                row = [int(t) for t in line.split()]
            except ValueError:
                raise ParseError(no, f"{name} row of integers") from None
            if len(row) != counts["attributes"]:
                raise ParseError(no, f"{name} row of {counts['attributes']} integers")
            rows.append(row)
        return rows

    setup_times = read_matrix("setup-times")
    setup_costs = read_matrix("setup-costs")

    machines = []
    for i in range(counts["machines"]):
        no, line = reader.next(f"'machine {i + 1} ...'")
        tokens = line.split()
        if tokens[:1] != ["machine"]:
            raise ParseError(no, "'machine <id> capacity <c> initial-attribute <a> windows ...'")
        try:
            machine_id = int(tokens[1])
        except (IndexError, ValueError):
            raise ParseError(no, "'machine <id> ...'") from None
        capacity = _int_field(tokens, "capacity", no)
        initial = _int_field(tokens, "initial-attribute", no)
        try:
            w_idx = tokens.index("windows")
        except ValueError:
            raise ParseError(no, "'windows <start>..<end> ...'") from None
        windows = []
        for token in tokens[w_idx + 1 :]:
            parts = token.split("..")
            if len(parts) != 2:
                raise ParseError(no, f"window '<start>..<end>', got '{token}'")
            try:
                windows.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ParseError(no, f"window '<start>..<end>', got '{token}'") from None
        machines.append(Machine(machine_id, capacity, initial, tuple(windows)))

    jobs = []
    for i in range(counts["jobs"]):
        no, line = reader.next(f"'job {i + 1} ...'")
        tokens = line.split()
        if tokens[:1] != ["job"]:
            raise ParseError(no, "'job <id> attribute <a> size <s> ...'")
        try:
            job_id = int(tokens[1])
        except (IndexError, ValueError):
            raise ParseError(no, "'job <id> ...'") from None
        attribute = _int_field(tokens, "attribute", no)
        size = _int_field(tokens, "size", no)
        release = _int_field(tokens, "release", no)
        due = _int_field(tokens, "due", no)
        min_time = _int_field(tokens, "min-time", no)
        max_time = _int_field(tokens, "max-time", no)
        try:
            e_idx = tokens.index("eligible")
        except ValueError:
            raise ParseError(no, "'eligible <machine ids>'") from None
        try:
            eligible = frozenset(int(t) for t in tokens[e_idx + 1 :])
        except ValueError:
            raise ParseError(no, "'eligible <machine ids>'") from None
        jobs.append(Job(job_id, attribute, size, release, due, min_time, max_time, eligible))

    if not reader.done:
        no, line = reader.next("")
        raise ParseError(no, "end of document")

    instance = Instance(
        machines=tuple(machines),
        jobs=tuple(jobs),
        attribute_count=counts["attributes"],
        setup_times=tuple(tuple(r) for r in setup_times),
        setup_costs=tuple(tuple(r) for r in setup_costs),
    )
    problems = errors_only(validate_instance(instance))
    if problems:
        raise ValidationError(problems)
    return instance


def write_instance(instance: Instance) -> str:
    out = [INSTANCE_HEADER]
    out.append(f"machines {instance.n_machines}")
    out.append(f"jobs {instance.n_jobs}")
    out.append(f"attributes {instance.attribute_count}")
    out.append("setup-times")
    out.extend(" ".join(str(v) for v in row) for row in instance.setup_times)
    out.append("setup-costs")
    out.extend(" ".join(str(v) for v in row) for row in instance.setup_costs)
    for m in instance.machines:
        windows = " ".join(f"{s}..{e}" for s, e in m.availability)
        out.append(
            f"machine {m.id} capacity {m.capacity} initial-attribute {m.initial_attribute} windows {windows}"
        )
    for j in instance.jobs:
        eligible = " ".join(str(e) for e in sorted(j.eligible))
        out.append(
            f"job {j.id} attribute {j.attribute} size {j.size} release {j.release} "
            f"due {j.due} min-time {j.min_time} max-time {j.max_time} eligible {eligible}"
        )
    return "\n".join(out) + "\n"


def parse_solution(text: str, instance: Instance) -> Solution:
    """Parse a solution document against its instance."""
    reader = _LineReader(text)
    no, line = reader.next(f"header '{SOLUTION_HEADER}'")
    if line != SOLUTION_HEADER:
        raise ParseError(no, f"header '{SOLUTION_HEADER}'")
    rows: list[list[Batch]] = []
    current: list[Batch] | None = None
    while not reader.done:
        no, line = reader.next("'machine <id>' or 'batch ...'")
        tokens = line.split()
        if tokens[0] == "machine":
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) != len(rows) + 1:
                raise ParseError(no, f"'machine {len(rows) + 1}'")
            current = []
            rows.append(current)
        elif tokens[0] == "batch":
            if current is None:
                raise ParseError(no, "'machine <id>' before any batch")
            start = _int_field(tokens, "start", no)
            processing = _int_field(tokens, "processing", no)
            try:
                j_idx = tokens.index("jobs")
                job_ids = frozenset(int(t) for t in tokens[j_idx + 1 :])
            except ValueError:
                raise ParseError(no, "'jobs <job ids>'") from None
            if not job_ids:
                raise ParseError(no, "'jobs <job ids>' with at least one id")
            unknown = sorted(j for j in job_ids if not instance.has_job(j))
            if unknown:
                raise ParseError(no, f"job ids of the instance, got {unknown}")
            current.append(Batch(job_ids, start, processing))
        else:
            raise ParseError(no, "'machine <id>' or 'batch ...'")
    if len(rows) != instance.n_machines:
        raise ParseError(
            reader.lines[-1][0] if reader.lines else 1,
            f"{instance.n_machines} machine sections, got {len(rows)}",
        )
    return Solution(tuple(tuple(r) for r in rows))


def write_solution(solution: Solution) -> str:
    out = [SOLUTION_HEADER]
    for idx, machine_batches in enumerate(solution.batches, start=1):
        out.append(f"machine {idx}")
        for batch in machine_batches:
            ids = " ".join(str(j) for j in sorted(batch.jobs))
            out.append(f"batch start {batch.start} processing {batch.processing_time} jobs {ids}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class GeneratorConfig:
    """Dimensions, value ranges and the seed of the random instance generator.

    All ranges are inclusive (lo, hi) integer pairs. eligibility_density is
    the probability of each (job, machine) pair being eligible; empty draws
    are repeated. The last availability window of every machine is extended
    far enough that any job can always be scheduled eventually, which keeps
    every seed's instance valid.
    """

    n_jobs: int
    n_machines: int = 2
    n_attributes: int = 2
    seed: int = 1
    size_range: tuple[int, int] = (1, 10)
    capacity_range: tuple[int, int] = (10, 20)
    min_time_range: tuple[int, int] = (10, 100)
    extra_time_range: tuple[int, int] = (0, 100)
    release_range: tuple[int, int] = (0, 100)
    due_slack_range: tuple[int, int] = (0, 150)
    window_count_range: tuple[int, int] = (1, 3)
    window_length_range: tuple[int, int] = (50, 400)
    window_gap_range: tuple[int, int] = (0, 30)
    setup_time_range: tuple[int, int] = (0, 20)
    setup_cost_range: tuple[int, int] = (0, 20)
    eligibility_density: float = 0.75
    max_retries: int = 50

    def __post_init__(self) -> None:
        if min(self.n_jobs, self.n_machines, self.n_attributes) < 1:
            raise ValueError("dimensions must be positive")
        for name in (
            "size_range",
            "capacity_range",
            "min_time_range",
            "extra_time_range",
            "release_range",
            "due_slack_range",
            "window_count_range",
            "window_length_range",
            "window_gap_range",
            "setup_time_range",
            "setup_cost_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: ({lo}, {hi})")
        if not 0 < self.eligibility_density <= 1:
            raise ValueError("eligibility_density must be in (0, 1]")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GeneratorConfig":
        data = json.loads(text)
        for key, value in list(data.items()):
            if isinstance(value, list):
                data[key] = tuple(value)
        return cls(**data)


def generate_instance(config: GeneratorConfig) -> Instance:
    """Generate a random valid instance, deterministically in the seed."""
    rng = random.Random(config.seed)
    for _ in range(config.max_retries):
        instance = _generate_once(config, rng)
        if not errors_only(validate_instance(instance)):
            return instance
    raise GenerationRetryExceeded(
        f"no valid instance after {config.max_retries} attempts (seed {config.seed})"
    )


def _generate_once(config: GeneratorConfig, rng: random.Random) -> Instance:
    a = config.n_attributes
    setup_times = tuple(
        tuple(rng.randint(*config.setup_time_range) for _ in range(a)) for _ in range(a)
    )
    setup_costs = tuple(
        tuple(rng.randint(*config.setup_cost_range) for _ in range(a)) for _ in range(a)
    )

    capacities = [rng.randint(*config.capacity_range) for _ in range(config.n_machines)]

    jobs = []
    for job_id in range(1, config.n_jobs + 1):
        attribute = rng.randint(1, a)
        size = rng.randint(*config.size_range)
        min_time = rng.randint(*config.min_time_range)
        max_time = min_time + rng.randint(*config.extra_time_range)
        release = rng.randint(*config.release_range)
        due = release + min_time + rng.randint(*config.due_slack_range)
        eligible: set[int] = set()
        while not eligible:
            eligible = {
                m + 1
                for m in range(config.n_machines)
                if rng.random() < config.eligibility_density
            }
        size = min(size, max(capacities[m - 1] for m in eligible))
        jobs.append(Job(job_id, attribute, size, release, due, min_time, max_time, frozenset(eligible)))

    # every machine's final window is stretched so that all jobs fit after
    # any backlog; this keeps generated instances schedulable
    max_setup = max(v for row in setup_times for v in row)
    latest_release = max((j.release for j in jobs), default=0)
    backlog = sum(j.min_time + max_setup for j in jobs)
    horizon = latest_release + backlog + max((j.min_time for j in jobs), default=0) + 1

    machines = []
    for machine_id in range(1, config.n_machines + 1):
        windows = []
        t = 0
        for _ in range(rng.randint(*config.window_count_range)):
            t += rng.randint(*config.window_gap_range)
            end = t + rng.randint(*config.window_length_range)
            windows.append((t, end))
            t = end + 1
        last_start, last_end = windows[-1]
        windows[-1] = (last_start, max(last_end, last_start + max_setup + backlog, horizon))
        machines.append(
            Machine(machine_id, capacities[machine_id - 1], rng.randint(1, a), tuple(windows))
        )

    return Instance(
        machines=tuple(machines),
        jobs=tuple(jobs),
        attribute_count=a,
        setup_times=setup_times,
        setup_costs=setup_costs,
    )


@dataclass(frozen=True)
class ResultRow:
    """One line of the experiment results table."""

    instance: str
    method: str
    objective: float | None
    proc_time: int | None
    tardy: int | None
    setup_cost: int | None
    objective_lb: float | None
    gap_pct: float | None
    seed: int | None
    elapsed_s: float | None


def write_results(rows: Iterable[ResultRow]) -> str:
    """Render rows as CSV with the fixed column order and full precision."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow(
            ["" if value is None else value for value in (
                row.instance,
                row.method,
                row.objective,
                row.proc_time,
                row.tardy,
                row.setup_cost,
                row.objective_lb,
                row.gap_pct,
                row.seed,
                row.elapsed_s,
            )]
        )
    return buffer.getvalue()
