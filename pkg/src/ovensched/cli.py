"""Command-line front end for batch experimentation.

Subcommands: bounds, greedy, anneal, oracle, evaluate, generate, bench.
Exit codes: 0 success, 1 usage error, 2 instance/solution infeasibility,
3 exhausted budgets. Timing goes to stderr so stdout stays byte-identical
across repeated runs of deterministic commands.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

from .anneal import AnnealParams, AnnealResult, run_annealing
from .bounds import BoundReport, NoFeasiblePlacement, objective_lb
from .fileio import (
    GenerationRetryExceeded,
    GeneratorConfig,
    ParseError,
    ResultRow,
    ValidationError,
    generate_instance,
    parse_instance,
    parse_solution,
    write_instance,
    write_results,
    write_solution,
)
from .greedy import Unschedulable, construct
from .model import CostBreakdown, Instance, ObjectiveWeights
from .oracle import BudgetExceeded, Infeasible, OracleLimits, exact_solve
from .schedule import (
    InfeasibleBatch,
    InfeasibleSolution,
    check_feasibility,
    evaluate,
    relative_gap,
)

WORKERS_ENV = "OVENSCHED_WORKERS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_BUDGET = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _pool_workers(task_count: int, override: int | None) -> int:
    if override is not None:
        workers = override
    else:
        env = os.environ.get(WORKERS_ENV, "")
        workers = int(env) if env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, min(task_count, workers))


def _map_ordered(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_instance(path: str) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _cost_text(cost: CostBreakdown) -> str:
    return (
        f"proc {cost.proc_time} tardy {cost.tardy} setup {cost.setup_cost} "
        f"objective {cost.objective:.6f}"
    )


def _print_bound_report(path: str, instance: Instance, report: BoundReport) -> None:
    print(f"instance {path}")
    print(
        f"jobs {instance.n_jobs} machines {instance.n_machines} "
        f"attributes {instance.attribute_count}"
    )
    for d in report.per_attribute:
        print(
            f"attribute {d.attribute} large {len(d.large_jobs)} small {len(d.small_jobs)} "
            f"b_best {d.b_best} p_best {d.p_best}"
        )
    print(f"batches_lb {report.batches_lb}")
    print(f"proc_lb {report.proc_lb}")
    print(f"setup_lb {report.setup_lb} before {report.setup_lb_before} after {report.setup_lb_after}")
    tardy_ids = " ".join(str(j) for j in sorted(report.tardy_jobs))
    print(f"tardy_lb {report.tardy_lb} jobs {tardy_ids}".rstrip())
    print(f"objective_lb {report.objective_lb:.6f}")


def _write_results_file(path: str, rows: list[ResultRow]) -> None:
    Path(path).write_text(write_results(rows), encoding="utf-8")


def _cmd_bounds(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    report = objective_lb(instance, include_min_setup=not args.no_min_setup)
    _print_bound_report(args.instance, instance, report)
    print(f"computed in {report.wall_time:.3f}s", file=sys.stderr)
    if args.results:
        row = ResultRow(
            instance=args.instance,
            method="bounds",
            objective=None,
            proc_time=report.proc_lb,
            tardy=report.tardy_lb,
            setup_cost=report.setup_lb,
            objective_lb=report.objective_lb,
            gap_pct=None,
            seed=None,
            elapsed_s=report.wall_time,
        )
        _write_results_file(args.results, [row])
    return EXIT_OK


def _cmd_greedy(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    started = time.perf_counter()
    solution, cost = construct(instance)
    elapsed = time.perf_counter() - started
    print(f"instance {args.instance}")
    print(write_solution(solution), end="")
    print(f"cost {_cost_text(cost)}")
    print(f"constructed in {elapsed:.3f}s", file=sys.stderr)
    if args.solution:
        Path(args.solution).write_text(write_solution(solution), encoding="utf-8")
    if args.results:
        report = objective_lb(instance)
        row = ResultRow(
            instance=args.instance,
            method="greedy",
            objective=cost.objective,
            proc_time=cost.proc_time,
            tardy=cost.tardy,
            setup_cost=cost.setup_cost,
            objective_lb=report.objective_lb,
            gap_pct=relative_gap(cost.objective, report.objective_lb),
            seed=None,
            elapsed_s=elapsed,
        )
        _write_results_file(args.results, [row])
    return EXIT_OK


def _anneal_task(payload: tuple[Instance, AnnealParams, BoundReport | None]) -> AnnealResult:
    instance, params, lb = payload
    return run_annealing(instance, params, lb=lb)


def _run_replicates(
    instance: Instance,
    base: AnnealParams,
    lb: BoundReport | None,
    seeds: Sequence[int],
    workers: int | None,
) -> list[tuple[int, AnnealResult]]:
    from dataclasses import replace

    payloads = [(instance, replace(base, rng_seed=seed), lb) for seed in seeds]
    pool_size = _pool_workers(len(payloads), workers)
    results = _map_ordered(_anneal_task, payloads, pool_size)
    return sorted(zip(seeds, results), key=lambda pair: pair[0])


def _cmd_anneal(args: argparse.Namespace) -> int:
    if args.replicates < 1:
        raise _UsageError("--replicates must be at least 1")
    instance = _load_instance(args.instance)
    lb = objective_lb(instance)
    params = AnnealParams(
        time_limit=args.time_limit,
        lb_gap_stop=args.lb_gap_stop,
        moves_per_level=args.moves_per_level,
    )
    seeds = [args.seed + i for i in range(args.replicates)]
    started = time.perf_counter()
    outcomes = _run_replicates(instance, params, lb, seeds, args.workers)
    elapsed = time.perf_counter() - started

    print(f"instance {args.instance}")
    best_seed, best = None, None
    for seed, result in outcomes:
        print(f"replicate seed {seed} stop {result.stop_reason} cost {_cost_text(result.cost)}")
        if best is None or result.cost.objective < best.cost.objective:
            best_seed, best = seed, result
    assert best is not None
    gap = relative_gap(best.cost.objective, lb.objective_lb)
    print(f"best seed {best_seed} cost {_cost_text(best.cost)}")
    print(f"objective_lb {lb.objective_lb:.6f} gap {gap:.2f}")
    print(write_solution(best.solution), end="")
    print(f"{len(seeds)} replicates in {elapsed:.3f}s", file=sys.stderr)

    if args.trace:
        lines = ["seed,elapsed_s,objective,proc_time,tardy,setup_cost"]
        for seed, result in outcomes:
            for point in result.trace.points:
                c = point.cost
                lines.append(
                    f"{seed},{point.elapsed!r},{c.objective!r},{c.proc_time},{c.tardy},{c.setup_cost}"
                )
        Path(args.trace).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.results:
        rows = [
            ResultRow(
                instance=args.instance,
                method="anneal",
                objective=result.cost.objective,
                proc_time=result.cost.proc_time,
                tardy=result.cost.tardy,
                setup_cost=result.cost.setup_cost,
                objective_lb=lb.objective_lb,
                gap_pct=relative_gap(result.cost.objective, lb.objective_lb),
                seed=seed,
                elapsed_s=result.trace.points[-1].elapsed,
            )
            for seed, result in outcomes
        ]
        _write_results_file(args.results, rows)
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    limits = OracleLimits(
        max_jobs=args.max_jobs,
        node_budget=args.node_budget,
    )
    started = time.perf_counter()
    result = exact_solve(instance, limits=limits, prune_with_lb=not args.no_prune)
    elapsed = time.perf_counter() - started
    print(f"instance {args.instance}")
    print(f"optimal {_cost_text(result.cost)}")
    print(f"nodes {result.nodes}")
    print(write_solution(result.solution), end="")
    print(f"solved in {elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    instance = _load_instance(args.instance)
    solution = parse_solution(Path(args.solution).read_text(encoding="utf-8"), instance)
    violations = check_feasibility(instance, solution)
    if violations:
        for violation in violations:
            print(str(violation), file=sys.stderr)
        return EXIT_INFEASIBLE
    weights = ObjectiveWeights.for_instance(instance)
    cost = evaluate(instance, solution, weights, check=False)
    print(f"instance {args.instance} solution {args.solution}")
    print(f"cost {_cost_text(cost)}")
    return EXIT_OK


def _cmd_generate(args: argparse.Namespace) -> int:
    if args.config:
        config = GeneratorConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
        overrides = {}
        if args.n is not None:
            overrides["n_jobs"] = args.n
        if args.k is not None:
            overrides["n_machines"] = args.k
        if args.a is not None:
            overrides["n_attributes"] = args.a
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            from dataclasses import replace

            config = replace(config, **overrides)
    else:
        if args.n is None:
            raise _UsageError("generate requires --n or --config")
        config = GeneratorConfig(
            n_jobs=args.n,
            n_machines=args.k if args.k is not None else 2,
            n_attributes=args.a if args.a is not None else 2,
            seed=args.seed if args.seed is not None else 1,
        )
    instance = generate_instance(config)
    Path(args.output).write_text(write_instance(instance), encoding="utf-8")
    if args.save_config:
        Path(args.save_config).write_text(config.to_json(), encoding="utf-8")
    print(
        f"wrote {args.output} jobs {instance.n_jobs} machines {instance.n_machines} "
        f"attributes {instance.attribute_count} seed {config.seed}"
    )
    return EXIT_OK


def _bench_task(payload: tuple[str, float, float | None, Sequence[int], int]) -> list[ResultRow]:
    path, time_limit, lb_gap_stop, seeds, moves_per_level = payload
    instance = _load_instance(path)
    name = Path(path).name
    rows: list[ResultRow] = []

    report = objective_lb(instance)
    rows.append(
        ResultRow(name, "bounds", None, report.proc_lb, report.tardy_lb, report.setup_lb,
                  report.objective_lb, None, None, report.wall_time)
    )

    started = time.perf_counter()
    _, greedy_cost = construct(instance)
    greedy_elapsed = time.perf_counter() - started
    rows.append(
        ResultRow(name, "greedy", greedy_cost.objective, greedy_cost.proc_time,
                  greedy_cost.tardy, greedy_cost.setup_cost, report.objective_lb,
                  relative_gap(greedy_cost.objective, report.objective_lb), None, greedy_elapsed)
    )

    params = AnnealParams(
        time_limit=time_limit, lb_gap_stop=lb_gap_stop, moves_per_level=moves_per_level
    )
    for seed, result in _run_replicates(instance, params, report, list(seeds), workers=1):
        cost = result.cost
        rows.append(
            ResultRow(name, "anneal", cost.objective, cost.proc_time, cost.tardy,
                      cost.setup_cost, report.objective_lb,
                      relative_gap(cost.objective, report.objective_lb), seed,
                      result.trace.points[-1].elapsed)
        )
    return rows


def _cmd_bench(args: argparse.Namespace) -> int:
    if args.replicates < 1:
        raise _UsageError("--replicates must be at least 1")
    directory = Path(args.directory)
    if not directory.is_dir():
        raise _UsageError(f"not a directory: {args.directory}")
    paths = sorted(str(p) for p in directory.glob("*.osp"))
    if not paths:
        raise _UsageError(f"no *.osp instances under {args.directory}")
    seeds = [args.seed + i for i in range(args.replicates)]
    payloads = [
        (path, args.time_limit, args.lb_gap_stop, seeds, args.moves_per_level)
        for path in paths
    ]
    pool_size = _pool_workers(len(payloads), args.workers)
    all_rows = [row for rows in _map_ordered(_bench_task, payloads, pool_size) for row in rows]
    table = write_results(all_rows)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        print(f"wrote {args.out} rows {len(all_rows)}")
    else:
        print(table, end="")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="ovensched", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("bounds", help="compute lower bounds for an instance")
    p.add_argument("instance")
    p.add_argument("--results", help="write a results CSV here")
    p.add_argument("--no-min-setup", action="store_true",
                   help="drop the minimal-setup term from the tardiness bound")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("greedy", help="run the construction heuristic")
    p.add_argument("instance")
    p.add_argument("--solution", help="write the schedule here")
    p.add_argument("--results", help="write a results CSV here")
    p.set_defaults(func=_cmd_greedy)

    p = sub.add_parser("anneal", help="run simulated annealing replicates")
    p.add_argument("instance")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--time-limit", type=float, default=360.0)
    p.add_argument("--lb-gap-stop", type=float, default=None,
                   help="stop when the gap to the lower bound reaches this percentage")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--moves-per-level", type=int, default=0,
                   help="moves per temperature level (0 = 50 per job)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default ${WORKERS_ENV} or CPU count)")
    p.add_argument("--trace", help="write best-so-far trace CSV here")
    p.add_argument("--results", help="write a results CSV here")
    p.set_defaults(func=_cmd_anneal)

    p = sub.add_parser("oracle", help="solve a tiny instance exactly")
    p.add_argument("instance")
    p.add_argument("--no-prune", action="store_true", help="disable lower-bound pruning")
    p.add_argument("--max-jobs", type=int, default=9)
    p.add_argument("--node-budget", type=int, default=5_000_000)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("evaluate", help="check and price a solution file")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("generate", help="generate a random instance")
    p.add_argument("--n", type=int, default=None, help="number of jobs")
    p.add_argument("--k", type=int, default=None, help="number of machines")
    p.add_argument("--a", type=int, default=None, help="number of attributes")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", help="JSON GeneratorConfig to start from")
    p.add_argument("--save-config", help="write the effective config JSON here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("bench", help="run bounds+greedy+anneal over a directory")
    p.add_argument("directory")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--time-limit", type=float, default=360.0)
    p.add_argument("--lb-gap-stop", type=float, default=None)
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--moves-per-level", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", help="write the results CSV here instead of stdout")
    p.set_defaults(func=_cmd_bench)

    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, InfeasibleSolution, InfeasibleBatch,
            Infeasible, Unschedulable, NoFeasiblePlacement) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BudgetExceeded, GenerationRetryExceeded) as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
