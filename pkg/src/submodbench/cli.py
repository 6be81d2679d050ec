"""Command line harness: ``run``, ``analyze`` and ``oracle``.

Run configuration (YAML)::

    runs: 30                 # per (algorithm, problem, instance) cell
    budget: 100000           # evaluations per run
    seed: 0                  # base seed
    workers: 1
    output: results          # relative to the config file
    suite: submodular
    algorithms:
      - 1+1-ea
      - {name: fast-ga, params: {beta: 1.5}, label: fga-1.5}
    problems:
      - kind: max-coverage   # max-coverage | max-influence | max-cut | pwt
        cost: uniform        # cost spec string; not used by max-cut and pwt
        format: edge-list    # optional; default depends on kind
        simulation_count: 100  # max-influence only
        instances:
          - path: graphs/a.txt
          - {path: graphs/b.txt, pid: 2150}

Instance paths are relative to the config file.  Each instance entry is one
problem id: ``PID_BASE[kind]`` plus its position among the entries of that
kind, unless ``pid`` is given.  The run seed is the first 8 bytes of
``blake2b("<seed>|<label>|<pid>|<instance>|<run>")``, so any cell can be
re-run alone.

Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import shutil
import sys
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import analysis, logger, oracles
from .algorithms import AlgorithmSpec, RunTrace, run
from .constraints import CostModelError, build_cost_model, parse_cost_spec
from .instances import ParseError, load_instance
from .problems import PID_BASE, MaxCoverage, MaxCut, MaxInfluence, PackingWhileTraveling

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

DEFAULT_FORMAT = {"max-coverage": "edge-list", "max-cut": "gset", "max-influence": "snap", "pwt": "ttp"}
DEFAULT_BUDGETS = {
    "max-coverage": {"uniform": 10.0, "linear_degree": 500.0, "quadratic_degree": 40000.0},
    "max-influence": {"uniform": 10.0, "linear_degree": 200.0, "quadratic_degree": 40000.0},
}


class ConfigError(ValueError):
    pass


@dataclass
class ProblemEntry:
    kind: str
    path: Path
    fmt: str
    cost: str | None
    pid: int
    instance_id: int = 1
    simulation_count: int = 100
    format_options: dict = field(default_factory=dict)


@dataclass
class AlgorithmEntry:
    spec: AlgorithmSpec
    label: str


@dataclass
class RunConfig:
    problems: list[ProblemEntry]
    algorithms: list[AlgorithmEntry]
    runs: int = 30
    budget: int = 100_000
    seed: int = 0
    workers: int = 1
    output: Path = Path("results")
    suite: str = "submodular"


def run_seed(base: int, label: str, pid: int, instance_id: int, run_index: int) -> int:
    key = f"{base}|{label}|{pid}|{instance_id}|{run_index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return value


def _algorithm_entry(item) -> AlgorithmEntry:
    if isinstance(item, str):
        item = {"name": item}
    if not isinstance(item, dict) or "name" not in item:
        raise ConfigError(f"algorithm entry needs a name: {item!r}")
    try:
        spec = AlgorithmSpec(item["name"], dict(item.get("params") or {}))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return AlgorithmEntry(spec, str(item.get("label", spec.name)))


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    known = {"runs", "budget", "seed", "workers", "output", "suite", "algorithms", "problems"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    base = path.parent

    algorithms = [_algorithm_entry(a) for a in data.get("algorithms") or []]
    if not algorithms:
        raise ConfigError("config lists no algorithms")
    labels = [a.label for a in algorithms]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"algorithm labels must be unique, got {labels}")

    problems: list[ProblemEntry] = []
    per_kind: dict[str, int] = {}
    for entry in data.get("problems") or []:
        kind = entry.get("kind")
        if kind not in PID_BASE:
            raise ConfigError(f"unknown problem kind {kind!r}; choose from {sorted(PID_BASE)}")
        cost = entry.get("cost")
        if kind in ("max-coverage", "max-influence"):
            cost = cost or "uniform"
            try:
                parse_cost_spec(cost)
            except CostModelError as exc:
                raise ConfigError(f"{kind}: {exc}") from None
        elif cost is not None:
            raise ConfigError(f"{kind} takes no cost setting")
        for inst in entry.get("instances") or []:
            if isinstance(inst, str):
                inst = {"path": inst}
            ipath = base / inst["path"]
            if not ipath.is_file():
                raise ConfigError(f"instance file not found: {ipath}")
            k = per_kind.get(kind, 0)
            per_kind[kind] = k + 1
            problems.append(ProblemEntry(
                kind=kind,
                path=ipath,
                fmt=inst.get("format", entry.get("format", DEFAULT_FORMAT[kind])),
                cost=cost,
                pid=int(inst.get("pid", PID_BASE[kind] + k)),
                instance_id=int(inst.get("instance", 1)),
                simulation_count=int(entry.get("simulation_count", 100)),
                format_options=dict(inst.get("options", entry.get("options")) or {}),
            ))
    if not problems:
        raise ConfigError("config lists no problem instances")
    cells = [(p.pid, p.instance_id) for p in problems]
    if len(set(cells)) != len(cells):
        raise ConfigError("two instance entries share a (pid, instance) pair")

    return RunConfig(
        problems=problems,
        algorithms=algorithms,
        runs=_positive_int(data.get("runs", 30), "runs"),
        budget=_positive_int(data.get("budget", 100_000), "budget"),
        seed=int(data.get("seed", 0)),
        workers=_positive_int(data.get("workers", 1), "workers"),
        output=base / data.get("output", "results"),
        suite=str(data.get("suite", "submodular")),
    )


def build_problem(entry: ProblemEntry):
    """Load the instance and wrap it in its problem class."""
    try:
        inst = load_instance(entry.path, entry.fmt, **entry.format_options)
    except (ParseError, TypeError) as exc:
        raise ConfigError(f"{entry.path}: {exc}") from None
    ids = {"pid": entry.pid, "instance_id": entry.instance_id}
    try:
        if entry.kind == "max-cut":
            return MaxCut(inst, **ids)
        if entry.kind == "pwt":
            return PackingWhileTraveling(inst, **ids)
        spec = parse_cost_spec(entry.cost)
        if entry.kind == "max-coverage":
            return MaxCoverage(inst, build_cost_model(spec, inst.degree, DEFAULT_BUDGETS[entry.kind]), **ids)
        model = build_cost_model(spec, inst.out_degree, DEFAULT_BUDGETS[entry.kind])
        return MaxInfluence(inst, model, simulation_count=entry.simulation_count, **ids)
    except (AttributeError, CostModelError, ValueError) as exc:
        raise ConfigError(f"{entry.path}: cannot build {entry.kind} ({exc})") from None


def _run_task(task) -> RunTrace | str:
    problem, spec, label, budget, seed = task
    try:
        trace = run(spec, problem, budget, seed)
    except Exception:  # quarantined and reported by the parent
        return traceback.format_exc()
    return dataclasses.replace(trace, algorithm=label)


def execute(config: RunConfig, out=None) -> int:
    """Run the whole grid and write the datasets; returns an exit code."""
    out = out or sys.stdout
    problems = [build_problem(p) for p in config.problems]
    tasks, cells = [], []
    for alg in config.algorithms:
        for prob in problems:
            cells.append((alg, prob, len(tasks)))
            for k in range(config.runs):
                seed = run_seed(config.seed, alg.label, prob.pid, prob.instance_id, k)
                tasks.append((prob, alg.spec, alg.label, config.budget, seed))

    if config.workers == 1:
        results = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))

    failures = 0
    for alg, prob, start in cells:
        chunk = results[start:start + config.runs]
        good = [r for r in chunk if isinstance(r, RunTrace)]
        for k, r in enumerate(chunk):
            if not isinstance(r, RunTrace):
                failures += 1
                print(f"run failed: {alg.label} on f{prob.pid} i{prob.instance_id} run {k}\n{r}", file=sys.stderr)
        if good:
            logger.write_runs(good, config.output / alg.label, config.suite)
            best = max(t.final_fitness for t in good)
            print(f"{alg.label:>10}  f{prob.pid} {prob.name:<22} i{prob.instance_id} d{prob.dimension:<5} "
                  f"runs={len(good)} best={logger.format_y(best)}", file=out)
    print(f"{len(results) - failures} runs written to {config.output}", file=out)
    return EXIT_RUNTIME if failures else EXIT_OK


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        for key in ("workers", "budget", "runs", "seed"):
            value = getattr(args, key)
            if value is not None:
                setattr(config, key, value if key == "seed" else _positive_int(value, key))
        if args.output is not None:
            config.output = Path(args.output)
        return execute(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_analyze(args) -> int:
    try:
        traces = logger.read_dataset(args.dataset)
    except logger.DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not traces:
        print(f"error: no runs found under {args.dataset}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.output) if args.output else Path(args.dataset) / "analysis"
    # stage in a temporary directory so a failure leaves no partial CSVs
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir.parent) as tmp:
        try:
            paths = analysis.write_reports(
                traces, tmp,
                target_quantile=args.target_quantile,
                ecdf_targets=args.ecdf_targets,
                games_per_pair=args.games,
                seed=args.seed,
                all_pairs=args.all_pairs,
            )
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        out_dir.mkdir(parents=True, exist_ok=True)
        for p in paths:
            shutil.move(str(p), out_dir / p.name)
    if args.export_ioh:
        logger.export_ioh_info(args.dataset)
    print(f"analysed {len(traces)} runs; wrote {', '.join(p.name for p in paths)} to {out_dir}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    entry = ProblemEntry(
        kind=args.problem,
        path=Path(args.instance),
        fmt=args.format or DEFAULT_FORMAT[args.problem],
        cost=args.cost if args.problem in ("max-coverage", "max-influence") else None,
        pid=PID_BASE[args.problem],
    )
    if not entry.path.is_file():
        print(f"error: instance file not found: {entry.path}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        problem = build_problem(entry)
        x, value = oracles.brute_force_optimum(problem)
        table = oracles.objective_table(problem)
    except (ConfigError, oracles.OracleTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n = problem.dimension
    sub = oracles.submodularity_violations(table, n, exhaustive=n <= 12)
    mono = oracles.monotonicity_violations(table, n)
    print(f"problem: {problem.name} (n={n})")
    print(f"optimum: {value:g}")
    print(f"argmax: {''.join(map(str, x))}")
    print(f"submodular: {'yes' if sub == 0 else f'no ({sub} violations)'}")
    print(f"monotone: {'yes' if mono == 0 else f'no ({mono} violations)'}")
    # coverage and influence are monotone submodular; cut is submodular only
    expected_monotone = problem.kind in ("max-coverage", "max-influence")
    if problem.kind != "pwt" and (sub or (expected_monotone and mono)):
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="submodbench", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a run configuration")
    p.add_argument("config", help="YAML run configuration")
    p.add_argument("--workers", type=int)
    p.add_argument("--output", help="dataset root (overrides the config)")
    p.add_argument("--budget", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="write ert/ecdf/glicko2/winfrac CSVs for a dataset")
    p.add_argument("dataset", help="dataset root written by 'run'")
    p.add_argument("--output", help="directory for the CSVs (default <dataset>/analysis)")
    p.add_argument("--target-quantile", type=float, default=0.02)
    p.add_argument("--ecdf-targets", type=int, default=25)
    p.add_argument("--games", type=int, default=25, help="glicko-2 games per pair and instance")
    p.add_argument("--seed", type=int, default=0, help="seed for glicko-2 game sampling")
    p.add_argument("--all-pairs", action="store_true", help="win fractions over all run pairs")
    p.add_argument("--export-ioh", action="store_true", help="also write IOHprofiler .info files")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oracle", help="brute-force optimum and set-function checks (n <= 20)")
    p.add_argument("instance")
    p.add_argument("--problem", choices=sorted(PID_BASE), required=True)
    p.add_argument("--cost", default="uniform", help="cost spec, e.g. 'uniform:budget=1'")
    p.add_argument("--format", choices=sorted(set(DEFAULT_FORMAT.values())))
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
