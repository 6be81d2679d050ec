"""On-disk run data.

Layout under a root directory (one root per algorithm)::

    <root>/<suite>/data_f<pid>_<pname>/run_d<dim>_i<inst>.dat
    <root>/<suite>/data_f<pid>_<pname>/run_d<dim>_i<inst>.meta.json

The ``.dat`` file is append-only.  Each run starts with the header line
``"evaluations" "raw_y"`` followed by ``<evaluation> <best-so-far>`` per
improvement (6 significant digits); the run's last evaluation is always
written, even when it did not improve.

The meta file is JSON with keys ``format_version``, ``suite``,
``problem`` (``id``, ``name``), ``dimension``, ``instance``,
``algorithm`` (``name``, ``params``) and ``runs`` (``seed``, ``budget``,
``evaluations``, ``best_y`` per run, in file order).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .algorithms import RunTrace

FORMAT_VERSION = 1
HEADER = '"evaluations" "raw_y"'


class DatasetError(ValueError):
    pass


class DataFormatError(DatasetError):
    def __init__(self, path, line, message):
        self.path, self.line = path, line
        super().__init__(f"{path}:{line}: {message}")


class DatasetConsistencyError(DatasetError):
    pass


class UnsupportedVersionError(DatasetError):
    pass


@dataclass
class ExperimentMeta:
    suite: str
    problem_id: int
    problem_name: str
    dimension: int
    instance_id: int
    algorithm: str
    params: dict = field(default_factory=dict)
    runs: list[dict] = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    def to_json(self) -> dict:
        return {
            "format_version": self.format_version,
            "suite": self.suite,
            "problem": {"id": self.problem_id, "name": self.problem_name},
            "dimension": self.dimension,
            "instance": self.instance_id,
            "algorithm": {"name": self.algorithm, "params": self.params},
            "runs": self.runs,
        }

    @classmethod
    def from_json(cls, data: dict, path="<meta>") -> ExperimentMeta:
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise UnsupportedVersionError(f"{path}: unsupported format_version {version!r}")
        try:
            return cls(
                suite=data["suite"],
                problem_id=int(data["problem"]["id"]),
                problem_name=data["problem"]["name"],
                dimension=int(data["dimension"]),
                instance_id=int(data["instance"]),
                algorithm=data["algorithm"]["name"],
                params=data["algorithm"].get("params", {}),
                runs=list(data["runs"]),
                format_version=version,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"{path}: malformed meta file ({exc!r})") from None


def format_y(y: float) -> str:
    return f"{y:.6g}"


def data_path(root, suite: str, problem_id: int, problem_name: str, dimension: int, instance_id: int) -> Path:
    return Path(root) / suite / f"data_f{problem_id}_{problem_name}" / f"run_d{dimension}_i{instance_id}.dat"


def meta_path_for(dat: Path) -> Path:
    return dat.with_suffix(".meta.json")


def trace_lines(trace: RunTrace) -> list[str]:
    if not trace.records:
        raise ValueError("trace has no records; the first evaluation is always logged")
    lines = [HEADER]
    lines += [f"{e} {format_y(y)}" for e, y in trace.records]
    last_eval = trace.records[-1][0]
    if last_eval != trace.evaluations:
        lines.append(f"{trace.evaluations} {format_y(trace.records[-1][1])}")
    return lines


def write_trace(trace: RunTrace, root, suite: str = "submodular") -> Path:
    """Append one run to its ``.dat`` file and return the path."""
    lines = trace_lines(trace)
    path = data_path(root, suite, trace.problem_id, trace.problem_name, trace.dimension, trace.instance_id)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as fh:
        fh.write("\n".join(lines) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    return path


def write_meta(meta: ExperimentMeta, root) -> Path:
    """Write (atomically replace) the meta file next to its data file."""
    path = meta_path_for(data_path(root, meta.suite, meta.problem_id, meta.problem_name, meta.dimension, meta.instance_id))
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(meta.to_json(), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)
    return path


def run_entry(trace: RunTrace) -> dict:
    return {
        "seed": trace.seed,
        "budget": trace.budget,
        "evaluations": trace.evaluations,
        "best_y": trace.final_fitness,
    }


def write_runs(traces: list[RunTrace], root, suite: str = "submodular") -> Path:
    """Append traces of one (algorithm, problem, instance) cell and update its meta."""
    first = traces[0]
    dat = data_path(root, suite, first.problem_id, first.problem_name, first.dimension, first.instance_id)
    meta_file = meta_path_for(dat)
    if meta_file.exists():
        meta = ExperimentMeta.from_json(json.loads(meta_file.read_text()), meta_file)
    else:
        meta = ExperimentMeta(suite, first.problem_id, first.problem_name, first.dimension,
                              first.instance_id, first.algorithm, dict(first.params))
    for trace in traces:
        if (trace.algorithm, trace.problem_id, trace.instance_id) != (meta.algorithm, meta.problem_id, meta.instance_id):
            raise ValueError("all traces written together must share algorithm, problem and instance")
        write_trace(trace, root, suite)
        meta.runs.append(run_entry(trace))
        write_meta(meta, root)
    return dat


def _parse_dat(path: Path) -> list[list[tuple[int, float]]]:
    runs: list[list[tuple[int, float]]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == HEADER:
            runs.append([])
            continue
        if not runs:
            raise DataFormatError(path, lineno, "data before the first header line")
        parts = line.split()
        if len(parts) != 2:
            raise DataFormatError(path, lineno, f"expected '<evaluations> <raw_y>', got {line!r}")
        try:
            e, y = int(parts[0]), float(parts[1])
        except ValueError:
            raise DataFormatError(path, lineno, f"unparsable numbers in {line!r}") from None
        if runs[-1] and e <= runs[-1][-1][0]:
            raise DataFormatError(path, lineno, "evaluation counts must increase within a run")
        runs[-1].append((e, y))
    for i, r in enumerate(runs):
        if not r:
            raise DataFormatError(path, 0, f"run {i + 1} has no data lines")
    return runs


def read_dataset(root) -> list[RunTrace]:
    """Load every run under ``root`` (searched recursively)."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"{root} is not a directory")
    traces: list[RunTrace] = []
    for meta_file in sorted(root.rglob("run_d*_i*.meta.json")):
        try:
            data = json.loads(meta_file.read_text())
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{meta_file}: invalid JSON ({exc})") from None
        meta = ExperimentMeta.from_json(data, meta_file)
        dat = meta_file.with_name(meta_file.name.replace(".meta.json", ".dat"))
        if not dat.exists():
            raise DatasetConsistencyError(f"{meta_file}: data file {dat.name} missing")
        runs = _parse_dat(dat)
        if len(runs) != len(meta.runs):
            raise DatasetConsistencyError(f"{meta_file}: meta lists {len(meta.runs)} runs, {dat.name} has {len(runs)}")
        for info, records in zip(meta.runs, runs):
            evaluations = int(info["evaluations"])
            if len(records) > 1 and records[-1][0] == evaluations and records[-1][1] == records[-2][1]:
                records = records[:-1]  # forced final line, not an improvement
            traces.append(RunTrace(
                algorithm=meta.algorithm,
                problem_id=meta.problem_id,
                problem_name=meta.problem_name,
                instance_id=meta.instance_id,
                dimension=meta.dimension,
                seed=int(info["seed"]),
                budget=int(info["budget"]),
                records=records,
                final_fitness=records[-1][1],
                evaluations=evaluations,
                params=meta.params,
            ))
    return traces


def export_ioh_info(root, suite: str = "submodular") -> list[Path]:
    """Best-effort IOHprofiler ``.info`` files for the external analyzer.

    Compatibility mode only: the ``.dat`` files are shared unchanged and the
    info lines follow the classic ``suite = ..., funcId = ...`` layout.
    """
    root = Path(root)
    written = []
    for meta_file in sorted((root / suite).rglob("run_d*_i*.meta.json")):
        meta = ExperimentMeta.from_json(json.loads(meta_file.read_text()), meta_file)
        info = root / suite / f"IOHprofiler_f{meta.problem_id}_{meta.problem_name}.info"
        rel = meta_file.parent.name + "/" + meta_file.name.replace(".meta.json", ".dat")
        runs = ", ".join(f"{meta.instance_id}:{r['evaluations']}|{format_y(r['best_y'])}" for r in meta.runs)
        block = (
            f"suite = '{meta.suite}', funcId = {meta.problem_id}, funcName = '{meta.problem_name}', "
            f"DIM = {meta.dimension}, maximization = 'T', algId = '{meta.algorithm}', algInfo = ''\n"
            f"%\n{rel}, {runs}\n"
        )
        with open(info, "a") as fh:
            fh.write(block)
        written.append(info)
    return written


def final_fitness_rounded(trace: RunTrace) -> float:
    """Final best-so-far as it survives the 6-digit rendering."""
    return float(format_y(trace.final_fitness)) if math.isfinite(trace.final_fitness) else trace.final_fitness
