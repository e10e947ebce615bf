"""Instance generation, experiment configs and CSV reports."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .engine import METHODS, AnsatzSpec, RunResult, run_method
from .hamiltonian import MAX_QUBITS
from .optimizer import OptimizerOptions
from .qubo import (
    OneHotGroup,
    ProblemSplit,
    QuboProblem,
    build_qubo,
    detect_one_hot_groups,
    make_split,
    read_groups,
    read_qubo,
    split_cost_and_constraints,
)

CSV_COLUMNS = (
    "instance_id",
    "method",
    "p1",
    "p2",
    "lambda",
    "topology",
    "expectation",
    "feasible_expectation",
    "feasibility_probability",
    "ground_state_probability",
    "approximation_ratio",
    "optimizer_evals",
    "wall_time_s",
    "seed",
    "status",
)
WORKERS_ENV = "TWOSTEP_QAOA_WORKERS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    group_sizes: tuple[int, ...]
    cost_distribution: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    extra_free_vars: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.group_sizes and self.extra_free_vars == 0:
            raise ValueError("generator needs at least one group or free variable")
        if any(k < 2 for k in self.group_sizes):
            raise ValueError(f"group sizes must be at least 2, got {self.group_sizes}")
        if self.cost_distribution not in ("uniform", "integer"):
            raise ValueError(f"unknown cost distribution {self.cost_distribution!r}")
        if self.extra_free_vars < 0:
            raise ValueError("extra_free_vars must be non-negative")
        if not self.low <= self.high:
            raise ValueError("cost range needs low <= high")

    @property
    def n(self) -> int:
        return sum(self.group_sizes) + self.extra_free_vars


def generate_instance(spec: GeneratorSpec) -> tuple[QuboProblem, list[OneHotGroup]]:
    """Random objective over consecutive one-hot groups followed by free variables.

    Every variable gets a linear cost and every pair of variables not sharing
    a group gets a coupling, both drawn in index order from one seeded
    generator. Within-group pairs stay uncoupled, so the objective never
    mimics the penalty fingerprint.
    """
    rng = np.random.default_rng(spec.seed)
    groups: list[OneHotGroup] = []
    owner: dict[int, int] = {}
    start = 0
    for g, size in enumerate(spec.group_sizes):
        groups.append(OneHotGroup(range(start, start + size)))
        for i in range(start, start + size):
            owner[i] = g
        start += size
    n = spec.n

    def draw() -> float:
        if spec.cost_distribution == "integer":
            return float(rng.integers(int(spec.low), int(spec.high) + 1))
        return float(rng.uniform(spec.low, spec.high))

    terms = [(i, i, draw()) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if i in owner and owner.get(j) == owner[i]:
                continue
            terms.append((i, j, draw()))
    return build_qubo(n, terms), groups


# --- config -----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    methods: tuple[str, ...]
    p1: tuple[int, ...] = (1,)
    p2: tuple[int, ...] = (1,)
    lambdas: tuple[float, ...] = (1.0,)
    topology: str = "ring"
    shared_params: bool = False
    sequential_stages: bool = False
    project_feasible: bool = False
    optimizer: OptimizerOptions = field(default_factory=OptimizerOptions)
    seed: int = 0
    output: Path | None = None
    record_timing: bool = False
    qubo_file: Path | None = None
    groups_file: Path | None = None
    generator: GeneratorSpec | None = None
    instances: int = 1

    def __post_init__(self) -> None:
        if not self.methods:
            raise ConfigError("at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
        if (self.qubo_file is None) == (self.generator is None):
            raise ConfigError("give exactly one instance source: qubo_file or group_sizes")
        for path in (self.qubo_file, self.groups_file):
            if path is not None and not path.is_file():
                raise ConfigError(f"file not found: {path}")
        if self.instances < 1:
            raise ConfigError("instances must be at least 1")
        if any(lam <= 0 for lam in self.lambdas):
            raise ConfigError("lambda values must be positive")


_BOOL = {"true": True, "yes": True, "on": True, "1": True, "false": False, "no": False, "off": False, "0": False}


def parse_config_text(text: str, base_dir: Path = Path("."), path: str = "<config>") -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, lists are space- or comma-separated."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)

    def take(key: str, conv, default=None):
        if key not in raw:
            return default
        value, lineno = raw.pop(key)
        try:
            return conv(value)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {value!r} ({exc})") from None

    def items(s: str) -> list[str]:
        return s.replace(",", " ").split()

    def boolean(s: str) -> bool:
        return _BOOL[s.lower()]

    def file(s: str) -> Path:
        p = Path(s)
        return p if p.is_absolute() else base_dir / p

    seed = take("seed", int, 0)
    opt = OptimizerOptions(
        algorithm=take("algorithm", str, "nelder_mead"),
        max_evals=take("max_evals", int, 2000),
        f_tol=take("f_tol", float, 1e-10),
        x_tol=take("x_tol", float, 1e-8),
        n_starts=take("n_starts", int, 4),
        seed=seed,
        grid_resolution=take("grid_resolution", int, 21),
    )
    generator = None
    group_sizes = take("group_sizes", lambda s: tuple(int(x) for x in items(s)))
    if group_sizes is not None:
        generator = GeneratorSpec(
            group_sizes=group_sizes,
            cost_distribution=take("cost_distribution", str, "uniform"),
            low=take("cost_low", float, 0.0),
            high=take("cost_high", float, 1.0),
            extra_free_vars=take("extra_free_vars", int, 0),
            seed=seed,
        )
    cfg = ExperimentConfig(
        methods=take("methods", lambda s: tuple(items(s)), ()),
        p1=take("p1", lambda s: tuple(int(x) for x in items(s)), (1,)),
        p2=take("p2", lambda s: tuple(int(x) for x in items(s)), (1,)),
        lambdas=take("lambdas", lambda s: tuple(float(x) for x in items(s)), (1.0,)),
        topology=take("topology", str, "ring"),
        shared_params=take("shared_params", boolean, False),
        sequential_stages=take("sequential_stages", boolean, False),
        project_feasible=take("project_feasible", boolean, False),
        optimizer=opt,
        seed=seed,
        output=take("output", file),
        record_timing=take("record_timing", boolean, False),
        qubo_file=take("qubo_file", file),
        groups_file=take("groups_file", file),
        generator=generator,
        instances=take("instances", int, 1),
    )
    if raw:
        key, (_, lineno) = next(iter(raw.items()))
        raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), path.parent, str(path))


# --- runs -------------------------------------------------------------------


def load_split(qubo_file: Path, groups_file: Path | None, lam: float = 1.0) -> ProblemSplit:
    """Problem from files.

    With a groups file the QUBO is taken as the objective alone. Without one,
    the QUBO is treated as penalized and its one-hot groups and penalty
    weight are detected.
    """
    q = read_qubo(qubo_file)
    if q.n > MAX_QUBITS:
        raise ValueError(f"n={q.n} exceeds the {MAX_QUBITS}-qubit statevector limit")
    if groups_file is not None:
        return make_split(q, read_groups(groups_file), lam)
    groups, scale = detect_one_hot_groups(q)
    if not groups:
        raise ValueError(f"no one-hot groups detected in {qubo_file}")
    return split_cost_and_constraints(q, groups, scale)


def instances(cfg: ExperimentConfig) -> list[tuple[str, ProblemSplit]]:
    if cfg.qubo_file is not None:
        return [(cfg.qubo_file.stem, load_split(cfg.qubo_file, cfg.groups_file))]
    assert cfg.generator is not None
    out = []
    for k in range(cfg.instances):
        gen = GeneratorSpec(**{**cfg.generator.__dict__, "seed": cfg.generator.seed + k})
        if gen.n > MAX_QUBITS:
            raise ValueError(f"n={gen.n} exceeds the {MAX_QUBITS}-qubit statevector limit")
        cost, groups = generate_instance(gen)
        out.append((f"gen{k}-seed{gen.seed}", make_split(cost, groups)))
    return out


@dataclass(frozen=True)
class Job:
    instance_id: str
    split: ProblemSplit
    spec: AnsatzSpec
    opt: OptimizerOptions


def plan_jobs(cfg: ExperimentConfig, problems: Sequence[tuple[str, ProblemSplit]]) -> list[Job]:
    """One job per (instance, method, p1, p2, lambda) in config order."""
    jobs = []
    common = dict(
        topology=cfg.topology,
        shared_params=cfg.shared_params,
        sequential_stages=cfg.sequential_stages,
        project_feasible=cfg.project_feasible,
    )
    for instance_id, split in problems:
        for method in cfg.methods:
            p1_values = cfg.p1 if method == "two_step" else (0,)
            lambdas: Sequence[float | None] = cfg.lambdas if method == "standard_penalty" else (None,)
            for p1 in p1_values:
                for p2 in cfg.p2:
                    for lam in lambdas:
                        spec = AnsatzSpec(method, p2=p2, p1=p1, lam=lam, **common)
                        jobs.append(Job(instance_id, split, spec, cfg.optimizer))
    return jobs


def _run_job(job: Job) -> RunResult:
    result = run_method(job.split, job.spec, job.opt)
    result.final_state = None
    return result


def worker_count(n_jobs: int) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    else:
        workers = os.cpu_count() or 1
    return max(1, min(workers, n_jobs))


def execute(jobs: Sequence[Job]) -> list[RunResult]:
    """Run jobs in a process pool; results come back in job order."""
    workers = worker_count(len(jobs))
    if workers == 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_job, jobs))


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".12g")


def format_rows(jobs: Sequence[Job], results: Sequence[RunResult], seed: int, record_timing: bool) -> str:
    buf = io.StringIO()
    buf.write(f"# version=twostep-qaoa {__version__}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for job, r in zip(jobs, results):
        writer.writerow(
            [
                job.instance_id,
                r.method,
                r.p1,
                r.p2,
                _fmt(r.lam),
                r.topology,
                _fmt(r.expectation),
                _fmt(r.feasible_expectation),
                _fmt(r.feasibility_probability),
                _fmt(r.ground_state_probability),
                _fmt(r.approximation_ratio),
                r.optimizer_evals,
                _fmt(r.wall_time if record_timing else 0.0),
                seed,
                r.status,
            ]
        )
    return buf.getvalue()


def run_experiment(cfg: ExperimentConfig) -> str:
    """Run every configured combination and return the CSV report text.

    The report is also written to ``cfg.output`` when set. Wall-clock times
    are written as 0 unless ``record_timing`` is on, which keeps reports
    byte-identical across reruns.
    """
    jobs = plan_jobs(cfg, instances(cfg))
    results = execute(jobs)
    text = format_rows(jobs, results, cfg.seed, cfg.record_timing)
    if cfg.output is not None:
        cfg.output.parent.mkdir(parents=True, exist_ok=True)
        cfg.output.write_text(text, encoding="utf-8")
    return text


def read_report(text: str) -> list[dict[str, str]]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(lines))
