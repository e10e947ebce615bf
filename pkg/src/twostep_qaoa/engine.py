"""QAOA pipelines: penalty QAOA, Dicke-initialized XY-QAOA and the two-stage variant.

Parameter vectors interleave angles layer by layer, ``[gamma_1, beta_1,
gamma_2, beta_2, ...]``. For the two-stage pipeline the stage-one layers
come first, then the stage-two layers.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

import numpy as np

from .hamiltonian import EnergyTable, feasible_mask, tabulate
from .optimizer import OptimizerError, OptimizerOptions, minimize
from .oracle import approximation_ratio, brute_force_min
from .qubo import DEFAULT_TOL, OneHotGroup, ProblemSplit, QuboProblem, detect_one_hot_groups, split_cost_and_constraints
from .simulator import (
    TOPOLOGIES,
    StateVector,
    Topology,
    apply_phase_separator,
    apply_x_mixer,
    apply_xy_mixer,
    expectation,
    init_one_hot_product,
    init_uniform,
)

log = logging.getLogger(__name__)

METHODS: tuple[str, ...] = ("standard_penalty", "xy_dicke", "two_step")
GAMMA_BOUNDS = (0.0, 2.0 * math.pi)
BETA_BOUNDS = (0.0, math.pi)


@dataclass(frozen=True)
class LayerParams:
    gamma: float
    beta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma) and math.isfinite(self.beta)):
            raise ValueError(f"non-finite layer angles ({self.gamma}, {self.beta})")


@dataclass(frozen=True)
class XYMixer:
    groups: tuple[OneHotGroup, ...]
    topology: Topology = "ring"


Mixer = Union[Literal["x"], XYMixer]


def run_layers(
    state: StateVector,
    table: EnergyTable,
    layers: Sequence[LayerParams],
    mixer: Mixer = "x",
) -> StateVector:
    """Apply phase separator then mixer for each layer, in place."""
    for layer in layers:
        apply_phase_separator(state, table, layer.gamma)
        if mixer == "x":
            apply_x_mixer(state, layer.beta)
        elif isinstance(mixer, XYMixer):
            apply_xy_mixer(state, mixer.groups, layer.beta, mixer.topology)
        else:
            raise ValueError(f"unknown mixer {mixer!r}")
    return state


def layers_from_vector(theta: Sequence[float], p: int, shared: bool = False) -> list[LayerParams]:
    """Unpack ``[gamma_1, beta_1, ...]``; with ``shared`` one pair is reused for all ``p`` layers."""
    theta = [float(t) for t in theta]
    if shared:
        if p == 0:
            if theta:
                raise ValueError("no parameters expected for zero layers")
            return []
        if len(theta) != 2:
            raise ValueError(f"shared parameters need 2 values, got {len(theta)}")
        return [LayerParams(theta[0], theta[1])] * p
    if len(theta) != 2 * p:
        raise ValueError(f"{p} layers need {2 * p} parameters, got {len(theta)}")
    return [LayerParams(theta[2 * k], theta[2 * k + 1]) for k in range(p)]


def layer_bounds(p: int, shared: bool = False) -> list[tuple[float, float]]:
    count = min(p, 1) if shared else p
    return [GAMMA_BOUNDS, BETA_BOUNDS] * count


def stage_one(split: ProblemSplit, params1: Sequence[LayerParams], penalty_table: EnergyTable | None = None) -> StateVector:
    """Uniform superposition evolved under the constraint-only table with the X mixer."""
    table = tabulate(split.penalty) if penalty_table is None else penalty_table
    return run_layers(init_uniform(split.n), table, params1, "x")


def stage_two(
    intermediate: StateVector,
    split: ProblemSplit,
    params2: Sequence[LayerParams],
    topology: Topology = "ring",
    cost_table: EnergyTable | None = None,
) -> StateVector:
    """Objective-only table with the XY mixer, starting from a copy of ``intermediate``."""
    if intermediate.n != split.n:
        raise ValueError(f"intermediate has n={intermediate.n}, problem has n={split.n}")
    table = tabulate(split.cost) if cost_table is None else cost_table
    return run_layers(intermediate.copy(), table, params2, XYMixer(split.groups, topology))


def two_step_objective(
    split: ProblemSplit,
    p1: int,
    p2: int,
    theta: Sequence[float],
    topology: Topology = "ring",
) -> float:
    """``<C>`` of the final two-stage state for a full parameter vector."""
    if len(theta) != 2 * (p1 + p2):
        raise ValueError(f"expected {2 * (p1 + p2)} parameters, got {len(theta)}")
    inter = stage_one(split, layers_from_vector(theta[: 2 * p1], p1))
    cost_table = tabulate(split.cost)
    final = stage_two(inter, split, layers_from_vector(theta[2 * p1:], p2), topology, cost_table)
    return expectation(final, cost_table)


def project_feasible(state: StateVector, mask: np.ndarray) -> StateVector:
    """Zero infeasible amplitudes and renormalize. Diagnostic post-selection, off by default."""
    amps = np.where(mask, state.amplitudes, 0.0)
    mass = float(np.sum(np.abs(amps) ** 2))
    if mass <= 0.0:
        raise ValueError("cannot post-select: intermediate state has no feasible amplitude")
    return StateVector(state.n, amps / math.sqrt(mass))


@dataclass(frozen=True)
class AnsatzSpec:
    method: str
    p2: int = 1
    p1: int = 0
    lam: float | None = None
    topology: Topology = "ring"
    shared_params: bool = False
    sequential_stages: bool = False
    project_feasible: bool = False
    # "dicke" swaps the stage-one output for the W-state product; used for equivalence checks.
    intermediate: Literal["stage_one", "dicke"] = "stage_one"

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.p2 < 1:
            raise ValueError(f"p2 must be at least 1, got {self.p2}")
        if self.p1 < 0:
            raise ValueError(f"p1 must be non-negative, got {self.p1}")
        if self.lam is not None and not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.intermediate not in ("stage_one", "dicke"):
            raise ValueError(f"unknown intermediate {self.intermediate!r}")

    @property
    def stage_one_dim(self) -> int:
        if self.method != "two_step":
            return 0
        return len(layer_bounds(self.p1, self.shared_params))

    @property
    def stage_two_dim(self) -> int:
        return len(layer_bounds(self.p2, self.shared_params))

    @property
    def n_params(self) -> int:
        """Variational angles handed to the optimizer."""
        return self.stage_one_dim + self.stage_two_dim

    @property
    def n_tuned(self) -> int:
        """Angles plus the penalty weight, which only the penalty method has to tune."""
        return self.n_params + (1 if self.method == "standard_penalty" else 0)


class Ansatz:
    """A method bound to one problem, with its energy tables computed once."""

    def __init__(self, split: ProblemSplit, spec: AnsatzSpec):
        self.split, self.spec = split, spec
        self.n = split.n
        self.cost_table = tabulate(split.cost)
        self.penalty_table = tabulate(split.penalty)
        self.feasible = feasible_mask(self.n, split.groups)
        self.lam = spec.lam if spec.lam is not None else split.lam
        if spec.method == "standard_penalty":
            self.objective_table = self.cost_table + self.penalty_table.scaled(self.lam)
        else:
            self.objective_table = self.cost_table
        self.mixer: Mixer = "x" if spec.method == "standard_penalty" else XYMixer(split.groups, spec.topology)

    @property
    def dimension(self) -> int:
        return self.spec.n_params

    def bounds(self) -> list[tuple[float, float]]:
        s = self.spec
        return layer_bounds(s.p1 if s.method == "two_step" else 0, s.shared_params) + layer_bounds(s.p2, s.shared_params)

    def _split_theta(self, theta: Sequence[float]) -> tuple[Sequence[float], Sequence[float]]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dimension,):
            raise ValueError(f"expected {self.dimension} parameters, got {theta.shape}")
        k = self.spec.stage_one_dim
        return theta[:k], theta[k:]

    def initial_state(self) -> StateVector:
        if self.spec.method == "standard_penalty":
            return init_uniform(self.n)
        if self.spec.method == "xy_dicke":
            return init_one_hot_product(self.n, self.split.groups)
        return init_uniform(self.n)

    def intermediate_state(self, theta1: Sequence[float]) -> StateVector:
        """Stage-one output (two-stage method only)."""
        s = self.spec
        if s.intermediate == "dicke":
            state = init_one_hot_product(self.n, self.split.groups)
        else:
            state = init_uniform(self.n)
        layers = layers_from_vector(theta1, s.p1, s.shared_params)
        run_layers(state, self.penalty_table, layers, "x")
        if s.project_feasible:
            state = project_feasible(state, self.feasible)
        return state

    def evolve_stage_two(self, start: StateVector, theta2: Sequence[float]) -> StateVector:
        layers = layers_from_vector(theta2, self.spec.p2, self.spec.shared_params)
        return run_layers(start, self.objective_table, layers, self.mixer)

    def final_state(self, theta: Sequence[float]) -> StateVector:
        theta1, theta2 = self._split_theta(theta)
        if self.spec.method == "two_step":
            start = self.intermediate_state(theta1)
        else:
            start = self.initial_state()
        return self.evolve_stage_two(start, theta2)

    def objective(self, theta: Sequence[float]) -> float:
        return expectation(self.final_state(theta), self.objective_table)


@dataclass
class RunResult:
    method: str
    p1: int
    p2: int
    lam: float | None
    topology: str
    best_params: tuple[float, ...]
    objective: float
    expectation: float
    feasible_expectation: float
    feasibility_probability: float
    ground_state_probability: float
    approximation_ratio: float
    optimizer_evals: int
    wall_time: float
    n_params: int
    n_tuned: int
    best_bitstring: int | None
    intermediate_feasibility: float | None = None
    status: str = "ok"
    final_state: StateVector | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class FeasibleReference:
    """Feasible-restricted extremes of the objective, shared by every method."""

    z_min: int
    e_min: float
    e_max: float
    ground_mask: np.ndarray

    @classmethod
    def from_ansatz(cls, ansatz: Ansatz) -> FeasibleReference:
        z, e_min, e_max = brute_force_min(ansatz.cost_table, True, ansatz.split.groups)
        energies = ansatz.cost_table.energies
        tol = 1e-9 * max(1.0, abs(e_min))
        return cls(z, e_min, e_max, ansatz.feasible & (energies <= e_min + tol))


def state_metrics(state: StateVector, ansatz: Ansatz, ref: FeasibleReference) -> dict:
    probs = state.probabilities()
    p_feas = float(min(1.0, np.sum(probs[ansatz.feasible])))
    e = expectation(state, ansatz.cost_table)
    if p_feas > 0.0:
        e_feas = float(np.dot(probs[ansatz.feasible], ansatz.cost_table.energies[ansatz.feasible]) / p_feas)
    else:
        e_feas = math.nan
    masked = np.where(ansatz.feasible, probs, -1.0)
    return {
        "expectation": e,
        "feasible_expectation": e_feas,
        "feasibility_probability": p_feas,
        "ground_state_probability": float(min(1.0, np.sum(probs[ref.ground_mask]))),
        "approximation_ratio": approximation_ratio(e, ref.e_min, ref.e_max),
        "best_bitstring": int(np.argmax(masked)),
    }


def as_split(problem: QuboProblem | ProblemSplit, tol: float = DEFAULT_TOL) -> ProblemSplit:
    """Accept a split directly, or detect one-hot groups in a penalized QUBO."""
    if isinstance(problem, ProblemSplit):
        return problem
    groups, scale = detect_one_hot_groups(problem, tol)
    if not groups:
        raise ValueError("no one-hot structure found in the QUBO; supply groups explicitly")
    return split_cost_and_constraints(problem, groups, scale, tol)


def evaluate_method(
    problem: QuboProblem | ProblemSplit,
    spec: AnsatzSpec,
    theta: Sequence[float],
    objective: float | None = None,
    evals: int = 0,
    wall_time: float = 0.0,
) -> RunResult:
    """Metrics for a method at fixed parameters, with no optimization."""
    ansatz = Ansatz(as_split(problem), spec)
    return _result(ansatz, FeasibleReference.from_ansatz(ansatz), np.asarray(theta, dtype=float), objective, evals, wall_time)


def _result(ansatz: Ansatz, ref: FeasibleReference, theta: np.ndarray, objective: float | None, evals: int, wall_time: float) -> RunResult:
    spec = ansatz.spec
    inter_feas = None
    if spec.method == "two_step":
        theta1, theta2 = ansatz._split_theta(theta)
        inter = ansatz.intermediate_state(theta1)
        inter_feas = float(min(1.0, np.sum(inter.probabilities()[ansatz.feasible])))
        final = ansatz.evolve_stage_two(inter, theta2)
    else:
        final = ansatz.final_state(theta)
    if objective is None:
        objective = expectation(final, ansatz.objective_table)
    metrics = state_metrics(final, ansatz, ref)
    return RunResult(
        method=spec.method,
        p1=spec.p1 if spec.method == "two_step" else 0,
        p2=spec.p2,
        lam=ansatz.lam if spec.method == "standard_penalty" else None,
        topology=spec.topology,
        best_params=tuple(float(t) for t in theta),
        objective=float(objective),
        optimizer_evals=evals,
        wall_time=wall_time,
        n_params=spec.n_params,
        n_tuned=spec.n_tuned,
        intermediate_feasibility=inter_feas,
        final_state=final,
        **metrics,
    )


def _failed(spec: AnsatzSpec, lam: float | None, message: str, evals: int, wall_time: float) -> RunResult:
    nan = math.nan
    return RunResult(
        method=spec.method,
        p1=spec.p1 if spec.method == "two_step" else 0,
        p2=spec.p2,
        lam=lam if spec.method == "standard_penalty" else None,
        topology=spec.topology,
        best_params=(),
        objective=nan,
        expectation=nan,
        feasible_expectation=nan,
        feasibility_probability=nan,
        ground_state_probability=nan,
        approximation_ratio=nan,
        optimizer_evals=evals,
        wall_time=wall_time,
        n_params=spec.n_params,
        n_tuned=spec.n_tuned,
        best_bitstring=None,
        status=f"failed: {message}",
    )


def run_method(
    problem: QuboProblem | ProblemSplit,
    spec: AnsatzSpec,
    opt: OptimizerOptions = OptimizerOptions(),
) -> RunResult:
    """Optimize the method's angles and report metrics of the optimized state.

    The penalty method minimizes ``<C + lam P>``; the other two minimize
    ``<C>``. With ``spec.sequential_stages`` the two-stage method first
    minimizes ``<P>`` over the stage-one angles, freezes them, then minimizes
    ``<C>`` over the stage-two angles. Optimizer failures are reported through
    ``RunResult.status``.
    """
    ansatz = Ansatz(as_split(problem), spec)
    ref = FeasibleReference.from_ansatz(ansatz)
    start = time.perf_counter()
    evals = 0
    try:
        if spec.method == "two_step" and spec.sequential_stages:
            theta, objective, evals = _optimize_sequential(ansatz, opt)
        else:
            res = minimize(ansatz.objective, ansatz.dimension, opt.with_bounds(ansatz.bounds()))
            theta, objective, evals = res.x, res.fun, res.evals
    except (OptimizerError, ValueError, FloatingPointError) as exc:
        log.warning("%s run failed: %s", spec.method, exc)
        return _failed(spec, ansatz.lam, str(exc), evals, time.perf_counter() - start)
    wall = time.perf_counter() - start
    return _result(ansatz, ref, theta, objective, evals, wall)


def _optimize_sequential(ansatz: Ansatz, opt: OptimizerOptions) -> tuple[np.ndarray, float, int]:
    spec = ansatz.spec
    k = spec.stage_one_dim
    bounds = ansatz.bounds()

    def stage_one_objective(theta1: np.ndarray) -> float:
        return expectation(ansatz.intermediate_state(theta1), ansatz.penalty_table)

    first = minimize(stage_one_objective, k, opt.with_bounds(bounds[:k]))
    inter = ansatz.intermediate_state(first.x)

    def stage_two_objective(theta2: np.ndarray) -> float:
        return expectation(ansatz.evolve_stage_two(inter.copy(), theta2), ansatz.objective_table)

    second = minimize(stage_two_objective, spec.stage_two_dim, opt.with_bounds(bounds[k:]))
    theta = np.concatenate([first.x, second.x])
    return theta, second.fun, first.evals + second.evals
