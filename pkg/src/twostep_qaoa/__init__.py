"""Statevector QAOA engine with a two-stage constraint/objective pipeline."""

__version__ = "0.1.0"

from .engine import (
    METHODS,
    AnsatzSpec,
    LayerParams,
    RunResult,
    evaluate_method,
    run_layers,
    run_method,
    stage_one,
    stage_two,
    two_step_objective,
)
from .hamiltonian import EnergyTable, energy_of, tabulate, violation_count
from .optimizer import OptimizerOptions, grid_search, multi_start, nelder_mead
from .oracle import approximation_ratio, brute_force_min
from .qubo import (
    OneHotGroup,
    ProblemSplit,
    QuboProblem,
    build_qubo,
    detect_one_hot_groups,
    make_split,
    one_hot_penalty,
    split_cost_and_constraints,
)
from .simulator import StateVector, init_one_hot_product, init_uniform

__all__ = [
    "METHODS",
    "AnsatzSpec",
    "EnergyTable",
    "LayerParams",
    "OneHotGroup",
    "OptimizerOptions",
    "ProblemSplit",
    "QuboProblem",
    "RunResult",
    "StateVector",
    "approximation_ratio",
    "brute_force_min",
    "build_qubo",
    "detect_one_hot_groups",
    "energy_of",
    "evaluate_method",
    "grid_search",
    "init_one_hot_product",
    "init_uniform",
    "make_split",
    "multi_start",
    "nelder_mead",
    "one_hot_penalty",
    "run_layers",
    "run_method",
    "split_cost_and_constraints",
    "stage_one",
    "stage_two",
    "tabulate",
    "two_step_objective",
    "violation_count",
]
