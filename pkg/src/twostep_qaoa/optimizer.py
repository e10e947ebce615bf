"""Derivative-free minimization: Nelder-Mead, seeded multi-start and lattice search."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Sequence

import numpy as np

Objective = Callable[[np.ndarray], float]
Bounds = Sequence[tuple[float, float]]

GRID_CAP = 2_000_000

# Reflection, expansion, contraction and shrink coefficients.
ALPHA, GAMMA, RHO, SIGMA = 1.0, 2.0, 0.5, 0.5


class OptimizerError(RuntimeError):
    """The objective returned a non-finite value or the options are unusable."""


@dataclass(frozen=True)
class OptimizerOptions:
    algorithm: Literal["nelder_mead", "grid"] = "nelder_mead"
    max_evals: int = 2000
    f_tol: float = 1e-10
    x_tol: float = 1e-8
    n_starts: int = 4
    seed: int = 0
    bounds: tuple[tuple[float, float], ...] | None = None
    initial_step: float = 0.1
    grid_resolution: int = 21

    def __post_init__(self) -> None:
        if self.algorithm not in ("nelder_mead", "grid"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        if not (self.f_tol > 0 and self.x_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.n_starts < 1:
            raise ValueError("n_starts must be at least 1")
        if self.bounds is not None:
            for lo, hi in self.bounds:
                if not lo < hi:
                    raise ValueError(f"bad bound ({lo}, {hi}); need lo < hi")

    def with_bounds(self, bounds: Bounds) -> OptimizerOptions:
        return replace(self, bounds=tuple((float(lo), float(hi)) for lo, hi in bounds))


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    evals: int
    starts: list[tuple[np.ndarray, float]] = field(default_factory=list)


def fold(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Mirror ``x`` back into ``[lo, hi]`` across whichever faces it crossed."""
    width = hi - lo
    y = np.mod(x - lo, 2 * width)
    return lo + np.where(y > width, 2 * width - y, y)


class _Counted:
    """Folds points into bounds, counts calls and rejects non-finite values."""

    def __init__(self, f: Objective, lo: np.ndarray | None, hi: np.ndarray | None):
        self.f, self.lo, self.hi = f, lo, hi
        self.evals = 0

    def inside(self, x: np.ndarray) -> np.ndarray:
        if self.lo is None:
            return x
        return fold(x, self.lo, self.hi)

    def __call__(self, x: np.ndarray) -> float:
        self.evals += 1
        value = float(self.f(self.inside(x)))
        if not math.isfinite(value):
            raise OptimizerError(f"objective returned {value} at x={x.tolist()}")
        return value


def _bounds_arrays(bounds: Bounds | None, dim: int) -> tuple[np.ndarray | None, np.ndarray | None]:
    if bounds is None:
        return None, None
    if len(bounds) != dim:
        raise OptimizerError(f"got {len(bounds)} bounds for a {dim}-dimensional problem")
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    return lo, hi


def nelder_mead(f: Objective, x0: Sequence[float], opts: OptimizerOptions = OptimizerOptions()) -> tuple[np.ndarray, float, int]:
    """Minimize ``f`` from ``x0`` with the downhill simplex method.

    Trial points outside ``opts.bounds`` are mirrored back in before
    evaluation, so ``f`` never sees an out-of-bounds point and the simplex
    cannot collapse onto a face of the box. Stops when every vertex lies within
    ``x_tol`` (max-norm) of the best one, when the spread of simplex values
    (and of the value at the simplex centre) is at most ``f_tol``, or when
    ``max_evals`` is reached.

    Returns ``(x_best, f_best, evals)``.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    dim = x0.size
    lo, hi = _bounds_arrays(opts.bounds, dim)
    fc = _Counted(f, lo, hi)
    x0 = fc.inside(x0)

    simplex = [x0]
    for k in range(dim):
        step = opts.initial_step
        if lo is not None:
            step *= hi[k] - lo[k]
        x = x0.copy()
        x[k] += step
        if hi is not None and x[k] > hi[k]:
            x[k] = x0[k] - step
        simplex.append(x)
    values = [fc(x) for x in simplex]

    while fc.evals < opts.max_evals:
        order = sorted(range(dim + 1), key=lambda i: values[i])
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        if max(np.max(np.abs(x - simplex[0])) for x in simplex[1:]) <= opts.x_tol:
            break
        if values[-1] - values[0] <= opts.f_tol:
            # A flat simplex can straddle a minimum symmetrically; probe its centre before stopping.
            xm = np.mean(simplex, axis=0)
            fm = fc(xm)
            if max(values[-1], fm) - min(values[0], fm) <= opts.f_tol:
                break
            if fm < values[-1]:
                simplex[-1], values[-1] = xm, fm
            continue

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + ALPHA * (centroid - worst)
        fr = fc(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            xe = centroid + GAMMA * (xr - centroid)
            fe = fc(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            # Outside contraction.
            xc = centroid + RHO * (xr - centroid)
            fcv = fc(xc)
            if fcv <= fr:
                simplex[-1], values[-1] = xc, fcv
                continue
        else:
            xc = centroid + RHO * (worst - centroid)
            fcv = fc(xc)
            if fcv < values[-1]:
                simplex[-1], values[-1] = xc, fcv
                continue
        best = simplex[0]
        for k in range(1, dim + 1):
            if fc.evals >= opts.max_evals:
                break
            simplex[k] = best + SIGMA * (simplex[k] - best)
            values[k] = fc(simplex[k])

    k = int(np.argmin(values))
    return fc.inside(simplex[k]).copy(), float(values[k]), fc.evals


def multi_start(f: Objective, dim: int, opts: OptimizerOptions) -> OptimizeResult:
    """Run Nelder-Mead from ``opts.n_starts`` seeded uniform starts and keep the best.

    Starts are drawn in order from ``numpy.random.default_rng(opts.seed)``;
    the earliest start wins ties.
    """
    if opts.bounds is None:
        raise OptimizerError("multi_start needs bounds to draw starting points")
    lo, hi = _bounds_arrays(opts.bounds, dim)
    rng = np.random.default_rng(opts.seed)
    starts = [rng.uniform(lo, hi) for _ in range(opts.n_starts)]
    best: OptimizeResult | None = None
    total = 0
    history = []
    for x0 in starts:
        x, fun, evals = nelder_mead(f, x0, opts)
        total += evals
        history.append((x, fun))
        if best is None or fun < best.fun:
            best = OptimizeResult(x, fun, 0)
    assert best is not None
    best.evals = total
    best.starts = history
    return best


def lattice_axes(bounds: Bounds, resolution: int) -> list[np.ndarray]:
    """Per-dimension lattice coordinates, endpoints included.

    A resolution of 1 degenerates to the lower endpoint alone.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    if resolution == 1:
        return [np.array([float(lo)]) for lo, _ in bounds]
    return [np.linspace(lo, hi, resolution) for lo, hi in bounds]


def grid_search(
    f: Objective,
    dim: int,
    resolution: int,
    bounds: Bounds,
    cap: int = GRID_CAP,
) -> tuple[np.ndarray, float]:
    """Exhaustive lattice minimum; ties go to the lexicographically first lattice index."""
    if len(bounds) != dim:
        raise ValueError(f"got {len(bounds)} bounds for a {dim}-dimensional grid")
    if resolution**dim > cap:
        raise ValueError(f"grid of {resolution}^{dim} points exceeds the cap of {cap}")
    axes = lattice_axes(bounds, resolution)
    best_x: np.ndarray | None = None
    best_f = math.inf
    for point in itertools.product(*axes):
        x = np.array(point)
        value = float(f(x))
        if value < best_f:
            best_x, best_f = x, value
    if best_x is None:
        raise OptimizerError("objective was never finite on the grid")
    return best_x, best_f


def minimize(f: Objective, dim: int, opts: OptimizerOptions) -> OptimizeResult:
    """Dispatch on ``opts.algorithm``."""
    if dim == 0:
        return OptimizeResult(np.zeros(0), float(f(np.zeros(0))), 1)
    if opts.algorithm == "grid":
        if opts.bounds is None:
            raise OptimizerError("grid search needs bounds")
        x, fun = grid_search(f, dim, opts.grid_resolution, opts.bounds)
        return OptimizeResult(x, fun, opts.grid_resolution**dim)
    return multi_start(f, dim, opts)
