"""Classical ground truth: exhaustive minima, feasible enumeration, ratios, dense gates."""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .hamiltonian import MAX_QUBITS, EnergyTable, feasible_mask
from .qubo import OneHotGroup, validate_groups

DENSE_MAX_QUBITS = 4

_I2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


class InfeasibleError(ValueError):
    """No bitstring satisfies the one-hot groups."""


def brute_force_min(
    table: EnergyTable,
    feasible_only: bool = False,
    groups: Sequence[OneHotGroup] = (),
) -> tuple[int, float, float]:
    """Exhaustive ``(z_min, e_min, e_max)``; ties go to the smallest ``z``."""
    if table.n > MAX_QUBITS:
        raise ValueError(f"n={table.n} exceeds {MAX_QUBITS}")
    e = table.energies
    if feasible_only:
        validate_groups(groups, table.n)
        mask = feasible_mask(table.n, groups)
        if not mask.any():
            raise InfeasibleError("no bitstring satisfies all one-hot groups")
        candidates = np.flatnonzero(mask)
        sub = e[candidates]
        # argmin returns the first occurrence, and candidates are ascending.
        k = int(np.argmin(sub))
        return int(candidates[k]), float(sub[k]), float(sub.max())
    k = int(np.argmin(e))
    return k, float(e[k]), float(e.max())


def enumerate_feasible(n: int, groups: Sequence[OneHotGroup], free_vars: bool = True) -> list[int]:
    """All bitstrings with exactly one set bit per group, built as a product over groups.

    Variables outside every group range over both values unless ``free_vars``
    is false, in which case they are fixed at 0.
    """
    validate_groups(groups, n)
    grouped = {i for g in groups for i in g.indices}
    free = [i for i in range(n) if i not in grouped]
    choices: list[list[int]] = [[1 << i for i in g.indices] for g in groups]
    if free_vars:
        choices += [[0, 1 << i] for i in free]
    out = sorted(sum(combo) for combo in itertools.product(*choices))
    return out


def approximation_ratio(e: float, e_min: float, e_max: float) -> float:
    """``(e_max - e) / (e_max - e_min)`` clamped to ``[0, 1]``; 1 when the range is empty."""
    span = e_max - e_min
    if span <= 0.0:
        return 1.0
    return min(1.0, max(0.0, (e_max - e) / span))


# --- dense oracles (tests only) -------------------------------------------


def embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Single-qubit ``op`` on ``qubit`` of an ``n``-qubit register (qubit 0 least significant)."""
    out = np.array([[1.0]], dtype=np.complex128)
    for q in reversed(range(n)):
        out = np.kron(out, op if q == qubit else _I2)
    return out


def x_generator(n: int, qubit: int) -> np.ndarray:
    return embed(_X, qubit, n)


def xy_generator(n: int, i: int, j: int) -> np.ndarray:
    """``(X_i X_j + Y_i Y_j) / 2``."""
    if i == j:
        raise ValueError("XY generator needs distinct qubits")
    xx = embed(_X, i, n) @ embed(_X, j, n)
    yy = embed(_Y, i, n) @ embed(_Y, j, n)
    return 0.5 * (xx + yy)


def diagonal_generator(table: EnergyTable) -> np.ndarray:
    return np.diag(table.energies.astype(np.complex128))


def expm_taylor(a: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Matrix exponential by scaling, truncated Taylor series and repeated squaring."""
    norm = np.abs(a).sum(axis=0).max() if a.size else 0.0
    squarings = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    b = a / (2**squarings)
    result = np.eye(a.shape[0], dtype=np.complex128)
    term = np.eye(a.shape[0], dtype=np.complex128)
    k = 1
    while True:
        term = term @ b / k
        result = result + term
        if np.abs(term).max() < tol * 1e-3 or k > 60:
            break
        k += 1
    for _ in range(squarings):
        result = result @ result
    return result


def dense_gate_oracle(
    kind: str,
    angle: float,
    n: int,
    qubits: Sequence[int] = (),
    table: EnergyTable | None = None,
) -> np.ndarray:
    """Dense ``exp(-i angle H)`` for ``kind`` in ``{"x", "xy", "diagonal"}``.

    ``"x"`` takes ``qubits=(i,)``, ``"xy"`` takes ``qubits=(i, j)`` and
    ``"diagonal"`` takes ``table``.
    """
    if n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense oracle limited to n <= {DENSE_MAX_QUBITS}, got {n}")
    if kind == "x":
        (q,) = qubits
        h = x_generator(n, q)
    elif kind == "xy":
        i, j = qubits
        h = xy_generator(n, i, j)
    elif kind == "diagonal":
        if table is None or table.n != n:
            raise ValueError("diagonal oracle needs a table of matching size")
        h = diagonal_generator(table)
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return expm_taylor(-1j * angle * h)
