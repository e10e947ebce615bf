"""Exact statevector kernels.

Gate functions update ``state.amplitudes`` in place and return the same
``StateVector`` so calls can be chained; use :meth:`StateVector.copy` to
keep an earlier state around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np

from .hamiltonian import MAX_QUBITS, EnergyTable, bitstring, feasible_mask
from .qubo import OneHotGroup, validate_groups

Topology = Literal["ring", "complete"]
TOPOLOGIES: tuple[str, ...] = ("ring", "complete")


@dataclass(eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n,):
            raise ValueError(f"state for n={self.n} needs {1 << self.n} amplitudes, got {self.amplitudes.shape}")

    def copy(self) -> StateVector:
        return StateVector(self.n, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.probabilities())))

    @classmethod
    def basis(cls, n: int, z: int) -> StateVector:
        amps = np.zeros(1 << n, dtype=np.complex128)
        amps[z] = 1.0
        return cls(n, amps)


def _check_n(n: int, cap: int = MAX_QUBITS) -> None:
    if not 1 <= n <= cap:
        raise ValueError(f"qubit count must be in [1, {cap}], got {n}")


def init_uniform(n: int) -> StateVector:
    _check_n(n)
    dim = 1 << n
    return StateVector(n, np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128))


def init_one_hot_product(n: int, groups: Sequence[OneHotGroup]) -> StateVector:
    """Product of W states, one per group; ungrouped qubits start in ``|0>``.

    Amplitudes are assigned directly rather than through a preparation circuit.
    """
    _check_n(n)
    validate_groups(groups, n)
    # Ungrouped variables are pinned to 0.
    grouped = 0
    for g in groups:
        grouped |= g.mask
    idx = np.arange(1 << n, dtype=np.int64)
    support = feasible_mask(n, groups) & ((idx & ~grouped) == 0)
    count = int(np.count_nonzero(support))
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[support] = 1.0 / math.sqrt(count)
    return StateVector(n, amps)


def apply_phase_separator(state: StateVector, table: EnergyTable, gamma: float) -> StateVector:
    """Multiply each amplitude by ``exp(-i gamma E(z))``."""
    if table.n != state.n:
        raise ValueError(f"table has n={table.n} but state has n={state.n}")
    if gamma != 0.0:
        state.amplitudes *= np.exp(-1j * gamma * table.energies)
    return state


def _split_axis(amps: np.ndarray, n: int, q: int) -> np.ndarray:
    # Axis 1 of the view is bit q.
    return amps.reshape(1 << (n - 1 - q), 2, 1 << q)


def apply_x_rotation(state: StateVector, qubit: int, beta: float) -> StateVector:
    """``exp(-i beta X)`` on a single qubit."""
    if not 0 <= qubit < state.n:
        raise ValueError(f"qubit {qubit} out of range for n={state.n}")
    c, s = math.cos(beta), -1j * math.sin(beta)
    v = _split_axis(state.amplitudes, state.n, qubit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    v[:, 0, :] = c * a0 + s * a1
    v[:, 1, :] = c * a1 + s * a0
    return state


def apply_x_mixer(state: StateVector, beta: float) -> StateVector:
    """``exp(-i beta sum_q X_q)``, applied qubit by qubit."""
    if beta == 0.0:
        return state
    for q in range(state.n):
        apply_x_rotation(state, q, beta)
    return state


def apply_xy_pair(state: StateVector, i: int, j: int, beta: float) -> StateVector:
    """``exp(-i beta (X_i X_j + Y_i Y_j) / 2)``.

    Only the ``|01>``/``|10>`` amplitudes of the pair mix; ``|00>`` and ``|11>``
    are left alone, so the pair's Hamming weight is conserved.
    """
    if i == j:
        raise ValueError("XY pair needs two distinct qubits")
    n = state.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"pair ({i}, {j}) out of range for n={n}")
    lo, hi = (i, j) if i < j else (j, i)
    c, s = math.cos(beta), -1j * math.sin(beta)
    # Axes: 1 -> bit hi, 3 -> bit lo.
    v = state.amplitudes.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    a = v[:, 0, :, 1, :].copy()
    b = v[:, 1, :, 0, :]
    v[:, 0, :, 1, :] = c * a + s * b
    v[:, 1, :, 0, :] = c * b + s * a
    return state


def xy_pairs(group: OneHotGroup, topology: Topology = "ring") -> list[tuple[int, int]]:
    """Pair order used by the XY mixer for one group."""
    idx = group.indices
    k = len(idx)
    if topology == "ring":
        if k == 2:
            return [(idx[0], idx[1])]
        return [(idx[m], idx[(m + 1) % k]) for m in range(k)]
    if topology == "complete":
        return [(idx[a], idx[b]) for a in range(k) for b in range(a + 1, k)]
    raise ValueError(f"unknown topology {topology!r}; expected one of {TOPOLOGIES}")


def apply_xy_mixer(
    state: StateVector,
    groups: Sequence[OneHotGroup],
    beta: float,
    topology: Topology = "ring",
) -> StateVector:
    """First-order product of XY pair gates over each group.

    This is not the exact exponential of the summed XY Hamiltonian, but every
    factor conserves each group's Hamming weight.
    """
    validate_groups(groups, state.n)
    if beta == 0.0:
        return state
    for g in groups:
        for i, j in xy_pairs(g, topology):
            apply_xy_pair(state, i, j, beta)
    return state


def expectation(state: StateVector, table: EnergyTable) -> float:
    if table.n != state.n:
        raise ValueError(f"table has n={table.n} but state has n={state.n}")
    return float(np.dot(state.probabilities(), table.energies))


def probability_mass(state: StateVector, predicate: Callable[[int], bool] | np.ndarray) -> float:
    """Total probability of basis states selected by ``predicate``.

    ``predicate`` is either a boolean mask over basis indices or a callable on
    the integer index.
    """
    probs = state.probabilities()
    if callable(predicate):
        mask = np.fromiter((bool(predicate(z)) for z in range(probs.shape[0])), dtype=bool, count=probs.shape[0])
    else:
        mask = np.asarray(predicate, dtype=bool)
    return float(min(1.0, max(0.0, np.sum(probs[mask]))))


def sample(state: StateVector, shots: int, seed: int) -> dict[str, int]:
    """Draw ``shots`` measurement outcomes; keys are binary renderings, variable 0 rightmost."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return {bitstring(int(z), state.n): int(counts[z]) for z in np.flatnonzero(counts)}


def dump_state(state: StateVector, path: str | Path, threshold: float = 0.0) -> None:
    """Debug listing of ``index re im`` lines for amplitudes with modulus above ``threshold``."""
    lines = []
    for z, a in enumerate(state.amplitudes):
        if abs(a) > threshold:
            lines.append(f"{z} {float(a.real)!r} {float(a.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
