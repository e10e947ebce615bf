"""Diagonal Hamiltonians tabulated over the computational basis.

Bit ``i`` of a basis index is the value of variable ``i`` (variable 0 is the
least significant bit). The same convention is used by the simulator,
sampling and bitstring rendering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qubo import OneHotGroup, QuboProblem

MAX_QUBITS = 24


@dataclass(frozen=True, eq=False)
class EnergyTable:
    """Energies ``E(z)`` for all ``2**n`` basis states."""

    n: int
    energies: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.energies, dtype=np.float64)
        if e.shape != (1 << self.n,):
            raise ValueError(f"energy table for n={self.n} needs length {1 << self.n}, got {e.shape}")
        if not np.all(np.isfinite(e)):
            raise ValueError("energy table has non-finite entries")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)

    def __len__(self) -> int:
        return self.energies.shape[0]

    def __add__(self, other: EnergyTable) -> EnergyTable:
        return EnergyTable(self.n, self.energies + other.energies)

    def scaled(self, factor: float) -> EnergyTable:
        return EnergyTable(self.n, factor * self.energies)


def bitstring(z: int, n: int) -> str:
    """Binary rendering of basis index ``z``; variable 0 is the rightmost character."""
    return format(z, f"0{n}b")


def parse_bitstring(s: str) -> int:
    return int(s, 2)


def energy_of(q: QuboProblem, z: int | str | Sequence[int]) -> float:
    return q.energy(z)


def bit_columns(n: int) -> np.ndarray:
    """``(n, 2**n)`` array of 0/1 bits, row ``i`` holds variable ``i`` for every basis index."""
    z = np.arange(1 << n, dtype=np.int64)
    return ((z[None, :] >> np.arange(n, dtype=np.int64)[:, None]) & 1).astype(np.uint8)


def tabulate(q: QuboProblem, cap: int = MAX_QUBITS) -> EnergyTable:
    if q.n > cap:
        raise ValueError(f"n={q.n} exceeds the statevector cap of {cap} qubits")
    n = q.n
    dim = 1 << n
    energies = np.full(dim, q.offset, dtype=np.float64)
    idx = np.arange(dim, dtype=np.int64)
    # Each term adds its coefficient to the basis states whose selected bits are all set.
    for i, c in q.linear.items():
        energies += c * ((idx >> i) & 1)
    for (i, j), c in q.quadratic.items():
        energies += c * ((idx >> i) & (idx >> j) & 1)
    return EnergyTable(n, energies)


def group_weights(n: int, group: OneHotGroup) -> np.ndarray:
    """Number of set bits of ``group`` in each basis index."""
    idx = np.arange(1 << n, dtype=np.int64)
    w = np.zeros(1 << n, dtype=np.int64)
    for i in group.indices:
        w += (idx >> i) & 1
    return w


def violation_count(groups: Sequence[OneHotGroup], z: int | str | Sequence[int]) -> int:
    """Number of groups whose weight in ``z`` differs from 1."""
    if isinstance(z, str):
        z = parse_bitstring(z)
    if isinstance(z, (int, np.integer)):
        return sum(1 for g in groups if bin(int(z) & g.mask).count("1") != 1)
    bits = [int(b) for b in z]
    return sum(1 for g in groups if sum(bits[i] for i in g.indices) != 1)


def violation_table(n: int, groups: Sequence[OneHotGroup]) -> np.ndarray:
    counts = np.zeros(1 << n, dtype=np.int64)
    for g in groups:
        counts += group_weights(n, g) != 1
    return counts


def feasible_mask(n: int, groups: Sequence[OneHotGroup]) -> np.ndarray:
    """Boolean mask of basis states satisfying every one-hot group."""
    return violation_table(n, groups) == 0
