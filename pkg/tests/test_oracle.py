import itertools
import math

import numpy as np
import pytest
from scipy.linalg import expm

from twostep_qaoa.hamiltonian import EnergyTable, tabulate
from twostep_qaoa.oracle import (
    approximation_ratio,
    brute_force_min,
    dense_gate_oracle,
    enumerate_feasible,
    expm_taylor,
    xy_generator,
)
from twostep_qaoa.qubo import OneHotGroup, one_hot_penalty


def test_brute_force_zero_table():
    assert brute_force_min(EnergyTable(3, np.zeros(8))) == (0, 0.0, 0.0)


def test_brute_force_read_off():
    z, lo, hi = brute_force_min(EnergyTable(2, np.array([3.0, 1.0, 2.0, 0.0])))
    assert (z, lo, hi) == (0b11, 0.0, 3.0)


def test_brute_force_penalty_min_on_feasible():
    t = tabulate(one_hot_penalty([0, 1, 2]))
    z, lo, _ = brute_force_min(t)
    assert lo == 0.0 and bin(z).count("1") == 1


def test_brute_force_ties_smallest_index():
    z, _, _ = brute_force_min(EnergyTable(2, np.array([1.0, 0.0, 0.0, 0.0])))
    assert z == 1


def test_brute_force_feasible_only():
    e = np.arange(8, dtype=float)[::-1].copy()  # 111 is the global minimum but infeasible
    z, lo, hi = brute_force_min(EnergyTable(3, e), True, [OneHotGroup([0, 1, 2])])
    assert z == 0b100 and lo == 3.0 and hi == 6.0


def test_brute_force_feasible_empty():
    # A group pointing past the register can never be satisfied.
    with pytest.raises(ValueError):
        brute_force_min(EnergyTable(2, np.zeros(4)), True, [OneHotGroup([0, 5])])


def test_enumerate_feasible_product():
    groups = [OneHotGroup([0, 1]), OneHotGroup([2, 3])]
    assert enumerate_feasible(4, groups) == sorted(int(s, 2) for s in ("0101", "0110", "1001", "1010"))
    assert len(enumerate_feasible(5, groups)) == 8
    assert len(enumerate_feasible(5, groups, free_vars=False)) == 4


@pytest.mark.parametrize("e, expected", [(0.0, 1.0), (4.0, 0.0), (2.0, 0.5), (-1e-15, 1.0), (4.5, 0.0)])
def test_approximation_ratio(e, expected):
    assert approximation_ratio(e, 0.0, 4.0) == pytest.approx(expected)


def test_approximation_ratio_flat_range():
    assert approximation_ratio(3.0, 3.0, 3.0) == 1.0


def test_approximation_ratio_monotone():
    values = [approximation_ratio(e, -1.0, 2.0) for e in np.linspace(-1, 2, 50)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_dense_oracle_zero_angle():
    for kind, q in (("x", (0,)), ("xy", (0, 1))):
        assert np.allclose(dense_gate_oracle(kind, 0.0, 2, q), np.eye(4))


def test_dense_x_half_pi():
    u = dense_gate_oracle("x", math.pi / 2, 1, (0,))
    assert np.allclose(u, [[0, -1j], [-1j, 0]], atol=1e-13)


def test_dense_diagonal_is_elementwise_phase(rng):
    t = EnergyTable(3, rng.normal(size=8) * 4)
    u = dense_gate_oracle("diagonal", 0.9, 3, table=t)
    assert np.allclose(u, np.diag(np.exp(-0.9j * t.energies)), atol=1e-12)


def test_expm_taylor_matches_scipy(rng):
    for n in (1, 2, 3, 4):
        h = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
        h = (h + h.conj().T) / 2
        for angle in (0.1, 2.0, 11.0):
            assert np.max(np.abs(expm_taylor(-1j * angle * h) - expm(-1j * angle * h))) <= 1e-11


def test_dense_oracles_unitary(rng):
    t = EnergyTable(4, rng.normal(size=16))
    for angle in rng.uniform(-6, 6, size=5):
        for kind, q in (("x", (2,)), ("xy", (1, 3)), ("diagonal", ())):
            u = dense_gate_oracle(kind, angle, 4, q, t)
            assert np.max(np.abs(u @ u.conj().T - np.eye(16))) <= 1e-10


def test_xy_generator_structure():
    h = xy_generator(2, 0, 1).real
    assert np.allclose(h, [[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]])


def test_dense_oracle_size_cap():
    with pytest.raises(ValueError):
        dense_gate_oracle("x", 0.1, 5, (0,))


def _independent_feasible(n, groups):
    # Per-group choice lists combined with itertools.product; free variables take both values.
    grouped = {i for g in groups for i in g.indices}
    axes = [[(i,) for i in g.indices] for g in groups]
    axes += [[(), (i,)] for i in range(n) if i not in grouped]
    out = []
    for combo in itertools.product(*axes):
        z = 0
        for ones in combo:
            for i in ones:
                z |= 1 << i
        out.append(z)
    return out


def test_brute_force_matches_product_enumeration(rng):
    for _ in range(20):
        n = int(rng.integers(3, 10))
        perm = rng.permutation(n)
        sizes = []
        left = n
        while left >= 2 and len(sizes) < 3:
            s = int(rng.integers(2, min(left, 4) + 1))
            sizes.append(s)
            left -= s
        groups, k = [], 0
        for s in sizes:
            groups.append(OneHotGroup(sorted(int(i) for i in perm[k:k + s])))
            k += s
        t = EnergyTable(n, rng.normal(size=1 << n))
        z, lo, hi = brute_force_min(t, True, groups)
        feas = _independent_feasible(n, groups)
        vals = [t.energies[f] for f in feas]
        assert lo == min(vals) and hi == max(vals)
        assert z == min(f for f in feas if t.energies[f] == lo)
