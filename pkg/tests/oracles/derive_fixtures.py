"""Recompute frozen test fixtures with dense matrices and scipy's expm.

Nothing here touches the package's statevector kernels; run it by hand
(``python tests/oracles/derive_fixtures.py``) and paste values into tests.
"""

import itertools

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])


def op(single, q, n):
    out = np.array([[1.0 + 0j]])
    for k in reversed(range(n)):
        out = np.kron(out, single if k == q else I2)
    return out


def energies(n, linear, quadratic, offset=0.0):
    e = np.full(2**n, offset)
    for z in range(2**n):
        bits = [(z >> i) & 1 for i in range(n)]
        e[z] += sum(c * bits[i] for i, c in linear.items())
        e[z] += sum(c * bits[i] * bits[j] for (i, j), c in quadratic.items())
    return e


def penalty(n, groups):
    e = np.zeros(2**n)
    for z in range(2**n):
        for g in groups:
            e[z] += (sum((z >> i) & 1 for i in g) - 1) ** 2
    return e


def x_mixer(n, beta):
    u = np.eye(2**n, dtype=complex)
    for q in range(n):
        u = expm(-1j * beta * op(X, q, n)) @ u
    return u


def xy_mixer(n, groups, beta, topology="ring"):
    u = np.eye(2**n, dtype=complex)
    for g in groups:
        k = len(g)
        if topology == "ring":
            pairs = [(g[0], g[1])] if k == 2 else [(g[m], g[(m + 1) % k]) for m in range(k)]
        else:
            pairs = list(itertools.combinations(g, 2))
        for i, j in pairs:
            h = 0.5 * (op(X, i, n) @ op(X, j, n) + op(Y, i, n) @ op(Y, j, n))
            u = expm(-1j * beta * h) @ u
    return u


def feasible(n, groups):
    return np.array([all(sum((z >> i) & 1 for i in g) == 1 for g in groups) for z in range(2**n)])


def grid(f, res=201):
    gs = np.linspace(0, 2 * np.pi, res)
    bs = np.linspace(0, np.pi, res)
    best = (np.inf, None)
    for g in gs:
        for b in bs:
            v = f(g, b)
            if v < best[0]:
                best = (v, (g, b))
    return best


if __name__ == "__main__":
    # Stage one on a single group of three: minimize <P> from the uniform state.
    n, groups = 3, [(0, 1, 2)]
    P = penalty(n, groups)
    mask = feasible(n, groups)
    uniform = np.full(2**n, 2 ** (-n / 2), dtype=complex)

    def stage1(g, b):
        return x_mixer(n, b) @ (np.exp(-1j * g * P) * uniform)

    val, (g, b) = grid(lambda g, b: float(np.abs(stage1(g, b)) ** 2 @ P))
    psi = stage1(g, b)
    print("stage-one grid min <P>", repr(val), "at", g, b)
    print("stage-one feasibility at grid min", repr(float(np.sum(np.abs(psi[mask]) ** 2))))
    best_feas = max(float(np.sum(np.abs(stage1(g, b)[mask]) ** 2)) for g in np.linspace(0, 2 * np.pi, 201) for b in np.linspace(0, np.pi, 201))
    print("stage-one max feasibility on grid", repr(best_feas))

    # One-qubit closed form check: E = [0, 1], p = 1.
    E = np.array([0.0, 1.0])
    for g, b in [(0.3, 0.7), (1.1, 2.0)]:
        psi = x_mixer(1, b) @ (np.exp(-1j * g * E) * np.full(2, 2**-0.5, dtype=complex))
        print("1-qubit", g, b, float(np.abs(psi) ** 2 @ E), "plus form", 0.5 + 0.5 * np.sin(2 * b) * np.sin(g), "minus form", 0.5 - 0.5 * np.sin(2 * b) * np.sin(g))


def propagator(h):
    """beta -> exp(-i beta h) via one eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return lambda beta: (v * np.exp(-1j * beta * w)) @ v.conj().T


def six_qubit_fixtures():
    from twostep_qaoa.experiment import GeneratorSpec, generate_instance

    cost, groups_obj = generate_instance(GeneratorSpec((3, 3), seed=5))
    groups = [g.indices for g in groups_obj]
    n, lam = 6, 2.0
    C = energies(n, dict(cost.linear), dict(cost.quadratic), cost.offset)
    P = penalty(n, groups)
    mask = feasible(n, groups)
    print("n=6 feasible e_min, e_max", repr(C[mask].min()), repr(C[mask].max()), "z_min", int(np.flatnonzero(mask)[np.argmin(C[mask])]))
    ux = propagator(sum(op(X, q, n) for q in range(n)))
    pair_gens = []
    for g in groups:
        for m in range(3):
            i, j = g[m], g[(m + 1) % 3]
            pair_gens.append(propagator(0.5 * (op(X, i, n) @ op(X, j, n) + op(Y, i, n) @ op(Y, j, n))))

    def uxy(beta):
        u = np.eye(2**n, dtype=complex)
        for f in pair_gens:
            u = f(beta) @ u
        return u

    uniform = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    dicke = np.where(mask, 1.0, 0.0).astype(complex)
    dicke /= np.linalg.norm(dicke)
    res = 101
    H = C + lam * P
    val, _ = grid(lambda g, b: float(np.abs(ux(b) @ (np.exp(-1j * g * H) * uniform)) ** 2 @ H), res)
    print("n=6 standard p=1 grid<C+2P>", repr(val))
    val, _ = grid(lambda g, b: float(np.abs(uxy(b) @ (np.exp(-1j * g * C) * dicke)) ** 2 @ C), res)
    print("n=6 xy_dicke p=1 grid<C>", repr(val))
    v1, (g1, b1) = grid(lambda g, b: float(np.abs(ux(b) @ (np.exp(-1j * g * P) * uniform)) ** 2 @ P), res)
    inter = ux(b1) @ (np.exp(-1j * g1 * P) * uniform)
    print("n=6 stage-one grid<P>", repr(v1), "feasibility", repr(float(np.sum(np.abs(inter[mask]) ** 2))))


if __name__ == "__main__":
    six_qubit_fixtures()
