"""QUBO problems, one-hot penalty structure and the cost/constraint split."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import networkx as nx

DEFAULT_TOL = 1e-9

Pair = tuple[int, int]


class QuboFormatError(ValueError):
    """Raised for malformed QUBO or groups text files."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.line = line


def _canonical(i: int, j: int) -> Pair:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class QuboProblem:
    """Quadratic pseudo-Boolean function over ``n`` binary variables.

    ``energy(z) = offset + sum_i linear[i] z_i + sum_{i<j} quadratic[i, j] z_i z_j``
    """

    n: int
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[Pair, float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"QUBO needs at least one variable, got n={self.n}")
        for i in self.linear:
            if not 0 <= i < self.n:
                raise ValueError(f"linear index {i} out of range for n={self.n}")
        for (i, j) in self.quadratic:
            if not (0 <= i < j < self.n):
                raise ValueError(f"quadratic key {(i, j)} is not a canonical pair in [0, {self.n})")

    def energy(self, z: int | str | Sequence[int]) -> float:
        """Evaluate at a basis index, a binary string, or a 0/1 sequence indexed by variable."""
        bits = _as_bits(z, self.n)
        e = self.offset
        for i, c in self.linear.items():
            if bits[i]:
                e += c
        for (i, j), c in self.quadratic.items():
            if bits[i] and bits[j]:
                e += c
        return e

    def scaled(self, factor: float) -> QuboProblem:
        return QuboProblem(
            self.n,
            {i: factor * c for i, c in self.linear.items()},
            {k: factor * c for k, c in self.quadratic.items()},
            factor * self.offset,
        )

    def __add__(self, other: QuboProblem) -> QuboProblem:
        if other.n != self.n:
            raise ValueError(f"cannot add QUBOs of sizes {self.n} and {other.n}")
        linear = dict(self.linear)
        for i, c in other.linear.items():
            linear[i] = linear.get(i, 0.0) + c
        quadratic = dict(self.quadratic)
        for k, c in other.quadratic.items():
            quadratic[k] = quadratic.get(k, 0.0) + c
        return QuboProblem(self.n, linear, quadratic, self.offset + other.offset)

    def __sub__(self, other: QuboProblem) -> QuboProblem:
        return self + other.scaled(-1.0)

    def pruned(self, tol: float = 0.0) -> QuboProblem:
        """Drop coefficients whose magnitude is at most ``tol``."""
        return QuboProblem(
            self.n,
            {i: c for i, c in self.linear.items() if abs(c) > tol},
            {k: c for k, c in self.quadratic.items() if abs(c) > tol},
            self.offset,
        )

    def terms(self) -> list[tuple[int, int, float]]:
        """Terms as ``(i, j, coeff)`` triples in sorted order, linear as ``i == j``."""
        out = [(i, i, c) for i, c in sorted(self.linear.items())]
        out += [(i, j, c) for (i, j), c in sorted(self.quadratic.items())]
        return out


def _as_bits(z: int | str | Sequence[int], n: int) -> list[int]:
    # Strings are binary renderings (variable 0 rightmost); other sequences list variable 0 first.
    if isinstance(z, str):
        if len(z) != n:
            raise ValueError(f"expected {n} bits, got {z!r}")
        z = int(z, 2)
    if isinstance(z, int) and not isinstance(z, bool):
        if not 0 <= z < (1 << n):
            raise ValueError(f"bitstring index {z} out of range for n={n}")
        return [(z >> i) & 1 for i in range(n)]
    bits = [int(b) for b in z]
    if len(bits) != n:
        raise ValueError(f"expected {n} bits, got {len(bits)}")
    return bits


@dataclass(frozen=True)
class OneHotGroup:
    """Variables of which exactly one must be set."""

    indices: tuple[int, ...]

    def __init__(self, indices: Iterable[int]):
        idx = tuple(int(i) for i in indices)
        if len(idx) < 2:
            raise ValueError(f"one-hot group needs at least 2 indices, got {idx}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"one-hot group has repeated indices: {idx}")
        if min(idx) < 0:
            raise ValueError(f"negative index in one-hot group {idx}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @property
    def mask(self) -> int:
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m


def validate_groups(groups: Sequence[OneHotGroup], n: int) -> None:
    """Raise ``ValueError`` if groups overlap or reference indices outside ``[0, n)``."""
    seen: set[int] = set()
    for g in groups:
        for i in g.indices:
            if i >= n:
                raise ValueError(f"group index {i} out of range for n={n}")
            if i in seen:
                raise ValueError(f"one-hot groups overlap on variable {i}")
            seen.add(i)


@dataclass(frozen=True)
class ProblemSplit:
    """Penalized QUBO decomposed as ``cost + lam * penalty``."""

    cost: QuboProblem
    penalty: QuboProblem
    groups: tuple[OneHotGroup, ...]
    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.cost.n != self.penalty.n:
            raise ValueError("cost and penalty sizes differ")
        validate_groups(self.groups, self.n)

    @property
    def n(self) -> int:
        return self.cost.n

    def recombined(self, lam: float | None = None) -> QuboProblem:
        """``cost + lam * penalty``; defaults to the stored lambda."""
        return self.cost + self.penalty.scaled(self.lam if lam is None else lam)


def build_qubo(n: int, terms: Iterable[tuple[int, int, float]], offset: float = 0.0) -> QuboProblem:
    """Assemble a QUBO from ``(i, j, coeff)`` triples; ``i == j`` is a linear term.

    Duplicate terms accumulate, and ``(j, i)`` is folded into ``(i, j)``.
    """
    if n < 1:
        raise ValueError(f"QUBO needs at least one variable, got n={n}")
    linear: dict[int, float] = {}
    quadratic: dict[Pair, float] = {}
    for i, j, c in terms:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"term index ({i}, {j}) out of range for n={n}")
        if i == j:
            linear[i] = linear.get(i, 0.0) + float(c)
        else:
            key = _canonical(i, j)
            quadratic[key] = quadratic.get(key, 0.0) + float(c)
    return QuboProblem(n, linear, quadratic, float(offset))


def one_hot_penalty(group: OneHotGroup | Sequence[int], n: int | None = None) -> QuboProblem:
    """Expansion of ``(sum_{i in group} x_i - 1)**2`` using ``x**2 == x``.

    ``n`` defaults to one more than the largest group index.
    """
    if not isinstance(group, OneHotGroup):
        group = OneHotGroup(group)
    idx = group.indices
    size = max(idx) + 1 if n is None else n
    linear = {i: -1.0 for i in idx}
    quadratic = {_canonical(a, b): 2.0 for k, a in enumerate(idx) for b in idx[k + 1:]}
    return QuboProblem(size, linear, quadratic, 1.0)


def penalty_for_groups(groups: Sequence[OneHotGroup], n: int) -> QuboProblem:
    total = QuboProblem(n)
    for g in groups:
        total = total + one_hot_penalty(g, n)
    return total


def _cluster_values(values: list[float], tol: float) -> list[float]:
    """Representative values of 1-D clusters whose neighbours lie within ``tol``."""
    reps: list[float] = []
    members: list[list[float]] = []
    for v in sorted(values):
        if members and v - members[-1][-1] <= tol:
            members[-1].append(v)
        else:
            members.append([v])
    for m in members:
        reps.append(math.fsum(m) / len(m))
    return reps


def detect_one_hot_groups(q: QuboProblem, tol: float = DEFAULT_TOL) -> tuple[list[OneHotGroup], float]:
    """Find disjoint variable sets carrying the ``s * (sum x - 1)**2`` fingerprint.

    Every pair inside a group must have quadratic coefficient ``2s`` (within
    ``tol``) for a single common ``s > 0``. Linear coefficients are not
    constrained because objective terms may share the group variables.
    Maximal cliques are taken greedily by size, ties going to the smaller
    leading index. Among candidate values of ``s`` the one covering the most
    variables wins, then the larger ``s``.

    Returns ``([], 0.0)`` when nothing matches.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    positive = [c for c in q.quadratic.values() if c > tol]
    best: tuple[int, float, list[OneHotGroup]] = (0, 0.0, [])
    for rep in _cluster_values(positive, tol):
        graph = nx.Graph()
        graph.add_edges_from(k for k, c in q.quadratic.items() if abs(c - rep) <= tol)
        cliques = sorted(
            (sorted(c) for c in nx.find_cliques(graph) if len(c) >= 2),
            key=lambda c: (-len(c), c),
        )
        used: set[int] = set()
        chosen: list[OneHotGroup] = []
        for c in cliques:
            if used.isdisjoint(c):
                chosen.append(OneHotGroup(c))
                used.update(c)
        covered = len(used)
        scale = rep / 2.0
        if (covered, scale) > (best[0], best[1]):
            best = (covered, scale, chosen)
    groups = sorted(best[2], key=lambda g: g.indices[0])
    return groups, best[1]


def split_cost_and_constraints(
    q: QuboProblem,
    groups: Sequence[OneHotGroup],
    scale: float,
    tol: float = DEFAULT_TOL,
) -> ProblemSplit:
    """Subtract ``scale * penalty`` from ``q``, leaving the objective part.

    Raises ``ValueError`` if any within-group quadratic coefficient survives
    the subtraction, which means the groups or scale do not match ``q``.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    groups = tuple(groups)
    validate_groups(groups, q.n)
    penalty = penalty_for_groups(groups, q.n)
    cost = q - penalty.scaled(scale)
    for g in groups:
        for k, a in enumerate(g.indices):
            for b in g.indices[k + 1:]:
                residue = cost.quadratic.get(_canonical(a, b), 0.0)
                if abs(residue) > tol:
                    raise ValueError(
                        f"residual coupling {residue:g} on ({a}, {b}) after removing the "
                        f"penalty of group {list(g.indices)}; groups do not match the QUBO"
                    )
    # Pairs removed exactly are dropped; everything else stays so recombination is exact.
    quadratic = {k: c for k, c in cost.quadratic.items() if c != 0.0}
    cost = QuboProblem(cost.n, cost.linear, quadratic, cost.offset)
    return ProblemSplit(cost, penalty, groups, scale)


def make_split(cost: QuboProblem, groups: Sequence[OneHotGroup], lam: float = 1.0) -> ProblemSplit:
    """Pair an objective with one-hot groups directly, without detection."""
    groups = tuple(groups)
    validate_groups(groups, cost.n)
    return ProblemSplit(cost, penalty_for_groups(groups, cost.n), groups, lam)


# --- text formats -----------------------------------------------------------


def parse_qubo(text: str, path: str | None = None) -> QuboProblem:
    """Parse the text QUBO format.

    ``#`` lines are comments; the first data line is ``n <count>``, followed by
    ``<i> <j> <coeff>`` lines (``i == j`` is linear). An optional
    ``offset <value>`` line sets the constant term.
    """
    n: int | None = None
    terms: list[tuple[int, int, float]] = []
    offset = 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise QuboFormatError(f"expected 'n <count>', got {line!r}", path, lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise QuboFormatError(f"bad variable count {parts[1]!r}", path, lineno) from None
            if n < 1:
                raise QuboFormatError(f"variable count must be positive, got {n}", path, lineno)
            continue
        if parts[0] == "offset" and len(parts) == 2:
            try:
                offset += float(parts[1])
            except ValueError:
                raise QuboFormatError(f"bad offset {parts[1]!r}", path, lineno) from None
            continue
        if len(parts) != 3:
            raise QuboFormatError(f"expected '<i> <j> <coeff>', got {line!r}", path, lineno)
        try:
            i, j, c = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise QuboFormatError(f"cannot parse term {line!r}", path, lineno) from None
        if not (0 <= i < n and 0 <= j < n):
            raise QuboFormatError(f"index out of range for n={n}: {line!r}", path, lineno)
        terms.append((i, j, c))
    if n is None:
        raise QuboFormatError("missing 'n <count>' line", path)
    return build_qubo(n, terms, offset)


def format_qubo(q: QuboProblem) -> str:
    lines = [f"n {q.n}"]
    if q.offset != 0.0:
        lines.append(f"offset {q.offset!r}")
    lines += [f"{i} {j} {c!r}" for i, j, c in q.terms()]
    return "\n".join(lines) + "\n"


def read_qubo(path: str | Path) -> QuboProblem:
    path = Path(path)
    return parse_qubo(path.read_text(encoding="utf-8"), str(path))


def write_qubo(q: QuboProblem, path: str | Path) -> None:
    Path(path).write_text(format_qubo(q), encoding="utf-8")


def parse_groups(text: str, path: str | None = None) -> list[OneHotGroup]:
    groups = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            groups.append(OneHotGroup(int(tok) for tok in line.split()))
        except ValueError as exc:
            raise QuboFormatError(str(exc), path, lineno) from None
    return groups


def format_groups(groups: Sequence[OneHotGroup]) -> str:
    return "".join(" ".join(str(i) for i in g.indices) + "\n" for g in groups)


def read_groups(path: str | Path) -> list[OneHotGroup]:
    path = Path(path)
    return parse_groups(path.read_text(encoding="utf-8"), str(path))


def write_groups(groups: Sequence[OneHotGroup], path: str | Path) -> None:
    Path(path).write_text(format_groups(groups), encoding="utf-8")
