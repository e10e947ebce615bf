import numpy as np
import pytest

from twostep_qaoa.experiment import GeneratorSpec, generate_instance
from twostep_qaoa.qubo import OneHotGroup, make_split


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def tri_split():
    """One group of three with seeded linear costs; the shared n=3 fixture."""
    cost, groups = generate_instance(GeneratorSpec((3,), seed=11))
    return make_split(cost, groups, lam=2.0)


@pytest.fixture(scope="session")
def pair_groups_split():
    """Two groups of three (n=6), seeded."""
    cost, groups = generate_instance(GeneratorSpec((3, 3), seed=5))
    return make_split(cost, groups, lam=2.0)


@pytest.fixture
def group3():
    return OneHotGroup([0, 1, 2])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
