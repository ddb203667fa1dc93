import numpy as np
import pytest
from click.testing import CliRunner

from app.core.measures import FiniteAction, TreeMarkovMeasure, bernoulli, uniform_trivial_action
from app.core.subgroups import CosetAction, new_coset_action

FLIP = np.array([[0.75, 0.25], [0.25, 0.75]])


@pytest.fixture(scope="session")
def runner():
    runner = CliRunner()
    yield runner


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def symmetric_chain() -> TreeMarkovMeasure:
    """Two symbols, flip probability 1/4 along both generators."""
    return TreeMarkovMeasure(pi=[0.5, 0.5], trans=[FLIP, FLIP])


@pytest.fixture(scope="session")
def deterministic_chain() -> TreeMarkovMeasure:
    return TreeMarkovMeasure(pi=[0.5, 0.5], trans=[np.eye(2), np.eye(2)])


@pytest.fixture(scope="session")
def fair_coin() -> TreeMarkovMeasure:
    return bernoulli([0.5, 0.5], 2)


@pytest.fixture(scope="session")
def swap_action() -> CosetAction:
    """Index 2: both generators swap the cosets."""
    return new_coset_action(2, ["(0 1)", "(0 1)"])


@pytest.fixture(scope="session")
def cyclic_action() -> CosetAction:
    """Index 3: a rotates the cosets, b fixes them."""
    return new_coset_action(2, ["(0 1 2)", "id"], index=3)


@pytest.fixture(scope="session")
def trivial_three() -> FiniteAction:
    return uniform_trivial_action(3, 2)


@pytest.fixture(scope="session")
def swap_points() -> FiniteAction:
    """Two points swapped by both generators, uniform measure, point partition."""
    return FiniteAction(rank=2, perms=[[1, 0], [1, 0]], mu=[0.5, 0.5], alpha=[0, 1])
