import numpy as np
import pytest

from pmsquare import (
    all_triple_states,
    build_error_chain,
    build_perfect_chain,
    build_square,
)


@pytest.fixture(scope="session")
def square():
    return build_square()


@pytest.fixture(scope="session")
def states(square):
    return all_triple_states(square)


@pytest.fixture(scope="session")
def perfect_chain(square):
    return build_perfect_chain(square)


@pytest.fixture(scope="session")
def noisy_chain_09(perfect_chain):
    return build_error_chain(perfect_chain, 0.9)


@pytest.fixture(scope="session")
def overlap_table(states):
    projectors = np.array([s.projector for s in states])
    return np.einsum("aij,bji->ab", projectors, projectors).real
