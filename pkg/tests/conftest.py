import numpy as np
import pytest

from gaussbc.search import SearchOptions


@pytest.fixture
def fast_opts():
    """Reduced grids: boundary tests care about structure, not extremes."""
    return SearchOptions(alpha_grid=24, eps_grid=16, refinement_rounds=1,
                         golden_iters=16)


@pytest.fixture
def mid_opts():
    return SearchOptions(alpha_grid=40, eps_grid=28, refinement_rounds=2,
                         golden_iters=22)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
