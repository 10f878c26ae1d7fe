import numpy as np
import pytest

from retasa.density_ratio import EtaEstimate
from retasa.solver import OperatorMatrices


def random_row_stochastic(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random matrix with nonnegative rows summing to one."""
    m = rng.random((n, n)) + 1e-3
    return m / m.sum(axis=1, keepdims=True)


def random_operators(rng: np.random.Generator, n: int) -> OperatorMatrices:
    return OperatorMatrices(
        c_xy=random_row_stochastic(rng, n), c_yx=random_row_stochastic(rng, n)
    )


def eta_of(values) -> EtaEstimate:
    return EtaEstimate(values=np.asarray(values, dtype=np.float64), floor_used=0.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20230815)
