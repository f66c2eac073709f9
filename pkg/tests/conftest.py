import numpy as np
import pytest

from idespec import OperatorConfig, PolyKernel, ZeroKernel


@pytest.fixture(scope="session")
def cfg_zero():
    return OperatorConfig([0.0])


@pytest.fixture(scope="session")
def cfg_one():
    return OperatorConfig([1.0])


@pytest.fixture(scope="session")
def cfg_linear():
    return OperatorConfig([0.0, 1.0])


@pytest.fixture(scope="session")
def kernel_xmt():
    # M(x, t) = x - t
    return PolyKernel([[0.0, -1.0], [1.0, 0.0]])


@pytest.fixture(scope="session")
def cfg_linear_kernel(kernel_xmt):
    return OperatorConfig([0.0, 1.0], kernel_xmt)


def random_poly_config(rng, q_deg=3, m_deg=2, q_scale=1.0, m_scale=0.5):
    q = rng.uniform(-q_scale, q_scale, size=q_deg + 1)
    m = rng.uniform(-m_scale, m_scale, size=(m_deg + 1, m_deg + 1))
    kernel = PolyKernel(m) if np.any(m != 0) else ZeroKernel()
    return OperatorConfig(q, kernel)
