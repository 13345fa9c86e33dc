import numpy as np
import pytest

from cgx import quadrature as quad


@pytest.fixture(scope="session")
def rule3():
    """Deterministic rule on S^2, shared across tests."""
    return quad.sphere_rule(3, 2**14, 0, "product_lowdim")


@pytest.fixture(scope="session")
def rule4():
    return quad.sphere_rule(4, 2**14, 0, "antithetic")


def random_directions(n, count, seed):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)
