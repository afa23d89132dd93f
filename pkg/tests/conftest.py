import numpy as np
import pytest

from sourceseek import FieldParams, SeekerParams


@pytest.fixture
def ref_field() -> FieldParams:
    """Reference field: peak 5, curvature 0.01, source (1, -1)."""
    return FieldParams(f_star=5.0, hessian=0.01, source=np.array([1.0, -1.0]))


@pytest.fixture
def ref_params() -> SeekerParams:
    """Reference gains: omega 15, omega0 1, alpha 2, p 0.61, h 1, omega_d 0.3."""
    return SeekerParams(
        omega=15.0, omega0=1.0, alpha=2.0, p_exp=0.61, h_gain=1.0, omega_d=0.3
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
