import numpy as np
import pytest

from ditherfield import (AffineFloorDeployment, FourierBasis, StepBasis,
                         UniformDeployment, make_bv_field,
                         make_finite_dim_field, make_sobolev_field)

SHIPPED_K5_COEFFS = [0.2, 0.15 + 0.1j, 0.15 - 0.1j, -0.1 + 0.05j, -0.1 - 0.05j]


@pytest.fixture(scope="session")
def fourier():
    return FourierBasis()


@pytest.fixture(scope="session")
def step64():
    return StepBasis(cells=64)


@pytest.fixture(scope="session")
def finite_dim_k5(fourier):
    return make_finite_dim_field(fourier, SHIPPED_K5_COEFFS, amplitude_bound=0.8)


@pytest.fixture(scope="session")
def sawtooth():
    return make_bv_field("sawtooth")


@pytest.fixture(scope="session")
def step_field():
    return make_bv_field("step")


@pytest.fixture(scope="session")
def staircase():
    return make_bv_field("staircase")


@pytest.fixture(scope="session")
def sobolev_s1():
    return make_sobolev_field(1.0, seed=7)


@pytest.fixture(scope="session")
def shipped_fields(finite_dim_k5, sawtooth, step_field, staircase, sobolev_s1):
    return {"finite_dim_k5": finite_dim_k5, "sawtooth": sawtooth,
            "step": step_field, "staircase": staircase, "sobolev_s1": sobolev_s1}


@pytest.fixture(scope="session")
def uniform_deploy():
    return UniformDeployment()


@pytest.fixture(scope="session")
def affine_deploy():
    return AffineFloorDeployment(nu=0.5)


def midpoint_grid(n=1 << 15):
    return (np.arange(n) + 0.5) / n
