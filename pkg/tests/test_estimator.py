import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ditherfield import (EstimationError, EstimatorConfig, FourierBasis,
                         Linear2xDeployment, SensorBatch, TruncationSchedule,
                         UniformDeployment, UniformSymNoise, ZeroNoise,
                         estimate_coefficients, reconstruct, simulate_batch,
                         trial_seed, true_coefficients, truncation_schedule,
                         zero_field)


def make_cfg(c, schedule=None, density=None, basis=None):
    return EstimatorConfig(basis=basis or FourierBasis(),
                           density=density or UniformDeployment(), c=c,
                           schedule=schedule or TruncationSchedule.fixed(8))


# ---------------------------------------------------------------------------
# truncation schedules
# ---------------------------------------------------------------------------

def test_schedule_examples():
    assert truncation_schedule(TruncationSchedule.bv(), 10_000) == 100
    assert truncation_schedule(TruncationSchedule.sobolev(1.0), 1000) == 10
    for n in (1, 7, 10_000, 123_456):
        assert truncation_schedule(TruncationSchedule.finite_dim(5), n) == 5
    assert truncation_schedule(TruncationSchedule.power(0.4), 1000) == 16
    assert truncation_schedule(TruncationSchedule.power(1.0), 777) == 777
    assert truncation_schedule(TruncationSchedule.fixed(3), 10) == 3


def test_schedule_integerization_does_not_overshoot_exact_roots():
    assert truncation_schedule(TruncationSchedule.sobolev(1.0), 27) == 3
    assert truncation_schedule(TruncationSchedule.sobolev(1.0), 8) == 2
    assert truncation_schedule(TruncationSchedule.bv(), 49) == 7


@given(st.sampled_from(["bv", "sobolev", "power", "fixed", "finite_dim"]),
       st.integers(min_value=1, max_value=10 ** 7),
       st.integers(min_value=1, max_value=10 ** 7))
@settings(max_examples=60, deadline=None)
def test_schedules_are_positive_and_nondecreasing(kind, n1, n2):
    schedule = {"bv": TruncationSchedule.bv(),
                "sobolev": TruncationSchedule.sobolev(1.5),
                "power": TruncationSchedule.power(0.3),
                "fixed": TruncationSchedule.fixed(4),
                "finite_dim": TruncationSchedule.finite_dim(6)}[kind]
    lo, hi = sorted((n1, n2))
    m_lo, m_hi = schedule.resolve(lo), schedule.resolve(hi)
    assert m_lo >= 1
    assert m_hi >= m_lo


def test_invalid_schedules_rejected():
    with pytest.raises(ValueError):
        TruncationSchedule.power(0.0)
    with pytest.raises(ValueError):
        TruncationSchedule.sobolev(0.5)
    with pytest.raises(ValueError):
        TruncationSchedule.fixed(0)


# ---------------------------------------------------------------------------
# coefficient estimation
# ---------------------------------------------------------------------------

def test_single_sensor_arithmetic():
    # one sensor at x = 1/2 reporting +1 under uniform deployment: the
    # zeroth estimate is exactly c * conj(phi_0(x)) * B / p(x) = c
    batch = SensorBatch(x=np.array([0.5]), y=np.array([0.3]),
                        t=np.array([0.1]), bits=np.array([1.0]), c=2.0)
    hat = estimate_coefficients(batch, make_cfg(c=2.0), 1)
    assert hat.values[0] == pytest.approx(2.0 + 0.0j, abs=1e-15)
    assert hat.n_used == 1


def test_zero_field_estimates_are_unbiased():
    # Across many small trials the mean of alpha_hat_0 concentrates at 0
    # with sd c / sqrt(n * trials).
    trials, n, c = 10_000, 100, 1.0
    field, deploy, noise = zero_field(1.0), UniformDeployment(), ZeroNoise()
    cfg = make_cfg(c=c, schedule=TruncationSchedule.fixed(1))
    acc = 0.0 + 0.0j
    for t in range(trials):
        batch = simulate_batch(field, deploy, noise, n, trial_seed(505, t))
        acc += estimate_coefficients(batch, cfg, 1).values[0]
    mean = acc / trials
    assert abs(mean) <= 4.0 * c / np.sqrt(n * trials)


def test_sawtooth_estimate_matches_quadrature_coefficient(sawtooth):
    deploy, noise = UniformDeployment(), UniformSymNoise(b=1.0)
    c = sawtooth.amplitude_bound + noise.b
    cfg = make_cfg(c=c)
    trials, n = 40, 100_000
    values = np.empty(trials, dtype=complex)
    for t in range(trials):
        batch = simulate_batch(sawtooth, deploy, noise, n, trial_seed(606, t))
        values[t] = estimate_coefficients(batch, cfg, 2).values[1]
    alpha_1 = true_coefficients(sawtooth, FourierBasis(), 2).values[1]
    sigma_mean = np.sqrt(np.mean(np.abs(values - values.mean()) ** 2) / trials)
    assert abs(values.mean() - alpha_1) <= 4.0 * sigma_mean


@pytest.mark.parametrize("nu", [1.0, 0.5])
def test_empirical_variance_respects_the_bound(sawtooth, nu):
    from ditherfield import AffineFloorDeployment, basis_deployment_integral

    deploy = (UniformDeployment() if nu == 1.0 else AffineFloorDeployment(nu=nu))
    noise = UniformSymNoise(b=1.0)
    c = sawtooth.amplitude_bound + noise.b
    cfg = make_cfg(c=c, density=deploy)
    trials, n, j_count = 400, 1000, 4
    mat = np.empty((trials, j_count), dtype=complex)
    for t in range(trials):
        batch = simulate_batch(sawtooth, deploy, noise, n, trial_seed(707, t))
        mat[t] = estimate_coefficients(batch, cfg, j_count).values
    var_emp = np.mean(np.abs(mat - mat.mean(axis=0)) ** 2, axis=0)
    slack = 1.0 + 5.0 / np.sqrt(trials)
    for j in range(j_count):
        bound = (c * c / n) * basis_deployment_integral(FourierBasis(), deploy, j)
        assert var_emp[j] <= bound * slack


def test_estimator_is_noise_law_blind(sawtooth):
    batch = simulate_batch(sawtooth, UniformDeployment(), UniformSymNoise(b=1.0),
                           20_000, seed=42)
    cfg = make_cfg(c=batch.c)
    blinded = SensorBatch(x=batch.x, y=np.zeros_like(batch.y),
                          t=np.zeros_like(batch.t), bits=batch.bits, c=batch.c)
    a = estimate_coefficients(batch, cfg, 6).values
    b = estimate_coefficients(blinded, cfg, 6).values
    assert np.array_equal(a, b)


def test_coefficient_magnitudes_respect_the_weight_bound(sawtooth):
    from ditherfield import AffineFloorDeployment

    deploy = AffineFloorDeployment(nu=0.5)
    noise = UniformSymNoise(b=1.0)
    c = sawtooth.amplitude_bound + noise.b
    cfg = make_cfg(c=c, density=deploy)
    batch = simulate_batch(sawtooth, deploy, noise, 10_000, seed=8)
    hat = estimate_coefficients(batch, cfg, 16)
    assert np.max(np.abs(hat.values)) <= c * 1.0 / deploy.infimum + 1e-9


def test_coefficients_converge_along_one_sample_path(sawtooth):
    deploy, noise = UniformDeployment(), UniformSymNoise(b=1.0)
    cfg = make_cfg(c=sawtooth.amplitude_bound + noise.b)
    big = simulate_batch(sawtooth, deploy, noise, 1_000_000, seed=909)
    alpha = true_coefficients(sawtooth, FourierBasis(), 4).values
    early = estimate_coefficients(big.prefix(1000), cfg, 4).values
    late = estimate_coefficients(big, cfg, 4).values
    for j in range(4):
        assert abs(late[j] - alpha[j]) < abs(early[j] - alpha[j])


def test_vanishing_density_raises_with_location():
    batch = SensorBatch(x=np.array([0.4, 0.0]), y=np.zeros(2),
                        t=np.zeros(2), bits=np.array([1.0, -1.0]), c=1.0)
    cfg = make_cfg(c=1.0, density=Linear2xDeployment())
    with pytest.raises(EstimationError, match="0.0"):
        estimate_coefficients(batch, cfg, 2)


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def test_reconstruct_zero_and_constant():
    from ditherfield import ReconstructionCoefficients

    x = np.linspace(0.0, 1.0, 33)
    zero = ReconstructionCoefficients(values=np.zeros(4, dtype=complex), n_used=10)
    assert np.array_equal(reconstruct(zero, FourierBasis(), x), np.zeros(33, complex))
    const = ReconstructionCoefficients(values=np.array([2.5 + 0j]), n_used=10)
    assert np.allclose(reconstruct(const, FourierBasis(), x), 2.5)


def test_reconstruct_from_true_coefficients_is_synthesis(finite_dim_k5):
    from ditherfield import ReconstructionCoefficients

    cv = true_coefficients(finite_dim_k5, FourierBasis(), 5)
    coeffs = ReconstructionCoefficients(values=cv.values, n_used=1)
    x = np.linspace(0.0, 1.0, 257)
    assert np.max(np.abs(reconstruct(coeffs, FourierBasis(), x)
                         - finite_dim_k5.eval(x))) < 1e-10
