import numpy as np
import pytest
from scipy import integrate, stats

from uqmlab import qstate
from uqmlab.projective import (
    check_quadratic_identity,
    density_rho,
    effect_estimate,
    mc_estimate,
    mc_integrate,
    quadratic_delta_tensor,
    sample_fs_uniform,
    sample_rho,
)

from conftest import random_vector


def _projectors(Z):
    return np.einsum("ma,mb->mab", Z, Z.conj())


def test_cp0_is_a_single_point():
    Z = sample_fs_uniform(1, 0, 100)
    assert np.allclose(np.abs(Z), 1)
    assert np.allclose(_projectors(Z), 1)


def test_fs_pushforward_is_uniform_for_qubits():
    Z = sample_fs_uniform(2, 1, 100_000)
    t = np.abs(Z[:, 0]) ** 2
    assert stats.kstest(t, "uniform").pvalue > 0.01


def test_fs_mean_projector_is_maximally_mixed():
    Z = sample_fs_uniform(3, 2, 100_000)
    P = _projectors(Z)
    se = (P.real.std(axis=0) + 1j * P.imag.std(axis=0)) / np.sqrt(len(P))
    d = P.mean(axis=0) - np.eye(3) / 3
    assert np.all(np.abs(d.real) <= 4 * se.real + 1e-15)
    assert np.all(np.abs(d.imag) <= 4 * se.imag + 1e-15)


def test_sampling_is_deterministic():
    assert np.array_equal(sample_fs_uniform(4, 9, 10), sample_fs_uniform(4, 9, 10))
    w = qstate.random_density(3, rng=1)
    assert np.array_equal(sample_rho(w, 5, 200), sample_rho(w, 5, 200))


def test_density_rho_examples(rng):
    n = 4
    x = sample_fs_uniform(n, rng, 20)
    assert np.allclose(density_rho(np.eye(n) / n, x), 1.0)
    e1, e2 = np.eye(n)[0], np.eye(n)[1]
    w = np.outer(e1, e1)
    assert density_rho(w, e1) == pytest.approx(n)
    assert density_rho(w, e2) == 0
    w = qstate.random_density(n, rng=rng)
    vals = density_rho(w, x)
    assert np.all(vals >= 0) and np.all(vals <= n * np.linalg.eigvalsh(w)[-1] + 1e-12)


def test_density_rho_unitary_covariance(rng):
    for _ in range(50):
        n = int(rng.integers(2, 6))
        w = qstate.random_density(n, rng=rng)
        U = qstate.random_unitary(n, rng)
        x = random_vector(n, rng)
        assert abs(density_rho(U @ w @ U.conj().T, U @ x) - density_rho(w, x)) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_density_integrates_to_one(n, rng):
    w = qstate.random_density(n, rng=rng)
    est = mc_integrate(lambda Z: density_rho(w, Z), n, 100_000, rng)
    assert abs(est.value - 1) <= 4 * est.std_error


def test_sample_rho_unbiased_state_is_fs_uniform():
    Z, info = sample_rho(np.eye(2) / 2, 3, 50_000, return_stats=True)
    assert info["proposed"] - info["accepted"] < info["proposed"] * 0.1
    assert stats.kstest(np.abs(Z[:, 0]) ** 2, "uniform").pvalue > 0.01


def test_sample_rho_pure_qubit_overlap_law():
    # density of t = |<e1|Z>|^2 is 2t on [0, 1], mean 2/3
    oracle_mean = integrate.quad(lambda t: t * 2 * t, 0, 1)[0]
    assert oracle_mean == pytest.approx(2 / 3)
    Z = sample_rho(np.diag([1.0, 0.0]), 4, 100_000)
    t = np.abs(Z[:, 0]) ** 2
    se = t.std() / np.sqrt(len(t))
    assert abs(t.mean() - oracle_mean) <= 4 * se
    assert stats.kstest(t, lambda s: s**2).pvalue > 0.01


def test_sample_rho_acceptance_rate(rng):
    w = qstate.random_density(3, rng=rng)
    lam = np.linalg.eigvalsh(w)[-1]
    _, info = sample_rho(w, rng, 100_000, return_stats=True)
    rate = info["accepted"] / info["proposed"]
    # the last batch overshoots a little, so the observed rate is a lower bound
    assert 0.9 / (3 * lam) <= rate <= 1.02 / (3 * lam)


def test_sample_rho_mean_projector_is_diluted_state():
    n = 3
    w = qstate.random_density(n, rng=8)
    P = _projectors(sample_rho(w, 9, 200_000))
    se_re = P.real.std(axis=0) / np.sqrt(len(P))
    se_im = P.imag.std(axis=0) / np.sqrt(len(P))
    d = P.mean(axis=0) - (np.eye(n) + w) / (n + 1)
    assert np.all(np.abs(d.real) <= 4 * se_re + 1e-15)
    assert np.all(np.abs(d.imag) <= 4 * se_im + 1e-15)


def test_mc_integrate_constant_and_symmetric(rng):
    est = mc_integrate(lambda Z: np.ones(len(Z)), 3, 1000, rng)
    assert est.value == 1 and np.all(est.std_error == 0)
    est = mc_integrate(_projectors, 2, 50_000, rng)
    assert est.max_zscore(np.eye(2) / 2) <= 4


def test_mc_integrate_fourth_power():
    # t uniform on [0, 1]: E[t^2] = 1/3
    assert integrate.quad(lambda t: t**2, 0, 1)[0] == pytest.approx(1 / 3)
    est = mc_integrate(lambda Z: np.abs(Z[:, 0]) ** 4, 2, 100_000, 11)
    assert abs(est.value - 1 / 3) <= 4 * est.std_error


def test_chunk_merge_matches_single_pass(rng):
    x = rng.standard_normal((10_000, 3)) + 1j * rng.standard_normal((10_000, 3))
    whole = mc_estimate([x])
    split = mc_estimate(np.array_split(x, [1, 997, 5000, 5001]))
    assert np.allclose(split.value, x.mean(axis=0), atol=1e-14)
    assert np.allclose(split.value, whole.value, atol=1e-14)
    se_re = x.real.std(axis=0, ddof=1) / np.sqrt(len(x))
    assert np.allclose(split.se_real, se_re, rtol=1e-10)
    assert np.allclose(split.std_error, whole.std_error, rtol=1e-10)


def test_quadratic_identity_trivial_and_coincident_component():
    chk = check_quadratic_identity(1, 10, 0)
    assert chk.max_deviation_se == 0 and chk.max_abs_deviation == 0
    T = quadratic_delta_tensor(2)
    assert T[0, 0, 0, 0] == pytest.approx(1 / 3)
    # cross-check against the 1-D pushforward oracle E[t^2] = 1/3
    assert T[0, 0, 0, 0] == pytest.approx(integrate.quad(lambda t: t**2, 0, 1)[0])


@pytest.mark.parametrize("n", [2, 3])
def test_quadratic_identity_monte_carlo(n):
    chk = check_quadratic_identity(n, 100_000, 100 + n)
    assert chk.passed(5.0)
    assert chk.estimate.value.shape == (n,) * 4


def test_effect_of_whole_space_is_identity():
    est = effect_estimate(lambda Z: np.ones(len(Z), bool), 3, 100_000, 12)
    assert est.max_zscore(np.eye(3)) <= 4


def test_effect_of_empty_set_is_zero():
    est = effect_estimate(None, 3, 1000)
    assert not est.value.any()
    est = effect_estimate(lambda Z: np.zeros(len(Z), bool), 2, 1000, 0)
    assert not est.value.any()


def test_effect_of_hemisphere():
    # A = {t > 1/2} with t = |<e1|Z>|^2 uniform: E11 = 2 int_{1/2}^1 t dt, E22 = 2 int_{1/2}^1 (1-t) dt
    e11 = integrate.quad(lambda t: 2 * t, 0.5, 1)[0]
    e22 = integrate.quad(lambda t: 2 * (1 - t), 0.5, 1)[0]
    est = effect_estimate(lambda Z: np.abs(Z[:, 0]) ** 2 > 0.5, 2, 100_000, 13)
    assert est.max_zscore(np.diag([e11, e22])) <= 4
    assert e11 + e22 == pytest.approx(2 * 0.5)
