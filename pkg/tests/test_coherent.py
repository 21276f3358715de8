import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from uqmlab import qstate
from uqmlab.coherent import (
    VeroneseConfig,
    check_coherent_resolution,
    coherent_density,
    coherent_experiment,
    conic_residual,
    orthogonal_partner,
    sample_coherent,
    sym_dim,
    sym_power,
    symmetric_isometry,
    tangency_residual,
    veronese_embed,
    veronese_residual,
)
from uqmlab.errors import DimensionMismatchError, UQMError

from conftest import random_vector


def test_sym_dim_examples():
    assert sym_dim(2, 2) == 3
    assert sym_dim(3, 2) == 6
    assert sym_dim(2, 5) == 6
    assert sym_dim(4, 3) == 20
    assert sym_dim(5, 0) == 1
    with pytest.raises(OverflowError):
        sym_dim(10**6, 10**3)
    with pytest.raises(UQMError):
        sym_dim(0, 2)


def test_config_and_spin():
    assert VeroneseConfig.spin(1) == VeroneseConfig(2, 2)
    assert VeroneseConfig.spin(1.5).degree == 3
    with pytest.raises(UQMError):
        VeroneseConfig.spin(0.3)
    with pytest.raises(UQMError):
        VeroneseConfig(2, 0)
    cfg = VeroneseConfig(2, 2)
    assert cfg.multi_indices == ((0, 0), (0, 1), (1, 1))
    assert np.allclose(cfg.coefficients, [1, math.sqrt(2), 1])


def test_veronese_examples():
    a, b = 0.6, 0.8j
    assert np.allclose(veronese_embed([a, b], 2), [a * a, math.sqrt(2) * a * b, b * b])
    assert np.allclose(veronese_embed([1, 0, 0], 3), np.eye(10)[0])
    with pytest.raises(DimensionMismatchError):
        veronese_embed([1, 0, 0], VeroneseConfig(2, 2))


@pytest.mark.parametrize("n,d", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)])
def test_veronese_matches_tensor_power(n, d, rng):
    V = symmetric_isometry(n, d)
    assert np.allclose(V.T @ V, np.eye(sym_dim(n, d)), atol=1e-14)
    phi = random_vector(n, rng)
    direct = V.T @ qstate.tensor_product(*([phi[:, None]] * d)).ravel()
    assert np.allclose(veronese_embed(phi, d), direct, atol=1e-13)


@given(
    st.integers(2, 4),
    st.integers(1, 4),
    st.integers(0, 2**32 - 1),
)
@settings(max_examples=60, deadline=None)
def test_overlap_law_and_norm(n, d, seed):
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lhs = np.vdot(veronese_embed(phi, d), veronese_embed(psi, d))
    rhs = np.vdot(phi, psi) ** d
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))
    norm = np.linalg.norm(veronese_embed(phi, d))
    assert norm == pytest.approx(np.linalg.norm(phi) ** d, rel=1e-12)


def test_unitary_covariance(rng):
    for n, d in [(2, 2), (2, 4), (3, 2), (3, 3)]:
        U = qstate.random_unitary(n, rng)
        S = sym_power(U, d)
        assert np.allclose(S.conj().T @ S, np.eye(sym_dim(n, d)), atol=1e-12)
        for _ in range(5):
            phi = qstate.pure_state(random_vector(n, rng))
            diff = veronese_embed(U @ phi, d) - S @ veronese_embed(phi, d)
            assert np.max(np.abs(diff)) <= 1e-10


def test_conic_membership(rng):
    for _ in range(20):
        phi = random_vector(2, rng)
        z = veronese_embed(phi, 2)
        assert abs(conic_residual(z)) <= 1e-12
        assert veronese_residual(z, VeroneseConfig(2, 2)) <= 1e-12
    # the spin-1 vector with m = 0 is not coherent
    mid = np.array([0, 1, 0])
    assert abs(conic_residual(mid)) == pytest.approx(1.0)
    assert veronese_residual(mid, VeroneseConfig(2, 2)) > 0.5
    assert veronese_residual(veronese_embed(random_vector(3, rng), 3), VeroneseConfig(3, 3)) <= 1e-12


def test_density_examples(rng):
    cfg = VeroneseConfig(2, 2)
    N = cfg.sym_dim
    phi = random_vector(2, rng)
    assert coherent_density(np.eye(N) / N, phi, cfg) == pytest.approx(1.0)
    up = np.array([1.0, 0.0])
    w = qstate.projector(veronese_embed(up, cfg))
    assert coherent_density(w, up, cfg) == pytest.approx(N)
    assert coherent_density(w, orthogonal_partner(up), cfg) == pytest.approx(0.0, abs=1e-15)
    # general direction: N |<up|phi>|^(2d)
    u = qstate.pure_state(phi)
    assert coherent_density(w, phi, cfg) == pytest.approx(N * abs(u[0]) ** 4)
    with pytest.raises(DimensionMismatchError):
        coherent_density(np.eye(2) / 2, phi, cfg)


@pytest.mark.parametrize("n,d", [(2, 2), (2, 4), (3, 2)])
def test_density_normalization(n, d):
    cfg = VeroneseConfig(n, d)
    w = qstate.random_density(cfg.sym_dim, rng=n * 10 + d)
    est = coherent_experiment(cfg).total_probability(w, 100_000, n + d)
    assert abs(est.value - 1) <= 4 * est.std_error


def _overlap_mean_oracle(n, d):
    # t = |<e1|phi>|^2 has density (n-1)(1-t)^(n-2) under the uniform law;
    # the coherent state of e1 reweights it by N t^d
    N = sym_dim(n, d)
    return integrate.quad(lambda t: t * N * t**d * (n - 1) * (1 - t) ** (n - 2), 0, 1)[0]


@pytest.mark.parametrize("n,d,frozen", [(2, 2, 0.75), (2, 4, 5 / 6), (3, 2, 0.6)])
def test_sample_coherent_overlap_law(n, d, frozen):
    oracle = _overlap_mean_oracle(n, d)
    assert oracle == pytest.approx(frozen, abs=1e-12)
    cfg = VeroneseConfig(n, d)
    e1 = np.eye(n)[0]
    w = qstate.projector(veronese_embed(e1, cfg))
    pts, _ = sample_coherent(w, cfg, rng=7, size=100_000)
    t = np.abs(pts[:, 0]) ** 2
    assert abs(t.mean() - oracle) <= 4 * t.std() / np.sqrt(len(t))


def test_sample_coherent_single_outcome():
    cfg = VeroneseConfig.spin(1)
    w = qstate.random_density(3, rng=1)
    s = sample_coherent(w, cfg, seed=4)
    assert s.outcome.shape == (2,)
    assert abs(qstate.purity(s.post_state) - 1) <= 1e-12
    assert abs(conic_residual(veronese_embed(s.outcome, cfg))) <= 1e-12
    again = sample_coherent(w, cfg, seed=4)
    assert np.array_equal(s.outcome, again.outcome)


@pytest.mark.parametrize("n,d", [(2, 1), (2, 2), (3, 2), (2, 4)])
def test_resolution_of_identity(n, d):
    chk = check_coherent_resolution(VeroneseConfig(n, d), 100_000, 30 + n + d)
    assert chk.passed(5.0)


def test_tangency_residual(rng):
    worst = 0.0
    for _ in range(100):
        phi, alpha = random_vector(2, rng), random_vector(2, rng)
        worst = max(worst, tangency_residual(phi, alpha))
    assert worst <= 1e-12
    phi = random_vector(2, rng)
    partner = orthogonal_partner(phi)
    assert tangency_residual(phi, 2.5j * partner) <= 1e-12
    assert abs(np.vdot(phi, partner)) <= 1e-15
    random_partner = max(
        tangency_residual(phi, random_vector(2, rng), partner=random_vector(2, rng)) for _ in range(20)
    )
    assert random_partner > 0.1
