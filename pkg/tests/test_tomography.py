import numpy as np
import pytest

from uqmlab import qstate
from uqmlab.errors import EmptyRunError, UQMError
from uqmlab.tomography import (
    UQMRun,
    clip_to_density,
    ensemble_state,
    expected_ensemble,
    reconstruct,
    run_report,
    run_uqm,
    tomographic_experiment,
)


def test_run_is_reproducible_and_pure():
    w = qstate.random_density(3, rng=4)
    a, b = run_uqm(w, 2000, seed=17), run_uqm(w, 2000, seed=17)
    assert np.array_equal(a.points, b.points)
    assert a.seed == 17
    for s in list(a.samples())[:200]:
        assert abs(qstate.purity(s.post_state) - 1) <= 1e-12
        assert s.seed == 17


def test_pure_input_densities_bounded_by_n():
    n = 3
    e1 = np.eye(n)[0]
    run = run_uqm(np.outer(e1, e1), 5000, seed=2)
    assert np.all(run.densities <= n + 1e-12)
    assert tomographic_experiment(n).density(np.outer(e1, e1), e1) == pytest.approx(n)
    # outcomes concentrate near the input ray: mean overlap 2/(n+1) vs 1/n for uniform
    overlap = np.abs(run.points[:, 0]) ** 2
    assert overlap.mean() > 1 / n + 0.1


def test_zero_samples_rejected():
    with pytest.raises(UQMError):
        run_uqm(np.eye(2) / 2, 0)


def test_ensemble_of_single_sample():
    run = UQMRun(np.eye(3) / 3, np.eye(3)[:1].astype(complex), np.ones(1))
    assert np.allclose(ensemble_state(run), np.diag([1, 0, 0]))
    with pytest.raises(EmptyRunError):
        ensemble_state(np.zeros((0, 3)))


def test_expected_ensemble_examples():
    assert np.allclose(expected_ensemble(np.diag([1.0, 0.0])), np.diag([2 / 3, 1 / 3]))
    assert np.allclose(expected_ensemble(np.eye(4) / 4), np.eye(4) / 4)


def test_expected_ensemble_iterates_to_maximally_mixed(rng):
    n = 3
    w = qstate.random_density(n, rng=rng)
    r = w
    for k in range(1, 8):
        r = expected_ensemble(r)
        # closed form of the k-fold dilution: I/n + (w - I/n) / (n+1)^k
        oracle = np.eye(n) / n + (w - np.eye(n) / n) / (n + 1) ** k
        assert np.allclose(r, oracle, atol=1e-14)
        qstate.make_density(r)


def test_reconstruct_inverts_exact_ensemble(rng):
    for n in (2, 3, 4, 6):
        w = qstate.random_density(n, rng=rng)
        raw, psd = reconstruct(expected_ensemble(w), n)
        assert np.max(np.abs(raw - w)) <= 1e-12
        assert np.max(np.abs(psd - w)) <= 1e-12


def test_reconstruct_unbiased_fixed_point():
    raw, _ = reconstruct(np.eye(3) / 3, 3)
    assert np.allclose(raw, np.eye(3) / 3)


def test_clipping_of_slightly_negative_reconstruction():
    eps = 1e-3
    target = np.diag([0.6 + eps, 0.4, -eps])
    r_hat = (target + np.eye(3)) / 4
    raw, psd = reconstruct(r_hat, 3)
    assert np.linalg.eigvalsh(raw)[0] == pytest.approx(-eps)
    # clipping oracle: zero the negative eigenvalue, rescale the rest
    oracle = np.diag([0.6 + eps, 0.4, 0.0]) / (1 + eps)
    assert np.allclose(psd, oracle, atol=1e-14)
    assert np.allclose(clip_to_density(np.diag([-1.0, -2.0])), np.eye(2) / 2)


@pytest.mark.parametrize("n", [2, 4])
def test_ensemble_law_within_stated_bound(n):
    N = 10_000
    w = qstate.random_density(n, rng=n)
    run = run_uqm(w, N, seed=40 + n)
    assert qstate.trace_distance(run.ensemble_estimate, expected_ensemble(w)) <= 5 * np.sqrt(n / N)
    assert abs(np.trace(run.ensemble_estimate) - 1) <= 1e-14


def test_unbiased_input_gives_uniform_outcomes():
    from scipy import stats

    run = run_uqm(np.eye(2) / 2, 20_000, seed=5)
    assert np.allclose(run.densities, 1.0)
    assert stats.kstest(np.abs(run.points[:, 0]) ** 2, "uniform").pvalue > 0.01


def test_run_report_fields():
    run = run_uqm(qstate.random_density(2, rng=0), 1000, seed=3)
    rep = run_report(run)
    for key in ("input_state", "n_samples", "ensemble_estimate", "reconstruction_raw",
                "reconstruction_psd", "trace_distance_to_input", "seed"):
        assert key in rep
    assert rep["seed"] == 3 and rep["n_samples"] == 1000
    se = run.ensemble_std_error()
    assert se.shape == (2, 2) and np.all(se.real > 0)
