"""Sampling and integration on complex projective space.

Points of CP^{n-1} are represented by unit-norm vectors; a batch of ``m``
points is an ``(m, n)`` complex array. The uniform (Fubini-Study) probability
measure is the unique unitarily invariant one, so it is sampled by
normalizing a vector of i.i.d. complex Gaussians.
"""

from dataclasses import dataclass, field

import numpy as np

from . import qstate
from .errors import DimensionMismatchError, UQMError

MC_CHUNK = 1 << 15


def sample_fs_uniform(n, rng=None, size=None):
    """Draw Fubini-Study uniform point(s) on CP^{n-1}.

    Returns a unit vector of length `n`, or an ``(size, n)`` array.
    """
    if n < 1:
        raise UQMError("n must be at least 1")
    rng = qstate.as_rng(rng)
    shape = (n,) if size is None else (int(size), n)
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def expectation(w, x):
    """``<x|w|x> / <x|x>`` for one point or a batch of points."""
    w = np.asarray(w, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != w.shape[0]:
        raise DimensionMismatchError(f"point dim {x.shape[-1]} != state dim {w.shape[0]}")
    num = np.einsum("...a,ab,...b->...", x.conj(), w, x).real
    return num / np.einsum("...a,...a->...", x.conj(), x).real


def density_rho(w, x):
    """Outcome density ``n <x|w|x>`` of the tomographic measurement w.r.t. the FS measure."""
    return w.shape[0] * expectation(w, x)


def rejection_sample(propose, accept_prob, size, rng, expected_rate=1.0):
    """Generic vectorized rejection sampler.

    Parameters
    ----------
    propose : callable ``(rng, m) -> (m, k) array``
    accept_prob : callable ``(m, k) array -> (m,) array`` of values in [0, 1]
    size : int
    rng : numpy Generator
    expected_rate : float
        Initial guess of the acceptance rate, used only to size batches.

    Returns
    -------
    points : (size, k) array
    n_proposed : int
        Number of proposals consumed, including the unused tail of the last batch.
    """
    chunks = []
    have = 0
    proposed = 0
    accepted = 0
    rate = max(float(expected_rate), 1e-3)
    while have < size:
        need = size - have
        m = min(int(np.ceil(1.1 * need / rate)) + 16, 1 << 20)
        pts = propose(rng, m)
        u = rng.random(m)
        ok = u < np.minimum(accept_prob(pts), 1.0)
        proposed += m
        accepted += int(ok.sum())
        rate = max(accepted / proposed, 1e-3)
        chunks.append(pts[ok][:need])
        have += len(chunks[-1])
    return np.concatenate(chunks, axis=0), proposed


def sample_rho(w, rng=None, size=None, return_stats=False):
    """Sample outcome points with density ``density_rho(w, .)``.

    Proposals are FS-uniform and are accepted with probability
    ``<x|w|x> / lambda_max(w)``, so the acceptance rate is ``1/(n lambda_max)``.
    """
    w = np.asarray(w, dtype=complex)
    n = w.shape[0]
    rng = qstate.as_rng(rng)
    lam_max = float(np.linalg.eigvalsh(w)[-1])
    m = 1 if size is None else int(size)
    pts, proposed = rejection_sample(
        lambda r, k: sample_fs_uniform(n, r, k),
        lambda x: expectation(w, x) / lam_max,
        m,
        rng,
        expected_rate=1.0 / (n * lam_max),
    )
    out = pts[0] if size is None else pts
    if return_stats:
        return out, {"proposed": proposed, "accepted": m, "envelope": n * lam_max}
    return out


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with standard error.

    For complex-valued integrands ``std_error`` is the standard error of the
    complex mean, ``sqrt(se_re**2 + se_im**2)``; the per-part errors are kept
    for z-scores.
    """

    value: np.ndarray
    std_error: np.ndarray
    n_samples: int
    se_real: np.ndarray = field(default=None, repr=False)
    se_imag: np.ndarray = field(default=None, repr=False)

    def zscores(self, target, floor=1e-12):
        """Componentwise deviation from `target` in standard-error units.

        Real and imaginary parts are scored separately and the larger is kept.
        A standard error below `floor` is replaced by `floor`.
        """
        target = np.asarray(target)
        diff = np.asarray(self.value) - target
        se_re = np.maximum(self.se_real if self.se_real is not None else self.std_error, floor)
        z = np.abs(diff.real) / se_re
        if np.iscomplexobj(diff):
            se_im = np.maximum(self.se_imag if self.se_imag is not None else self.std_error, floor)
            z = np.maximum(z, np.abs(diff.imag) / se_im)
        return z

    def max_zscore(self, target, floor=1e-12):
        return float(np.max(self.zscores(target, floor)))


class _Moments:
    """Streaming mean and variance, merged chunkwise (Chan et al.)."""

    def __init__(self):
        self.n = 0
        self.mean = None
        self.m2 = None

    def add(self, x):
        x = np.asarray(x, dtype=float)
        k = x.shape[0]
        mu = x.mean(axis=0)
        m2 = ((x - mu) ** 2).sum(axis=0)
        if self.n == 0:
            self.n, self.mean, self.m2 = k, mu, m2
            return
        tot = self.n + k
        delta = mu - self.mean
        self.mean = self.mean + delta * (k / tot)
        self.m2 = self.m2 + m2 + delta**2 * (self.n * k / tot)
        self.n = tot

    def std_error(self):
        if self.n < 2:
            return np.full_like(self.mean, np.inf)
        return np.sqrt(self.m2 / (self.n - 1) / self.n)


def mc_estimate(values_iter):
    """Build an :class:`MCEstimate` from an iterable of ``(m, ...)`` value chunks."""
    re, im = _Moments(), _Moments()
    is_complex = False
    for vals in values_iter:
        vals = np.asarray(vals)
        is_complex = is_complex or np.iscomplexobj(vals)
        re.add(vals.real)
        im.add(vals.imag if np.iscomplexobj(vals) else np.zeros_like(vals, dtype=float))
    if re.n == 0:
        raise UQMError("no samples")
    se_re, se_im = re.std_error(), im.std_error()
    if is_complex:
        value = re.mean + 1j * im.mean
        se = np.sqrt(se_re**2 + se_im**2)
    else:
        value, se, se_im = re.mean, se_re, None
    return MCEstimate(value, se, re.n, se_re, se_im)


def mc_integrate(f, n, N, rng=None, chunk=MC_CHUNK):
    """Monte Carlo mean of `f` over FS-uniform points of CP^{n-1}.

    `f` is vectorized: it maps an ``(m, n)`` batch of unit vectors to an
    ``(m, ...)`` array.
    """
    if N < 2:
        raise UQMError("N must be at least 2")
    rng = qstate.as_rng(rng)

    def chunks():
        left = N
        while left > 0:
            m = min(chunk, left)
            yield f(sample_fs_uniform(n, rng, m))
            left -= m

    return mc_estimate(chunks())


def quadratic_delta_tensor(n):
    """``(delta_ab delta_cd + delta_ad delta_cb) / (n (n+1))`` indexed ``[a, b, c, d]``.

    Index roles: ``a``, ``c`` are the two upper indices carried by ``Z`` and
    ``b``, ``d`` the lower indices carried by ``conj(Z)``.
    """
    I = np.eye(n)
    return (np.einsum("ab,cd->abcd", I, I) + np.einsum("ad,cb->abcd", I, I)) / (n * (n + 1))


def fourth_moment_integrand(Z):
    """``Z_a conj(Z_b) Z_c conj(Z_d)`` for a batch of unit vectors, shape ``(m, n, n, n, n)``."""
    P = np.einsum("ma,mb->mab", Z, Z.conj())
    return np.einsum("mab,mcd->mabcd", P, P)


@dataclass(frozen=True)
class IdentityCheck:
    """Result of a Monte Carlo check of a tensor identity."""

    name: str
    estimate: MCEstimate
    expected: np.ndarray
    max_deviation_se: float
    max_abs_deviation: float
    n_samples: int

    def passed(self, n_se=5.0):
        return self.max_deviation_se <= n_se

    def to_dict(self):
        return {
            "name": self.name,
            "n_samples": self.n_samples,
            "components": int(np.size(self.expected)),
            "max_deviation_se": self.max_deviation_se,
            "max_abs_deviation": self.max_abs_deviation,
        }


def check_quadratic_identity(n, N, rng=None):
    """Check the fourth-moment identity of the FS measure by Monte Carlo.

    Estimates ``E[Z_a conj(Z_b) Z_c conj(Z_d)]`` and compares every
    component with :func:`quadratic_delta_tensor`. For ``n == 1`` the
    integrand is identically one and the check is exact.
    """
    expected = quadratic_delta_tensor(n)
    if n == 1:
        est = MCEstimate(np.ones((1, 1, 1, 1), dtype=complex), np.zeros((1, 1, 1, 1)), N,
                         np.zeros((1, 1, 1, 1)), np.zeros((1, 1, 1, 1)))
    else:
        est = mc_integrate(fourth_moment_integrand, n, N, rng, chunk=max(1024, MC_CHUNK // n**2))
    return IdentityCheck(
        name="fs_quadratic_delta_identity",
        estimate=est,
        expected=expected,
        max_deviation_se=est.max_zscore(expected),
        max_abs_deviation=float(np.max(np.abs(est.value - expected))),
        n_samples=int(N),
    )


def effect_estimate(indicator, n, N, rng=None):
    """Monte Carlo estimate of the effect ``n * E[1{x in A} |x><x|]``.

    `indicator` maps an ``(m, n)`` batch of points to a boolean ``(m,)`` array;
    ``None`` stands for the empty set and yields exactly zero.
    """
    if indicator is None:
        z = np.zeros((n, n), dtype=complex)
        return MCEstimate(z, np.zeros((n, n)), int(N), np.zeros((n, n)), np.zeros((n, n)))

    def f(Z):
        mask = np.asarray(indicator(Z), dtype=float)
        return n * mask[:, None, None] * np.einsum("ma,mb->mab", Z, Z.conj())

    return mc_integrate(f, n, N, rng)
