"""Coherent measurements on Veronese varieties.

The system space is the symmetric power ``Sym^d(C^n)`` of dimension
``N = C(n + d - 1, d)``, with orthonormal basis labelled by nondecreasing
multi-indices of length ``d`` in lexicographic order. A direction ``phi`` in
``C^n`` maps to the coherent vector with components

    coh(phi)_k = sqrt(d! / prod(m_i!)) * prod(phi_i ** m_i)

where ``m`` are the occupation numbers of multi-index ``k``. Then
``<coh(phi)|coh(psi)> = <phi|psi>^d``. Spin ``s`` is the case ``n = 2``,
``d = 2s``; for ``s = 1`` the image is the conic in CP^2.
"""

import math
import sys
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement, permutations

import numpy as np

from . import qstate
from .errors import DimensionMismatchError, UQMError
from .experiment import ContinuousExperiment, OutcomeSample
from .projective import IdentityCheck, mc_estimate, sample_fs_uniform


def sym_dim(n, d):
    """Dimension of the degree-`d` symmetric power of ``C^n``."""
    if n < 1 or d < 0:
        raise UQMError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    N = math.comb(n + d - 1, d)
    if N > sys.maxsize:
        raise OverflowError(f"symmetric dimension for n={n}, d={d} exceeds {sys.maxsize}")
    return N


@dataclass(frozen=True)
class VeroneseConfig:
    base_dim: int
    degree: int

    def __post_init__(self):
        if self.base_dim < 1 or self.degree < 1:
            raise UQMError("base_dim and degree must be positive")

    @classmethod
    def spin(cls, s):
        """Spin-`s` system: ``n = 2``, ``d = 2s`` (half-integers allowed)."""
        d = 2 * s
        if abs(d - round(d)) > 1e-12 or d < 1:
            raise UQMError(f"spin must be a positive multiple of 1/2, got {s}")
        return cls(2, int(round(d)))

    @property
    def sym_dim(self):
        return sym_dim(self.base_dim, self.degree)

    @cached_property
    def multi_indices(self):
        return tuple(combinations_with_replacement(range(self.base_dim), self.degree))

    @cached_property
    def occupations(self):
        occ = np.zeros((len(self.multi_indices), self.base_dim), dtype=int)
        for k, idx in enumerate(self.multi_indices):
            for i in idx:
                occ[k, i] += 1
        return occ

    @cached_property
    def coefficients(self):
        d = self.degree
        return np.array(
            [math.sqrt(math.factorial(d) / math.prod(math.factorial(m) for m in row))
             for row in self.occupations]
        )


def veronese_embed(phi, d_or_config):
    """Coherent vector(s) of direction(s) `phi`.

    `phi` may be a single vector of length ``n`` or an ``(m, n)`` batch. It is
    not normalized, so ``|coh(phi)| = |phi|^d``.
    """
    cfg = d_or_config if isinstance(d_or_config, VeroneseConfig) else None
    phi = np.asarray(phi, dtype=complex)
    if cfg is None:
        cfg = VeroneseConfig(phi.shape[-1], int(d_or_config))
    if phi.shape[-1] != cfg.base_dim:
        raise DimensionMismatchError(f"direction dim {phi.shape[-1]} != base_dim {cfg.base_dim}")
    powers = np.prod(phi[..., None, :] ** cfg.occupations, axis=-1)
    return cfg.coefficients * powers


def symmetric_isometry(n, d):
    """Isometry ``V`` from ``Sym^d(C^n)`` into ``(C^n)^{(x) d}``, shape ``(n^d, N)``.

    Column ``k`` is the normalized sum of all distinct orderings of the
    ``k``-th multi-index. Built by enumeration, independent of
    :func:`veronese_embed`.
    """
    cfg = VeroneseConfig(n, d)
    V = np.zeros((n**d, cfg.sym_dim))
    for k, idx in enumerate(cfg.multi_indices):
        orders = set(permutations(idx))
        for o in orders:
            V[np.ravel_multi_index(o, (n,) * d), k] = 1.0
        V[:, k] /= math.sqrt(len(orders))
    return V


def sym_power(U, d):
    """``Sym^d(U) = V^H U^{(x) d} V``."""
    U = np.asarray(U, dtype=complex)
    V = symmetric_isometry(U.shape[0], d)
    return V.T @ qstate.tensor_product(*([U] * d)) @ V


def coherent_experiment(config):
    N = config.sym_dim
    n = config.base_dim
    return ContinuousExperiment(
        {"kind": "veronese", "n": n, "d": config.degree},
        dim=N,
        weight=N,
        propose=lambda rng, m: sample_fs_uniform(n, rng, m),
        embed=lambda x: veronese_embed(x, config),
    )


def coherent_density(w, phi, config):
    """Outcome density ``N <coh(phi)|w|coh(phi)>`` for a unit direction."""
    w = np.asarray(w, dtype=complex)
    if w.shape != (config.sym_dim, config.sym_dim):
        raise DimensionMismatchError(f"state shape {w.shape} != symmetric dim {config.sym_dim}")
    return coherent_experiment(config).density(w, qstate.pure_state(phi))


def sample_coherent(w, config, rng=None, size=None, seed=None):
    """Sample coherent-measurement outcomes (directions) for the state `w`.

    A single :class:`OutcomeSample` with ``size=None``; otherwise
    ``(directions, densities)`` arrays.
    """
    w = np.asarray(w, dtype=complex)
    if w.shape != (config.sym_dim, config.sym_dim):
        raise DimensionMismatchError(f"state shape {w.shape} != symmetric dim {config.sym_dim}")
    rng = qstate.as_rng(seed if rng is None else rng)
    pts, dens = coherent_experiment(config).sample(w, 1 if size is None else size, rng)
    if size is None:
        coh = veronese_embed(pts[0], config)
        return OutcomeSample(pts[0], qstate.projector(coh), float(dens[0]), 0, seed)
    return pts, dens


def check_coherent_resolution(config, N_samples, rng=None, chunk=1 << 14):
    """Monte Carlo check that ``N E[|coh><coh|] = I_N`` over FS-uniform directions."""
    rng = qstate.as_rng(rng)
    N = config.sym_dim

    def chunks():
        left = N_samples
        while left > 0:
            m = min(chunk, left)
            c = veronese_embed(sample_fs_uniform(config.base_dim, rng, m), config)
            yield N * np.einsum("ma,mb->mab", c, c.conj())
            left -= m

    est = mc_estimate(chunks())
    expected = np.eye(N)
    return IdentityCheck(
        name=f"veronese_resolution_n{config.base_dim}_d{config.degree}",
        estimate=est,
        expected=expected,
        max_deviation_se=est.max_zscore(expected),
        max_abs_deviation=float(np.max(np.abs(est.value - expected))),
        n_samples=int(N_samples),
    )


def veronese_residual(z, config):
    """Distance of `z` from the Veronese variety, as a rank-one test.

    The symmetric tensor of `z` is unfolded to ``n x n^{d-1}``; its second
    singular value vanishes iff `z` is a coherent vector (up to scale).
    """
    z = np.asarray(z, dtype=complex)
    n, d = config.base_dim, config.degree
    if d == 1:
        return 0.0
    T = symmetric_isometry(n, d) @ z
    s = np.linalg.svd(T.reshape(n, -1), compute_uv=False)
    return float(s[1])


def conic_residual(z):
    """``eps_AC eps_BD z^{AB} z^{CD}`` for a spin-1 vector in the ``{11, 12, 22}`` basis."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (3,):
        raise DimensionMismatchError("conic residual needs a 3-vector")
    z11, z12, z22 = z[0], z[1] / math.sqrt(2), z[2]
    return complex(2 * (z11 * z22 - z12 * z12))


def orthogonal_partner(phi):
    """``eps^{AB} conj(phi_B)``: the spinor orthogonal to `phi`, ``(conj(phi_2), -conj(phi_1))``."""
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (2,):
        raise DimensionMismatchError("orthogonal partner is defined for 2-spinors")
    return np.array([phi[1].conjugate(), -phi[0].conjugate()])


def symmetrize(a, b):
    """Symmetric spin-1 vector of ``a^{(A} b^{B)}`` in the ``{11, 12, 22}`` basis."""
    x = 0.5 * (np.kron(a, b) + np.kron(b, a))
    return symmetric_isometry(2, 2).T @ x


def tangency_residual(phi, alpha, partner=None):
    """``|<coh(phi)| sym(partner, alpha)>|`` with ``partner`` defaulting to the orthogonal spinor.

    With the default partner every such vector is orthogonal to ``coh(phi)``
    and lies on the line tangent to the conic at ``coh(partner)``, so the
    residual vanishes identically. Passing any other partner generically
    gives a nonzero value.
    """
    phi = np.asarray(phi, dtype=complex)
    partner = orthogonal_partner(phi) if partner is None else np.asarray(partner, dtype=complex)
    x = symmetrize(partner, np.asarray(alpha, dtype=complex))
    return float(abs(np.vdot(veronese_embed(phi, 2), x)))
