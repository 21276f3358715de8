"""Disentangling measurements on composite systems.

The outcome space is the product of the pure-state spaces of the factors,
embedded in the pure-state space of the composite system by the Segre map
``(a, b, ...) -> a (x) b (x) ...``. The base measure is the product of the
Fubini-Study measures of the factors and the outcome density of a state ``w``
is ``D <xi|w|xi>`` with ``D = prod(dims)``; the system is left in the product
state ``|xi><xi|``.

For two qubits the image of the Segre map is the quadric cut out by
``eps_AB eps_A'B' xi^{AA'} xi^{BB'} = 0``, which is ``2 det`` of ``xi``
reshaped to a 2x2 matrix.

A batch of ``m`` product points is an ``(m, sum(dims))`` array holding the
factor vectors side by side; :meth:`FactorizedSystem.split` separates them.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import qstate
from .errors import DimensionMismatchError, UQMError
from .experiment import ContinuousExperiment, OutcomeSample
from .projective import sample_fs_uniform


@dataclass(frozen=True)
class FactorizedSystem:
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2:
            raise UQMError("a factorized system needs at least two factors")
        if any(d < 2 for d in dims):
            raise UQMError(f"factor dimensions must be at least 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def parse(cls, text):
        """From a comma-separated string such as ``"2,3"``."""
        try:
            return cls(tuple(int(t) for t in str(text).split(",") if t.strip()))
        except ValueError as exc:
            raise UQMError(f"cannot parse factor dimensions from {text!r}") from exc

    @property
    def total_dim(self):
        return int(np.prod(self.dims))

    @property
    def point_width(self):
        return int(sum(self.dims))

    def split(self, points):
        """Separate a batch of concatenated factor vectors into per-factor arrays."""
        points = np.asarray(points)
        if points.shape[-1] != self.point_width:
            raise DimensionMismatchError(
                f"points have width {points.shape[-1]}, expected {self.point_width}"
            )
        return np.split(points, np.cumsum(self.dims)[:-1], axis=-1)

    def join(self, factors):
        return np.concatenate([np.asarray(f, dtype=complex) for f in factors], axis=-1)

    def propose(self, rng, m):
        return np.concatenate([sample_fs_uniform(d, rng, m) for d in self.dims], axis=1)

    def embed(self, points):
        """Segre image of a batch of points, shape ``(m, total_dim)``."""
        factors = self.split(points)
        out = factors[0]
        for f in factors[1:]:
            out = np.einsum("ma,mb->mab", out, f).reshape(len(out), -1)
        return out


@dataclass(frozen=True)
class ProductPoint:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "factors", tuple(qstate.pure_state(f) for f in self.factors)
        )

    @property
    def dims(self):
        return tuple(len(f) for f in self.factors)


def segre_embed(p):
    """Tensor product of the factor vectors of `p` (a :class:`ProductPoint` or a sequence)."""
    factors = p.factors if isinstance(p, ProductPoint) else [qstate.pure_state(f) for f in p]
    return qstate.tensor_product(*factors)


def quadric_residual(xi):
    """``eps_AB eps_A'B' xi^{AA'} xi^{BB'}`` for a two-qubit vector; zero iff `xi` is a product."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.size != 4:
        raise DimensionMismatchError(f"quadric residual needs a 4-vector, got size {xi.size}")
    M = xi.reshape(2, 2)
    return complex(2 * (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]))


def bipartition_residual(xi, dims):
    """Largest second singular value over all bipartitions of the factors.

    Zero (up to rounding) iff `xi` is a product vector.
    """
    dims = [int(d) for d in dims]
    xi = np.asarray(xi, dtype=complex).reshape(dims)
    k = len(dims)
    worst = 0.0
    for r in range(1, k // 2 + 1):
        for left in combinations(range(k), r):
            right = [i for i in range(k) if i not in left]
            M = np.transpose(xi, list(left) + right).reshape(
                int(np.prod([dims[i] for i in left])), -1
            )
            s = np.linalg.svd(M, compute_uv=False)
            if len(s) > 1:
                worst = max(worst, float(s[1]))
    return worst


def disentangling_experiment(system):
    system = system if isinstance(system, FactorizedSystem) else FactorizedSystem(tuple(system))
    return ContinuousExperiment(
        {"kind": "segre", "dims": list(system.dims)},
        dim=system.total_dim,
        weight=system.total_dim,
        propose=system.propose,
        embed=system.embed,
    )


def disentangle_density(w, p):
    """Outcome density ``prod(dims) <xi|w|xi>`` at the product point `p`."""
    w = np.asarray(w, dtype=complex)
    xi = segre_embed(p)
    if xi.size != w.shape[0]:
        raise DimensionMismatchError(f"product dim {xi.size} != state dim {w.shape[0]}")
    return float(xi.size * np.vdot(xi, w @ xi).real)


def _system_for(w, system):
    system = system if isinstance(system, FactorizedSystem) else FactorizedSystem(tuple(system))
    if np.shape(w) != (system.total_dim, system.total_dim):
        raise DimensionMismatchError(
            f"state shape {np.shape(w)} does not match factorization {system.dims}"
        )
    return system


def sample_disentangle(w, system, rng=None, size=None, seed=None):
    """Sample disentangling outcomes for the state `w`.

    With ``size=None`` a single :class:`OutcomeSample` is returned whose
    outcome is a :class:`ProductPoint`. Otherwise returns
    ``(factors, densities)`` with ``factors`` a list of ``(size, d_i)`` arrays.
    """
    system = _system_for(w, system)
    exp = disentangling_experiment(system)
    rng = qstate.as_rng(seed if rng is None else rng)
    pts, dens = exp.sample(w, 1 if size is None else size, rng)
    if size is None:
        p = ProductPoint(tuple(system.split(pts[0])))
        return OutcomeSample(p, qstate.projector(segre_embed(p)), float(dens[0]), 0, seed)
    return system.split(pts), dens


def region_probability(w, system, indicator, N, rng=None):
    """Monte Carlo probability that the outcome falls in a region of the product space.

    `indicator` receives the list of per-factor ``(m, d_i)`` arrays and returns
    a boolean ``(m,)`` array; ``None`` means the whole space.
    """
    system = _system_for(w, system)
    exp = disentangling_experiment(system)
    ind = None if indicator is None else (lambda pts: indicator(system.split(pts)))
    return exp.region_probability(w, ind, N, rng)


def singlet_vector():
    """``(|01> - |10>)/sqrt(2)``."""
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def singlet():
    return qstate.projector(singlet_vector())


def factor_overlap(a, b):
    """``|<a|b>|^2`` for unit vectors or row-wise for batches.

    Used with the two factor spaces of a qubit pair identified through their
    standard bases: two factors "coincide" when ``b`` is the same vector as
    ``a`` in that identification, not its complex conjugate.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return np.abs(np.sum(a.conj() * b, axis=-1)) ** 2


def mean_factor_projectors(factors):
    """Empirical mean projector and its standard error for each factor batch."""
    out = []
    for f in factors:
        P = np.einsum("ma,mb->mab", f, f.conj())
        se = (P.real.std(axis=0, ddof=1) + 1j * P.imag.std(axis=0, ddof=1)) / np.sqrt(len(f))
        out.append((P.mean(axis=0), se))
    return out
