"""Complex operators, density matrices and spectral tools.

States are plain ``numpy`` arrays: a density matrix is an ``(n, n)`` complex
array, a pure state is a unit-norm complex vector of length ``n``.
Validation happens at the boundary (:func:`make_density`, :func:`pure_state`);
everything downstream assumes validated input.

Composite systems use a single index convention everywhere in the package:
row-major Kronecker ordering with the first factor major, so the basis vector
``|i> (x) |j>`` of a ``d1 x d2`` system sits at position ``i * d2 + j``.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.stats import unitary_group

from .errors import (
    BadTraceError,
    ConvergenceError,
    DimensionMismatchError,
    NotHermitianError,
    NotPositiveError,
    UQMError,
)

TOL_HERM = 1e-9
TOL_TRACE = 1e-9
TOL_NORM = 1e-9
TOL_PSD = 1e-9
TOL_RECON = 1e-10


def as_rng(rng):
    """Return a ``numpy.random.Generator`` from a seed, generator or ``None``."""
    return np.random.default_rng(rng)


def _square(M, name="matrix"):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be square and non-empty, got shape {M.shape}")
    return M


def hermiticity_residual(M):
    M = np.asarray(M)
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


def hermitian_part(M, tol=TOL_HERM):
    """Symmetrize ``M`` to ``(M + M^H)/2`` after checking it is Hermitian within `tol`."""
    M = _square(M)
    asym = hermiticity_residual(M)
    if asym > tol:
        raise NotHermitianError(f"Hermiticity residual {asym:.3e} exceeds tolerance {tol:.1e}")
    return 0.5 * (M + M.conj().T)


def make_density(M, tol=TOL_HERM):
    """Validate ``M`` as a density matrix and return its Hermitian part.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Candidate state.
    tol : float
        Shared tolerance for the Hermiticity residual, the most negative
        eigenvalue and the deviation of the trace from one.

    Returns
    -------
    ndarray
        The symmetrized matrix ``(M + M^H)/2``.

    Raises
    ------
    NotHermitianError, NotPositiveError, BadTraceError
    """
    H = hermitian_part(M, tol)
    lam_min = float(np.linalg.eigvalsh(H)[0])
    if lam_min < -tol:
        raise NotPositiveError(f"eigenvalue {lam_min:.3e} is below -{tol:.1e}")
    tr = float(np.trace(H).real)
    if abs(tr - 1.0) > tol:
        raise BadTraceError(f"trace {tr!r} differs from 1 by more than {tol:.1e}")
    return H


def is_density(M, tol=TOL_HERM):
    try:
        make_density(M, tol)
    except UQMError:
        return False
    return True


def pure_state(v, normalize=True, tol=TOL_NORM):
    """Return `v` as a unit-norm complex vector.

    With ``normalize=False`` the norm is checked instead of fixed.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size < 1:
        raise DimensionMismatchError("state vector is empty")
    nrm = np.linalg.norm(v)
    if normalize:
        if nrm == 0:
            raise UQMError("the zero vector does not represent a state")
        return v / nrm
    if abs(nrm - 1.0) > tol:
        raise UQMError(f"state vector norm {nrm!r} is not 1 within {tol:.1e}")
    return v


def same_ray(u, v, tol=TOL_NORM):
    """True when unit vectors `u` and `v` differ only by a unit-modulus phase."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        return False
    return abs(abs(np.vdot(u, v)) - 1.0) <= tol


def projector(v):
    """Normalized rank-one projector ``|v><v| / <v|v>``."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj()) / np.vdot(v, v).real


def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reassemble(self):
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def spectral_projectors(self, atol=1e-8):
        """Group degenerate eigenvalues and return ``[(value, projector), ...]``.

        Individual eigenvectors inside a degenerate cluster are arbitrary, so
        comparisons between decompositions should go through these.
        """
        lam = self.eigenvalues
        V = self.eigenvectors
        out = []
        start = 0
        for k in range(1, len(lam) + 1):
            if k == len(lam) or lam[k] - lam[k - 1] > atol:
                block = V[:, start:k]
                out.append((float(np.mean(lam[start:k])), block @ block.conj().T))
                start = k
        return out


def eig_hermitian(H, tol=TOL_HERM):
    H = hermitian_part(H, tol)
    if not np.all(np.isfinite(H)):
        raise ConvergenceError("matrix has non-finite entries")
    try:
        lam, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return SpectralDecomposition(lam, V)


def trace_distance(rho, sigma):
    rho = _square(rho, "rho")
    sigma = _square(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shapes {rho.shape} and {sigma.shape} differ")
    # canonical argument order makes the result exactly symmetric
    if rho.tobytes() > sigma.tobytes():
        rho, sigma = sigma, rho
    diff = rho - sigma
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def tensor_product(*ops):
    """Kronecker product of matrices or vectors, first factor major."""
    if not ops:
        raise UQMError("tensor_product needs at least one factor")
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def partial_trace(rho, dims, keep):
    """Reduced state on the factors listed in `keep`.

    Parameters
    ----------
    rho : array_like, shape (D, D)
    dims : sequence of int
        Factor dimensions with ``prod(dims) == D``.
    keep : int or sequence of int
        Indices of the factors to keep, in the order they appear in `dims`.
    """
    rho = _square(rho, "rho")
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionMismatchError(f"dims {dims} do not multiply to {rho.shape[0]}")
    keep = [keep] if np.isscalar(keep) else sorted(int(k) for k in keep)
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatchError(f"factor selector {keep} out of range for {len(dims)} factors")
    k = len(dims)
    t = rho.reshape(dims + dims)
    # einsum labels: row indices 0..k-1, column indices k..2k-1; traced factors share a label
    row = list(range(k))
    col = [i if i not in keep else k + i for i in range(k)]
    out = [i for i in keep] + [k + i for i in keep]
    reduced = np.einsum(t, row + col, out)
    d_keep = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d_keep, d_keep)


def random_density(n, rank=None, rng=None):
    """Random density matrix of the given rank from complex Gaussian vectors."""
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise UQMError(f"rank must lie in [1, {n}], got {rank}")
    rng = as_rng(rng)
    G = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_unitary(n, rng=None):
    """Haar-random unitary."""
    if n == 1:
        return np.exp(2j * np.pi * as_rng(rng).random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=as_rng(rng))


def maximally_mixed(n):
    return np.eye(n, dtype=complex) / n
