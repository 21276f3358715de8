"""Positive and completely positive maps in Kraus and Choi form.

Choi convention (unnormalized, output factor first)::

    C = sum_ij phi(E_ij) (x) E_ij,    C[a*n + i, b*n + j] = phi(E_ij)[a, b]

With this ordering a Kraus operator ``K`` contributes ``vec(K) vec(K)^H``
where ``vec`` is the row-major flattening, so Kraus operators are recovered
from eigenvectors by a plain reshape.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import qstate
from .errors import DimensionMismatchError, NotCompletelyPositiveError, UQMError

KRAUS_RANK_TOL = 1e-12


def as_kraus(K):
    """Coerce a Kraus family to an ``(N, n, n)`` complex array."""
    K = np.asarray(K, dtype=complex)
    if K.ndim == 2:
        K = K[None]
    if K.ndim != 3 or K.shape[0] < 1 or K.shape[1] != K.shape[2]:
        raise DimensionMismatchError(f"Kraus family must have shape (N, n, n), got {K.shape}")
    return K


def _choi_dim(C):
    C = np.asarray(C, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionMismatchError(f"Choi matrix must be square, got {C.shape}")
    n = int(round(np.sqrt(C.shape[0])))
    if n * n != C.shape[0]:
        raise DimensionMismatchError(f"Choi matrix size {C.shape[0]} is not a perfect square")
    return C, n


def choi_from_kraus(K):
    K = as_kraus(K)
    N, n, _ = K.shape
    V = K.reshape(N, n * n)
    return V.T @ V.conj()


def kraus_from_choi(C, tol=qstate.TOL_PSD, rank_tol=KRAUS_RANK_TOL):
    """Kraus operators from the eigendecomposition of a Choi matrix.

    Eigenpairs with eigenvalue at most ``rank_tol * max(1, lambda_max)`` are
    dropped. A zero map yields a single zero operator.

    Raises
    ------
    NotCompletelyPositiveError
        If an eigenvalue is below ``-tol``; the exception carries the minimum
        eigenvalue.
    """
    C, n = _choi_dim(C)
    spec = qstate.eig_hermitian(C)
    lam, V = spec.eigenvalues, spec.eigenvectors
    if lam[0] < -tol:
        raise NotCompletelyPositiveError(lam[0])
    cut = rank_tol * max(1.0, float(lam[-1]))
    keep = lam > cut
    if not np.any(keep):
        return np.zeros((1, n, n), dtype=complex)
    lam, V = lam[keep][::-1], V[:, keep][:, ::-1]
    return (np.sqrt(lam) * V).T.reshape(-1, n, n)


def apply_kraus(K, rho):
    K = as_kraus(K)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != K.shape[1:]:
        raise DimensionMismatchError(f"state shape {rho.shape} does not match map dim {K.shape[1]}")
    return np.einsum("kab,bc,kdc->ad", K, rho, K.conj())


def apply_choi(C, rho):
    C, n = _choi_dim(C)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise DimensionMismatchError(f"state shape {rho.shape} does not match map dim {n}")
    return np.einsum("aibj,ij->ab", C.reshape(n, n, n, n), rho)


def apply_map(phi, rho):
    """Apply a map given either as a Kraus family (3-d or list) or a Choi matrix (2-d)."""
    if isinstance(phi, (list, tuple)) or np.ndim(phi) == 3:
        return apply_kraus(phi, rho)
    return apply_choi(phi, rho)


def apply_local(C, F, ancilla_dim):
    """Act with the map on the first factor of a state on ``n x ancilla_dim``."""
    C, n = _choi_dim(C)
    F = np.asarray(F, dtype=complex)
    m = int(ancilla_dim)
    if F.shape != (n * m, n * m):
        raise DimensionMismatchError(f"composite state shape {F.shape} != ({n * m}, {n * m})")
    out = np.einsum("aibj,ikjl->akbl", C.reshape(n, n, n, n), F.reshape(n, m, n, m))
    return out.reshape(n * m, n * m)


def dual_operator(C):
    """``sum_k K_k^H K_k`` computed directly from the Choi matrix."""
    C, n = _choi_dim(C)
    # tr_out C = (sum K^H K)^T
    return np.einsum("aiaj->ji", C.reshape(n, n, n, n))


def biquadratic_form(C, X, Y):
    """``<X| phi(|Y><Y|) |X>`` for unit or non-unit vectors `X`, `Y`."""
    C, n = _choi_dim(C)
    v = np.kron(np.asarray(X, dtype=complex), np.asarray(Y, dtype=complex).conj())
    return float(np.real(np.vdot(v, C @ v)))


class Positivity(enum.Enum):
    COMPLETELY_POSITIVE = "CompletelyPositive"
    POSITIVE_NOT_CP_CANDIDATE = "PositiveNotCP-candidate"
    NOT_POSITIVE = "NotPositive"


@dataclass(frozen=True)
class PositivityVerdict:
    kind: Positivity
    min_choi_eigenvalue: float
    witness: tuple = None
    witness_value: float = None
    trials: int = 0

    @property
    def certified(self):
        return self.kind is not Positivity.POSITIVE_NOT_CP_CANDIDATE


def _refine(C4, x, y, steps):
    # alternating minimization: each half-step is an exact eigen-minimization
    for _ in range(steps):
        M = np.einsum("aibj,i,j->ab", C4, y, y.conj())
        x = np.linalg.eigh(0.5 * (M + M.conj().T))[1][:, 0]
        N = np.einsum("aibj,a,b->ij", C4, x.conj(), x)
        u = np.linalg.eigh(0.5 * (N + N.conj().T))[1][:, 0]
        y = u.conj()
    return x, y


def certify_positive(C, trials=64, rng=None, refine_steps=20, tol=qstate.TOL_PSD):
    """Classify a map as completely positive, positive-candidate or not positive.

    A positive semidefinite Choi matrix certifies complete positivity. Otherwise
    the biquadratic form ``<X|phi(|Y><Y|)|X>`` is minimized over random unit
    ``(X, Y)`` starts refined by alternating eigen-minimization. A value below
    ``-tol`` is returned as a witness of non-positivity; failing to find one
    only yields the non-certifying ``POSITIVE_NOT_CP_CANDIDATE`` verdict.
    """
    C, n = _choi_dim(C)
    C = qstate.hermitian_part(C)
    lam_min = float(np.linalg.eigvalsh(C)[0])
    if lam_min >= -tol:
        return PositivityVerdict(Positivity.COMPLETELY_POSITIVE, lam_min)
    if trials < 1:
        raise UQMError("trials must be at least 1")
    rng = qstate.as_rng(rng)
    C4 = C.reshape(n, n, n, n)
    best = (np.inf, None, None)
    for _ in range(trials):
        x = qstate.pure_state(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        y = qstate.pure_state(rng.standard_normal(n) + 1j * rng.standard_normal(n))
        x, y = _refine(C4, x, y, refine_steps)
        val = biquadratic_form(C, x, y)
        if val < best[0]:
            best = (val, x, y)
        if val < -tol:
            break
    val, x, y = best
    if val < -tol:
        return PositivityVerdict(Positivity.NOT_POSITIVE, lam_min, (x, y), val, trials)
    return PositivityVerdict(Positivity.POSITIVE_NOT_CP_CANDIDATE, lam_min, None, val, trials)


@dataclass(frozen=True)
class TraceCondition:
    is_trace_reducing: bool
    is_trace_preserving: bool
    max_eigenvalue: float
    min_eigenvalue: float = field(default=None, repr=False)


def check_trace_condition(K, tol=qstate.TOL_PSD):
    """Compare ``sum K^H K`` with the identity (Kraus family or Choi matrix)."""
    if isinstance(K, (list, tuple)) or np.ndim(K) == 3:
        K = as_kraus(K)
        S = np.einsum("kba,kbc->ac", K.conj(), K)
    else:
        S = dual_operator(K)
    lam = np.linalg.eigvalsh(0.5 * (S + S.conj().T))
    return TraceCondition(
        is_trace_reducing=bool(lam[-1] <= 1 + tol),
        is_trace_preserving=bool(np.all(np.abs(lam - 1) <= tol)),
        max_eigenvalue=float(lam[-1]),
        min_eigenvalue=float(lam[0]),
    )


# --- standard maps ---------------------------------------------------------


def identity_kraus(n):
    return np.eye(n, dtype=complex)[None]


def transpose_choi(n):
    """Choi matrix of the transpose map, which is the swap operator."""
    S = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            S[i * n + j, j * n + i] = 1
    return S


def depolarizing_kraus(p=1.0):
    """Qubit depolarizing channel; ``p=1`` is fully depolarizing."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1, -1]).astype(complex)
    I = np.eye(2, dtype=complex)
    return np.array([np.sqrt(1 - 3 * p / 4) * I] + [np.sqrt(p / 4) * P for P in (X, Y, Z)])


def random_kraus(n, n_kraus, rng=None, trace_preserving=True):
    """Random Kraus family, normalized to ``sum K^H K = I`` by default."""
    rng = qstate.as_rng(rng)
    G = rng.standard_normal((n_kraus, n, n)) + 1j * rng.standard_normal((n_kraus, n, n))
    if not trace_preserving:
        return G / np.sqrt(n_kraus * n)
    S = np.einsum("kba,kbc->ac", G.conj(), G)
    lam, V = np.linalg.eigh(S)
    S_inv_half = (V / np.sqrt(lam)) @ V.conj().T
    return G @ S_inv_half
