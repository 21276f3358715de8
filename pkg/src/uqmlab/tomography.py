"""Universal (tomographic) measurement on CP^{n-1} and linear-inversion reconstruction.

Each trial returns a point ``x`` drawn with density ``n <x|w|x>`` against the
Fubini-Study measure and leaves the system in the pure state ``|x><x|``. The
average outcome projector converges to ``(I + w)/(n + 1)``, which inverts to
``w = (n + 1) r - I``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import qstate
from .errors import EmptyRunError, UQMError
from .experiment import ContinuousExperiment, OutcomeSample
from .projective import sample_fs_uniform


def tomographic_experiment(n):
    return ContinuousExperiment(
        {"kind": "projective", "n": int(n)},
        dim=n,
        weight=n,
        propose=lambda rng, m: sample_fs_uniform(n, rng, m),
        embed=lambda x: x,
    )


@dataclass
class UQMRun:
    """Outcomes of repeated tomographic measurements on copies of one state.

    ``points`` holds the sampled unit vectors row by row; the post-measurement
    state of trial ``i`` is the projector onto ``points[i]``.
    """

    input_state: np.ndarray
    points: np.ndarray
    densities: np.ndarray
    seed: int = None
    proposals: int = 0
    _ensemble: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.input_state.shape[0]

    @property
    def n_samples(self):
        return len(self.points)

    def post_states(self):
        return np.einsum("ma,mb->mab", self.points, self.points.conj())

    def samples(self):
        """Iterate over the trials as :class:`OutcomeSample` records."""
        for i, (z, dens) in enumerate(zip(self.points, self.densities)):
            yield OutcomeSample(z, np.outer(z, z.conj()), float(dens), i, self.seed)

    @property
    def ensemble_estimate(self):
        if self._ensemble is None:
            self._ensemble = ensemble_state(self)
        return self._ensemble

    def ensemble_std_error(self):
        """Componentwise standard error of the ensemble estimate (real and imaginary parts)."""
        if self.n_samples < 2:
            raise UQMError("need at least two samples for a standard error")
        P = self.post_states()
        se_re = P.real.std(axis=0, ddof=1) / np.sqrt(self.n_samples)
        se_im = P.imag.std(axis=0, ddof=1) / np.sqrt(self.n_samples)
        return se_re + 1j * se_im

    @property
    def reconstruction(self):
        return reconstruct(self.ensemble_estimate, self.n)[0]

    @property
    def reconstruction_psd(self):
        return reconstruct(self.ensemble_estimate, self.n)[1]

    def diagnostics(self):
        r = self.ensemble_estimate
        raw, psd = reconstruct(r, self.n)
        return {
            "ensemble_vs_expected": qstate.trace_distance(r, expected_ensemble(self.input_state)),
            "reconstruction_vs_input": qstate.trace_distance(psd, self.input_state),
            "raw_min_eigenvalue": float(np.linalg.eigvalsh(raw)[0]),
            "acceptance_rate": self.n_samples / self.proposals if self.proposals else None,
        }


def run_uqm(w, N, rng=None, seed=None):
    """Perform `N` independent tomographic measurements on copies of `w`.

    Pass an integer `seed` (recorded in the run) or a generator `rng`.
    """
    if N < 1:
        raise UQMError("N must be at least 1")
    w = qstate.make_density(w)
    n = w.shape[0]
    rng = qstate.as_rng(seed if rng is None else rng)
    pts, dens, stats = tomographic_experiment(n).sample(w, N, rng, return_stats=True)
    return UQMRun(w, pts, dens, seed=seed, proposals=stats["proposed"])


def ensemble_state(run):
    """Mean outcome projector of a run."""
    pts = run.points if isinstance(run, UQMRun) else np.asarray(run)
    if len(pts) == 0:
        raise EmptyRunError("run has no samples")
    r = np.einsum("ma,mb->ab", pts, pts.conj()) / len(pts)
    r = 0.5 * (r + r.conj().T)
    return r / np.trace(r).real


def expected_ensemble(w):
    w = np.asarray(w, dtype=complex)
    n = w.shape[0]
    return (np.eye(n) + w) / (n + 1)


def clip_to_density(H):
    """Nearest-by-clipping density matrix: negative eigenvalues set to 0, trace rescaled to 1."""
    lam, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    lam = np.clip(lam, 0, None)
    if lam.sum() <= 0:
        n = len(lam)
        return np.eye(n, dtype=complex) / n
    lam = lam / lam.sum()
    return (V * lam) @ V.conj().T


def reconstruct(r_hat, n=None):
    """Invert the ensemble law: ``raw = (n + 1) r - I`` and its PSD projection."""
    r_hat = np.asarray(r_hat, dtype=complex)
    n = r_hat.shape[0] if n is None else int(n)
    if r_hat.shape != (n, n):
        raise UQMError(f"ensemble estimate shape {r_hat.shape} != ({n}, {n})")
    raw = (n + 1) * r_hat - np.eye(n)
    return raw, clip_to_density(raw)


def run_report(run):
    """JSON-ready summary of a run."""
    from .io import matrix_to_json

    raw, psd = reconstruct(run.ensemble_estimate, run.n)
    return {
        "input_state": matrix_to_json(run.input_state),
        "n_samples": run.n_samples,
        "ensemble_estimate": matrix_to_json(run.ensemble_estimate),
        "ensemble_expected": matrix_to_json(expected_ensemble(run.input_state)),
        "reconstruction_raw": matrix_to_json(raw),
        "reconstruction_psd": matrix_to_json(psd),
        "reconstruction_std_error": matrix_to_json((run.n + 1) * run.ensemble_std_error())
        if run.n_samples > 1
        else None,
        "trace_distance_to_input": qstate.trace_distance(psd, run.input_state),
        "trace_distance_ensemble_to_expected": qstate.trace_distance(
            run.ensemble_estimate, expected_ensemble(run.input_state)
        ),
        "seed": run.seed,
    }
