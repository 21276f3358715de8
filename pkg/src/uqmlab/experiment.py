"""Experiments as transformation-valued measures.

A :class:`DiscreteExperiment` attaches a completely positive map to every
outcome label; events are sets of labels and the map of an event is the sum
of the maps of its members. Coarse-grainings are finite partitions of the
label set.

A :class:`ContinuousExperiment` has a manifold of outcomes with a base
probability measure and a rank-one transformation density
``t(w) = c |psi(w)><psi(w)| . |psi(w)><psi(w)|``: the outcome density is
``c <psi|w|psi>`` and the post-measurement state is ``|psi><psi|``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import cpmap, qstate
from .errors import (
    BadPartitionError,
    DimensionMismatchError,
    UnknownLabelError,
    UQMError,
    ZeroProbabilityError,
)
from .projective import expectation, mc_estimate, rejection_sample

TOL_PROB = 1e-12


@dataclass(frozen=True)
class OutcomeSample:
    outcome: object
    post_state: np.ndarray
    probability_density: float
    trial_index: int = 0
    seed: int = None


class DiscreteExperiment:
    """Finite outcome set with one map per outcome.

    Parameters
    ----------
    outcome_labels : sequence of hashable
    transforms : sequence
        One map per outcome, each either a Kraus family (list or ``(N, n, n)``
        array) or a Choi matrix (2-d ``(n^2, n^2)`` array).

    Construction does not enforce the experiment axioms; use :func:`validate`.
    """

    def __init__(self, outcome_labels, transforms):
        labels = list(outcome_labels)
        if len(labels) != len(transforms):
            raise UQMError(f"{len(labels)} labels but {len(transforms)} transforms")
        if len(set(labels)) != len(labels):
            raise UQMError("outcome labels must be distinct")
        if not labels:
            raise UQMError("an experiment needs at least one outcome")
        kraus, chois = [], []
        for t in transforms:
            if isinstance(t, (list, tuple)) or np.ndim(t) == 3:
                K = cpmap.as_kraus(t)
                kraus.append(K)
                chois.append(cpmap.choi_from_kraus(K))
            else:
                C, _ = cpmap._choi_dim(t)
                kraus.append(None)
                chois.append(C)
        dims = {C.shape[0] for C in chois}
        if len(dims) != 1:
            raise DimensionMismatchError("all transforms must act on the same space")
        self.labels = tuple(labels)
        self.chois = np.array(chois)
        self.kraus = tuple(kraus)
        self.dim = int(round(np.sqrt(self.chois.shape[1])))
        self._index = {lab: i for i, lab in enumerate(self.labels)}

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"DiscreteExperiment(dim={self.dim}, outcomes={list(self.labels)!r})"

    def index(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabelError(label) from None

    def event_choi(self, subset):
        """Choi matrix of the event map ``T(A)``; the empty event gives zero."""
        idx = [self.index(lab) for lab in subset]
        if not idx:
            return np.zeros_like(self.chois[0])
        return self.chois[idx].sum(axis=0)

    def transform(self, label):
        """Kraus family of one outcome (computed from the Choi matrix if needed)."""
        i = self.index(label)
        return self.kraus[i] if self.kraus[i] is not None else cpmap.kraus_from_choi(self.chois[i])

    def probabilities(self, w):
        """Per-outcome probabilities ``tr(T_i w) / tr(w)``."""
        w = np.asarray(w, dtype=complex)
        if w.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"state shape {w.shape} != ({self.dim}, {self.dim})")
        n = self.dim
        C = self.chois.reshape(len(self), n, n, n, n)
        p = np.einsum("kaiaj,ij->k", C, w).real
        return p / np.trace(w).real


def outcome_probability(exp, w, subset):
    """Probability that the outcome lies in `subset` (a collection of labels)."""
    subset = list(subset)
    idx = [exp.index(lab) for lab in subset]
    if len(set(idx)) != len(idx):
        raise UQMError("subset lists a label more than once")
    if not idx:
        return 0.0
    p = exp.probabilities(w)
    return float(np.sum(p[sorted(idx)]))


def posterior_state(exp, w, outcome, tol_prob=TOL_PROB):
    """Normalized state after observing `outcome`."""
    w = np.asarray(w, dtype=complex)
    out = cpmap.apply_choi(exp.chois[exp.index(outcome)], w)
    p = float(np.trace(out).real)
    if p <= tol_prob * np.trace(w).real:
        raise ZeroProbabilityError(f"outcome {outcome!r} has probability {p:.3e}")
    out = out / p
    return 0.5 * (out + out.conj().T)


def check_partition(exp, partition):
    blocks = [list(b) for b in partition]
    seen = []
    for b in blocks:
        if not b:
            raise BadPartitionError("partition blocks must be non-empty")
        for lab in b:
            if lab not in exp._index:
                raise BadPartitionError(f"unknown label {lab!r} in partition")
        seen.extend(b)
    if len(seen) != len(set(seen)):
        raise BadPartitionError("partition blocks overlap")
    if set(seen) != set(exp.labels):
        missing = set(exp.labels) - set(seen)
        raise BadPartitionError(f"partition does not cover outcomes {sorted(map(str, missing))}")
    return blocks


def coarse_grain(exp, partition):
    """Merge outcomes block by block.

    Each block becomes one outcome labelled by the tuple of its members; its
    map is the sum of the member maps (the union of their Kraus operators).
    """
    blocks = check_partition(exp, partition)
    labels, transforms = [], []
    for b in blocks:
        labels.append(tuple(b))
        members = [exp.kraus[exp.index(lab)] for lab in b]
        if all(K is not None for K in members):
            transforms.append(np.concatenate(members, axis=0))
        else:
            transforms.append(exp.event_choi(b))
    return DiscreteExperiment(labels, transforms)


def result_block(partition, label):
    """The block of `partition` that contains `label`."""
    for b in partition:
        if label in b:
            return tuple(b)
    raise UnknownLabelError(label)


def sample_discrete(exp, w, rng=None, trial_index=0, seed=None):
    """Draw one outcome by inverse CDF and return it with its posterior."""
    if seed is not None and rng is None:
        rng = seed
    rng = qstate.as_rng(rng)
    p = exp.probabilities(w)
    cdf = np.cumsum(np.clip(p, 0, None))
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    i = min(i, len(p) - 1)
    lab = exp.labels[i]
    return OutcomeSample(lab, posterior_state(exp, w, lab), float(p[i]), trial_index, seed)


def sample_discrete_counts(exp, w, N, rng=None):
    """Outcome counts over `N` independent trials (inverse CDF per trial)."""
    rng = qstate.as_rng(rng)
    p = exp.probabilities(w)
    cdf = np.cumsum(np.clip(p, 0, None))
    idx = np.searchsorted(cdf, rng.random(N) * cdf[-1], side="right")
    idx = np.minimum(idx, len(p) - 1)
    return np.bincount(idx, minlength=len(p))


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    n_outcomes: int = 0
    probe_states: int = 0

    @property
    def ok(self):
        return not self.violations

    def conditions(self):
        return sorted({v["condition"] for v in self.violations})

    def to_dict(self):
        return {
            "ok": self.ok,
            "n_outcomes": self.n_outcomes,
            "probe_states": self.probe_states,
            "violations": self.violations,
        }


def validate(exp, probe_states=16, rng=None, tol=1e-9):
    """Check complete positivity, trace reduction and total probability.

    Trace reduction and total probability are checked on random probe states
    (half mixed, half pure) and, exactly, on the spectrum of ``sum K^H K``.
    """
    rng = qstate.as_rng(rng)
    n = exp.dim
    report = ValidationReport(n_outcomes=len(exp), probe_states=probe_states)
    probes = [qstate.random_density(n, n if k % 2 == 0 else 1, rng) for k in range(probe_states)]
    for lab, C in zip(exp.labels, exp.chois):
        lam_min = float(np.linalg.eigvalsh(qstate.hermitian_part(C, tol=np.inf))[0])
        if lam_min < -tol:
            report.violations.append(
                {"condition": "completely_positive", "outcome": lab, "min_choi_eigenvalue": lam_min}
            )
        ratios = [float(np.trace(cpmap.apply_choi(C, w)).real) for w in probes]
        tc = cpmap.check_trace_condition(C, tol)
        worst = max(ratios + [tc.max_eigenvalue])
        if worst > 1 + tol:
            report.violations.append(
                {"condition": "trace_reducing", "outcome": lab, "max_ratio": worst}
            )
    total = exp.chois.sum(axis=0)
    ratios = [float(np.trace(cpmap.apply_choi(total, w)).real) for w in probes]
    tc = cpmap.check_trace_condition(total, tol)
    spread = [abs(r - 1) for r in ratios] + [abs(tc.max_eigenvalue - 1), abs(tc.min_eigenvalue - 1)]
    if max(spread) > tol:
        report.violations.append(
            {
                "condition": "total_probability",
                "min_ratio": min(ratios + [tc.min_eigenvalue]),
                "max_ratio": max(ratios + [tc.max_eigenvalue]),
            }
        )
    return report


def projective_experiment(vectors, labels=None):
    """Lüders measurement in an orthonormal basis (columns of `vectors`)."""
    V = np.asarray(vectors, dtype=complex)
    n = V.shape[1]
    labels = list(range(n)) if labels is None else list(labels)
    return DiscreteExperiment(labels, [np.outer(V[:, i], V[:, i].conj())[None] for i in range(n)])


def projector_experiment(projectors, labels=None):
    """Lüders measurement from a list of orthogonal projectors summing to the identity."""
    labels = list(range(len(projectors))) if labels is None else list(labels)
    return DiscreteExperiment(labels, [np.asarray(P, dtype=complex)[None] for P in projectors])


def random_experiment(n, n_outcomes, rng=None, max_kraus=3):
    """Random valid experiment: Kraus operators jointly normalized to ``sum K^H K = I``."""
    rng = qstate.as_rng(rng)
    counts = rng.integers(1, max_kraus + 1, size=n_outcomes)
    G = rng.standard_normal((counts.sum(), n, n)) + 1j * rng.standard_normal((counts.sum(), n, n))
    S = np.einsum("kba,kbc->ac", G.conj(), G)
    lam, V = np.linalg.eigh(S)
    K = G @ ((V / np.sqrt(lam)) @ V.conj().T)
    split = np.cumsum(counts)[:-1]
    return DiscreteExperiment(list(range(n_outcomes)), np.split(K, split))


class ContinuousExperiment:
    """Experiment with a continuum of outcomes and a rank-one transformation density.

    Parameters
    ----------
    outcome_space : dict
        Descriptor, e.g. ``{"kind": "projective", "n": 3}``.
    dim : int
        Dimension of the system Hilbert space.
    weight : float
        Normalization constant ``c`` of the density ``c <psi|w|psi>``.
    propose : callable ``(rng, m) -> (m, k)`` array
        Sampler of the base probability measure; rows are outcome points.
    embed : callable ``(m, k) -> (m, dim)`` array
        Unit vector ``psi`` attached to each outcome point.
    """

    def __init__(self, outcome_space, dim, weight, propose, embed):
        self.outcome_space = dict(outcome_space)
        self.dim = int(dim)
        self.weight = float(weight)
        self.propose = propose
        self.embed = embed

    def __repr__(self):
        return f"ContinuousExperiment({self.outcome_space!r}, dim={self.dim})"

    def _check(self, w):
        w = np.asarray(w, dtype=complex)
        if w.shape != (self.dim, self.dim):
            raise DimensionMismatchError(f"state shape {w.shape} != ({self.dim}, {self.dim})")
        return w

    def density(self, w, points):
        """Outcome density w.r.t. the base measure at one or more points."""
        w = self._check(w)
        pts = np.atleast_2d(points)
        val = self.weight * expectation(w, self.embed(pts))
        return val if np.ndim(points) > 1 else float(val[0])

    def transformation_density(self, point):
        """Rank-one Kraus family of ``t`` at a single outcome point."""
        psi = self.embed(np.atleast_2d(point))[0]
        return (np.sqrt(self.weight) * np.outer(psi, psi.conj()))[None]

    def posterior(self, point):
        return qstate.projector(self.embed(np.atleast_2d(point))[0])

    def sample(self, w, size, rng=None, return_stats=False):
        """Rejection-sample `size` outcome points from the density of `w`.

        Returns ``(points, densities)``.
        """
        w = self._check(w)
        rng = qstate.as_rng(rng)
        lam_max = float(np.linalg.eigvalsh(w)[-1])
        pts, proposed = rejection_sample(
            self.propose,
            lambda x: expectation(w, self.embed(x)) / lam_max,
            int(size),
            rng,
            expected_rate=1.0 / (self.weight * lam_max),
        )
        dens = self.weight * expectation(w, self.embed(pts))
        if return_stats:
            return pts, dens, {"proposed": proposed, "accepted": int(size),
                               "envelope": self.weight * lam_max}
        return pts, dens

    def samples(self, w, size, rng=None, seed=None):
        """Like :meth:`sample` but returns a list of :class:`OutcomeSample`."""
        if rng is None:
            rng = seed
        pts, dens = self.sample(w, size, rng)
        psis = self.embed(pts)
        return [
            OutcomeSample(pts[i], qstate.projector(psis[i]), float(dens[i]), i, seed)
            for i in range(len(pts))
        ]

    def region_probability(self, w, indicator, N, rng=None, chunk=1 << 15):
        """Monte Carlo estimate of the probability of the region selected by `indicator`.

        ``indicator=None`` selects the whole outcome space.
        """
        w = self._check(w)
        rng = qstate.as_rng(rng)

        def chunks():
            left = N
            while left > 0:
                m = min(chunk, left)
                pts = self.propose(rng, m)
                vals = self.weight * expectation(w, self.embed(pts))
                if indicator is not None:
                    vals = vals * np.asarray(indicator(pts), dtype=float)
                yield vals
                left -= m

        return mc_estimate(chunks())

    def total_probability(self, w, N, rng=None):
        return self.region_probability(w, None, N, rng)
