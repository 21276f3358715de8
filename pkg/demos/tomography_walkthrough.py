"""
Recovering a qutrit from random projective outcomes
===================================================

Each copy of the state is measured against a ray drawn with density
``n <x|w|x>``. The average outcome projector is a diluted copy of the state,
``(I + w) / (n + 1)``, which can be inverted.
"""

import numpy as np

from uqmlab import qstate
from uqmlab.tomography import expected_ensemble, reconstruct, run_uqm

rng = np.random.default_rng(7)
w = qstate.random_density(3, rng=rng)
print("input state eigenvalues:", np.round(np.linalg.eigvalsh(w), 4))

# Every outcome leaves a pure post-measurement state.
run = run_uqm(w, 50_000, seed=7)
print("acceptance rate:", round(run.n_samples / run.proposals, 3))

# The ensemble is much closer to I/3 than the input was.
r = run.ensemble_estimate
print("distance of ensemble to I/3:", round(qstate.trace_distance(r, np.eye(3) / 3), 4))
print("distance of ensemble to its prediction:", round(qstate.trace_distance(r, expected_ensemble(w)), 4))

###############################################################################
# Undo the dilution and clip to the nearest density matrix.
raw, psd = reconstruct(r, 3)
print("smallest raw eigenvalue:", round(np.linalg.eigvalsh(raw)[0], 4))
print("reconstruction error:", round(qstate.trace_distance(psd, w), 4))

###############################################################################
# The error falls roughly as one over the square root of the sample count.
for N in (1_000, 10_000, 100_000):
    _, psd = reconstruct(run_uqm(w, N, seed=N).ensemble_estimate, 3)
    print(f"N={N:>6}: error {qstate.trace_distance(psd, w):.4f}")
