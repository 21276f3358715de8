"""
Disentangling a singlet pair
============================

A two-qubit state is measured against product rays ``a (x) b``. For the
singlet the outcome density is ``2 (1 - |<a|b>|^2)``, so the two factors are
almost never found pointing the same way.
"""

import numpy as np

from uqmlab import qstate
from uqmlab.disentangle import (
    factor_overlap,
    mean_factor_projectors,
    region_probability,
    sample_disentangle,
    singlet,
)

factors, dens = sample_disentangle(singlet(), (2, 2), rng=3, size=100_000)
s = factor_overlap(*factors)

# Without the state the overlap would be uniform on [0, 1]; here its density is 2(1 - s).
hist, edges = np.histogram(s, bins=5, range=(0, 1), density=True)
for lo, h in zip(edges[:-1], hist):
    print(f"overlap in [{lo:.1f}, {lo + 0.2:.1f}): density {h:.3f} (predicted {2 * (1 - (lo + 0.1)):.3f})")

aligned = region_probability(singlet(), (2, 2), lambda f: factor_overlap(*f) > 0.99, 100_000, 4)
print(f"P(overlap > 0.99) = {aligned.value:.2e} +/- {aligned.std_error:.1e} (exact 1e-4)")

###############################################################################
# Each factor on its own is still unbiased, since the reduced states are I/2.
for k, (mean, se) in enumerate(mean_factor_projectors(factors)):
    print(f"factor {k} mean projector:\n{np.round(mean, 3)}")

###############################################################################
# The post-measurement state is a product, so both reduced states are pure.
post = np.kron(qstate.projector(factors[0][0]), qstate.projector(factors[1][0]))
print("reduced purities:", [round(qstate.purity(qstate.partial_trace(post, (2, 2), k)), 12) for k in (0, 1)])
