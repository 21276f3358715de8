"""
Choi matrices, Kraus operators and positivity
=============================================

A linear map on matrices is completely positive exactly when its Choi matrix
is positive semidefinite. The transpose map is the standard example of a map
that is positive without being completely positive.
"""

import numpy as np

from uqmlab import cpmap, qstate

K = cpmap.depolarizing_kraus(0.5)
C = cpmap.choi_from_kraus(K)
print("depolarizing Choi spectrum:", np.round(np.linalg.eigvalsh(C), 4))
K2 = cpmap.kraus_from_choi(C)
rho = qstate.random_density(2, rng=1)
print("Kraus count after decomposition:", len(K2))
print("roundtrip error:", np.max(np.abs(cpmap.apply_map(K2, rho) - cpmap.apply_map(K, rho))))

###############################################################################
# The transpose map keeps single-system states positive...
T = cpmap.transpose_choi(2)
print("Choi spectrum of the transpose:", np.linalg.eigvalsh(T))
verdict = cpmap.certify_positive(T, rng=0)
print("verdict:", verdict.kind.value, "with smallest biquadratic value", verdict.witness_value)

###############################################################################
# ...but acting on half of a Bell pair it produces a negative eigenvalue.
bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
out = cpmap.apply_local(T, np.outer(bell, bell), 2)
print("spectrum after local transpose:", np.round(np.linalg.eigvalsh(out), 4))
