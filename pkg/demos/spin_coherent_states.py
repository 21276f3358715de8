"""
Spin coherent states and their measurement
==========================================

A spin-``s`` system lives in the symmetric power ``Sym^{2s}(C^2)``. Coherent
states are symmetric powers of a single spinor, and with the weight
``2s + 1`` they resolve the identity.
"""

import numpy as np

from uqmlab import qstate
from uqmlab.coherent import (
    VeroneseConfig,
    check_coherent_resolution,
    conic_residual,
    sample_coherent,
    tangency_residual,
    veronese_embed,
)

cfg = VeroneseConfig.spin(1)
up = np.array([1.0, 0.0])
print("coherent vector of spin up:", veronese_embed(up, cfg))

# Spin-1 coherent vectors satisfy one quadratic equation, the conic.
rng = np.random.default_rng(0)
phi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
print("conic residual of a coherent vector:", abs(conic_residual(veronese_embed(phi, cfg))))
print("conic residual of the m=0 state:", abs(conic_residual(np.array([0, 1, 0]))))

###############################################################################
# Resolution of the identity, checked by Monte Carlo.
chk = check_coherent_resolution(cfg, 100_000, 1)
print(f"largest deviation from I_3: {chk.max_deviation_se:.2f} standard errors")

###############################################################################
# Measuring the coherent state of spin up: the outcome axis concentrates near
# the input with <|<up|phi>|^2> = 3/4.
w = qstate.projector(veronese_embed(up, cfg))
dirs, _ = sample_coherent(w, cfg, rng=2, size=50_000)
print("mean overlap with spin up:", round(np.mean(np.abs(dirs[:, 0]) ** 2), 4))

###############################################################################
# Vectors built from the spinor orthogonal to phi are orthogonal to coh(phi).
print("tangency residual:", tangency_residual(phi, rng.standard_normal(2)))
