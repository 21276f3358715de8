"""Universal quantum measurements: tomographic, disentangling and coherent.

Numerical tools for completely positive maps, transformation-valued
measures, and Monte Carlo simulation of measurements whose outcome spaces are
complex projective space, Segre varieties and Veronese varieties.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .qstate import (  # noqa: F401
    eig_hermitian,
    make_density,
    partial_trace,
    random_density,
    random_unitary,
    tensor_product,
    trace_distance,
)
