"""Desk-scale audits of the finite, algebraic and numeric ingredients of
amplified subconvexity machinery over small number fields: residue-ring
exponential sums and their correlation laws, unit-lattice algorithms,
the amplified Poisson key identity, local Whittaker and L-factor
identities, archimedean Mellin-Bessel transforms, and the exponent
min-max program with its exact optimum 1/36.
"""

__version__ = "0.1.0"

from .fieldfile import load_field  # noqa: F401
from .exponents import optimize_kappa  # noqa: F401
