"""Centralized numeric tolerances shared by every module.

Double precision leaves about 1e-16 of relative headroom; the constants
below budget for O(dim^3) accumulation in dense linear algebra at dims up
to a few thousand.
"""

#: Construction-time invariant checks (hermiticity, unit trace, orthonormality).
INVARIANT_TOL = 1e-10

#: Direct comparisons between two quantities that should agree to roundoff.
COMPARISON_TOL = 1e-12

#: Spectral weights at or below this floor are treated as exact zeros.
ENTROPY_EIGENVALUE_FLOOR = 1e-12

#: Outcome probabilities below this floor carry no conditional state.
PROBABILITY_FLOOR = 1e-12

#: Quadrature normalization tolerance for lattice wavefunctions.
QUADRATURE_NORM_TOL = 1e-8

#: Largest dimension for which dense matrices are materialized.
DENSE_DIM_CAP = 4096
