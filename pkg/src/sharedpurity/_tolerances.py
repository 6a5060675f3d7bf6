"""Validation tolerances shared by every module.

Kept in one table so pass/fail decisions are reproducible.
"""

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-12

# optimizer defaults
DEFAULT_STARTS = 64
DEFAULT_MAX_SWEEPS = 500
DEFAULT_SWEEP_TOL = 1e-12
MAX_BASIS_STARTS = 256

# quadrature
QUAD_ABS_TOL = 1e-10
