"""Numerical tolerances shared across the package.

All values are absolute and apply to double-precision dense computations at
total dimension <= ~16.
"""

TAU_NORM = 1e-10   # trace / vector norm / orthonormality
TAU_HERM = 1e-10   # Hermiticity
TAU_PSD = 1e-9     # most negative eigenvalue tolerated in a density matrix
EPS_EIG = 1e-12    # eigenvalues below this count as exact zeros in entropies
TAU_NUM = 1e-7     # generic numeric comparison
TAU_MAJ = 1e-6     # majorization dominance checks
TAU_VERIFY = 1e-6  # inequality checks in the verification suite
EPS_LOG = 1e-300   # floor inside log2 for vanishing omega . A products

TIE_DECIMALS = 12  # overlaps are rounded to this many digits before sorting
