"""Numerical checks of the local index theorem and the small-time limit of the
JLO cocycle on exactly solvable two-dimensional Dirac operators."""

import os as _os

# Thread count for BLAS/OpenMP; effective only if set before numpy loads.
_threads = _os.environ.get("HEATINDEX_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .exterior_clifford import MultiVector, chirality, clifford_generators, supertrace, symbol_map  # noqa: E402
from .charclass import FormMatrix, a_hat, ch_de_rham, chern_character, integrate_top, rhs_index, root_block  # noqa: E402
from .models import (  # noqa: E402
    bott_projection,
    flat_torus_dirac,
    landau_model,
    monopole_model,
    multiplication_operator,
)
from .heat import heat_supertrace, mehler_kernel, oscillator_fd_oracle, rescaled_limit_check  # noqa: E402
from .jlo import (  # noqa: E402
    JloQuery,
    conjugation_expansion_residual,
    divided_difference_exp,
    jlo_cochain,
    jlo_small_t_limit,
    k_pairing_index,
    simplex_moment,
    spectral_index,
)

__version__ = "0.1.0"
