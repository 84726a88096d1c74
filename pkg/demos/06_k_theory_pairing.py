"""Three routes to the index of the Dirac operator twisted by a Bott projection.

1. Compress D onto the range of the projection and count kernel dimensions.
2. Integrate the Chern character of the projection.
3. Pair the projection with the JLO cochain at small time.
"""

import warnings

from heatindex import bott_projection, flat_torus_dirac, k_pairing_index, rhs_index, spectral_index
from heatindex.models import TruncationWarning

# the projection has small Fourier tails past half the cutoff; expected here
warnings.simplefilter("ignore", TruncationWarning)

e = bott_projection(128)
for M in (8, 12):
    si = spectral_index(flat_torus_dirac(M), e)
    print(f"cutoff {M}: spectral index {si.index:+d}  (gap ratio {si.gap_ratio:.1e})")
print(f"Chern integral: {rhs_index(e).real:+.9f}")
pr = k_pairing_index(flat_torus_dirac(8), e, 0.002)
print(f"JLO pairing at t=0.002: {pr.pairing.real:+.4f}  terms {dict((k, complex(v)) for k, v in pr.terms.items())}")
