"""Truncated expansion of e^{-tD^2} a e^{tD^2} in iterated commutators.

Keeping K terms leaves a residual that scales like t^(K+1).
"""

from heatindex import conjugation_expansion_residual, flat_torus_dirac

model = flat_torus_dirac(6)
a = {(1, 0): 0.5, (-1, 0): 0.5}
for K in (1, 2, 3):
    tab = conjugation_expansion_residual(model, a, K)
    print(f"K={K}: fitted slope {tab.slope:.3f}  residuals {', '.join(f'{r:.2e}' for r in tab.residuals)}")
