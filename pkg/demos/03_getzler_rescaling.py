"""Rescaling the twisted flat-torus heat kernel toward its local limit.

As u shrinks the rescaled kernel at the origin approaches (4 pi)^-1 exp(-F)
with F = f e12, at a rate close to u^2 when the twist is on.
"""

from heatindex import rescaled_limit_check

for f in (0.0, 1.0):
    tab = rescaled_limit_check(f)
    print(f"twist f = {f}: fitted rate {tab.rate:.2f}")
    for u, err, val in zip(tab.u, tab.errors, tab.values):
        print(f"  u={u:.2e}  scalar {val[()].real:.10f}  e12 {val[(1, 2)].real:+.10f}  error {err:.2e}")
