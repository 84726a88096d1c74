"""The closed-form harmonic-oscillator kernel against a finite-difference solve.

The Crank-Nicolson oracle is run on three grids. Its measured convergence
order and Richardson value are printed next to the closed form.
"""

import numpy as np

from heatindex import mehler_kernel, oscillator_fd_oracle

MAGNETIC = np.array([[0, 1j], [-1j, 0]])

for b in (0.5, 1.0, 2.0):
    for t in (0.25, 0.5):
        R = b * MAGNETIC
        exact = mehler_kernel(R, 0.0, t).real
        res = oscillator_fd_oracle(R, 0.0, t)
        print(f"b={b:3.1f} t={t:4.2f}  closed form {exact:.8f}  oracle {res.value:.8f}  order {res.order:.3f}")
