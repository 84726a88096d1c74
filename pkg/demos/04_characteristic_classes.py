"""Exact characteristic-class series and integrated Chern numbers.

The A-hat series comes out as exact rationals. The Chern number of a
projection field is integrated on a periodic grid.
"""

from heatindex import MultiVector, a_hat, bott_projection, rhs_index, root_block
from heatindex.charclass import IdempotentField, TorusGrid, landau_curvature

theta = MultiVector.basis(4, 1, 2) + MultiVector.basis(4, 3, 4)
print("A-hat of the formal 4-generator block:", a_hat(root_block(theta)))

for profile in ("trigonometric", "bump"):
    print(f"Bott projection ({profile}): integrated index {rhs_index(bott_projection(128, profile)).real:+.9f}")

unit = IdempotentField.identity(TorusGrid(16))
for k in (1, 2, 3):
    print(f"line bundle of flux {k}: integrated index {rhs_index(unit, F=landau_curvature(k)).real:+.9f}")
