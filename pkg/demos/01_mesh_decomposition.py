"""Build a square interferometer mesh from phases and recover phases from a
target unitary.

The mesh cell is a Mach-Zehnder interferometer: theta2 = pi reflects (bar),
theta2 = 0 transmits (cross). Any unitary maps onto m(m-1)/2 cells plus a row
of output phases, exactly.
"""

import numpy as np

from photonps.linalg import haar_random_unitary, unitarity_defect
from photonps.mesh import build_unitary, clements_decompose, mzi_unitary

print("bar state (theta2 = pi):")
print(np.round(mzi_unitary(0.0, np.pi), 12))
print("\ncross state (theta2 = 0):")
print(np.round(mzi_unitary(0.0, 0.0), 12))
print("\nbalanced splitter (theta2 = pi/2), power splitting:")
print(np.round(np.abs(mzi_unitary(0.0, np.pi / 2)) ** 2, 12))

rng = np.random.default_rng(0)
for dim in (4, 8, 16):
    u = haar_random_unitary(dim, rng)
    params = clements_decompose(u)
    rebuilt = build_unitary(params)
    print(f"\ndim {dim:2d}: {len(params.cells)} cells in "
          f"{1 + max(c.layer for c in params.cells)} layers, "
          f"roundtrip error {np.linalg.norm(rebuilt - u):.2e}, "
          f"unitarity defect {unitarity_defect(rebuilt):.2e}")
