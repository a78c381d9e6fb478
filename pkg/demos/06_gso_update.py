"""Direct updating by rescale-and-reorthonormalize.

One matrix entry is amplified, its row renormalized, and the remaining rows
re-orthonormalized in order; the unitary moves smoothly toward routing the
rewarded percept to its action while every competing transition dies out.
The final unitary compiles back to mesh phases exactly.
"""

import numpy as np

from photonps.experiments.gso import gso_curve
from photonps.mesh import build_unitary, clements_decompose

u, log = gso_curve(dim=10, alpha=1.1, steps=500, seed=0,
                   stop_p=0.99, stop_competitor=0.01)
for row in log[:: max(1, len(log) // 10)]:
    print(f"step {row['step']:3d}: p_sa {row['p_sa']:.4f}, "
          f"largest competitor {row['max_competitor']:.4f}, "
          f"unitarity defect {row['unitarity_defect']:.1e}")
print(f"converged after {len(log)} updates")

params = clements_decompose(u)
print("recompiled to mesh phases; rebuild error",
      f"{np.linalg.norm(build_unitary(params) - u):.2e}")
