"""Learning curves for the direct Gram-Schmidt update."""

import numpy as np

from ..linalg import haar_random_unitary, unitarity_defect
from ..training import gso_update


def gso_curve(dim: int = 10, alpha: float = 1.1, steps: int = 500, *,
              s: int = 0, a: int = None, seed: int = 0,
              stop_p: float = None, stop_competitor: float = None):
    """Repeatedly reinforce one (s, a) pair of a Haar-random unitary.

    Logs, per step, p_sa, the largest competing probability in row a and
    column s, and the unitarity defect. Single agent, no averaging; stops
    early once p_sa > stop_p and all competitors < stop_competitor.
    """
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if a is None:
        a = dim - 1
    rng = np.random.default_rng(seed)
    u = haar_random_unitary(dim, rng)
    log = []
    for step in range(1, steps + 1):
        u = gso_update(u, s, a, alpha)
        probs = np.abs(u) ** 2
        competitors = max(
            max(probs[a, k] for k in range(dim) if k != s),
            max(probs[k, s] for k in range(dim) if k != a),
        )
        log.append({
            "step": step,
            "p_sa": float(probs[a, s]),
            "max_competitor": float(competitors),
            "unitarity_defect": unitarity_defect(u),
        })
        if (stop_p is not None and probs[a, s] > stop_p
                and stop_competitor is not None and competitors < stop_competitor):
            break
    return u, log
