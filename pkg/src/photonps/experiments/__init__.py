"""End-to-end reproduction harnesses.

* transfer: the 27-percept / 27-task two-stage transfer-learning benchmark
  separating quantum from classical agents;
* pairs: rewarded percept/action pairs trained through causal diamonds;
* wavelength: wavelength-dependence scans and multi-wavelength training;
* gso: learning curves for the direct Gram-Schmidt update.
"""

from . import gso, pairs, transfer, wavelength

__all__ = ["gso", "pairs", "transfer", "wavelength"]
