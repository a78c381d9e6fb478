"""Wavelength-dependent memories and multi-wavelength training.

Phase shifters are driven by power settings fixed at the nominal wavelength,
so off-nominal photons see a different effective unitary; the effect grows
with circuit size. Training the geometric mean of p_sa across wavelengths
finds one shared phase configuration that serves all of them.
"""

from photonps.causal_diamond import circuit_probabilities
from photonps.experiments.wavelength import (
    TEN_MODE_PAIRS,
    TRAIN_LAMBDAS,
    fidelity_scan,
    multiwavelength_train,
)

print("mean fidelity between nominal and offset effective unitaries")
print("(100 random meshes per point):")
rows = fidelity_scan(dims=(4, 8, 12), delta_lambdas=(0.01, 0.05, 0.15), seed=0)
for delta in (0.01, 0.05, 0.15):
    line = [f"dim {r['dim']:2d}: {r['mean_fidelity']:.3f}"
            for r in rows if r["delta_lambda"] == delta]
    print(f"  offset {delta:.2f}: " + "  ".join(line))

print(f"\ntraining a 10-mode mesh for wavelengths {TRAIN_LAMBDAS} at once ...")
circuit, log = multiwavelength_train(seed=0)
print(f"stopped after {len(log)} sweeps")
probs = circuit_probabilities(circuit, TEN_MODE_PAIRS, lambdas=list(TRAIN_LAMBDAS))
for i, lam in enumerate(TRAIN_LAMBDAS):
    per_pair = probs[i * len(TEN_MODE_PAIRS):(i + 1) * len(TEN_MODE_PAIRS)]
    print(f"  wavelength {lam}: p_sa " + " ".join(f"{p:.3f}" for p in per_pair))
