"""Projective-simulation agents as single-photon quantum walks on
programmable interferometer meshes: mesh decomposition, ECM routing,
classical and quantum agents, three training methods, causal-diamond
analysis, and the transfer-learning benchmark."""

from . import (
    causal_diamond,
    circuits,
    classical_ps,
    ecm,
    experiments,
    io,
    linalg,
    mesh,
    quantum_agent,
    training,
)

__version__ = "0.1.0"

__all__ = [
    "causal_diamond",
    "circuits",
    "classical_ps",
    "ecm",
    "experiments",
    "io",
    "linalg",
    "mesh",
    "quantum_agent",
    "training",
]
