"""Forward evaluation of the quantum PS agent.

A percept is a single photon injected into one input mode (or an
equal-amplitude pair of modes); the memory unitary propagates it and the
post-selected distribution over action modes is the policy. Non-action
outcomes are discarded. Layer-wise partial products expose where the
amplitude sits inside the circuit, the interpretability trace.
"""

from dataclasses import dataclass, field

import numpy as np

from . import circuits, ecm, mesh
from .errors import DegeneratePolicyError, StructureError


@dataclass
class QuantumAgent:
    """Percept/action mode maps over a unitary backend.

    ``backend`` may be MeshParameters, a UnitaryRoute, a CircuitGraph, or a
    plain unitary matrix.
    """

    backend: object
    percept_map: dict
    action_map: dict
    glow: dict = field(default_factory=dict)

    def __post_init__(self):
        dim = backend_dim(self.backend)
        seen = set()
        for percept, modes in self.percept_map.items():
            modes = (modes,) if np.isscalar(modes) else tuple(modes)
            for m in modes:
                if not 0 <= m < dim:
                    raise StructureError(f"percept {percept!r} mode {m} outside [0, {dim})")
                if m in seen:
                    raise StructureError(f"percept modes must be distinct, mode {m} reused")
                seen.add(m)
        used = set()
        for action, modes in self.action_map.items():
            modes = (modes,) if np.isscalar(modes) else tuple(modes)
            for m in modes:
                if not 0 <= m < dim:
                    raise StructureError(f"action {action!r} mode {m} outside [0, {dim})")
                if m in used:
                    raise StructureError(f"action mode sets must be disjoint, mode {m} reused")
                used.add(m)

    @property
    def dim(self) -> int:
        return backend_dim(self.backend)

    def action_modes(self, action):
        modes = self.action_map[action]
        return (modes,) if np.isscalar(modes) else tuple(modes)


def backend_dim(backend) -> int:
    if isinstance(backend, mesh.MeshParameters):
        return backend.dim
    if isinstance(backend, ecm.UnitaryRoute):
        return backend.dim
    if isinstance(backend, circuits.CircuitGraph):
        return backend.dim
    return np.asarray(backend).shape[0]


def backend_unitary(backend) -> np.ndarray:
    if isinstance(backend, mesh.MeshParameters):
        return mesh.build_unitary(backend)
    if isinstance(backend, ecm.UnitaryRoute):
        return ecm.ecm_unitary(backend)
    if isinstance(backend, circuits.CircuitGraph):
        return backend.unitary()
    return np.asarray(backend, dtype=complex)


def backend_layer_unitaries(backend) -> list:
    """Per-layer unitaries in propagation order (mesh output phases fold into
    the last layer; they do not move probability)."""
    if isinstance(backend, mesh.MeshParameters):
        dim = backend.dim
        by_layer = {}
        for cell in backend.sorted_cells():
            by_layer.setdefault(cell.layer, []).append(cell)
        mats = []
        for layer in sorted(by_layer):
            u = np.eye(dim, dtype=complex)
            for cell in by_layer[layer]:
                rows = [cell.top_mode, cell.top_mode + 1]
                u[rows, :] = mesh.mzi_unitary(cell.theta1, cell.theta2) @ u[rows, :]
            mats.append(u)
        mats[-1] = np.exp(1j * np.asarray(backend.output_phases))[:, None] * mats[-1]
        return mats
    if isinstance(backend, ecm.UnitaryRoute):
        mats = []
        for group in ecm.layer_grouping(backend):
            u = np.eye(backend.dim, dtype=complex)
            for idx in group:
                step = backend.steps[idx]
                rows = list(step.support)
                u[rows, :] = step.block @ u[rows, :]
            mats.append(u)
        return mats
    if isinstance(backend, circuits.CircuitGraph):
        mats = []
        for layer in backend.layers:
            u = np.eye(backend.dim, dtype=complex)
            backend.apply_layer(u, layer)
            mats.append(u)
        return mats
    return [np.asarray(backend, dtype=complex)]


def input_state(agent: QuantumAgent, percept) -> np.ndarray:
    if percept not in agent.percept_map:
        raise KeyError(f"unknown percept {percept!r}")
    return circuits.input_state(agent.dim, agent.percept_map[percept])


def forward(agent: QuantumAgent, percept) -> np.ndarray:
    """Amplitude vector over output modes for a single-photon percept."""
    return backend_unitary(agent.backend) @ input_state(agent, percept)


@dataclass(frozen=True)
class PolicyDistribution:
    actions: tuple
    probabilities: np.ndarray  # post-selected, sums to 1
    acceptance: float          # total probability mass on action modes


def policy(agent: QuantumAgent, percept) -> PolicyDistribution:
    """Post-selected distribution over actions given a percept."""
    amps = forward(agent, percept)
    actions = tuple(agent.action_map)
    raw = np.array([
        sum(abs(amps[m]) ** 2 for m in agent.action_modes(a)) for a in actions
    ])
    acceptance = float(raw.sum())
    if acceptance <= 0.0:
        raise DegeneratePolicyError(
            f"no amplitude on any action mode for percept {percept!r}"
        )
    return PolicyDistribution(actions, raw / acceptance, acceptance)


def sample_action(agent: QuantumAgent, percept, rng: np.random.Generator):
    dist = policy(agent, percept)
    idx = rng.choice(len(dist.actions), p=dist.probabilities)
    return dist.actions[idx]


def layer_probabilities(agent: QuantumAgent, percept) -> np.ndarray:
    """Photon-position probabilities after each layer.

    Column 0 is the input distribution; column l the squared amplitudes after
    the first l layers; the last column matches |forward|^2. Every column
    sums to 1.
    """
    state = input_state(agent, percept)
    layers = backend_layer_unitaries(agent.backend)
    out = np.empty((agent.dim, len(layers) + 1))
    out[:, 0] = np.abs(state) ** 2
    for l, u in enumerate(layers):
        state = u @ state
        out[:, l + 1] = np.abs(state) ** 2
    return out
