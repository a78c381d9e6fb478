"""A classical random-walk agent and its quantum counterpart side by side.

The classical agent hops clip to clip with h-value probabilities and learns
by reinforcing glowing edges. The quantum agent sends one photon through the
memory unitary and post-selects on action modes; the layer trace shows where
the amplitude sits inside the circuit.
"""

import numpy as np

from photonps import ecm
from photonps.classical_ps import ClassicalAgent
from photonps.mesh import random_mesh
from photonps.quantum_agent import QuantumAgent, layer_probabilities, policy, sample_action

graph = ecm.EcmGraph(
    ("s1", "s2", "c1", "c2", "a1", "a2"),
    (("s1", "c1"), ("s1", "c2"), ("s2", "c2"), ("c1", "a1"),
     ("c1", "a2"), ("c2", "a1"), ("c2", "a2")),
    {"s1": "percept", "s2": "percept", "c1": "intermediate",
     "c2": "intermediate", "a1": "action", "a2": "action"},
)

rng = np.random.default_rng(0)
classical = ClassicalAgent(graph, gamma=0.0, eta=1.0)
print("training the classical agent to prefer s1 -> a2 ...")
for _ in range(300):
    action, path = classical.walk("s1", rng)
    classical.update(path, 1.0 if action == "a2" else 0.0)
print("p(a2 | s1) after training:", round(classical.policy("s1", "a2"), 3))

route = ecm.route(graph, rng=rng)
quantum = QuantumAgent(route, {"s1": 0, "s2": 1},
                       {"a1": (4,), "a2": (5,)})
dist = policy(quantum, "s1")
print("\nquantum policy for s1:",
      {a: round(float(p), 3) for a, p in zip(dist.actions, dist.probabilities)},
      f"(acceptance {dist.acceptance:.3f})")
print("sampled actions:", [sample_action(quantum, "s1", rng) for _ in range(8)])

mesh_agent = QuantumAgent(random_mesh(6, rng), {0: 0}, {m: (m,) for m in range(6)})
trace = layer_probabilities(mesh_agent, 0)
print("\nphoton position probabilities per layer (6-mode mesh, percept on mode 0):")
for layer in range(trace.shape[1]):
    bars = " ".join(f"{trace[m, layer]:.2f}" for m in range(6))
    print(f"  after layer {layer}: {bars}")
print("every column sums to", trace.sum(axis=0).round(12).tolist())
