"""From a memory graph to a sequence of mode-mixing unitaries and back.

Each non-percept clip becomes one unitary supported on itself and its
parents; the ordered product is the memory unitary. The map is bijective:
the graph can be read back off the route as long as no mixing coefficient
vanishes.
"""

import numpy as np

from photonps import ecm

graph = ecm.EcmGraph(
    vertices=tuple(f"v{k}" for k in range(1, 10)),
    edges=(
        ("v1", "v3"), ("v1", "v4"), ("v2", "v4"), ("v2", "v5"),
        ("v3", "v6"), ("v4", "v6"), ("v4", "v7"), ("v5", "v7"),
        ("v6", "v8"), ("v7", "v8"), ("v7", "v9"),
    ),
    tags={"v1": "percept", "v2": "percept", "v8": "action", "v9": "action",
          **{f"v{k}": "intermediate" for k in range(3, 8)}},
)

order = ecm.topological_order(graph)
print("topological ordering:", order)

route = ecm.route(graph, order, rng=np.random.default_rng(1))
for step in route.steps:
    print(f"step for {step.vertex}: support {step.support} "
          f"(block {step.block.shape[0]}x{step.block.shape[0]})")

u = ecm.ecm_unitary(route)
print("\nmemory unitary defect:", np.linalg.norm(u @ u.conj().T - np.eye(9)))
print("percept v1 -> action probabilities:",
      {a: round(float(abs(u[order.index(a), order.index('v1')]) ** 2), 4)
       for a in ("v8", "v9")})

groups = ecm.layer_grouping(route)
print("\ncommuting layers:", [[route.steps[i].vertex for i in g] for g in groups])

recovered = ecm.router_inverse(route)
match = ecm.ordered_edge_positions(recovered, ecm.topological_order(recovered)) \
    == ecm.ordered_edge_positions(graph, order)
print("router inverse recovers the ordered graph:", match)

sub = ecm.reachable_subgraph(graph, "v2")
print("subgraph reachable from v2:", sub.vertices)
