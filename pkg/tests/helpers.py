"""Shared test fixtures: random graph generation."""

import numpy as np

from photonps.ecm import EcmGraph
from photonps.errors import StructureError


def random_ordered_dag(n, rng, edge_prob=0.4):
    """Random connected ECM DAG whose label order is a topological order."""
    labels = [f"v{k:03d}" for k in range(1, n + 1)]
    while True:
        edges = []
        for j in range(n):
            for k in range(j + 1, n):
                if rng.random() < edge_prob:
                    edges.append((labels[j], labels[k]))
        parents = {v: [] for v in labels}
        children = {v: [] for v in labels}
        for u, v in edges:
            parents[v].append(u)
            children[u].append(v)
        tags = {}
        for v in labels:
            if not parents[v] and children[v]:
                tags[v] = "percept"
            elif parents[v] and not children[v]:
                tags[v] = "action"
            elif parents[v] and children[v]:
                tags[v] = "intermediate"
            else:
                break  # isolated vertex; resample
        else:
            try:
                return EcmGraph(tuple(labels), tuple(edges), tags)
            except StructureError:
                pass  # disconnected; resample
