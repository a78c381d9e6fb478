"""File formats: unitaries, mesh parameters, circuits, ECM graphs, routes.

Unitaries are JSON arrays-of-arrays of [re, im] pairs; mesh parameters,
circuits and graphs serialize through their to_dict/from_dict forms. CSV
writers keep float repr so identical runs produce bit-identical files.
"""

import csv
import json

import numpy as np

from .circuits import CircuitGraph
from .ecm import EcmGraph, UnitaryRoute
from .mesh import MeshParameters


def unitary_to_json(u: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(u, dtype=complex)]


def unitary_from_json(data) -> np.ndarray:
    rows = []
    for row in data:
        rows.append([complex(re, im) for re, im in row])
    u = np.array(rows, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary JSON must be square, got shape {u.shape}")
    return u


def save_unitary(path, u: np.ndarray):
    with open(path, "w") as fh:
        json.dump(unitary_to_json(u), fh)


def load_unitary(path) -> np.ndarray:
    with open(path) as fh:
        return unitary_from_json(json.load(fh))


def save_mesh(path, params: MeshParameters):
    with open(path, "w") as fh:
        json.dump(params.to_dict(), fh, indent=1)


def load_mesh(path) -> MeshParameters:
    with open(path) as fh:
        return MeshParameters.from_dict(json.load(fh))


def save_circuit(path, circuit: CircuitGraph):
    with open(path, "w") as fh:
        json.dump(circuit.to_dict(), fh, indent=1)


def load_circuit(path) -> CircuitGraph:
    """Circuit JSON, or a mesh-parameter JSON viewed as a circuit."""
    with open(path) as fh:
        data = json.load(fh)
    if data.get("cells") and "top_mode" in data["cells"][0]:
        return CircuitGraph.from_mesh(MeshParameters.from_dict(data))
    return CircuitGraph.from_dict(data)


def save_ecm_graph(path, graph: EcmGraph):
    with open(path, "w") as fh:
        json.dump(graph.to_dict(), fh, indent=1)


def load_ecm_graph(path) -> EcmGraph:
    with open(path) as fh:
        return EcmGraph.from_dict(json.load(fh))


def route_to_json(route: UnitaryRoute) -> list:
    return [
        {
            "vertex": step.vertex,
            "support": list(step.support),
            "block": unitary_to_json(step.block),
        }
        for step in route.steps
    ]


def write_csv(path, rows, fieldnames=None):
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
