"""Layered linear-optical circuits with arbitrary mode connectivity.

A circuit is a list of tunable cells, each acting on a pair of modes inside a
layer; light propagates through layers in ascending order. The induced
directed acyclic graph (one vertex per cell, edges following light from each
cell to the next cell downstream on a shared mode) is what the causal-diamond
machinery operates on. Square and triangular meshes are special cases.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .linalg import TWO_PI
from .mesh import MeshParameters, mzi_unitary, mzi_unitary_at


@dataclass
class CircuitCell:
    layer: int
    modes: tuple  # (i, j) with i < j, not necessarily adjacent
    theta1: float
    theta2: float

    def block(self, lam=None) -> np.ndarray:
        if lam is None:
            return mzi_unitary(self.theta1, self.theta2)
        return mzi_unitary_at(self.theta1, self.theta2, lam)


class CircuitGraph:
    """Cells plus the propagation DAG they induce.

    Phases are mutable (training updates them in place, single writer); the
    connectivity is fixed at construction.
    """

    def __init__(self, dim: int, cells):
        self.dim = dim
        self.cells = list(cells)
        self._validate()
        self._index()

    def _validate(self):
        if self.dim < 2:
            raise StructureError(f"circuit needs >= 2 modes, got {self.dim}")
        seen_layers = {}
        for k, cell in enumerate(self.cells):
            i, j = cell.modes
            if not (0 <= i < j < self.dim):
                raise StructureError(f"cell {k} has invalid mode pair {cell.modes}")
            for mode in cell.modes:
                key = (cell.layer, mode)
                if key in seen_layers:
                    raise StructureError(
                        f"cells {seen_layers[key]} and {k} overlap on mode {mode} in layer {cell.layer}"
                    )
                seen_layers[key] = k
        order = [c.layer for c in self.cells]
        if order != sorted(order):
            # keep a deterministic in-layer order as well
            self.cells.sort(key=lambda c: (c.layer, c.modes))

    def _index(self):
        # For every mode, the cells that touch it in propagation order.
        per_mode = [[] for _ in range(self.dim)]
        for k, cell in enumerate(self.cells):
            for mode in cell.modes:
                per_mode[mode].append(k)
        for mode in range(self.dim):
            per_mode[mode].sort(key=lambda k: self.cells[k].layer)
        self._per_mode = per_mode
        succ = [[] for _ in self.cells]
        pred = [[] for _ in self.cells]
        first = {}
        last = {}
        for mode in range(self.dim):
            chain = per_mode[mode]
            if chain:
                first[mode] = chain[0]
                last[mode] = chain[-1]
            for a, b in zip(chain, chain[1:]):
                succ[a].append(b)
                pred[b].append(a)
        self._succ = [sorted(set(s)) for s in succ]
        self._pred = [sorted(set(p)) for p in pred]
        self._first_on_mode = first
        self._last_on_mode = last
        self.layers = sorted({c.layer for c in self.cells})
        by_layer = {}
        for k, cell in enumerate(self.cells):
            by_layer.setdefault(cell.layer, []).append(k)
        self._by_layer = by_layer

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_mesh(cls, params: MeshParameters) -> "CircuitGraph":
        cells = [
            CircuitCell(c.layer, (c.top_mode, c.top_mode + 1), c.theta1, c.theta2)
            for c in params.sorted_cells()
        ]
        return cls(params.dim, cells)

    @classmethod
    def from_layers(cls, layers) -> "CircuitGraph":
        """Build from an explicit layer list: one sequence of
        (mode_i, mode_j, theta1, theta2) tuples per layer."""
        cells = []
        dim = 0
        for layer_idx, layer in enumerate(layers):
            for entry in layer:
                i, j, t1, t2 = entry
                if i == j:
                    raise StructureError(f"layer {layer_idx}: cell on identical modes {i}")
                i, j = (i, j) if i < j else (j, i)
                cells.append(CircuitCell(layer_idx, (int(i), int(j)), float(t1), float(t2)))
                dim = max(dim, j + 1)
        return cls(dim, cells)

    @classmethod
    def square(cls, dim: int, rng=None) -> "CircuitGraph":
        from .mesh import random_mesh, square_layout, MeshCell

        if rng is None:
            cells = tuple(MeshCell(l, t, 0.0, 0.0) for l, t in square_layout(dim))
            params = MeshParameters(dim, cells, (0.0,) * dim)
        else:
            params = random_mesh(dim, rng)
        return cls.from_mesh(params)

    @classmethod
    def triangular(cls, dim: int, rng=None) -> "CircuitGraph":
        """Triangular layout: descending diagonals of nearest-neighbour cells."""
        sequence = []
        for diag in range(dim - 1):
            for top in range(dim - 2, diag - 1, -1):
                sequence.append(top)
        last_layer = [-1] * dim
        cells = []
        for top in sequence:
            layer = max(last_layer[top], last_layer[top + 1]) + 1
            last_layer[top] = last_layer[top + 1] = layer
            t1 = rng.uniform(0.0, TWO_PI) if rng is not None else 0.0
            t2 = rng.uniform(0.0, TWO_PI) if rng is not None else 0.0
            cells.append(CircuitCell(layer, (top, top + 1), t1, t2))
        return cls(dim, cells)

    @classmethod
    def random(cls, dim: int, n_layers: int, rng: np.random.Generator,
               fill: float = 0.8) -> "CircuitGraph":
        """Random connectivity: each layer pairs up a random subset of modes."""
        cells = []
        for layer in range(n_layers):
            modes = list(rng.permutation(dim))
            n_pairs = max(1, int(fill * (dim // 2)))
            for _ in range(n_pairs):
                if len(modes) < 2:
                    break
                i, j = modes.pop(), modes.pop()
                cells.append(
                    CircuitCell(layer, (min(i, j), max(i, j)),
                                rng.uniform(0.0, TWO_PI), rng.uniform(0.0, TWO_PI))
                )
        return cls(dim, cells)

    # -- graph view --------------------------------------------------------

    def successors(self, k: int):
        return self._succ[k]

    def predecessors(self, k: int):
        return self._pred[k]

    def edges(self):
        return [(a, b) for a, succ in enumerate(self._succ) for b in succ]

    def first_cell_on_mode(self, mode: int):
        return self._first_on_mode.get(mode)

    def last_cell_on_mode(self, mode: int):
        return self._last_on_mode.get(mode)

    def output_modes_of(self, k: int):
        """Modes on which cell k is the last cell (its light exits there)."""
        return [m for m in self.cells[k].modes if self._last_on_mode.get(m) == k]

    # -- phases --------------------------------------------------------------

    def phase_vector(self) -> np.ndarray:
        vec = np.empty(2 * len(self.cells))
        for k, cell in enumerate(self.cells):
            vec[2 * k] = cell.theta1
            vec[2 * k + 1] = cell.theta2
        return vec

    def set_phase_vector(self, vec: np.ndarray):
        for k, cell in enumerate(self.cells):
            cell.theta1 = float(vec[2 * k])
            cell.theta2 = float(vec[2 * k + 1])

    def set_phase(self, cell_index: int, which: str, value: float):
        cell = self.cells[cell_index]
        if which == "theta1":
            cell.theta1 = float(value)
        elif which == "theta2":
            cell.theta2 = float(value)
        else:
            raise ValueError(f"unknown phase name {which!r}")

    # -- evaluation ----------------------------------------------------------

    def layer_cells(self, layer: int):
        return self._by_layer.get(layer, [])

    def apply_layer(self, u: np.ndarray, layer: int, lam=None, inverse=False) -> np.ndarray:
        """In place, left-multiply ``u`` by the layer unitary (or its inverse)."""
        for k in self.layer_cells(layer):
            cell = self.cells[k]
            block = cell.block(lam)
            if inverse:
                block = block.conj().T
            rows = list(cell.modes)
            u[rows, :] = block @ u[rows, :]
        return u

    def unitary(self, lam=None) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for layer in self.layers:
            self.apply_layer(u, layer, lam)
        return u

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "cells": [
                {"layer": c.layer, "modes": list(c.modes), "theta1": c.theta1, "theta2": c.theta2}
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CircuitGraph":
        cells = [
            CircuitCell(int(c["layer"]), (int(c["modes"][0]), int(c["modes"][1])),
                        float(c["theta1"]), float(c["theta2"]))
            for c in data["cells"]
        ]
        return cls(int(data["dim"]), cells)


def input_state(dim: int, modes) -> np.ndarray:
    """Single-photon input: one mode, or an equal-amplitude pair/set of modes."""
    if np.isscalar(modes):
        modes = (int(modes),)
    vec = np.zeros(dim, dtype=complex)
    amp = 1.0 / np.sqrt(len(modes))
    for m in modes:
        vec[int(m)] = amp
    return vec


def pair_probability(u: np.ndarray, s, a) -> float:
    """p_sa = sum over action modes of |amplitude|^2 for a (possibly
    multi-mode) percept injected into ``u``."""
    vec = u @ input_state(u.shape[0], s)
    if np.isscalar(a):
        a = (int(a),)
    return float(sum(abs(vec[int(m)]) ** 2 for m in a))
