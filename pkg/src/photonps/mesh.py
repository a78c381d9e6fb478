"""Programmable square interferometer meshes.

Builds unitaries from layered Mach-Zehnder phase settings, recovers phase
settings from a target unitary by Givens-style elimination, and evaluates the
wavelength-dependent unitary a mesh implements away from its nominal
operating point.

Conventions fixed here and used repo-wide:

* A cell on modes (n, n+1) applies ``B(theta2) @ diag(exp(i*theta1), 1)``,
  i.e. the external phase theta1 sits on the top input of the cell and the
  photon passes it before the interferometer block
  ``B(theta2) = (1/2) [[1, i], [i, 1]] diag(exp(i*theta2), 1) [[1, i], [i, 1]]``.
* theta2 = pi is the bar state (full reflection), theta2 = 0 the cross state
  (full transmission).
* A full mesh of dimension m has m(m-1)/2 cells plus a final diagonal of m
  output phases applied after the last layer.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonUnitaryError, StructureError
from .linalg import TWO_PI, assert_unitary, wrap_angle


def mzi_unitary(theta1: float, theta2: float) -> np.ndarray:
    """2x2 unitary of one mesh cell: input phase theta1, then the MZI block.

    Closed form of ``B(theta2) @ diag(exp(i*theta1), 1)`` with
    ``s = sin(theta2/2)``, ``c = cos(theta2/2)``::

        i e^{i theta2/2} [[s e^{i theta1}, c], [c e^{i theta1}, -s]]

    (theta1=0, theta2=pi) gives the bar state [[-1, 0], [0, 1]];
    (theta1=0, theta2=0) gives the cross state [[0, i], [i, 0]].
    """
    half = 0.5 * theta2
    s, c = np.sin(half), np.cos(half)
    mu = 1j * np.exp(1j * half)
    e1 = np.exp(1j * theta1)
    return mu * np.array([[s * e1, c], [c * e1, -s]], dtype=complex)


@dataclass(frozen=True)
class MeshCell:
    """One tunable cell of the square mesh, acting on (top_mode, top_mode+1)."""

    layer: int
    top_mode: int
    theta1: float
    theta2: float


@dataclass(frozen=True)
class MeshParameters:
    """Phase settings of a full square mesh: m(m-1)/2 cells plus an output
    diagonal of m phases applied after the last layer."""

    dim: int
    cells: tuple
    output_phases: tuple

    def __post_init__(self):
        m = self.dim
        if m < 2:
            raise StructureError(f"mesh dimension must be >= 2, got {m}")
        cells = tuple(self.cells)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "output_phases", tuple(float(p) for p in self.output_phases))
        if len(self.output_phases) != m:
            raise StructureError(
                f"expected {m} output phases, got {len(self.output_phases)}"
            )
        expected = m * (m - 1) // 2
        if len(cells) != expected:
            raise StructureError(
                f"expected {expected} cells for dim {m}, got {len(cells)}"
            )
        used = {}
        for cell in cells:
            if not 0 <= cell.top_mode <= m - 2:
                raise StructureError(f"cell {cell} has top_mode outside [0, {m - 2}]")
            for mode in (cell.top_mode, cell.top_mode + 1):
                key = (cell.layer, mode)
                if key in used:
                    raise StructureError(
                        f"cells {used[key]} and {cell} overlap on mode {mode} in layer {cell.layer}"
                    )
                used[key] = cell

    def sorted_cells(self) -> tuple:
        return tuple(sorted(self.cells, key=lambda c: (c.layer, c.top_mode)))

    def phase_vector(self) -> np.ndarray:
        """Flatten to [theta1, theta2 per sorted cell..., output phases...]."""
        cells = self.sorted_cells()
        vec = np.empty(2 * len(cells) + self.dim)
        for k, cell in enumerate(cells):
            vec[2 * k] = cell.theta1
            vec[2 * k + 1] = cell.theta2
        vec[2 * len(cells):] = self.output_phases
        return vec

    def with_phase_vector(self, vec: np.ndarray) -> "MeshParameters":
        cells = self.sorted_cells()
        if len(vec) != 2 * len(cells) + self.dim:
            raise StructureError(
                f"phase vector length {len(vec)} does not match mesh of dim {self.dim}"
            )
        new_cells = tuple(
            MeshCell(c.layer, c.top_mode, float(vec[2 * k]), float(vec[2 * k + 1]))
            for k, c in enumerate(cells)
        )
        return MeshParameters(self.dim, new_cells, tuple(float(p) for p in vec[2 * len(cells):]))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "cells": [
                {
                    "layer": c.layer,
                    "top_mode": c.top_mode,
                    "theta1": c.theta1,
                    "theta2": c.theta2,
                }
                for c in self.sorted_cells()
            ],
            "output_phases": list(self.output_phases),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MeshParameters":
        cells = tuple(
            MeshCell(int(c["layer"]), int(c["top_mode"]), float(c["theta1"]), float(c["theta2"]))
            for c in data["cells"]
        )
        return cls(int(data["dim"]), cells, tuple(float(p) for p in data["output_phases"]))


def square_layout(dim: int) -> list:
    """Canonical square-mesh positions as (layer, top_mode) pairs.

    Layer parity alternates the cell offset, giving m layers and m(m-1)/2
    cells in total.
    """
    positions = []
    for layer in range(dim):
        start = layer % 2
        for top in range(start, dim - 1, 2):
            positions.append((layer, top))
    return positions


def random_mesh(dim: int, rng: np.random.Generator) -> MeshParameters:
    """Square mesh with phases drawn uniformly from [0, 2*pi)."""
    cells = tuple(
        MeshCell(layer, top, rng.uniform(0.0, TWO_PI), rng.uniform(0.0, TWO_PI))
        for layer, top in square_layout(dim)
    )
    return MeshParameters(dim, cells, tuple(rng.uniform(0.0, TWO_PI, size=dim)))


def build_unitary(params: MeshParameters) -> np.ndarray:
    """Multiply out the mesh: cells layer by layer, then the output diagonal."""
    m = params.dim
    u = np.eye(m, dtype=complex)
    for cell in params.sorted_cells():
        block = mzi_unitary(cell.theta1, cell.theta2)
        rows = [cell.top_mode, cell.top_mode + 1]
        u[rows, :] = block @ u[rows, :]
    return np.exp(1j * np.asarray(params.output_phases))[:, None] * u


def _solve_right_cell(a: complex, b: complex):
    # Choose (theta1, theta2) so that right-multiplying by mzi_unitary(...)^dag
    # sends the row fragment [a, b] to [0, *]: requires (a, b) proportional to
    # the second row of the cell, mu * (c*e^{i*theta1}, -s).
    theta2 = 2.0 * np.arctan2(abs(b), abs(a))
    if abs(a) > 0.0 and abs(b) > 0.0:
        theta1 = float(np.angle(-a / b))
    else:
        theta1 = 0.0
    return wrap_angle(theta1), wrap_angle(theta2)


def _solve_phase_push(v: np.ndarray):
    # Factor a 2x2 unitary as diag(g1, g2) @ mzi_unitary(theta1, theta2).
    s = abs(v[0, 0])
    c = abs(v[0, 1])
    theta2 = 2.0 * np.arctan2(s, c)
    theta1 = float(np.angle(v[0, 0] / v[0, 1])) if (s > 1e-14 and c > 1e-14) else 0.0
    mu = 1j * np.exp(1j * theta2 / 2.0)
    e1 = np.exp(1j * theta1)
    g1 = v[0, 1] / (mu * c) if c >= s else v[0, 0] / (mu * s * e1)
    g2 = -v[1, 1] / (mu * s) if s >= c else v[1, 0] / (mu * c * e1)
    return wrap_angle(theta1), wrap_angle(theta2), g1 / abs(g1), g2 / abs(g2)


def clements_decompose(u: np.ndarray, tol: float = 1e-8) -> MeshParameters:
    """Recover square-mesh phase settings that reproduce ``u`` exactly.

    Givens-style elimination: subdiagonals are zeroed alternately by
    right-multiplication with inverse cells and left-multiplication with
    plain Givens rotations; the left factors are then pushed through the
    residual diagonal, which becomes the output-phase screen. m(m-1)/2
    elimination steps in total.

    Raises NonUnitaryError when the input fails the unitarity check at
    ``tol``.
    """
    u = np.asarray(u, dtype=complex)
    assert_unitary(u, tol, "decomposition input")
    m = u.shape[0]
    if m == 1:
        raise StructureError("decomposition needs dim >= 2")
    w = u.copy()
    applied = []  # (top_mode, theta1, theta2) in light-propagation order
    left_ops = []  # (top_row, 2x2 Givens) in application order
    for i in range(1, m):
        if i % 2 == 1:
            for j in range(i):
                row, col = m - 1 - j, i - 1 - j
                t1, t2 = _solve_right_cell(w[row, col], w[row, col + 1])
                block = mzi_unitary(t1, t2)
                w[:, [col, col + 1]] = w[:, [col, col + 1]] @ block.conj().T
                applied.append((col, t1, t2))
        else:
            for j in range(1, i + 1):
                row, col = m + j - i - 1, j - 1
                a, b = w[row - 1, col], w[row, col]
                norm = np.hypot(abs(a), abs(b))
                if norm > 0.0:
                    g = np.array([[np.conj(a), np.conj(b)], [-b, a]], dtype=complex) / norm
                else:
                    g = np.eye(2, dtype=complex)
                w[[row - 1, row], :] = g @ w[[row - 1, row], :]
                left_ops.append((row - 1, g))

    residual = float(np.linalg.norm(w - np.diag(np.diag(w))))
    if residual > 100 * tol:
        raise NonUnitaryError(residual, tol, "elimination residual")
    diag = np.diag(w).copy()

    # Push the inverse left factors through the diagonal; each becomes a
    # realizable cell on the output side of the mesh.
    for top, g in reversed(left_ops):
        v = g.conj().T @ np.diag([diag[top], diag[top + 1]])
        t1, t2, g1, g2 = _solve_phase_push(v)
        diag[top], diag[top + 1] = g1, g2
        applied.append((top, t1, t2))

    # As-soon-as-possible layering preserves the product because cells that
    # share a mode keep their relative order; disjoint cells commute.
    last_layer = [-1] * m
    cells = []
    for top, t1, t2 in applied:
        layer = max(last_layer[top], last_layer[top + 1]) + 1
        last_layer[top] = last_layer[top + 1] = layer
        cells.append(MeshCell(layer, top, float(t1), float(t2)))
    return MeshParameters(m, tuple(cells), tuple(wrap_angle(np.angle(diag))))


# --- wavelength-dependent evaluation -------------------------------------

NOMINAL_WAVELENGTH = 1.0


@dataclass(frozen=True)
class WavelengthSpec:
    """Rescaled operating wavelength of a mesh.

    Phase shifters are driven by power settings fixed at the nominal
    wavelength, ``P = theta * nominal``, so the phase seen at wavelength
    ``lam`` is ``P / lam``; balanced splitters become couplers of angle
    ``pi / (4 * lam)``.
    """

    lam: float
    nominal: float = NOMINAL_WAVELENGTH

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.lam}")

    def phase(self, theta_nominal: float) -> float:
        return theta_nominal * self.nominal / self.lam

    def splitter(self) -> np.ndarray:
        angle = np.pi / (4.0 * self.lam) * self.nominal
        c, s = np.cos(angle), np.sin(angle)
        return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def mzi_unitary_at(theta1: float, theta2: float, lam: float) -> np.ndarray:
    """Cell unitary seen at wavelength ``lam`` (power settings fixed at nominal)."""
    spec = WavelengthSpec(lam)
    bs = spec.splitter()
    p2 = np.diag([np.exp(1j * spec.phase(theta2)), 1.0])
    p1 = np.diag([np.exp(1j * spec.phase(theta1)), 1.0])
    return bs @ p2 @ bs @ p1


def wavelength_unitary(params: MeshParameters, lam: float) -> np.ndarray:
    """Effective mesh unitary at wavelength ``lam``.

    At ``lam == NOMINAL_WAVELENGTH`` this coincides entrywise with
    ``build_unitary(params)``.
    """
    spec = WavelengthSpec(lam)
    m = params.dim
    u = np.eye(m, dtype=complex)
    for cell in params.sorted_cells():
        block = mzi_unitary_at(cell.theta1, cell.theta2, lam)
        rows = [cell.top_mode, cell.top_mode + 1]
        u[rows, :] = block @ u[rows, :]
    phases = np.array([spec.phase(p) for p in params.output_phases])
    return np.exp(1j * phases)[:, None] * u


def circuit_graph(source):
    """Directed-acyclic graph view of a mesh or explicit layer list.

    Accepts MeshParameters or a layer list of (mode_i, mode_j, theta1,
    theta2) tuples; see :mod:`photonps.circuits`.
    """
    from . import circuits

    if isinstance(source, MeshParameters):
        return circuits.CircuitGraph.from_mesh(source)
    return circuits.CircuitGraph.from_layers(source)
