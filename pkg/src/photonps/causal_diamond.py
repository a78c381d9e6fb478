"""Causal-diamond locality analysis and economical phase updates.

For a transition probability p_sa on a layered circuit, only the cells inside
the intersection of the forward light cone of input s and the backward light
cone of output a can influence it. Light escapes that diamond only through
cells with an edge leaving it (leaking nodes), so tuning those few phases is
enough to steer p_sa. Works on square, triangular and arbitrary-connectivity
circuits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .circuits import CircuitGraph, input_state
from .linalg import TWO_PI
from .mesh import mzi_unitary, mzi_unitary_at

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

TUNABLE_SELECTIONS = ("leaking", "surface", "diamond", "all")


def _as_modes(x):
    return (int(x),) if np.isscalar(x) else tuple(int(m) for m in x)


@dataclass(frozen=True)
class CausalDiamond:
    pair: tuple            # (s modes, a modes)
    diamond: frozenset     # cell indices
    surface: frozenset
    leaking: frozenset


def _reach(n_cells: int, starts, adjacency):
    seen = [False] * n_cells
    stack = list(starts)
    for k in stack:
        seen[k] = True
    while stack:
        for nxt in adjacency[stack.pop()]:
            if not seen[nxt]:
                seen[nxt] = True
                stack.append(nxt)
    return seen


def find_causal_diamond(circuit: CircuitGraph, s, a) -> CausalDiamond:
    """One-pass diamond and leaking-node finder, O(|V| + |E|).

    The diamond is the intersection of forward/backward reachability; a
    diamond cell leaks when one of its outgoing edges ends outside the
    diamond. An unreachable pair yields empty sets (p_sa is identically 0).
    """
    s_modes, a_modes = _as_modes(s), _as_modes(a)
    n = len(circuit.cells)
    succ, pred = circuit._succ, circuit._pred
    first, last = circuit._first_on_mode, circuit._last_on_mode
    starts = [k for m in s_modes if (k := first.get(m)) is not None]
    ends = [k for m in a_modes if (k := last.get(m)) is not None]
    down = _reach(n, starts, succ)
    up = _reach(n, ends, pred)
    inside = [d and u for d, u in zip(down, up)]
    cells = circuit.cells
    diamond, surface, leaking = [], [], []
    for k in range(n):
        if not inside[k]:
            continue
        diamond.append(k)
        boundary = False
        for nxt in succ[k]:
            if not inside[nxt]:
                leaking.append(k)
                boundary = True
                break
        if not boundary:
            for prv in pred[k]:
                if not inside[prv]:
                    boundary = True
                    break
        if not boundary:
            for m in cells[k].modes:
                if first.get(m) == k or last.get(m) == k:
                    boundary = True
                    break
        if boundary:
            surface.append(k)
    return CausalDiamond((s_modes, a_modes), frozenset(diamond),
                         frozenset(surface), frozenset(leaking))


def brute_force_diamond(circuit: CircuitGraph, s, a):
    """Exponential path-enumeration oracle for the diamond and leaking sets.

    Materializes every complete photon route from the input mode (one branch
    per output mode of each visited cell, exponentially many) and checks each
    route: cells on routes exiting at output a form the diamond, and a cell
    leaks when some route steps from it out of the diamond.
    """
    s_modes, a_modes = _as_modes(s), _as_modes(a)

    next_on_mode = {}
    for mode, chain in enumerate(circuit._per_mode):
        for here, there in zip(chain, chain[1:]):
            next_on_mode[(here, mode)] = there

    routes = []  # (cells along the route, exit port)

    def extend(k, prefix):
        prefix.append(k)
        for mode in circuit.cells[k].modes:
            nxt = next_on_mode.get((k, mode))
            if nxt is None:
                routes.append((tuple(prefix), mode))
            else:
                extend(nxt, prefix)
        prefix.pop()

    for m in s_modes:
        start = circuit.first_cell_on_mode(m)
        if start is not None:
            extend(start, [])

    diamond = set()
    for cells, port in routes:
        if port in a_modes:
            diamond.update(cells)
    leaking = set()
    for cells, _ in routes:
        for here, there in zip(cells, cells[1:]):
            if here in diamond and there not in diamond:
                leaking.add(here)
    return frozenset(diamond), frozenset(leaking)


def tunable_cells(circuit: CircuitGraph, pairs, selection: str = "leaking"):
    """Union over pairs of the selected cell sets, in light-propagation order."""
    if selection not in TUNABLE_SELECTIONS:
        raise ValueError(f"selection must be one of {TUNABLE_SELECTIONS}, got {selection!r}")
    if selection == "all":
        chosen = set(range(len(circuit.cells)))
    else:
        chosen = set()
        for s, a in pairs:
            cd = find_causal_diamond(circuit, s, a)
            chosen |= set(getattr(cd, selection))
    return sorted(chosen, key=lambda k: (circuit.cells[k].layer, circuit.cells[k].modes))


def multi_pair_figure_of_merit(probs, mode: str = "mean") -> float:
    """Scalar merit over per-pair (and per-wavelength) probabilities."""
    probs = np.asarray(list(probs), dtype=float)
    if probs.size == 0:
        raise ValueError("figure of merit needs at least one probability")
    if mode == "mean":
        return float(probs.mean())
    if mode == "geometric_mean":
        if np.any(probs <= 0.0):
            return 0.0
        return float(np.exp(np.log(probs).mean()))
    if mode == "min":
        return float(probs.min())
    raise ValueError(f"unknown merit mode {mode!r}")


class LayerEvaluator:
    """Incremental p_sa evaluation while sweeping a layered circuit.

    Keeps the partial products before and after the current layer; advancing
    one layer costs two sparse layer applications (O(dim^2)) instead of a
    full circuit rebuild. Candidate phases for cells of the current layer
    are probed without touching the cached partial products.
    """

    def __init__(self, circuit: CircuitGraph, pairs, lambdas=None):
        self.circuit = circuit
        self.pairs = [(_as_modes(s), _as_modes(a)) for s, a in pairs]
        self.lambdas = list(lambdas) if lambdas is not None else [None]
        self._layer_pos = None

    def seek(self, layer_pos: int):
        """Position at circuit.layers[layer_pos], rebuilding both partials."""
        circuit = self.circuit
        self._layer_pos = layer_pos
        self._before = []
        self._after = []
        for lam in self.lambdas:
            before = np.eye(circuit.dim, dtype=complex)
            for pos in range(layer_pos):
                circuit.apply_layer(before, circuit.layers[pos], lam)
            after = np.eye(circuit.dim, dtype=complex)
            for pos in range(layer_pos + 1, len(circuit.layers)):
                circuit.apply_layer(after, circuit.layers[pos], lam)
            self._before.append(before)
            self._after.append(after)
        self._refresh_inputs()

    def advance(self):
        """Move to the next layer: fold the current layer into the prefix and
        peel it off the suffix."""
        circuit = self.circuit
        done = circuit.layers[self._layer_pos]
        self._layer_pos += 1
        entering = circuit.layers[self._layer_pos]
        for i, lam in enumerate(self.lambdas):
            circuit.apply_layer(self._before[i], done, lam)
            for k in circuit.layer_cells(entering):
                cell = circuit.cells[k]
                cols = list(cell.modes)
                self._after[i][:, cols] = self._after[i][:, cols] @ cell.block(lam).conj().T
        self._refresh_inputs()

    def _refresh_inputs(self):
        # per (lambda, pair): the state entering the current layer
        self._in_vecs = [
            [before @ input_state(self.circuit.dim, s) for s, _ in self.pairs]
            for before in self._before
        ]

    @property
    def current_layer(self):
        return self.circuit.layers[self._layer_pos]

    def _amplitudes(self, lam_idx: int, overrides=None):
        """Per pair, the output amplitudes on its action modes, with optional
        phase overrides {cell_index: (theta1, theta2)} in the current layer."""
        circuit = self.circuit
        lam = self.lambdas[lam_idx]
        after = self._after[lam_idx]
        out = []
        layer_members = circuit.layer_cells(self.current_layer)
        for p_idx, (s, a) in enumerate(self.pairs):
            vec = self._in_vecs[lam_idx][p_idx].copy()
            for k in layer_members:
                cell = circuit.cells[k]
                if overrides and k in overrides:
                    t1, t2 = overrides[k]
                    block = mzi_unitary(t1, t2) if lam is None else mzi_unitary_at(t1, t2, lam)
                else:
                    block = cell.block(lam)
                rows = list(cell.modes)
                vec[rows] = block @ vec[rows]
            out.append(np.array([after[m, :] @ vec for m in a]))
        return out

    def probabilities(self, overrides=None):
        """p_sa per (lambda, pair) with the current layer optionally overridden."""
        return [
            [float(np.sum(np.abs(amps) ** 2)) for amps in self._amplitudes(i, overrides)]
            for i in range(len(self.lambdas))
        ]


def fast_layer_eval(circuit: CircuitGraph, pairs, lambdas=None) -> LayerEvaluator:
    """Incremental evaluator positioned at the first layer."""
    ev = LayerEvaluator(circuit, pairs, lambdas)
    ev.seek(0)
    return ev


def circuit_probabilities(circuit: CircuitGraph, pairs, lambdas=None):
    """Flat list of p_sa over (lambda, pair), by full rebuild."""
    lams = list(lambdas) if lambdas is not None else [None]
    out = []
    for lam in lams:
        u = circuit.unitary(lam)
        for s, a in pairs:
            vec = u @ input_state(circuit.dim, s)
            a_modes = _as_modes(a)
            out.append(float(sum(abs(vec[m]) ** 2 for m in a_modes)))
    return out


def _sinusoid_coefficients(evaluator: LayerEvaluator, cell_idx: int, which: str):
    """Each p_sa is sinusoidal in one phase: p(theta) = A + Re(w e^{i theta/lam}).

    Probing the amplitude at phase values 0 and pi*lam (where the phase
    factor is +1 / -1) determines the affine amplitude dependence exactly.
    Returns [(A, w, lam_value) per (lambda, pair)].
    """
    cell = evaluator.circuit.cells[cell_idx]
    cur = (cell.theta1, cell.theta2)
    coeffs = []
    for lam_idx, lam in enumerate(evaluator.lambdas):
        lam_value = 1.0 if lam is None else float(lam)

        def amps_at(theta):
            if which == "theta1":
                ov = {cell_idx: (theta, cur[1])}
            else:
                ov = {cell_idx: (cur[0], theta)}
            return evaluator._amplitudes(lam_idx, ov)

        plus = amps_at(0.0)
        minus = amps_at(math.pi * lam_value)
        for amp_p, amp_m in zip(plus, minus):
            alpha = 0.5 * (amp_p + amp_m)
            beta = 0.5 * (amp_p - amp_m)
            const = float(np.sum(np.abs(alpha) ** 2 + np.abs(beta) ** 2))
            w = 2.0 * complex(np.sum(np.conj(alpha) * beta))
            coeffs.append((const, w, lam_value))
    return coeffs


def _merit_of_theta(theta, coeffs, merit_mode):
    probs = [
        const + (w * np.exp(1j * theta / lam)).real
        for const, w, lam in coeffs
    ]
    probs = np.clip(probs, 0.0, 1.0)
    return multi_pair_figure_of_merit(probs, merit_mode)


def _merit_grid(grid, coeffs, merit_mode):
    """Vectorized merit over an array of candidate phases."""
    probs = np.empty((len(coeffs), len(grid)))
    for row, (const, w, lam) in enumerate(coeffs):
        probs[row] = const + (w * np.exp(1j * grid / lam)).real
    probs = np.clip(probs, 0.0, 1.0)
    if merit_mode == "mean":
        return probs.mean(axis=0)
    if merit_mode == "geometric_mean":
        out = np.zeros(len(grid))
        ok = np.all(probs > 0.0, axis=0)
        out[ok] = np.exp(np.log(probs[:, ok]).mean(axis=0))
        return out
    if merit_mode == "min":
        return probs.min(axis=0)
    raise ValueError(f"unknown merit mode {merit_mode!r}")


def _golden_refine(fn, lo, hi, iterations=32):
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iterations):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _tune_phase(evaluator: LayerEvaluator, cell_idx: int, which: str,
                merit_mode: str, grid_points: int):
    """Grid + golden-section maximization of the merit over one phase; never
    returns a value worse than the current setting."""
    coeffs = _sinusoid_coefficients(evaluator, cell_idx, which)
    cell = evaluator.circuit.cells[cell_idx]
    current = cell.theta1 if which == "theta1" else cell.theta2
    grid = np.linspace(0.0, TWO_PI, grid_points, endpoint=False)
    values = _merit_grid(grid, coeffs, merit_mode)
    best_idx = int(np.argmax(values))
    spacing = TWO_PI / grid_points
    theta, merit = _golden_refine(
        lambda t: _merit_of_theta(t, coeffs, merit_mode),
        grid[best_idx] - spacing, grid[best_idx] + spacing,
        iterations=24,
    )
    current_merit = _merit_of_theta(current, coeffs, merit_mode)
    if current_merit >= merit:
        theta, merit = current, current_merit
    evaluator.circuit.set_phase(cell_idx, which, float(theta % TWO_PI))
    return merit


def update_sequential(circuit: CircuitGraph, pairs, *, tunable: str = "leaking",
                      merit_mode: str = "mean", lambdas=None,
                      grid_points: int = 64, cells=None) -> float:
    """One sequential sweep: each selected phase, in light-propagation order,
    is set to its merit-maximizing value before the next phase is probed.
    Returns the merit after the sweep; never lower than before it."""
    if cells is None:
        cells = tunable_cells(circuit, pairs, tunable)
    if not cells:
        raise ValueError("tunable cell set is empty; widen the selection")
    evaluator = LayerEvaluator(circuit, pairs, lambdas)
    by_layer = {}
    for k in cells:
        by_layer.setdefault(circuit.cells[k].layer, []).append(k)
    positions = {layer: pos for pos, layer in enumerate(circuit.layers)}
    merit = None
    started = False
    for layer in sorted(by_layer):
        pos = positions[layer]
        if not started:
            evaluator.seek(pos)
            started = True
        else:
            while evaluator._layer_pos < pos:
                evaluator.advance()
        for k in sorted(by_layer[layer], key=lambda k: circuit.cells[k].modes):
            merit = _tune_phase(evaluator, k, "theta1", merit_mode, grid_points)
            merit = _tune_phase(evaluator, k, "theta2", merit_mode, grid_points)
    return merit


def update_gradient(circuit: CircuitGraph, pairs, *, tunable: str = "leaking",
                    merit_mode: str = "mean", lambdas=None, lr: float = 0.2,
                    fd_step: float = 1e-5, cells=None) -> float:
    """One simultaneous finite-difference gradient-ascent step on the
    selected phases. Returns the merit after the step."""
    if cells is None:
        cells = tunable_cells(circuit, pairs, tunable)
    if not cells:
        raise ValueError("tunable cell set is empty; widen the selection")

    def merit_now():
        return multi_pair_figure_of_merit(
            circuit_probabilities(circuit, pairs, lambdas), merit_mode
        )

    grads = []
    for k in cells:
        for which in ("theta1", "theta2"):
            cell = circuit.cells[k]
            base = cell.theta1 if which == "theta1" else cell.theta2
            circuit.set_phase(k, which, base + fd_step)
            up = merit_now()
            circuit.set_phase(k, which, base - fd_step)
            down = merit_now()
            circuit.set_phase(k, which, base)
            grads.append((k, which, (up - down) / (2.0 * fd_step)))
    for k, which, g in grads:
        cell = circuit.cells[k]
        base = cell.theta1 if which == "theta1" else cell.theta2
        circuit.set_phase(k, which, (base + lr * g) % TWO_PI)
    return merit_now()
