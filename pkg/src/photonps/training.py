"""Variational and direct update machinery for quantum PS agents.

Three routes to new phases:

* minimizing the exact loss, which reproduces the classical update rule on
  h-values through auxiliary per-percept normalizers;
* minimizing the simplified loss, which drives observed percept-action
  probabilities toward ReLU-cutoff targets built from glow and reward;
* the direct Gram-Schmidt update, which rescales one matrix entry and
  re-orthonormalizes the remaining rows.

Gradients are central finite differences; the optimizer is adaptive moment
estimation with the usual defaults.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateRowError
from .linalg import assert_unitary, wrap_angle

ADAM_BETA1, ADAM_BETA2, ADAM_EPS = 0.9, 0.999, 1e-8
FD_STEP = 1e-5
_P_CLIP = 1e-12


def relu(x):
    return np.maximum(x, 0.0)


def cutoff(x):
    """Smooth-enough clamp of target values into [0, 1]: 1 - relu(1 - relu(x))."""
    return 1.0 - relu(1.0 - relu(x))


def kl_binary(p, target) -> float:
    """KL divergence between the binary distributions {target, 1-target} and
    {p, 1-p}; the target is held fixed, p carries the parameters."""
    target = float(target)
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"kl_binary target {target} outside [0, 1]")
    p = float(np.clip(p, _P_CLIP, 1.0 - _P_CLIP))
    out = 0.0
    if target > 0.0:
        out += target * np.log(target / p)
    if target < 1.0:
        out += (1.0 - target) * np.log((1.0 - target) / (1.0 - p))
    return out


def squared_error(p, target) -> float:
    return float(p - target) ** 2


DISTANCES = {"kl_binary": kl_binary, "squared_error": squared_error}


def annealing_schedule(name: str, **params):
    """Reward annealing f(t): monotone from 1 toward 0; f(0) = 1."""
    if name == "constant":
        return lambda t: 1.0
    if name == "exponential":
        tau = float(params.get("tau", 100.0))
        if tau <= 0.0:
            raise ValueError("exponential schedule needs tau > 0")
        return lambda t: float(np.exp(-t / tau))
    raise ValueError(f"unknown annealing schedule {name!r}")


@dataclass
class TrainConfig:
    gamma: float = 0.0
    eta: float = 1.0
    reward_scale: float = 0.1
    annealing: str = "constant"
    annealing_params: dict = field(default_factory=dict)
    distance: str = "kl_binary"
    action_count: int = 2
    phase_penalty_weight: float = 0.0
    learning_rate: float = 0.01
    optimizer_steps: int = 10

    def __post_init__(self):
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {sorted(DISTANCES)}")
        self.schedule = annealing_schedule(self.annealing, **self.annealing_params)
        if abs(self.schedule(0) - 1.0) > 1e-12:
            raise ValueError("annealing schedule must start at f(0) = 1")

    def reward(self, t: int) -> float:
        return self.schedule(t) * self.reward_scale


@dataclass
class ReplayEntry:
    percept: object
    action: object
    reward: float
    glow: float
    p_prev: float
    target: float
    h_prev: float = None


@dataclass
class ReplayBuffer:
    capacity: int = 10_000
    policy: str = "fifo"  # or "error"
    entries: list = field(default_factory=list)

    def add(self, entry: ReplayEntry):
        if len(self.entries) >= self.capacity:
            if self.policy == "error":
                raise OverflowError(f"replay buffer full at capacity {self.capacity}")
            self.entries.pop(0)
        self.entries.append(entry)

    def clear(self):
        self.entries.clear()

    def __len__(self):
        return len(self.entries)


def simplified_target(p_prev: float, glow: float, reward: float, config: TrainConfig) -> float:
    """Cutoff target of the simplified rule: the uniform distribution plus the
    damped old deviation plus the glow-gated reward."""
    inv_a = 1.0 / config.action_count
    raw = inv_a + (1.0 - config.gamma) * (p_prev - inv_a) + glow * reward
    return float(cutoff(raw))


def glow_update(table: dict, taken, eta: float) -> dict:
    """Taken pair -> 1, every other pair damped by (1 - eta)."""
    new = {pair: (1.0 - eta) * value for pair, value in table.items()}
    new[taken] = 1.0
    return new


@dataclass
class VariationalHandle:
    """Phase vector plus the probability model it parametrizes.

    ``prob_fn(theta, pairs)`` returns the percept-action probabilities at
    phases theta. ``phase_slice`` marks the output-phase block used by the
    l1 penalty of the exact loss; ``aux_h`` are the per-percept normalizers
    of the exact loss (appended to theta for optimization, never wrapped).
    """

    theta: np.ndarray
    prob_fn: object
    phase_slice: slice = None
    aux_h: dict = None

    def probabilities(self, pairs, theta=None):
        theta = self.theta if theta is None else theta
        return np.asarray(self.prob_fn(theta, pairs), dtype=float)


def mesh_handle(params, percept_map=None, action_map=None) -> VariationalHandle:
    """Handle over a square mesh; pairs are (input mode(s), output mode(s))
    unless explicit percept/action maps are given."""
    from .circuits import input_state
    from .mesh import build_unitary

    n_cell = 2 * len(params.cells)

    def prob_fn(theta, pairs):
        mesh_now = params.with_phase_vector(theta)
        u = build_unitary(mesh_now)
        out = []
        for s, a in pairs:
            modes_s = percept_map[s] if percept_map else s
            modes_a = action_map[a] if action_map else a
            vec = u @ input_state(params.dim, modes_s)
            modes_a = (modes_a,) if np.isscalar(modes_a) else modes_a
            out.append(sum(abs(vec[int(m)]) ** 2 for m in modes_a))
        return out

    return VariationalHandle(
        theta=params.phase_vector(),
        prob_fn=prob_fn,
        phase_slice=slice(n_cell, n_cell + params.dim),
    )


def loss_simplified(handle: VariationalHandle, batch, config: TrainConfig,
                    theta=None) -> float:
    """Sum of distances between current probabilities and the stored targets,
    over batch entries with nonzero glow. Empty batch gives zero loss."""
    entries = [e for e in batch if e.glow > 0.0]
    if not entries:
        return 0.0
    dist = DISTANCES[config.distance]
    pairs = [(e.percept, e.action) for e in entries]
    probs = handle.probabilities(pairs, theta)
    return float(sum(dist(p, e.target) for p, e in zip(probs, entries)))


def loss_exact(handle: VariationalHandle, batch, config: TrainConfig,
               theta=None, aux_h=None) -> float:
    """Exact-rule loss over h-scaled probabilities plus the l1 penalty on the
    output phases; targets come from the previous agent state stored in the
    batch entries."""
    dist = DISTANCES[config.distance]
    aux = aux_h if aux_h is not None else handle.aux_h
    if aux is None:
        aux = {e.percept: float(config.action_count) for e in batch}
    pairs = [(e.percept, e.action) for e in batch]
    probs = handle.probabilities(pairs, theta)
    total = 0.0
    for p, e in zip(probs, batch):
        h_now = aux[e.percept]
        h_prev = e.h_prev if e.h_prev is not None else h_now
        lhs = p * h_now - 1.0
        target = (1.0 - config.gamma) * (e.p_prev * h_prev - 1.0) + e.glow * e.reward
        total += dist(lhs, target)
    if config.phase_penalty_weight > 0.0 and handle.phase_slice is not None:
        th = handle.theta if theta is None else theta
        phases = np.angle(np.exp(1j * th[handle.phase_slice]))
        total += config.phase_penalty_weight * float(np.sum(np.abs(phases)))
    return float(total)


def gradient(loss_fn, theta: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central finite differences, deterministic; raises on non-finite loss."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(len(theta)):
        probe = theta.copy()
        probe[i] = theta[i] + step
        up = loss_fn(probe)
        probe[i] = theta[i] - step
        down = loss_fn(probe)
        if not (np.isfinite(up) and np.isfinite(down)):
            raise FloatingPointError(f"non-finite loss probing parameter {i}")
        grad[i] = (up - down) / (2.0 * step)
    return grad


@dataclass
class AdamState:
    m: np.ndarray = None
    v: np.ndarray = None
    t: int = 0


def optimizer_step(theta: np.ndarray, grad: np.ndarray, state: AdamState,
                   lr: float, wrap: slice = slice(None)) -> np.ndarray:
    """One adaptive-moment descent step; phase entries are wrapped to
    [0, 2*pi)."""
    if state.m is None:
        state.m = np.zeros_like(theta)
        state.v = np.zeros_like(theta)
    state.t += 1
    state.m = ADAM_BETA1 * state.m + (1.0 - ADAM_BETA1) * grad
    state.v = ADAM_BETA2 * state.v + (1.0 - ADAM_BETA2) * grad**2
    m_hat = state.m / (1.0 - ADAM_BETA1**state.t)
    v_hat = state.v / (1.0 - ADAM_BETA2**state.t)
    new = theta - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    new[wrap] = wrap_angle(new[wrap])
    return new


def training_log_row(step: int, loss: float, pair_probs: dict, acceptance: float,
                     learning_rate: float) -> dict:
    """One flush's CSV row: step, loss, per-pair probabilities, acceptance,
    learning rate."""
    row = {"step": step, "loss": loss}
    row.update({f"p_{s}_{a}": p for (s, a), p in pair_probs.items()})
    row["acceptance"] = acceptance
    row["learning_rate"] = learning_rate
    return row


def replay_flush(buffer: ReplayBuffer, handle: VariationalHandle,
                 config: TrainConfig, adam: AdamState = None,
                 loss: str = "simplified"):
    """Summed loss over the buffered batch, a fixed number of optimizer
    steps, then the buffer is cleared. Returns (handle, per-step losses)."""
    if not buffer.entries:
        raise ValueError("replay buffer is empty")
    batch = list(buffer.entries)
    if adam is None:
        adam = AdamState()
    loss_fn = {"simplified": loss_simplified, "exact": loss_exact}[loss]
    losses = []
    theta = handle.theta
    for _ in range(config.optimizer_steps):
        current = loss_fn(handle, batch, config, theta=theta)
        losses.append(current)
        grad = gradient(lambda th: loss_fn(handle, batch, config, theta=th), theta)
        theta = optimizer_step(theta, grad, adam, config.learning_rate)
    buffer.clear()
    return replace(handle, theta=theta), losses


def gso_update(u: np.ndarray, s: int, a: int, alpha: float,
               decompose: bool = False):
    """Rescale entry (a, s) by alpha, renormalize row a, then re-orthonormalize
    the remaining rows by ordered Gram-Schmidt (projections only against rows
    already finalized). Returns the new unitary, or (unitary, MeshParameters)
    when ``decompose`` is set.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    u = assert_unitary(np.asarray(u, dtype=complex), 1e-8, "gso input")
    m = u.shape[0]
    new = np.zeros_like(u)
    row = u[a].copy()
    row[s] *= alpha
    norm = np.linalg.norm(row)
    if norm < 1e-12:
        raise DegenerateRowError(f"rescaled row {a} has zero norm")
    new[a] = row / norm
    done = [a]
    for r in range(m):
        if r == a:
            continue
        vec = u[r].copy()
        for prev in done:
            vec -= np.vdot(new[prev], u[r]) * new[prev]
        norm = np.linalg.norm(vec)
        if norm < 1e-12:
            raise DegenerateRowError(f"row {r} collapsed during re-orthonormalization")
        new[r] = vec / norm
        done.append(r)
    if decompose:
        from .mesh import clements_decompose

        return new, clements_decompose(new)
    return new
