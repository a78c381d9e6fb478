import numpy as np
import pytest

from photonps.circuits import input_state
from photonps.errors import DegenerateRowError
from photonps.linalg import haar_random_unitary, unitarity_defect
from photonps.mesh import build_unitary, random_mesh
from photonps.training import (
    AdamState,
    ReplayBuffer,
    ReplayEntry,
    TrainConfig,
    VariationalHandle,
    annealing_schedule,
    cutoff,
    glow_update,
    gradient,
    gso_update,
    kl_binary,
    loss_exact,
    loss_simplified,
    mesh_handle,
    optimizer_step,
    replay_flush,
    simplified_target,
    squared_error,
)


def test_cutoff_examples():
    assert cutoff(0.6) == 0.6
    assert cutoff(1.05) == 1.0
    assert cutoff(-0.05) == 0.0


def test_simplified_target_examples():
    cfg = TrainConfig(gamma=0.0, action_count=9)
    # p0 = 0.5, g = 1, r = +0.1 -> 0.6
    assert abs(simplified_target(0.5, 1.0, 0.1, cfg) - 0.6) < 1e-15
    # upper cutoff engaged
    assert simplified_target(0.95, 1.0, 0.1, cfg) == 1.0
    # lower cutoff engaged
    assert simplified_target(0.05, 1.0, -0.1, cfg) == 0.0


def test_simplified_target_range_random():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        cfg = TrainConfig(gamma=rng.uniform(0, 1), action_count=int(rng.integers(2, 10)))
        t = simplified_target(rng.uniform(0, 1), rng.uniform(0, 1),
                              rng.uniform(-5, 5), cfg)
        assert 0.0 <= t <= 1.0


def test_kl_binary_domain():
    assert kl_binary(0.3, 0.3) < 1e-12
    assert kl_binary(0.2, 1.0) > 0.0  # finite at the cutoff boundary
    with pytest.raises(ValueError):
        kl_binary(0.5, 1.2)


def test_glow_update_examples():
    table = {("s", "a"): 0.0, ("s", "b"): 0.6}
    # eta = 1: one-hot
    one_hot = glow_update(table, ("s", "a"), 1.0)
    assert one_hot == {("s", "a"): 1.0, ("s", "b"): 0.0}
    # eta = 0: no decay
    frozen = glow_update(table, ("s", "a"), 0.0)
    assert frozen[("s", "b")] == 0.6
    # two consecutive steps with eta = 0.5
    step1 = glow_update(table, ("s", "a"), 0.5)
    step2 = glow_update(step1, ("s", "b"), 0.5)
    assert step2[("s", "a")] == 0.5 and step2[("s", "b")] == 1.0


def test_annealing_schedules():
    const = annealing_schedule("constant")
    assert const(0) == 1.0 and const(1000) == 1.0
    expo = annealing_schedule("exponential", tau=10.0)
    assert abs(expo(0) - 1.0) < 1e-12
    values = [expo(t) for t in range(50)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    # annealing drives the target to the current probability
    cfg = TrainConfig(gamma=0.0, action_count=4, annealing="exponential",
                      annealing_params={"tau": 5.0})
    p0 = 0.4
    gaps = [abs(simplified_target(p0, 1.0, cfg.reward(t), cfg) - p0) for t in (0, 10, 50)]
    assert gaps[0] > gaps[1] > gaps[2]


def _toy_handle():
    # probabilities of a 2-outcome softmax-like model; smooth in theta
    def prob_fn(theta, pairs):
        z = np.cos(theta[0]) * 0.4 + 0.5
        return [z if a == 0 else 1.0 - z for (_, a) in pairs]

    return VariationalHandle(np.array([0.3, 1.0]), prob_fn)


def test_loss_simplified_zero_at_target():
    handle = _toy_handle()
    cfg = TrainConfig(action_count=2)
    p_now = handle.probabilities([(0, 0)])[0]
    batch = [ReplayEntry(0, 0, 0.1, 1.0, p_now, p_now)]
    assert loss_simplified(handle, batch, cfg) < 1e-12


def test_loss_simplified_skips_zero_glow_and_empty():
    handle = _toy_handle()
    cfg = TrainConfig(action_count=2)
    batch = [ReplayEntry(0, 0, 0.1, 0.0, 0.5, 0.9)]
    assert loss_simplified(handle, batch, cfg) == 0.0
    assert loss_simplified(handle, [], cfg) == 0.0


def test_loss_exact_examples():
    handle = _toy_handle()
    cfg = TrainConfig(gamma=1.0, action_count=2, distance="squared_error")
    p_now = handle.probabilities([(0, 0)])[0]
    # gamma = 1, R = 0: target reduces to 0, i.e. p*h must equal 1
    batch = [ReplayEntry(0, 0, 0.0, 0.0, 0.4, None, h_prev=2.0)]
    aux = {0: 1.0 / p_now}
    assert loss_exact(handle, batch, cfg, aux_h=aux) < 1e-12
    aux_off = {0: 2.0 / p_now}
    assert loss_exact(handle, batch, cfg, aux_h=aux_off) > 0.0


def test_loss_exact_kl_domain_error():
    handle = _toy_handle()
    cfg = TrainConfig(gamma=0.0, action_count=2, distance="kl_binary")
    batch = [ReplayEntry(0, 0, 5.0, 1.0, 0.9, None, h_prev=2.0)]  # target way outside [0,1]
    with pytest.raises(ValueError):
        loss_exact(handle, batch, cfg, aux_h={0: 2.0})


def test_gradient_exact_on_quadratic():
    def quad(theta):
        return float(2.0 * theta[0] ** 2 + 3.0 * theta[1] * theta[0] + theta[1] ** 2)

    theta = np.array([0.7, -1.2])
    grad = gradient(quad, theta)
    expected = np.array([4 * 0.7 + 3 * -1.2, 3 * 0.7 + 2 * -1.2])
    assert np.abs(grad - expected).max() < 1e-9


def test_gradient_nonfinite_detection():
    def bad(theta):
        return float("nan")

    with pytest.raises(FloatingPointError):
        gradient(bad, np.array([0.0]))


def test_gradient_descent_on_mesh_target():
    # descend ||U(theta) e_s - e_a||^2 on a small mesh; loss must shrink
    rng = np.random.default_rng(1)
    params = random_mesh(4, rng)

    def loss(theta):
        u = build_unitary(params.with_phase_vector(theta))
        vec = u @ input_state(4, 0)
        target = np.zeros(4)
        target[3] = 1.0
        return float(np.sum(np.abs(vec - target) ** 2))

    theta = params.phase_vector()
    value = loss(theta)
    for _ in range(40):
        theta = theta - 0.05 * gradient(loss, theta)
        new = loss(theta)
        assert new <= value + 1e-9
        value = new


def test_step_halving_self_consistency():
    rng = np.random.default_rng(2)
    params = random_mesh(4, rng)
    handle = mesh_handle(params)
    cfg = TrainConfig(action_count=4)
    batch = [ReplayEntry(0, 3, 0.1, 1.0, 0.25, 0.35),
             ReplayEntry(1, 2, 0.1, 1.0, 0.25, 0.30)]

    def loss(theta):
        return loss_simplified(handle, batch, cfg, theta=theta)

    for _ in range(5):
        theta = params.phase_vector() + rng.uniform(-0.5, 0.5, params.phase_vector().size)
        g1 = gradient(loss, theta, step=1e-5)
        g2 = gradient(loss, theta, step=5e-6)
        rel = np.linalg.norm(g1 - g2) / (np.linalg.norm(g2) + 1e-12)
        assert rel < 1e-4


def test_loss_exact_step_halving():
    rng = np.random.default_rng(12)
    params = random_mesh(4, rng)
    handle = mesh_handle(params)
    cfg = TrainConfig(gamma=0.3, action_count=4, distance="squared_error",
                      phase_penalty_weight=0.5)
    batch = [ReplayEntry(0, 3, 0.2, 1.0, 0.25, None, h_prev=4.0),
             ReplayEntry(1, 2, 0.2, 0.5, 0.25, None, h_prev=4.0)]
    aux = {0: 4.0, 1: 4.0}

    def loss(theta):
        return loss_exact(handle, batch, cfg, theta=theta, aux_h=aux)

    for _ in range(10):
        theta = params.phase_vector() + rng.uniform(-0.5, 0.5, params.phase_vector().size)
        g1 = gradient(loss, theta, step=1e-5)
        g2 = gradient(loss, theta, step=5e-6)
        rel = np.linalg.norm(g1 - g2) / (np.linalg.norm(g2) + 1e-12)
        assert rel < 1e-4


def test_optimizer_zero_gradient():
    theta = np.array([0.5, 1.5])
    state = AdamState()
    new = optimizer_step(theta, np.zeros(2), state, lr=0.01)
    assert np.abs(new - theta).max() < 1e-12


def test_optimizer_first_step_size():
    theta = np.zeros(3)
    state = AdamState()
    new = optimizer_step(theta, np.full(3, -7.0), state, lr=0.01)
    # bias-corrected first step moves by ~lr against the gradient
    assert np.abs(new - 0.01).max() < 1e-6


def test_optimizer_wraps_phases():
    theta = np.array([0.01])
    state = AdamState()
    new = optimizer_step(theta, np.array([5.0]), state, lr=0.1)
    assert 0.0 <= new[0] < 2 * np.pi


def test_replay_buffer_capacity():
    buf = ReplayBuffer(capacity=2)
    for k in range(3):
        buf.add(ReplayEntry(k, 0, 0.1, 1.0, 0.5, 0.6))
    assert len(buf) == 2
    assert buf.entries[0].percept == 1  # oldest dropped
    strict = ReplayBuffer(capacity=1, policy="error")
    strict.add(ReplayEntry(0, 0, 0.1, 1.0, 0.5, 0.6))
    with pytest.raises(OverflowError):
        strict.add(ReplayEntry(1, 0, 0.1, 1.0, 0.5, 0.6))


def test_replay_flush_semantics():
    rng = np.random.default_rng(3)
    params = random_mesh(3, rng)
    cfg = TrainConfig(action_count=3, optimizer_steps=3, learning_rate=0.05)

    entry = ReplayEntry(0, 2, 0.1, 1.0, 0.2, 0.9)
    # batch of one equals an online step with the same seed/optimizer state
    h1 = mesh_handle(params)
    buf = ReplayBuffer()
    buf.add(entry)
    h1, losses1 = replay_flush(buf, h1, cfg)
    assert len(buf) == 0
    assert losses1[0] >= losses1[-1]  # optimizer made progress on the batch

    # duplicate entries double the loss
    h2 = mesh_handle(params)
    single = loss_simplified(h2, [entry], cfg)
    double = loss_simplified(h2, [entry, entry], cfg)
    assert abs(double - 2 * single) < 1e-12


# --- Gram-Schmidt direct update -----------------------------------------------


def test_gso_identity_at_alpha_one():
    rng = np.random.default_rng(4)
    u = haar_random_unitary(6, rng)
    assert np.abs(gso_update(u, 2, 4, 1.0) - u).max() < 1e-12


def test_gso_convergence_and_competitors():
    rng = np.random.default_rng(5)
    u = haar_random_unitary(10, rng)
    s, a = 3, 7
    for _ in range(200):
        u = gso_update(u, s, a, 1.1)
        assert unitarity_defect(u) < 1e-10
    probs = np.abs(u) ** 2
    assert probs[a, s] > 0.99
    assert max(probs[a, k] for k in range(10) if k != s) < 0.01
    assert max(probs[k, s] for k in range(10) if k != a) < 0.01


def test_gso_small_alpha_small_change():
    rng = np.random.default_rng(6)
    u = haar_random_unitary(8, rng)
    changes = []
    for alpha in (1.01, 1.05, 1.2):
        new = gso_update(u, 0, 1, alpha)
        others = [r for r in range(8) if r != 1]
        changes.append(np.linalg.norm(new[others] - u[others]))
    assert changes[0] < changes[1] < changes[2]
    assert changes[0] < 0.05


def test_gso_rejects_bad_input():
    with pytest.raises(ValueError):
        gso_update(np.eye(3, dtype=complex), 0, 1, -1.0)
    # the rescaled entry carries the whole row norm: shrinking kills the row
    cross = np.array([[0, 1j, 0], [1j, 0, 0], [0, 0, 1]], dtype=complex)
    with pytest.raises(DegenerateRowError):
        gso_update(cross, 1, 0, 1e-20)


def test_gso_with_decomposition():
    rng = np.random.default_rng(7)
    u = haar_random_unitary(5, rng)
    new, params = gso_update(u, 1, 3, 1.2, decompose=True)
    assert np.linalg.norm(build_unitary(params) - new) < 1e-9


def test_mesh_handle_phase_penalty():
    rng = np.random.default_rng(8)
    params = random_mesh(3, rng)
    handle = mesh_handle(params)
    cfg = TrainConfig(action_count=3, gamma=1.0, distance="squared_error",
                      phase_penalty_weight=2.0)
    batch = [ReplayEntry(0, 0, 0.0, 0.0, 1.0 / 3.0, None, h_prev=3.0)]
    base = loss_exact(handle, batch, TrainConfig(action_count=3, gamma=1.0,
                                                 distance="squared_error"),
                      aux_h={0: 3.0})
    penalized = loss_exact(handle, batch, cfg, aux_h={0: 3.0})
    phases = np.angle(np.exp(1j * handle.theta[handle.phase_slice]))
    assert abs(penalized - base - 2.0 * np.abs(phases).sum()) < 1e-12
