from fractions import Fraction

import numpy as np
import pytest

from photonps.classical_ps import ClassicalAgent, classical_transfer_bound
from photonps.ecm import EcmGraph
from photonps.errors import StructureError


def two_layer_graph(n_actions=3):
    actions = tuple(f"a{k}" for k in range(n_actions))
    edges = tuple(("s", a) for a in actions)
    tags = {"s": "percept"}
    tags.update({a: "action" for a in actions})
    return EcmGraph(("s",) + actions, edges, tags)


def fig_like_graph():
    vertices = ("s1", "s2", "c1", "c2", "a1", "a2")
    edges = (("s1", "c1"), ("s1", "c2"), ("s2", "c2"), ("c1", "a1"),
             ("c1", "a2"), ("c2", "a1"), ("c2", "a2"))
    tags = {"s1": "percept", "s2": "percept", "c1": "intermediate",
            "c2": "intermediate", "a1": "action", "a2": "action"}
    return EcmGraph(vertices, edges, tags)


def test_transition_probability_uniform_fresh():
    agent = ClassicalAgent(two_layer_graph(3))
    _, probs = agent.transition_probability("s")
    assert np.abs(probs - 1 / 3).max() < 1e-15


def test_transition_probability_values():
    agent = ClassicalAgent(two_layer_graph(2))
    agent.h[("s", "a0")] = 1.0
    agent.h[("s", "a1")] = 3.0
    _, probs = agent.transition_probability("s")
    assert np.allclose(probs, [0.25, 0.75])

    agent4 = ClassicalAgent(two_layer_graph(4))
    for a, h in zip(("a0", "a1", "a2", "a3"), (2.0, 2.0, 4.0, 8.0)):
        agent4.h[("s", a)] = h
    _, probs = agent4.transition_probability("s")
    assert np.allclose(probs, [0.125, 0.125, 0.25, 0.5])


def test_transition_probabilities_sum_to_one():
    rng = np.random.default_rng(0)
    agent = ClassicalAgent(fig_like_graph())
    for edge in agent.h:
        agent.h[edge] = rng.uniform(0.1, 5.0)
    for clip in ("s1", "s2", "c1", "c2"):
        _, probs = agent.transition_probability(clip)
        assert abs(probs.sum() - 1.0) < 1e-12


def test_walk_monte_carlo_matches_exact():
    # 2-layer memory: 1e6 vectorized one-step walks against the normalization
    agent = ClassicalAgent(two_layer_graph(3))
    agent.h[("s", "a0")] = 1.0
    agent.h[("s", "a1")] = 2.0
    agent.h[("s", "a2")] = 5.0
    children, probs = agent.transition_probability("s")
    rng = np.random.default_rng(1)
    n = 1_000_000
    counts = np.bincount(rng.choice(3, size=n, p=probs), minlength=3)
    for k in range(3):
        sigma = np.sqrt(n * probs[k] * (1 - probs[k]))
        assert abs(counts[k] - n * probs[k]) < 3 * sigma


def test_walk_single_path_deterministic():
    g = EcmGraph(("s", "c", "a"), (("s", "c"), ("c", "a")),
                 {"s": "percept", "c": "intermediate", "a": "action"})
    agent = ClassicalAgent(g)
    rng = np.random.default_rng(2)
    action, path = agent.walk("s", rng)
    assert action == "a"
    assert path == ["s", "c", "a"]


def test_walk_paths_are_graph_paths():
    agent = ClassicalAgent(fig_like_graph())
    rng = np.random.default_rng(3)
    edges = set(agent.graph.edges)
    for _ in range(200):
        action, path = agent.walk("s1", rng)
        assert agent.graph.tags[action] == "action"
        for hop in zip(path, path[1:]):
            assert hop in edges


def test_walk_unknown_percept():
    agent = ClassicalAgent(two_layer_graph())
    with pytest.raises(KeyError):
        agent.walk("bogus", np.random.default_rng(0))


def test_update_examples():
    agent = ClassicalAgent(two_layer_graph(2), gamma=0.0, eta=1.0)
    # taken edge with h=1, R=1 -> h'=2
    agent.update(["s", "a0"], 1.0)
    assert abs(agent.h[("s", "a0")] - 2.0) < 1e-15
    # R=0 leaves h unchanged (gamma=0)
    before = dict(agent.h)
    agent.update(["s", "a1"], 0.0)
    assert abs(agent.h[("s", "a1")] - before[("s", "a1")]) < 1e-15
    # forgetting decays toward 1: h=5, gamma=0.1, no glow -> 4.6
    agent2 = ClassicalAgent(two_layer_graph(2), gamma=0.1, eta=1.0)
    agent2.h[("s", "a0")] = 5.0
    agent2.update(["s", "a1"], 0.0)  # a0 edge not taken, glow stays 0
    assert abs(agent2.h[("s", "a0")] - 4.6) < 1e-12


def test_glow_dynamics():
    agent = ClassicalAgent(two_layer_graph(2), eta=0.5)
    agent.update(["s", "a0"], 0.0)
    assert agent.glow[("s", "a0")] == 1.0
    agent.update(["s", "a1"], 0.0)
    assert agent.glow[("s", "a0")] == 0.5  # damped once
    assert agent.glow[("s", "a1")] == 1.0
    assert all(0.0 <= g <= 1.0 for g in agent.glow.values())


def test_rewarded_path_probability_nondecreasing():
    agent = ClassicalAgent(fig_like_graph(), gamma=0.0, eta=1.0)
    path = ["s1", "c1", "a1"]
    last = 0.0
    for _ in range(20):
        agent.update(path, 1.0)
        p = agent.policy("s1", "a1")
        assert p >= last - 1e-12
        last = p
    assert last > 0.9


def test_negative_reward_clamp():
    agent = ClassicalAgent(two_layer_graph(2))
    for _ in range(10):
        agent.update(["s", "a0"], -5.0)
    assert agent.h[("s", "a0")] > 0.0
    _, probs = agent.transition_probability("s")
    assert np.isfinite(probs).all()


def test_childless_intermediate_rejected():
    agent = ClassicalAgent(two_layer_graph(2))
    with pytest.raises(StructureError):
        agent.transition_probability("a0")


def test_classical_transfer_bound_value():
    assert classical_transfer_bound() == Fraction(8, 9)


def test_checkpoint_roundtrip():
    agent = ClassicalAgent(fig_like_graph(), gamma=0.05, eta=0.7)
    rng = np.random.default_rng(4)
    for _ in range(30):
        _, path = agent.walk("s1", rng)
        agent.update(path, 0.5)
    data = agent.to_dict()
    fresh = ClassicalAgent(fig_like_graph())
    fresh.load_dict(data)
    assert fresh.h == agent.h
    assert fresh.glow == agent.glow
    assert fresh.gamma == agent.gamma
