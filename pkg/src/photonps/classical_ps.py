"""Classical projective-simulation agent: reference baseline.

Decision making is a random walk of a single excitation over the ECM graph;
each edge carries an unnormalized weight (h-value, initially 1) and a glow
factor remembering recently taken transitions. Learning damps h-values
toward 1 with the forgetting factor gamma and reinforces glowing edges with
the reward.
"""

from fractions import Fraction

import numpy as np

from .ecm import ACTION, EcmGraph
from .errors import StructureError

H_FLOOR = 1e-6  # keeps transition probabilities well-defined under negative rewards


class ClassicalAgent:
    """Mutable agent state over a fixed ECM graph (single-writer)."""

    def __init__(self, graph: EcmGraph, gamma: float = 0.0, eta: float = 1.0):
        if not 0.0 <= gamma <= 1.0 or not 0.0 <= eta <= 1.0:
            raise ValueError("gamma and eta must lie in [0, 1]")
        self.graph = graph
        self.gamma = gamma
        self.eta = eta
        self.h = {edge: 1.0 for edge in graph.edges}
        self.glow = {edge: 0.0 for edge in graph.edges}
        self._children = graph.child_map()
        self._tags = graph.tags

    def transition_probability(self, clip):
        """Children of ``clip`` and their normalized transition probabilities."""
        children = sorted(self._children[clip])
        if not children:
            if self._tags[clip] != ACTION:
                raise StructureError(f"non-action clip {clip!r} has no children")
            raise StructureError(f"action clip {clip!r} has no outgoing transitions")
        weights = np.array([self.h[(clip, c)] for c in children])
        return children, weights / weights.sum()

    def walk(self, percept, rng: np.random.Generator):
        """Random walk from a percept until an action clip is hit.

        Returns (action, path) where path lists every visited clip.
        """
        if percept not in set(self.graph.vertices):
            raise KeyError(f"unknown percept {percept!r}")
        clip = percept
        path = [clip]
        while self._tags[clip] != ACTION:
            children, probs = self.transition_probability(clip)
            clip = children[rng.choice(len(children), p=probs)]
            path.append(clip)
        return clip, path

    def update(self, path, reward: float):
        """Glow update first (taken edges -> 1, others damped), then h-values."""
        taken = set(zip(path, path[1:]))
        for edge in self.glow:
            self.glow[edge] = 1.0 if edge in taken else (1.0 - self.eta) * self.glow[edge]
        for edge in self.h:
            new = 1.0 + (1.0 - self.gamma) * (self.h[edge] - 1.0) + self.glow[edge] * reward
            self.h[edge] = max(new, H_FLOOR)

    def policy(self, percept, action, max_depth: int = 64) -> float:
        """Exact probability that a walk from ``percept`` ends in ``action``."""
        memo = {}

        def prob(clip, depth):
            if self._tags[clip] == ACTION:
                return 1.0 if clip == action else 0.0
            if depth > max_depth:
                raise StructureError("walk depth exceeded; graph is not a DAG?")
            if clip not in memo:
                children, probs = self.transition_probability(clip)
                memo[clip] = sum(p * prob(c, depth + 1) for c, p in zip(children, probs))
            return memo[clip]

        return prob(percept, 0)

    def to_dict(self) -> dict:
        return {
            "edges": [[u, v] for u, v in self.graph.edges],
            "h": [self.h[e] for e in self.graph.edges],
            "g": [self.glow[e] for e in self.graph.edges],
            "gamma": self.gamma,
            "eta": self.eta,
        }

    def load_dict(self, data: dict):
        for edge, h, g in zip(self.graph.edges, data["h"], data["g"]):
            self.h[edge] = float(h)
            self.glow[edge] = float(g)
        self.gamma = float(data["gamma"])
        self.eta = float(data["eta"])


def classical_transfer_bound() -> Fraction:
    """Best raw accuracy any classical agent reaches on the two-observable
    transfer task: the always-no policy, 8/9."""
    return Fraction(8, 9)
