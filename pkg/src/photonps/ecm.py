"""Episodic-and-compositional-memory graphs and their unitary routes.

An ECM graph is a connected DAG whose vertices are percepts (no parents),
actions (no children) or intermediate clips (both). Given a topological
ordering, every non-percept vertex k is compiled into a mode-mixing unitary
supported on {k} union parents(k); the ordered product of these steps is the
memory unitary. The map from ordered graphs to routings is bijective, so the
graph can be read back off the route as long as no mixing coefficient on an
edge vanishes exactly.
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import CycleError, StructureError
from .linalg import assert_unitary, haar_random_unitary

PERCEPT, INTERMEDIATE, ACTION = "percept", "intermediate", "action"
_TAGS = (PERCEPT, INTERMEDIATE, ACTION)


@dataclass(frozen=True)
class EcmGraph:
    vertices: tuple
    edges: tuple
    tags: dict

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((u, v) for u, v in self.edges))
        object.__setattr__(self, "tags", dict(self.tags))
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise StructureError("duplicate vertex labels")
        for u, v in self.edges:
            if u not in vset or v not in vset:
                raise StructureError(f"edge ({u}, {v}) references unknown vertex")
            if u == v:
                raise CycleError([u, u])
        if set(self.tags) != vset:
            raise StructureError("every vertex needs exactly one tag")
        parents = self.parent_map()
        children = self.child_map()
        for v in self.vertices:
            tag = self.tags[v]
            if tag not in _TAGS:
                raise StructureError(f"unknown tag {tag!r} on vertex {v}")
            has_p, has_c = bool(parents[v]), bool(children[v])
            if tag == PERCEPT and has_p:
                raise StructureError(f"percept {v} has parents {parents[v]}")
            if tag == ACTION and (has_c or not has_p):
                raise StructureError(f"action {v} must have parents and no children")
            if tag == INTERMEDIATE and not (has_p and has_c):
                raise StructureError(f"intermediate {v} needs both parents and children")
        topological_order(self)  # raises CycleError on a cycle
        if not self._connected():
            raise StructureError("ECM graph must be connected")

    def _connected(self) -> bool:
        if len(self.vertices) <= 1:
            return True
        neigh = {v: set() for v in self.vertices}
        for u, v in self.edges:
            neigh[u].add(v)
            neigh[v].add(u)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in neigh[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def parent_map(self) -> dict:
        parents = {v: [] for v in self.vertices}
        for u, v in self.edges:
            parents[v].append(u)
        return parents

    def child_map(self) -> dict:
        children = {v: [] for v in self.vertices}
        for u, v in self.edges:
            children[u].append(v)
        return children

    def percepts(self):
        return tuple(v for v in self.vertices if self.tags[v] == PERCEPT)

    def actions(self):
        return tuple(v for v in self.vertices if self.tags[v] == ACTION)

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": v, "tag": self.tags[v]} for v in self.vertices],
            "edges": [[u, v] for u, v in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EcmGraph":
        vertices = tuple(entry["id"] for entry in data["vertices"])
        tags = {entry["id"]: entry["tag"] for entry in data["vertices"]}
        edges = tuple((u, v) for u, v in data["edges"])
        return cls(vertices, edges, tags)


def topological_order(g: EcmGraph) -> tuple:
    """Deterministic topological ordering; ties broken by label order.

    Raises CycleError carrying one offending cycle if the graph is cyclic.
    """
    children = g.child_map()
    indeg = {v: 0 for v in g.vertices}
    for _, v in g.edges:
        indeg[v] += 1
    ready = [v for v in g.vertices if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in sorted(children[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(order) != len(g.vertices):
        raise CycleError(_find_cycle(g))
    return tuple(order)


def _find_cycle(g: EcmGraph):
    children = g.child_map()
    color = {v: 0 for v in g.vertices}
    stack = []

    def dfs(v):
        color[v] = 1
        stack.append(v)
        for w in sorted(children[v]):
            if color[w] == 1:
                return stack[stack.index(w):] + [w]
            if color[w] == 0:
                found = dfs(w)
                if found:
                    return found
        stack.pop()
        color[v] = 2
        return None

    for v in g.vertices:
        if color[v] == 0:
            found = dfs(v)
            if found:
                return found
    raise AssertionError("no cycle found in a graph that failed topological sort")


@dataclass(frozen=True)
class RouteStep:
    vertex: str
    position: int        # o(vertex), 1-based
    support: tuple       # 0-based matrix indices, ascending: {k} union parents
    block: np.ndarray    # unitary on the support


@dataclass(frozen=True)
class UnitaryRoute:
    dim: int
    ordering: tuple      # vertices in topological order
    steps: tuple         # RouteStep per non-percept vertex, ascending position


def route(g: EcmGraph, ordering=None, blocks=None, rng=None) -> UnitaryRoute:
    """Compile an ECM graph into its unitary route.

    ``blocks`` maps vertex -> unitary on its support {vertex} union parents
    (rows/columns ordered by ascending position in the ordering). Missing
    blocks default to seeded Haar-random unitaries.
    """
    if ordering is None:
        ordering = topological_order(g)
    pos = {v: k for k, v in enumerate(ordering)}
    parents = g.parent_map()
    blocks = dict(blocks or {})
    if rng is None:
        rng = np.random.default_rng(0)
    steps = []
    for v in ordering:
        if g.tags[v] == PERCEPT:
            continue
        support = tuple(sorted([pos[v]] + [pos[p] for p in parents[v]]))
        size = len(support)
        block = blocks.get(v)
        if block is None:
            block = haar_random_unitary(size, rng)
        block = np.asarray(block, dtype=complex)
        if block.shape != (size, size):
            raise StructureError(
                f"block for {v} has shape {block.shape}, expected {(size, size)} "
                f"({size - 1} parents plus the vertex itself)"
            )
        assert_unitary(block, 1e-10, f"block for vertex {v}")
        steps.append(RouteStep(v, pos[v] + 1, support, block))
    steps.sort(key=lambda s: s.position)
    return UnitaryRoute(len(ordering), tuple(ordering), tuple(steps))


def step_unitary(step: RouteStep, dim: int) -> np.ndarray:
    u = np.eye(dim, dtype=complex)
    idx = np.ix_(step.support, step.support)
    u[idx] = step.block
    return u


def ecm_unitary(r: UnitaryRoute) -> np.ndarray:
    """Ordered product of the route steps (earliest step applied first)."""
    u = np.eye(r.dim, dtype=complex)
    for step in r.steps:
        rows = list(step.support)
        u[rows, :] = step.block @ u[rows, :]
    return u


def router_inverse(r: UnitaryRoute, tol: float = 1e-12) -> EcmGraph:
    """Read the ordered graph back off a route.

    Vertices are the matrix indices; an edge (j, k) exists wherever step k
    mixes in row j with a nonzero coefficient. Edges whose coefficients are
    exactly zero in both directions cannot be recovered (documented
    precondition).
    """
    n = r.dim
    labels = [f"v{k:03d}" for k in range(1, n + 1)]
    edges = []
    stepped = set()
    for step in r.steps:
        k = step.position - 1
        stepped.add(k)
        col = step.support.index(k)
        for row_pos, j in enumerate(step.support):
            if j == k:
                continue
            if abs(step.block[row_pos, col]) > tol:
                edges.append((labels[j], labels[k]))
    has_child = {u for u, _ in edges}
    has_parent = {v for _, v in edges}
    tags = {}
    for k, label in enumerate(labels):
        if k not in stepped and label not in has_parent:
            tags[label] = PERCEPT
        elif label in has_child:
            tags[label] = INTERMEDIATE
        else:
            tags[label] = ACTION
    return EcmGraph(tuple(labels), tuple(edges), tags)


def ordered_edge_positions(g: EcmGraph, ordering) -> frozenset:
    """Edge set of the induced ordered DAG, as 1-based position pairs."""
    pos = {v: k + 1 for k, v in enumerate(ordering)}
    return frozenset((pos[u], pos[v]) for u, v in g.edges)


def reachable_subgraph(g: EcmGraph, percept) -> EcmGraph:
    """Induced subgraph on the percept and all its descendants."""
    if percept not in set(g.vertices):
        raise KeyError(f"unknown vertex {percept!r}")
    children = g.child_map()
    keep = {percept}
    stack = [percept]
    while stack:
        for w in children[stack.pop()]:
            if w not in keep:
                keep.add(w)
                stack.append(w)
    vertices = tuple(v for v in g.vertices if v in keep)
    edges = tuple((u, v) for u, v in g.edges if u in keep and v in keep)
    tags = {v: g.tags[v] for v in vertices}
    return EcmGraph(vertices, edges, tags)


def layer_grouping(r: UnitaryRoute):
    """Greedy grouping of consecutive steps with pairwise-disjoint supports.

    Steps in one layer commute exactly, so the product over layers equals the
    route product. Returns a list of layers, each a list of step indices.
    """
    layers = []
    current, used = [], set()
    for idx, step in enumerate(r.steps):
        support = set(step.support)
        if current and (support & used):
            layers.append(current)
            current, used = [], set()
        current.append(idx)
        used |= support
    if current:
        layers.append(current)
    return layers
