"""
Mutable undirected multigraph with degree bookkeeping, the random selection kernels
used to find left elements, and linear-time structural property checks.

Vertex ids are dense integers assigned in creation order. Parallel edges are kept as
separate entries of the edge list; loops are only allowed when the graph is created
with allow_loops=True (PA collapse output).
"""

import os
import sys
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from errors import InvariantViolation, NoLeftElement
from random_stream import RandomStream

# Recount degrees and adjacency after every mutation (slow; tests and PICG_DEBUG=1 only)
DEBUG_CHECKS = os.environ.get("PICG_DEBUG", "") == "1"

# Below this share of free pairs the non-adjacent kernel enumerates instead of rejecting
NONADJACENT_REJECTION_SHARE = 0.25


class SelectionKernel(str, Enum):
    """How the left element of a rule is chosen."""
    UNIFORM_VERTEX = "uniform_vertex"
    DEGREE_PROPORTIONAL_VERTEX = "degree_proportional_vertex"
    UNIFORM_PAIR = "uniform_pair"
    UNIFORM_NONADJACENT_PAIR = "uniform_nonadjacent_pair"
    UNIFORM_EDGE = "uniform_edge"

    @property
    def selects_vertex(self) -> bool:
        return self in (SelectionKernel.UNIFORM_VERTEX, SelectionKernel.DEGREE_PROPORTIONAL_VERTEX)

    @property
    def selects_pair(self) -> bool:
        return self in (SelectionKernel.UNIFORM_PAIR, SelectionKernel.UNIFORM_NONADJACENT_PAIR)


class GraphProperty(str, Enum):
    CONNECTED = "connected"
    BICONNECTED = "biconnected"
    TWO_EDGE_CONNECTED = "two_edge_connected"


@dataclass(frozen=True)
class LeftElement:
    """A selected vertex, unordered vertex pair (stored sorted) or edge."""
    vertices: Tuple[int, ...]
    edge: Optional[int] = None

    def __str__(self) -> str:
        if self.edge is not None:
            u, v = self.vertices
            return f"e{self.edge}:{u}-{v}"
        return "-".join(str(v) for v in self.vertices)


class MultiGraph:
    """Undirected multigraph on vertices 0..n-1."""

    def __init__(self, n: int = 0, edges: Iterable[Tuple[int, int]] = (), allow_loops: bool = False):
        self.allow_loops = allow_loops
        self.edges: List[Tuple[int, int]] = []
        self.degree: List[int] = [0] * n
        self._adjacency: List[Dict[int, int]] = [{} for _ in range(n)]
        self._adjacent_pairs = 0
        for u, v in edges:
            self.add_edge(u, v)

    @property
    def n(self) -> int:
        return len(self.degree)

    @property
    def m(self) -> int:
        return len(self.edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return (self.n, self.edges, self.allow_loops) == (other.n, other.edges, other.allow_loops)

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, m={self.m}, allow_loops={self.allow_loops})"

    def copy(self) -> "MultiGraph":
        clone = MultiGraph(allow_loops=self.allow_loops)
        clone.edges = list(self.edges)
        clone.degree = list(self.degree)
        clone._adjacency = [dict(neighbours) for neighbours in self._adjacency]
        clone._adjacent_pairs = self._adjacent_pairs
        return clone

    # -- queries ---------------------------------------------------------

    def multiplicity(self, u: int, v: int) -> int:
        return self._adjacency[u].get(v, 0)

    def has_edge(self, u: int, v: int) -> bool:
        return self.multiplicity(u, v) > 0

    def neighbours(self, v: int) -> List[int]:
        return list(self._adjacency[v])

    def nonadjacent_pair_count(self) -> int:
        """Distinct unordered pairs {u, v}, u != v, with no edge between them."""
        return self.n * (self.n - 1) // 2 - self._adjacent_pairs

    # -- mutations -------------------------------------------------------

    def add_vertex(self) -> int:
        self.degree.append(0)
        self._adjacency.append({})
        if DEBUG_CHECKS:
            self.validate()
        return self.n - 1

    def add_edge(self, u: int, v: int) -> int:
        """Append edge (u, v); returns its index."""
        self._check_endpoints(u, v)
        self.edges.append((u, v))
        self.degree[u] += 1
        self.degree[v] += 1
        self._link(u, v)
        if DEBUG_CHECKS:
            self.validate()
        return self.m - 1

    def subdivide_edge(self, index: int) -> int:
        """Replace edge (u, v) at `index` by (u, w) in place and append (w, v); returns w."""
        u, v = self.edges[index]
        w = self.n
        self.degree.append(2)
        self._adjacency.append({})
        self._unlink(u, v)
        self.edges[index] = (u, w)
        self._link(u, w)
        self.edges.append((w, v))
        self._link(w, v)
        if DEBUG_CHECKS:
            self.validate()
        return w

    def _check_endpoints(self, u: int, v: int) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u}, {v}) references a vertex outside 0..{self.n - 1}")
        if u == v and not self.allow_loops:
            raise ValueError(f"loop ({u}, {v}) in a graph without loops")

    def _link(self, u: int, v: int) -> None:
        count = self._adjacency[u].get(v, 0)
        if u == v:
            self._adjacency[u][u] = count + 1
            return
        if count == 0:
            self._adjacent_pairs += 1
        self._adjacency[u][v] = count + 1
        self._adjacency[v][u] = count + 1

    def _unlink(self, u: int, v: int) -> None:
        count = self._adjacency[u][v] - 1
        if count == 0:
            del self._adjacency[u][v]
            if u != v:
                del self._adjacency[v][u]
                self._adjacent_pairs -= 1
            return
        self._adjacency[u][v] = count
        self._adjacency[v][u] = count

    def validate(self) -> None:
        """Recount everything from the edge list; raises InvariantViolation on mismatch."""
        degree = [0] * self.n
        multiplicity: Counter = Counter()
        for u, v in self.edges:
            if u == v and not self.allow_loops:
                raise InvariantViolation(f"loop ({u}, {v}) in a loopless graph")
            degree[u] += 1
            degree[v] += 1
            multiplicity[(min(u, v), max(u, v))] += 1
        if degree != self.degree:
            raise InvariantViolation("degree array differs from the edge-list recount")
        if sum(degree) != 2 * self.m:
            raise InvariantViolation("degree sum is not twice the edge count")
        for (u, v), count in multiplicity.items():
            if self._adjacency[u].get(v) != count or self._adjacency[v].get(u) != count:
                raise InvariantViolation(f"adjacency multiplicity of ({u}, {v}) is stale")
        stored = sum(len(neighbours) - (1 if v in neighbours else 0)
                     for v, neighbours in enumerate(self._adjacency)) // 2
        adjacent_pairs = sum(1 for u, v in multiplicity if u != v)
        if stored != adjacent_pairs or self._adjacent_pairs != adjacent_pairs:
            raise InvariantViolation("adjacent pair count is stale")


# -- selection kernels ----------------------------------------------------

def kernel_applicable(g: MultiGraph, kernel: SelectionKernel) -> bool:
    """True iff the kernel can select a left element in g."""
    if kernel is SelectionKernel.UNIFORM_VERTEX:
        return g.n >= 1
    if kernel is SelectionKernel.DEGREE_PROPORTIONAL_VERTEX:
        return g.m >= 1
    if kernel is SelectionKernel.UNIFORM_PAIR:
        return g.n >= 2
    if kernel is SelectionKernel.UNIFORM_NONADJACENT_PAIR:
        return g.n >= 2 and g.nonadjacent_pair_count() > 0
    return g.m >= 1


def sample_left_element(g: MultiGraph, kernel: SelectionKernel, rng: RandomStream) -> LeftElement:
    """Draw one left element of g according to the kernel's law."""
    if not kernel_applicable(g, kernel):
        raise NoLeftElement(f"{kernel.value} has nothing to select in {g!r}")

    if kernel is SelectionKernel.UNIFORM_VERTEX:
        return LeftElement((rng.below(g.n),))

    if kernel is SelectionKernel.DEGREE_PROPORTIONAL_VERTEX:
        # A uniform edge endpoint is vertex i with probability d(i) / sum_j d(j)
        endpoint = rng.below(2 * g.m)
        return LeftElement((g.edges[endpoint >> 1][endpoint & 1],))

    if kernel is SelectionKernel.UNIFORM_PAIR:
        return _uniform_pair(g, rng)

    if kernel is SelectionKernel.UNIFORM_NONADJACENT_PAIR:
        total = g.n * (g.n - 1) // 2
        free = g.nonadjacent_pair_count()
        if free < NONADJACENT_REJECTION_SHARE * total:
            pairs = [(u, v) for u in range(g.n) for v in range(u + 1, g.n) if not g.has_edge(u, v)]
            return LeftElement(pairs[rng.below(len(pairs))])
        while True:
            candidate = _uniform_pair(g, rng)
            if not g.has_edge(*candidate.vertices):
                return candidate

    index = rng.below(g.m)
    return LeftElement(g.edges[index], edge=index)


def sample_degree_proportional_prefix(g: MultiGraph, rng: RandomStream) -> LeftElement:
    """Degree-proportional vertex drawn by inverting the prefix sums of the degree array."""
    if g.m == 0:
        raise NoLeftElement(f"degree_proportional_vertex has nothing to select in {g!r}")
    cumulative = np.cumsum(g.degree)
    target = rng.uniform() * cumulative[-1]
    return LeftElement((int(np.searchsorted(cumulative, target, side="right")),))


def _uniform_pair(g: MultiGraph, rng: RandomStream) -> LeftElement:
    u = rng.below(g.n)
    v = rng.below(g.n - 1)
    if v >= u:
        v += 1
    return LeftElement((min(u, v), max(u, v)))


# -- structure ------------------------------------------------------------

@dataclass
class StructureReport:
    """Result of one depth-first traversal with low-link values."""
    components: int
    articulation_points: List[int] = field(default_factory=list)
    bridges: List[int] = field(default_factory=list)


def scan_structure(g: MultiGraph) -> StructureReport:
    """Components, cut vertices and bridge edge indices in O(n + m).

    Iterative DFS; the tree edge back to the parent is skipped by edge index, so a
    parallel copy of it still counts as a back edge. Loops are ignored.
    """
    incident: List[List[Tuple[int, int]]] = [[] for _ in range(g.n)]
    for index, (u, v) in enumerate(g.edges):
        if u != v:
            incident[u].append((v, index))
            incident[v].append((u, index))

    order = [-1] * g.n
    low = [0] * g.n
    is_cut = [False] * g.n
    bridges: List[int] = []
    counter = 0
    components = 0

    for root in range(g.n):
        if order[root] != -1:
            continue
        components += 1
        order[root] = low[root] = counter
        counter += 1
        root_children = 0
        # frames are [vertex, edge used to enter it, next incident position]
        stack = [[root, -1, 0]]
        while stack:
            frame = stack[-1]
            v, parent_edge, position = frame
            if position < len(incident[v]):
                frame[2] = position + 1
                w, index = incident[v][position]
                if index == parent_edge:
                    continue
                # tree edge
                if order[w] == -1:
                    order[w] = low[w] = counter
                    counter += 1
                    stack.append([w, index, 0])
                # back edge
                elif order[w] < low[v]:
                    low[v] = order[w]
                continue
            # v is finished; fold its low value into the parent u
            stack.pop()
            if not stack:
                break
            u = stack[-1][0]
            if low[v] < low[u]:
                low[u] = low[v]
            if low[v] > order[u]:
                bridges.append(parent_edge)
            # the root is a cut vertex only with two or more tree children
            if len(stack) == 1:
                root_children += 1
            elif low[v] >= order[u]:
                is_cut[u] = True
        if root_children > 1:
            is_cut[root] = True

    return StructureReport(
        components=components,
        articulation_points=[v for v in range(g.n) if is_cut[v]],
        bridges=sorted(bridges),
    )


def check_property(g: MultiGraph, prop: GraphProperty) -> bool:
    """connected / biconnected (n > 2, no cut vertex) / two_edge_connected (n > 1, no bridge)."""
    prop = GraphProperty(prop)
    report = scan_structure(g)
    if report.components != 1:
        return False
    if prop is GraphProperty.CONNECTED:
        return True
    if prop is GraphProperty.BICONNECTED:
        return g.n > 2 and not report.articulation_points
    return g.n > 1 and not report.bridges


def degree_histogram(g: MultiGraph) -> Dict[int, int]:
    """degree -> number of vertices with that degree, ascending by degree."""
    return dict(sorted(Counter(g.degree).items()))


def degree_density(g: MultiGraph) -> Dict[int, float]:
    """degree -> share of vertices with that degree."""
    if g.n == 0:
        return {}
    return {d: count / g.n for d, count in degree_histogram(g).items()}


def to_networkx(g: MultiGraph) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(g.n))
    graph.add_edges_from(g.edges)
    return graph
