"""Finite simple graphs with dense integer node ids.

Undirected graphs store every bond as the two directed edges ``(i, k)`` and
``(k, i)``, so all degree-dependent formulas read the same for both kinds of
graph. Instances are immutable after construction.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph input."""


class _Unreachable:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())


#: Returned by :func:`graph_distance` when no (directed) path exists.
UNREACHABLE = _Unreachable()

MAX_PATHS = 10_000


@dataclass(frozen=True)
class Graph:
    """Node set ``0..node_count-1`` plus a sorted tuple of directed edges."""

    node_count: int
    edges: tuple[tuple[int, int], ...]
    directed: bool
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {e: pos for pos, e in enumerate(self.edges)}
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def sources(self) -> np.ndarray:
        return np.fromiter((i for i, _ in self.edges), dtype=np.intp, count=len(self.edges))

    @property
    def targets(self) -> np.ndarray:
        return np.fromiter((k for _, k in self.edges), dtype=np.intp, count=len(self.edges))

    def edge_index(self, i: int, k: int) -> int:
        """Position of the stored edge ``(i, k)``; KeyError if absent."""
        return self._index[(i, k)]

    def has_edge(self, i: int, k: int) -> bool:
        return (i, k) in self._index

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.sources, minlength=self.node_count)

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.targets, minlength=self.node_count)

    def degrees(self) -> np.ndarray:
        """Node degrees; out-degrees for directed graphs."""
        return self.out_degrees()

    @property
    def v_max(self) -> int:
        if self.node_count == 0 or not self.edges:
            return 0
        return int(self.degrees().max())

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.node_count)]
        for i, k in self.edges:
            out[i].append(k)
        return out

    def predecessors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.node_count)]
        for i, k in self.edges:
            out[k].append(i)
        return out

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists of the underlying undirected support."""
        nb: list[set[int]] = [set() for _ in range(self.node_count)]
        for i, k in self.edges:
            nb[i].add(k)
            nb[k].add(i)
        return [sorted(s) for s in nb]

    def bonds(self) -> list[tuple[int, int]]:
        """Undirected bonds ``(i, k)`` with ``i < k`` (undirected graphs only)."""
        if self.directed:
            raise GraphError("bonds are defined for undirected graphs only")
        return [(i, k) for i, k in self.edges if i < k]

    def summary(self) -> dict:
        return {
            "nodes": self.node_count,
            "edges": self.edge_count,
            "directed": self.directed,
            "v_max": self.v_max,
        }


def build_graph(
    node_count: int, edge_list: Iterable[Sequence[int]], directed: bool
) -> Graph:
    """Validate ``edge_list`` and return the corresponding :class:`Graph`.

    For ``directed=False`` each pair is a bond and its reverse is added; a bond
    given twice (in either orientation) is a duplicate.
    """
    if node_count < 0:
        raise GraphError(f"node_count must be nonnegative, got {node_count}")
    seen: set[tuple[int, int]] = set()
    for pair in edge_list:
        i, k = (int(v) for v in pair)
        if not (0 <= i < node_count and 0 <= k < node_count):
            raise GraphError(f"edge ({i}, {k}) has a node id outside 0..{node_count - 1}")
        if i == k:
            raise GraphError(f"edge ({i}, {k}) is a self-loop")
        if (i, k) in seen or (not directed and (k, i) in seen):
            raise GraphError(f"edge ({i}, {k}) is a duplicate")
        seen.add((i, k))
    if not directed:
        seen |= {(k, i) for i, k in seen}
    return Graph(node_count, tuple(sorted(seen)), bool(directed))


# -- generators -------------------------------------------------------------


def path_graph(n: int) -> Graph:
    """Undirected path with nodes ``0..n``."""
    _check_size(n)
    return build_graph(n + 1, [(i, i + 1) for i in range(n)], directed=False)


def cycle_graph(n: int) -> Graph:
    """Undirected cycle on ``n`` nodes (``n >= 3``)."""
    if n < 3:
        raise GraphError(f"a simple cycle needs at least 3 nodes, got {n}")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)], directed=False)


def directed_path_graph(n: int) -> Graph:
    """Directed path ``0 -> 1 -> ... -> n``."""
    _check_size(n)
    return build_graph(n + 1, [(i, i + 1) for i in range(n)], directed=True)


def lattice_node(i: int, j: int, h: int) -> int:
    """Node id of lattice point ``(i, j)`` in a lattice of height ``h``."""
    return i * (h + 1) + j


def directed_lattice_2d(w: int, h: int) -> Graph:
    """Truncated directed Z^2 on ``[0, w] x [0, h]``.

    Edges point from ``(i, j)`` to ``(i + 1, j)`` and ``(i, j + 1)``; node ids
    come from :func:`lattice_node`.
    """
    _check_size(w)
    _check_size(h)
    edges = []
    for i in range(w + 1):
        for j in range(h + 1):
            if i < w:
                edges.append((lattice_node(i, j, h), lattice_node(i + 1, j, h)))
            if j < h:
                edges.append((lattice_node(i, j, h), lattice_node(i, j + 1, h)))
    return build_graph((w + 1) * (h + 1), edges, directed=True)


def binary_tree(depth: int) -> Graph:
    """Rooted binary tree truncated at ``depth`` (breadth-first ids, root 0)."""
    if depth < 0:
        raise GraphError(f"depth must be nonnegative, got {depth}")
    n = 2 ** (depth + 1) - 1
    return build_graph(n, [((c - 1) // 2, c) for c in range(1, n)], directed=False)


def random_graph(
    n: int, p: float, seed: int | None = None, directed: bool = False
) -> Graph:
    """Erdős–Rényi graph; for directed graphs each ordered pair is drawn."""
    rng = np.random.default_rng(seed)
    if directed:
        pairs = [(i, k) for i in range(n) for k in range(n) if i != k]
    else:
        pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return build_graph(n, [e for e, flag in zip(pairs, keep) if flag], directed)


_GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "directed_path": directed_path_graph,
    "directed_lattice_2d": directed_lattice_2d,
    "binary_tree": binary_tree,
}


def generate(kind: str, *params: int) -> Graph:
    """Dispatch to one of the named generators, e.g. ``generate("path", 4)``."""
    try:
        gen = _GENERATORS[kind]
    except KeyError:
        raise GraphError(
            f"unknown generator {kind!r}; choose from {sorted(_GENERATORS)}"
        ) from None
    return gen(*(int(p) for p in params))


def _check_size(n: int) -> None:
    if n < 1:
        raise GraphError(f"size parameter must be positive, got {n}")


# -- distances and paths ----------------------------------------------------


def bfs_distances(
    g: Graph, source: int, *, reverse: bool = False, undirected: bool = False
) -> np.ndarray:
    """Hop distances from ``source``; ``-1`` marks unreachable nodes.

    ``reverse`` follows edges backwards (distance *to* ``source``);
    ``undirected`` ignores orientation.
    """
    if undirected:
        adj = g.neighbors()
    elif reverse:
        adj = g.predecessors()
    else:
        adj = g.successors()
    dist = np.full(g.node_count, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def graph_distance(g: Graph, n: int, n_prime: int):
    """Shortest-path length from ``n`` to ``n_prime`` following edge orientation.

    Returns :data:`UNREACHABLE` instead of raising, so distance tables over
    disconnected graphs stay total.
    """
    _check_node(g, n)
    _check_node(g, n_prime)
    d = int(bfs_distances(g, n)[n_prime])
    return UNREACHABLE if d < 0 else d


def components(g: Graph) -> np.ndarray:
    """Label of the weakly connected component of every node."""
    labels = np.full(g.node_count, -1, dtype=np.int64)
    current = 0
    for start in range(g.node_count):
        if labels[start] >= 0:
            continue
        labels[bfs_distances(g, start, undirected=True) >= 0] = current
        current += 1
    return labels


def component_count(g: Graph) -> int:
    return int(components(g).max()) + 1 if g.node_count else 0


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Subgraph on ``nodes`` with every edge between them; also the id map.

    New ids follow the increasing order of the old ids.
    """
    keep = sorted(set(int(v) for v in nodes))
    if not keep:
        raise GraphError("induced_subgraph needs a nonempty node set")
    for v in keep:
        _check_node(g, v)
    remap = {old: new for new, old in enumerate(keep)}
    edges = tuple(
        sorted((remap[i], remap[k]) for i, k in g.edges if i in remap and k in remap)
    )
    return Graph(len(keep), edges, g.directed), remap


def minimal_paths(
    g: Graph, n: int, n_prime: int, cap: int = MAX_PATHS
) -> list[tuple[int, ...]]:
    """All shortest (directed) paths from ``n`` to ``n_prime`` as node tuples."""
    _check_node(g, n)
    _check_node(g, n_prime)
    to_target = bfs_distances(g, n_prime, reverse=True)
    if to_target[n] < 0:
        raise GraphError(f"node {n_prime} is unreachable from node {n}")
    succ = g.successors()
    paths = []
    for path in _walk_down(n, n_prime, succ, to_target):
        paths.append(path)
        if len(paths) > cap:
            raise GraphError(f"more than {cap} minimal paths between {n} and {n_prime}")
    return paths


def _walk_down(n, target, succ, to_target) -> Iterator[tuple[int, ...]]:
    stack = [(n,)]
    while stack:
        path = stack.pop()
        u = path[-1]
        if u == target:
            yield path
            continue
        for w in reversed(succ[u]):
            if to_target[w] == to_target[u] - 1:
                stack.append(path + (w,))


def _check_node(g: Graph, v: int) -> None:
    if not 0 <= v < g.node_count:
        raise GraphError(f"node id {v} outside 0..{g.node_count - 1}")
