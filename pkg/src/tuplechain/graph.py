"""Tuple graph over masks and minimum path cover for chain construction.

The graph has one vertex per mask and an edge a->b whenever a's bits are
a strict subset of b's.  Breaking it into the fewest chains is minimum
path cover on a DAG, solved by maximum bipartite matching over the edge
set (out-copies matched to in-copies; cover size = V - |matching|).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .model import mask_less_than


class GraphError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class TupleGraph:
    vertices: tuple[int, ...]          # masks
    adj: tuple[tuple[int, ...], ...]   # successor indices per vertex

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj)

    def dump(self) -> str:
        """Text edge list, one `a -> b` (hex masks) per line."""
        lines = []
        for i, outs in enumerate(self.adj):
            for j in outs:
                lines.append(f"{self.vertices[i]:#x} -> {self.vertices[j]:#x}")
        return "\n".join(lines)


@dataclass(frozen=True, slots=True)
class PathCover:
    """Vertex-disjoint paths (index sequences) covering the graph."""

    graph: TupleGraph
    paths: tuple[tuple[int, ...], ...]

    @property
    def chain_count(self) -> int:
        return len(self.paths)

    def mask_paths(self) -> list[list[int]]:
        return [[self.graph.vertices[i] for i in p] for p in self.paths]


@dataclass(frozen=True, slots=True)
class BoundReport:
    chain_count: int
    chain_sizes: tuple[int, ...]
    probe_bound: int           # sum of per-chain binary search bounds
    closed_form: float         # l * (1 + log2(m / l))
    beats_full_scan: bool      # l < m / 2

    @property
    def tuple_count(self) -> int:
        return sum(self.chain_sizes)


def build_graph(masks: list[int]) -> TupleGraph:
    if len(set(masks)) != len(masks):
        raise GraphError("duplicate masks")
    adj = tuple(
        tuple(j for j, b in enumerate(masks)
              if i != j and mask_less_than(a, b))
        for i, a in enumerate(masks))
    return TupleGraph(tuple(masks), adj)


def _check_acyclic(g: TupleGraph) -> None:
    indeg = [0] * len(g.vertices)
    for outs in g.adj:
        for j in outs:
            indeg[j] += 1
    q = deque(i for i, d in enumerate(indeg) if d == 0)
    seen = 0
    while q:
        i = q.popleft()
        seen += 1
        for j in g.adj[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                q.append(j)
    if seen != len(g.vertices):
        raise GraphError("graph has a cycle")


def _hopcroft_karp(n: int, adj) -> list[int]:
    """Maximum matching left->right on a bipartite graph with n vertices
    on each side; returns match_left (-1 for unmatched)."""
    INF = n + 1
    match_l = [-1] * n
    match_r = [-1] * n
    dist = [0] * n

    def bfs() -> bool:
        q = deque()
        for u in range(n):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = INF
        found = False
        while q:
            u = q.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in range(n):
            if match_l[u] == -1:
                dfs(u)
    return match_l


def min_path_cover(g: TupleGraph) -> PathCover:
    """Fewest vertex-disjoint paths covering all vertices of the DAG."""
    _check_acyclic(g)
    n = len(g.vertices)
    match_l = _hopcroft_karp(n, g.adj)
    has_pred = set(v for v in match_l if v != -1)
    paths = []
    for i in range(n):
        if i in has_pred:
            continue
        path = [i]
        while match_l[path[-1]] != -1:
            path.append(match_l[path[-1]])
        paths.append(tuple(path))
    return PathCover(g, tuple(paths))


def cover_quality(pc: PathCover, m: int) -> BoundReport:
    sizes = tuple(len(p) for p in pc.paths)
    l = len(sizes)
    probe_bound = sum(1 + int(math.log2(s)) for s in sizes if s)
    closed = l * (1 + math.log2(m / l)) if l and m else 0.0
    return BoundReport(l, sizes, probe_bound, closed, l < m / 2)
