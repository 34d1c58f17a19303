"""Undirected simple graphs and the structural queries used by the bounds.

Graphs are immutable values on vertices ``0..p-1``.  Besides parsing and
serialization this module answers the combinatorial questions the lower
bounds depend on: Hamming distance between edge sets, girth, simple-path
counts and the maximum number of internally vertex-disjoint paths of
bounded length between two vertices (with a checkable certificate).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ArgumentError, BudgetExceeded, DimensionError, ParseError

INFINITE = math.inf

DEFAULT_SEARCH_BUDGET = 10**7


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on ``num_vertices`` labelled vertices.

    ``edges`` is stored as a sorted tuple of ``(u, v)`` pairs with ``u < v``,
    so two graphs with the same edge set compare (and hash) equal.
    """

    num_vertices: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        p = self.num_vertices
        if not isinstance(p, int) or p < 1:
            raise ArgumentError(f"num_vertices must be a positive integer, got {p!r}")
        canon = set()
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ArgumentError(f"self-loop at vertex {u}")
            if not (0 <= u < p and 0 <= v < p):
                raise ArgumentError(f"edge ({u}, {v}) has an endpoint outside 0..{p - 1}")
            canon.add(_norm_edge(u, v))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def p(self) -> int:
        return self.num_vertices

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Neighbour lists in ascending vertex order."""
        nbrs: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(n)) for n in nbrs)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(n) for n in self.adjacency]

    def has_edge(self, u: int, v: int) -> bool:
        return _norm_edge(u, v) in self.edge_set

    def with_edges(self, add: Iterable = (), remove: Iterable = ()) -> "Graph":
        """Return a copy with ``add`` inserted and ``remove`` deleted."""
        es = set(self.edges)
        es.difference_update(_norm_edge(*e) for e in remove)
        es.update(_norm_edge(*e) for e in add)
        return Graph(self.num_vertices, tuple(es))

    def to_text(self) -> str:
        lines = [str(self.num_vertices)]
        lines.extend(f"{u} {v}" for u, v in self.edges)
        return "\n".join(lines) + "\n"


def empty_graph(p: int) -> Graph:
    return Graph(p)


def complete_graph(p: int) -> Graph:
    return Graph(p, tuple((u, v) for u in range(p) for v in range(u + 1, p)))


def path_graph(p: int) -> Graph:
    return Graph(p, tuple((i, i + 1) for i in range(p - 1)))


def cycle_graph(p: int) -> Graph:
    if p < 3:
        raise ArgumentError("a cycle needs at least 3 vertices")
    return Graph(p, tuple((i, (i + 1) % p) for i in range(p)))


def parse_graph(text: str) -> Graph:
    """Parse the edge-list format: ``p`` on the first line, then ``u v`` lines.

    Blank lines and lines starting with ``#`` are ignored.  Duplicate edges
    (in either orientation) collapse to one.
    """
    p = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if p is None:
            if len(parts) != 1:
                raise ParseError("first line must hold the vertex count", lineno)
            try:
                p = int(parts[0])
            except ValueError:
                raise ParseError(f"vertex count {parts[0]!r} is not an integer", lineno) from None
            if p < 1:
                raise ParseError("vertex count must be positive", lineno)
            continue
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", lineno) from None
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        if not (0 <= u < p and 0 <= v < p):
            raise ParseError(f"vertex out of range 0..{p - 1} in {line!r}", lineno)
        edges.append((u, v))
    if p is None:
        raise ParseError("missing vertex count", 1)
    return Graph(p, tuple(edges))


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def write_graph(g: Graph, path) -> None:
    Path(path).write_text(g.to_text(), encoding="utf-8")


def hamming_distance(g: Graph, h: Graph) -> int:
    """Size of the symmetric difference of the two edge sets."""
    if g.num_vertices != h.num_vertices:
        raise DimensionError(f"graphs have {g.num_vertices} and {h.num_vertices} vertices")
    return len(g.edge_set ^ h.edge_set)


def girth(g: Graph) -> float:
    """Length of the shortest cycle, or ``INFINITE`` for a forest.

    Runs a BFS from every vertex; a non-tree edge ``(u, w)`` met while
    scanning from ``u`` closes a cycle of length ``dist[u] + dist[w] + 1``
    (possibly not simple, but the minimum over all roots is exact).
    """
    best = INFINITE
    adj = g.adjacency
    for root in range(g.num_vertices):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def _check_pair(g: Graph, a: int, b: int) -> None:
    if a == b:
        raise ArgumentError("endpoints must differ")
    for v in (a, b):
        if not 0 <= v < g.num_vertices:
            raise ArgumentError(f"vertex {v} outside 0..{g.num_vertices - 1}")


def count_simple_paths(g: Graph, a: int, b: int, max_len=INFINITE) -> int:
    """Number of simple ``a``-``b`` paths with at most ``max_len`` edges."""
    _check_pair(g, a, b)
    limit = g.num_vertices - 1 if max_len == INFINITE else min(int(max_len), g.num_vertices - 1)
    adj = g.adjacency
    on_path = [False] * g.num_vertices
    on_path[a] = True

    def dfs(u: int, depth: int) -> int:
        total = 0
        for w in adj[u]:
            if w == b:
                total += 1
            elif not on_path[w] and depth + 1 < limit:
                on_path[w] = True
                total += dfs(w, depth + 1)
                on_path[w] = False
        return total

    if limit < 1:
        return 0
    return dfs(a, 0)


@dataclass(frozen=True)
class PathCertificate:
    """Witness that ``endpoint_a`` and ``endpoint_b`` are joined by the listed paths."""

    endpoint_a: int
    endpoint_b: int
    paths: tuple[tuple[int, ...], ...] = field(default=())

    def to_dict(self) -> dict:
        return {"a": self.endpoint_a, "b": self.endpoint_b, "paths": [list(p) for p in self.paths]}


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


def verify_certificate(g: Graph, cert: PathCertificate, l: int, d: int) -> Verdict:
    """Check that ``cert`` shows ``d`` internally disjoint paths of length <= ``l``."""
    a, b = cert.endpoint_a, cert.endpoint_b
    if len(cert.paths) < d:
        return Verdict(False, f"too-few-paths: {len(cert.paths)} < {d}")
    seen_interior: set[int] = set()
    seen_direct = False
    for i, path in enumerate(cert.paths):
        if len(path) < 2 or path[0] != a or path[-1] != b:
            return Verdict(False, f"bad-endpoints: path {i}")
        if len(path) - 1 > l:
            return Verdict(False, f"too-long: path {i} has {len(path) - 1} edges > {l}")
        for u, v in zip(path, path[1:]):
            if not (0 <= u < g.num_vertices and 0 <= v < g.num_vertices) or not g.has_edge(u, v):
                return Verdict(False, f"missing-edge: ({u}, {v}) in path {i}")
        interior = path[1:-1]
        if not interior:
            if seen_direct:
                return Verdict(False, f"duplicate-direct-edge: path {i}")
            seen_direct = True
        if len(set(interior)) != len(interior) or a in interior or b in interior:
            return Verdict(False, f"not-simple: path {i}")
        clash = seen_interior.intersection(interior)
        if clash:
            return Verdict(False, f"shared-interior: vertex {min(clash)} in path {i}")
        seen_interior.update(interior)
    return Verdict(True)


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise BudgetExceeded(f"search exceeded its budget of {self.limit} nodes")


def _short_paths_by_first_hop(g: Graph, a: int, b: int, max_len: int, budget: _Budget):
    """All simple a-b paths of length <= max_len, grouped by the vertex after ``a``.

    Within a group paths are ordered by length, then lexicographically.
    """
    adj = g.adjacency
    groups: dict[int, list[tuple[int, ...]]] = {}
    stack = [a]
    on_path = {a}

    def dfs(u: int):
        budget.tick()
        for w in adj[u]:
            if w == b:
                groups.setdefault(stack[1] if len(stack) > 1 else b, []).append(tuple(stack) + (b,))
            elif w not in on_path and len(stack) < max_len:
                stack.append(w)
                on_path.add(w)
                dfs(w)
                on_path.discard(w)
                stack.pop()

    dfs(a)
    for paths in groups.values():
        paths.sort(key=lambda q: (len(q), q))
    return groups


def max_disjoint_paths(g: Graph, a: int, b: int, max_len: int,
                       budget: int = DEFAULT_SEARCH_BUDGET) -> tuple[int, PathCertificate]:
    """Maximum number of internally vertex-disjoint a-b paths of length <= ``max_len``.

    Exact branch and bound.  Every path leaves ``a`` through a distinct
    neighbour, so the search decides, neighbour by neighbour in ascending
    order, which path (if any) uses it.  Subproblems are memoised on
    ``(neighbour index, used interior vertices)``.

    Raises:
        BudgetExceeded: more than ``budget`` search nodes were expanded.
    """
    _check_pair(g, a, b)
    if max_len < 1:
        raise ArgumentError("max_len must be at least 1")
    ticker = _Budget(budget)
    groups = _short_paths_by_first_hop(g, a, b, int(max_len), ticker)
    direct = groups.pop(b, [])
    hops = sorted(groups)
    memo: dict = {}

    def best_from(i: int, used: frozenset) -> tuple[tuple[int, ...], ...]:
        if i == len(hops):
            return ()
        key = (i, used)
        if key in memo:
            return memo[key]
        ticker.tick()
        best = best_from(i + 1, used)
        if len(best) < len(hops) - i:
            for path in groups[hops[i]]:
                interior = path[1:-1]
                if used.isdisjoint(interior):
                    rest = best_from(i + 1, used.union(interior))
                    if len(rest) + 1 > len(best):
                        best = (path,) + rest
                        if len(best) == len(hops) - i:
                            break
        memo[key] = best
        return best

    chosen = best_from(0, frozenset())
    paths = tuple(direct[:1]) + chosen
    return len(paths), PathCertificate(a, b, paths)


def is_ld_connected(g: Graph, a: int, b: int, l: int, d: int,
                    budget: int = DEFAULT_SEARCH_BUDGET) -> bool:
    found, _ = max_disjoint_paths(g, a, b, l, budget=budget)
    return found >= d


def union(graphs: Sequence[Graph]) -> Graph:
    p = graphs[0].num_vertices
    es = set()
    for h in graphs:
        if h.num_vertices != p:
            raise DimensionError("graphs differ in vertex count")
        es.update(h.edges)
    return Graph(p, tuple(es))
