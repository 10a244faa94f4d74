"""Finite rooted edge-labelled graphs, balls, and graph-level diagnostics."""
from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import csgraph, csr_matrix
from scipy.sparse.linalg import eigsh

from . import kernels
from .errors import CapacityError, DomainError

#: membership tolerance for weighted balls
BALL_TOL = 1e-9
EXACT_CHEEGER_MAX = 20

Edge = tuple  # (source, target, label, oriented)


@dataclass(frozen=True)
class RootedGraph:
    """A finite rooted multigraph with integer edge labels.

    ``edges`` holds ``(source, target, label, oriented)`` tuples. Unoriented
    edges are stored with ``source <= target``. ``weights`` is either ``None``
    (every edge has length 1) or one positive length per edge.
    """

    vertex_count: int
    edges: tuple = ()
    root: int = 0
    weights: Optional[tuple] = field(default=None)

    def __post_init__(self):
        n = self.vertex_count
        if n < 1:
            raise DomainError("vertex_count must be positive")
        if not 0 <= self.root < n:
            raise DomainError(f"root {self.root} out of range for {n} vertices")
        norm = []
        for e in self.edges:
            if len(e) == 3:
                s, t, lab = e
                ori = False
            else:
                s, t, lab, ori = e
            s, t, lab, ori = int(s), int(t), int(lab), bool(ori)
            if not (0 <= s < n and 0 <= t < n):
                raise DomainError(f"edge endpoint out of range: {e}")
            if not ori and s > t:
                s, t = t, s
            norm.append((s, t, lab, ori))
        if len(set(norm)) != len(norm):
            raise DomainError("duplicate edge tuple")
        object.__setattr__(self, "edges", tuple(norm))
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(norm):
                raise DomainError("one weight per edge required")
            if any(not (x > 0 and math.isfinite(x)) for x in w):
                raise DomainError("edge weights must be positive")
            if all(x == 1.0 for x in w):
                w = None
            object.__setattr__(self, "weights", w)

    # -- structure -------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def is_weighted(self) -> bool:
        return self.weights is not None

    def weight(self, i: int) -> float:
        return 1.0 if self.weights is None else self.weights[i]

    @cached_property
    def adjacency(self) -> tuple:
        """Per vertex, a tuple of ``(neighbour, edge index)``; loops once."""
        adj = [[] for _ in range(self.vertex_count)]
        for i, (s, t, _, _) in enumerate(self.edges):
            adj[s].append((t, i))
            if s != t:
                adj[t].append((s, i))
        return tuple(tuple(a) for a in adj)

    def degree(self, v: int) -> int:
        return sum(2 if w == v else 1 for w, _ in self.adjacency[v])

    def with_root(self, v: int) -> "RootedGraph":
        return RootedGraph(self.vertex_count, self.edges, v, self.weights)

    def is_connected(self) -> bool:
        seen = {self.root}
        todo = [self.root]
        while todo:
            u = todo.pop()
            for w, _ in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == self.vertex_count

    def is_acyclic(self) -> bool:
        """True when the graph is a forest (loops and parallel edges are cycles)."""
        comps = csgraph.connected_components(self._simple_csr(), directed=False)[0]
        return self.edge_count == self.vertex_count - comps

    def csr(self, loops_twice: bool = True):
        """Undirected adjacency as ``(indptr, neighbours, weights, edge ids)``."""
        n = self.vertex_count
        src, dst, eid = [], [], []
        for i, (s, t, _, _) in enumerate(self.edges):
            src.append(s)
            dst.append(t)
            eid.append(i)
            if s != t or loops_twice:
                src.append(t)
                dst.append(s)
                eid.append(i)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        eid = np.asarray(eid, dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst, eid = src[order], dst[order], eid[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        w = np.array([self.weight(int(i)) for i in eid], dtype=np.float64)
        return indptr, dst, w, eid

    def _simple_csr(self):
        n = self.vertex_count
        if not self.edges:
            return csr_matrix((n, n))
        s = [e[0] for e in self.edges]
        t = [e[1] for e in self.edges]
        return csr_matrix((np.ones(len(s)), (s, t)), shape=(n, n))

    # -- serialisation ---------------------------------------------------

    def to_dict(self) -> dict:
        edges = []
        for i, (s, t, lab, _) in enumerate(self.edges):
            row = [s, t, lab]
            if self.weights is not None:
                row.append(self.weights[i])
            edges.append(row)
        oris = [e[3] for e in self.edges]
        if all(oris) and oris:
            oriented = True
        elif not any(oris):
            oriented = False
        else:
            oriented = oris
        return {"n": self.vertex_count, "root": self.root, "edges": edges, "oriented": oriented}

    @classmethod
    def from_dict(cls, data: dict) -> "RootedGraph":
        try:
            n = int(data["n"])
            root = int(data.get("root", 0))
            rows = data["edges"]
            oriented = data.get("oriented", False)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed graph document: {exc}") from exc
        if isinstance(oriented, bool):
            oriented = [oriented] * len(rows)
        if len(oriented) != len(rows):
            raise DomainError("orientation list length mismatch")
        edges, weights = [], []
        for row, ori in zip(rows, oriented):
            if len(row) not in (3, 4):
                raise DomainError(f"edge row must be [src, dst, label, weight?]: {row}")
            edges.append((row[0], row[1], row[2], ori))
            weights.append(row[3] if len(row) == 4 else 1.0)
        return cls(n, tuple(edges), root, tuple(weights) if weights else None)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RootedGraph":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


# ---------------------------------------------------------------- builders


def cycle_graph(n: int, label: int = 0, oriented: bool = False) -> RootedGraph:
    if n == 1:
        return RootedGraph(1, ((0, 0, label, oriented),))
    if n == 2 and not oriented:
        raise DomainError("unoriented 2-cycle needs parallel edges with distinct labels")
    return RootedGraph(n, tuple((i, (i + 1) % n, label, oriented) for i in range(n)))


def path_graph(n: int, root: int = 0) -> RootedGraph:
    return RootedGraph(n, tuple((i, i + 1, 0, False) for i in range(n - 1)), root)


def from_edge_list(n: int, pairs: Iterable[Sequence[int]], root: int = 0) -> RootedGraph:
    return RootedGraph(n, tuple((int(a), int(b), 0, False) for a, b in pairs), root)


# ------------------------------------------------------------------- balls


def distances_from(g: RootedGraph, center: int, limit: float = math.inf) -> dict:
    """Shortest-path distances from ``center`` that are at most ``limit``."""
    if not 0 <= center < g.vertex_count:
        raise DomainError(f"center {center} out of range")
    if not g.is_weighted:
        dist = {center: 0}
        q = deque([center])
        while q:
            u = q.popleft()
            du = dist[u]
            if du + 1 > limit + BALL_TOL:
                continue
            for w, _ in g.adjacency[u]:
                if w not in dist:
                    dist[w] = du + 1
                    q.append(w)
        return dist
    dist = {center: 0.0}
    heap = [(0.0, center)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for w, i in g.adjacency[u]:
            nd = d + g.weights[i]
            if nd <= limit + BALL_TOL and nd < dist.get(w, math.inf):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def ball_order(g: RootedGraph, center: int, r: float) -> list:
    """Original ids of the closed ``r``-ball, sorted by ``(distance, id)``."""
    if r < 0:
        raise DomainError("radius must be non-negative")
    dist = distances_from(g, center, r)
    return sorted(dist, key=lambda v: (dist[v], v))


def extract_ball(g: RootedGraph, center: int, r: float) -> RootedGraph:
    """Induced subgraph on the closed ball of radius ``r`` around ``center``.

    Vertices are renumbered by ``(distance, original id)``, so the centre
    becomes vertex 0 and the new root.
    """
    order = ball_order(g, center, r)
    new = {v: i for i, v in enumerate(order)}
    edges, weights = [], []
    for i, (s, t, lab, ori) in enumerate(g.edges):
        if s in new and t in new:
            edges.append((new[s], new[t], lab, ori))
            weights.append(g.weight(i))
    return RootedGraph(len(order), tuple(edges), 0, tuple(weights) if g.is_weighted else None)


def tree_ball_fraction(g: RootedGraph, r: float) -> Fraction:
    """Fraction of vertices whose closed ``r``-ball is a tree."""
    if not r > 0:
        raise DomainError("radius must be positive")
    if not g.is_weighted:
        indptr, nbr, _, _ = g.csr(loops_twice=True)
        flags = kernels.tree_ball_flags(indptr, nbr, int(math.floor(r + BALL_TOL)))
        return Fraction(int(np.count_nonzero(flags)), g.vertex_count)
    good = sum(extract_ball(g, v, r).is_acyclic() for v in range(g.vertex_count))
    return Fraction(good, g.vertex_count)


# ----------------------------------------------------------------- Cheeger


@dataclass(frozen=True)
class CheegerResult:
    """``value`` is exact unless ``is_bound``, in which case it is an upper bound."""

    value: Fraction
    is_bound: bool
    witness: frozenset

    def __float__(self):
        return float(self.value)


def _cut_ratio(g: RootedGraph, subset: frozenset) -> Fraction:
    cut = sum(1 for s, t, _, _ in g.edges if (s in subset) != (t in subset))
    return Fraction(cut, len(subset))


def _multiplicity_matrix(g: RootedGraph) -> np.ndarray:
    n = g.vertex_count
    adj = np.zeros((n, n), dtype=np.int64)
    for s, t, _, _ in g.edges:
        if s != t:
            adj[s, t] += 1
            adj[t, s] += 1
    return adj


def _sweep_orders(g: RootedGraph):
    n = g.vertex_count
    deg = [g.degree(v) for v in range(n)]
    # breadth-first sweep from each minimum-degree vertex, neighbours by degree
    starts = [v for v in range(n) if deg[v] == min(deg)]
    for s in starts:
        order, seen = [s], {s}
        q = deque([s])
        while q:
            u = q.popleft()
            for w in sorted({w for w, _ in g.adjacency[u]}, key=lambda x: (deg[x], x)):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    q.append(w)
        yield order
    if n >= 3:
        adj = _multiplicity_matrix(g).astype(float)
        lap = np.diag(adj.sum(axis=1)) - adj
        if n <= 400:
            vals, vecs = np.linalg.eigh(lap)
            fied = vecs[:, 1]
        else:
            vals, vecs = eigsh(csr_matrix(lap), k=2, which="SM")
            fied = vecs[:, np.argsort(vals)[1]]
        yield list(np.argsort(fied, kind="stable"))
        yield list(np.argsort(-fied, kind="stable"))


def cheeger_constant(g: RootedGraph, mode: str = "exact") -> CheegerResult:
    """Edge-boundary isoperimetric constant ``min e(S, S^c) / |S|`` over
    non-empty ``S`` with ``|S| <= |V|/2``.

    ``mode="exact"`` enumerates every subset (at most 20 vertices).
    ``mode="bound"`` returns the best of several sweep cuts: an upper bound.
    """
    n = g.vertex_count
    if n < 2:
        raise DomainError("Cheeger constant needs at least two vertices")
    if not g.is_connected():
        raise DomainError("graph is disconnected")
    if mode == "exact":
        if n > EXACT_CHEEGER_MAX:
            raise CapacityError(f"exact Cheeger enumeration capped at {EXACT_CHEEGER_MAX} vertices")
        num, den, mask = kernels.cheeger_exhaustive(_multiplicity_matrix(g))
        witness = frozenset(v for v in range(n) if (int(mask) >> v) & 1)
        return CheegerResult(Fraction(int(num), int(den)), False, witness)
    if mode != "bound":
        raise DomainError(f"unknown mode {mode!r}")
    best = None
    for order in _sweep_orders(g):
        for k in range(1, n // 2 + 1):
            s = frozenset(int(v) for v in order[:k])
            val = _cut_ratio(g, s)
            if best is None or val < best[0]:
                best = (val, s)
    return CheegerResult(best[0], True, best[1])


def __getattr__(name):
    # canonical codes live in their own module, which imports this one
    if name in ("BallCode", "canonical_code", "decode_code"):
        from . import canonical

        return getattr(canonical, name)
    raise AttributeError(name)
