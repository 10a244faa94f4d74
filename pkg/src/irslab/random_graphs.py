"""Seeded random graph samplers."""
from __future__ import annotations

import numpy as np

from .errors import CapacityError, DomainError
from .rooted_graphs import RootedGraph

MAX_RESTARTS = 10_000


def random_regular_graph(n: int, d: int, rng: np.random.Generator) -> RootedGraph:
    """Uniform simple ``d``-regular graph by the configuration model with restarts."""
    if n < 1 or d < 0 or (n * d) % 2 or d >= n:
        raise DomainError("need n*d even and 0 <= d < n")
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(MAX_RESTARTS):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        u, v = pairs.min(axis=1), pairs.max(axis=1)
        if (u == v).any():
            continue
        keys = u * n + v
        if np.unique(keys).size != keys.size:
            continue
        order = np.argsort(keys)
        edges = tuple((int(a), int(b), 0, False) for a, b in zip(u[order], v[order]))
        return RootedGraph(n, edges, 0)
    raise CapacityError("configuration model did not produce a simple graph")


def random_connected_graph(n: int, extra_edges: int, rng: np.random.Generator) -> RootedGraph:
    """Random recursive tree plus ``extra_edges`` distinct non-tree edges."""
    if n < 1:
        raise DomainError("n must be positive")
    edges = {(int(rng.integers(i)), i) for i in range(1, n)}
    limit = n * (n - 1) // 2
    target = min(limit, len(edges) + max(0, extra_edges))
    while len(edges) < target:
        a, b = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        edges.add((a, b))
    return RootedGraph(n, tuple((a, b, 0, False) for a, b in sorted(edges)), int(rng.integers(n)))
