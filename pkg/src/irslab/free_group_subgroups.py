"""Subgroups of free groups as folded labelled graphs.

Words are tuples of non-zero ints: ``i`` is the i-th generator and ``-i`` its
inverse (generators are numbered from 1). In the string form letters
``a, b, c, ...`` are generators and capitals their inverses.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .bs_space import LocalStatistics, local_statistics
from .errors import CapacityError, DomainError
from .rooted_graphs import RootedGraph

MAX_WORD_LENGTH = 12
_LETTERS = "abcdefghijklmnopqrstuvwxyz"

Word = tuple


# -------------------------------------------------------------------- words


def free_reduce(word: Iterable[int]) -> Word:
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def inverse(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def parse_word(text: str, rank: Optional[int] = None) -> Word:
    """``"abA"`` -> ``(1, 2, -1)``; the result is freely reduced."""
    out = []
    for ch in text.strip():
        if ch in " 1":
            continue
        low = ch.lower()
        if low not in _LETTERS:
            raise DomainError(f"invalid letter {ch!r} in word {text!r}")
        g = _LETTERS.index(low) + 1
        if rank is not None and g > rank:
            raise DomainError(f"letter {ch!r} exceeds rank {rank}")
        out.append(g if ch == low else -g)
    return free_reduce(out)


def format_word(word: Sequence[int]) -> str:
    return "".join(_LETTERS[x - 1] if x > 0 else _LETTERS[-x - 1].upper() for x in word)


def parse_generators(text: str, rank: Optional[int] = None) -> list:
    return [parse_word(w, rank) for w in text.split(",") if w.strip()]


def reduced_words(rank: int, length: int):
    """All freely reduced words of exactly ``length`` letters, in a fixed order."""
    letters = [x for g in range(1, rank + 1) for x in (g, -g)]
    if length == 0:
        yield ()
        return
    stack = [(x,) for x in reversed(letters)]
    while stack:
        w = stack.pop()
        if len(w) == length:
            yield w
            continue
        for x in reversed(letters):
            if x != -w[-1]:
                stack.append(w + (x,))


# ------------------------------------------------------------------- graphs


@dataclass(frozen=True)
class CoreGraph:
    """Folded labelled graph with a basepoint.

    ``out[v][g - 1]`` is the target of the ``g``-edge leaving ``v``, or -1.
    """

    rank: int
    out: tuple
    basepoint: int = 0

    def __post_init__(self):
        n = len(self.out)
        seen = [set() for _ in range(self.rank)]
        for v, row in enumerate(self.out):
            if len(row) != self.rank:
                raise DomainError("each vertex needs one entry per generator")
            for g, t in enumerate(row):
                if t >= n:
                    raise DomainError("edge target out of range")
                if t >= 0:
                    if t in seen[g]:
                        raise DomainError("labelling is not co-deterministic (not folded)")
                    seen[g].add(t)
        if not 0 <= self.basepoint < max(n, 1):
            raise DomainError("basepoint out of range")

    @property
    def vertex_count(self) -> int:
        return len(self.out)

    @property
    def edge_count(self) -> int:
        return sum(t >= 0 for row in self.out for t in row)

    def step(self, v: int, x: int) -> int:
        if x > 0:
            return self.out[v][x - 1]
        return self._inc[v][-x - 1]

    @property
    def _inc(self):
        inc = self.__dict__.get("_inc_cache")
        if inc is None:
            table = [[-1] * self.rank for _ in self.out]
            for v, row in enumerate(self.out):
                for g, t in enumerate(row):
                    if t >= 0:
                        table[t][g] = v
            inc = tuple(tuple(r) for r in table)
            object.__setattr__(self, "_inc_cache", inc)
        return inc

    def trace(self, word: Sequence[int], start: Optional[int] = None) -> int:
        """End vertex of the path reading ``word``, or -1 if it falls off."""
        v = self.basepoint if start is None else start
        for x in word:
            v = self.step(v, x)
            if v < 0:
                return -1
        return v

    def is_complete(self) -> bool:
        return all(t >= 0 for row in self.out for t in row)

    def index(self):
        """Index of the subgroup: vertex count when complete, else infinite."""
        return self.vertex_count if self.is_complete() else float("inf")

    def degree(self, v: int) -> int:
        d = sum(t >= 0 for t in self.out[v]) + sum(t >= 0 for t in self._inc[v])
        return d

    def spanning_tree_words(self) -> list:
        """Word labelling the tree path from the basepoint to each vertex."""
        words = [None] * self.vertex_count
        words[self.basepoint] = ()
        q = deque([self.basepoint])
        while q:
            u = q.popleft()
            for x in _letters(self.rank):
                v = self.step(u, x)
                if v >= 0 and words[v] is None:
                    words[v] = words[u] + (x,)
                    q.append(v)
        return words

    def free_basis(self) -> list:
        """Free basis of the presented subgroup (one word per non-tree edge)."""
        tree = self.spanning_tree_words()
        used = set()
        for v, w in enumerate(tree):
            if w:
                parent = self.trace(w[:-1])
                x = w[-1]
                used.add((parent, x) if x > 0 else (v, -x))
        basis = []
        for u, row in enumerate(self.out):
            for g, v in enumerate(row, start=1):
                if v >= 0 and (u, g) not in used:
                    basis.append(free_reduce(tree[u] + (g,) + inverse(tree[v])))
        return basis

    def to_rooted_graph(self) -> RootedGraph:
        edges = [
            (u, v, g, True) for u, row in enumerate(self.out) for g, v in enumerate(row, 1) if v >= 0
        ]
        return RootedGraph(self.vertex_count, tuple(edges), self.basepoint)

    def to_dict(self) -> dict:
        d = self.to_rooted_graph().to_dict()
        d.update(rank=self.rank, complete=self.is_complete())
        idx = self.index()
        d["index"] = idx if idx != float("inf") else None
        return d

    @classmethod
    def from_rooted_graph(cls, g: RootedGraph, rank: Optional[int] = None) -> "CoreGraph":
        labels = [e[2] for e in g.edges]
        k = rank if rank is not None else max(labels, default=0)
        out = [[-1] * k for _ in range(g.vertex_count)]
        for s, t, lab, ori in g.edges:
            if not ori or not 1 <= lab <= k:
                raise DomainError("Schreier/core graphs need oriented edges labelled 1..k")
            if out[s][lab - 1] >= 0:
                raise DomainError("labelling is not deterministic")
            out[s][lab - 1] = t
        return cls(k, tuple(tuple(r) for r in out), g.root)

    @classmethod
    def from_dict(cls, data: dict) -> "CoreGraph":
        return cls.from_rooted_graph(RootedGraph.from_dict(data), data.get("rank"))


SchreierGraph = CoreGraph


def _letters(rank: int) -> list:
    return [x for g in range(1, rank + 1) for x in (g, -g)]


# ------------------------------------------------------------------ folding


def stallings_core(generators: Sequence[Sequence[int]], rank: int) -> CoreGraph:
    """Folded core graph of the subgroup generated by ``generators``."""
    if rank < 1:
        raise DomainError("rank must be positive")
    # adj[v][x]: set of neighbours along signed letter x
    adj = [dict()]
    for word in generators:
        w = free_reduce(word)
        if any(not 1 <= abs(x) <= rank for x in w):
            raise DomainError(f"word {w} uses letters beyond rank {rank}")
        if not w:
            continue
        prev = 0
        for i, x in enumerate(w):
            nxt = 0 if i == len(w) - 1 else len(adj)
            if nxt:
                adj.append(dict())
            adj[prev].setdefault(x, set()).add(nxt)
            adj[nxt].setdefault(-x, set()).add(prev)
            prev = nxt
    alive = [True] * len(adj)
    stack = list(range(len(adj)))
    while stack:
        u = stack.pop()
        if not alive[u]:
            continue
        for x, targets in list(adj[u].items()):
            if len(targets) < 2:
                continue
            keep, *rest = sorted(targets)
            for w in rest:
                _merge(adj, alive, keep, w)
            stack.extend([u, keep])
            break
    return _trim_and_number(adj, alive, rank)


def _merge(adj, alive, keep, gone):
    if keep == gone:
        return
    alive[gone] = False
    for x, targets in adj[gone].items():
        for t in targets:
            t2 = keep if t == gone else t
            back = adj[t].get(-x) if t != gone else None
            if back is not None:
                back.discard(gone)
                back.add(keep)
            adj[keep].setdefault(x, set()).add(t2)
    # loops at gone recorded as gone -> gone must now be keep -> keep
    for x in list(adj[keep]):
        s = adj[keep][x]
        if gone in s:
            s.discard(gone)
            s.add(keep)
    adj[gone] = {}


def _trim_and_number(adj, alive, rank) -> CoreGraph:
    def deg(v):
        return sum(len(s) + (1 if v in s else 0) * 0 for s in adj[v].values())

    stack = [v for v in range(len(adj)) if alive[v] and v != 0 and deg(v) <= 1]
    while stack:
        v = stack.pop()
        if not alive[v] or v == 0 or deg(v) > 1:
            continue
        alive[v] = False
        for x, targets in adj[v].items():
            for t in targets:
                adj[t][-x].discard(v)
                if t != 0 and deg(t) <= 1:
                    stack.append(t)
        adj[v] = {}
    # breadth-first numbering from the basepoint in letter order
    order = {0: 0}
    q = deque([0])
    letters = _letters(rank)
    while q:
        u = q.popleft()
        for x in letters:
            for t in adj[u].get(x, ()):
                if t not in order:
                    order[t] = len(order)
                    q.append(t)
    out = [[-1] * rank for _ in order]
    for v, i in order.items():
        for g in range(1, rank + 1):
            (t,) = adj[v].get(g) or (None,)
            if t is not None:
                out[i][g - 1] = order[t]
    return CoreGraph(rank, tuple(tuple(r) for r in out), 0)


def contains(h: CoreGraph, word: Sequence[int]) -> bool:
    """Membership by tracing the reduced word as a closed path at the basepoint."""
    return h.trace(free_reduce(word)) == h.basepoint


# ----------------------------------------------------------------- Schreier


def parse_cycles(text: str, degree: int) -> list:
    """One-line cycle notation over points ``1..degree`` -> 0-based image array."""
    images = list(range(degree))
    for cyc in re.findall(r"\(([^()]*)\)", text):
        pts = [int(p) - 1 for p in re.split(r"[\s,]+", cyc.strip()) if p]
        if any(not 0 <= p < degree for p in pts):
            raise DomainError(f"cycle point out of range in {text!r}")
        for a, b in zip(pts, pts[1:] + pts[:1]):
            images[a] = b
    return images


def schreier_from_permutations(perms: Sequence[Sequence[int]], root: int = 0) -> CoreGraph:
    """Schreier graph of the action given by 0-based image arrays."""
    if not perms:
        raise DomainError("at least one permutation required")
    m = len(perms[0])
    rows = [[-1] * len(perms) for _ in range(m)]
    for g, p in enumerate(perms):
        p = [int(x) for x in p]
        if len(p) != m or sorted(p) != list(range(m)):
            raise DomainError(f"permutation {g + 1} is not a bijection of {m} points")
        for i, t in enumerate(p):
            rows[i][g] = t
    if not 0 <= root < m:
        raise DomainError("root out of range")
    sch = CoreGraph(len(perms), tuple(tuple(r) for r in rows), root)
    reached = {root}
    q = deque([root])
    while q:
        u = q.popleft()
        for x in _letters(sch.rank):
            v = sch.step(u, x)
            if v not in reached:
                reached.add(v)
                q.append(v)
    if len(reached) != m:
        raise DomainError("action is not transitive (Schreier graph disconnected)")
    return sch


def torus_action(n: int) -> list:
    """Image arrays of the two coordinate shifts on (Z/nZ)^2."""
    a = [((x + 1) % n) * n + y for x in range(n) for y in range(n)]
    b = [x * n + (y + 1) % n for x in range(n) for y in range(n)]
    return [a, b]


def random_transitive_action(rank: int, points: int, rng: np.random.Generator) -> list:
    """Uniform permutation tuple conditioned on transitivity (rejection)."""
    while True:
        perms = [list(map(int, rng.permutation(points))) for _ in range(rank)]
        try:
            schreier_from_permutations(perms)
        except DomainError:
            continue
        return perms


# ------------------------------------------------------------ word metrics


@dataclass(frozen=True)
class FkDistance:
    """``value = 2^-n`` at the first separating length, or the upper bound
    ``2^-n_max`` when ``exact`` is false."""

    value: float
    exact: bool
    separating_length: Optional[int]


def chabauty_distance_fk(h1: CoreGraph, h2: CoreGraph, n_max: int) -> FkDistance:
    """Marked-ball distance: ``2^-n`` for the least ``n`` at which the sets of
    subgroup elements of length at most ``n`` differ."""
    if h1.rank != h2.rank:
        raise DomainError("subgroups of free groups of different rank")
    if n_max < 1:
        raise DomainError("n_max must be positive")
    if n_max > MAX_WORD_LENGTH:
        raise CapacityError(f"word length budget is {MAX_WORD_LENGTH}")
    k = h1.rank
    b1, b2 = h1.basepoint, h2.basepoint
    frontier = {(0, b1, b2)}
    for n in range(1, n_max + 1):
        nxt = set()
        for last, v1, v2 in frontier:
            for x in _letters(k):
                if x == -last:
                    continue
                w1 = h1.step(v1, x) if v1 >= 0 else -1
                w2 = h2.step(v2, x) if v2 >= 0 else -1
                if w1 < 0 and w2 < 0:
                    continue
                if (w1 == b1) != (w2 == b2):
                    return FkDistance(2.0 ** -n, True, n)
                nxt.add((x, w1, w2))
        frontier = nxt
        if not frontier:
            break
    return FkDistance(2.0 ** -n_max, False, None)


def short_relation_probability(g: CoreGraph, n: int) -> Fraction:
    """Fraction of vertices at which some reduced word of length 1..n closes up."""
    if n < 1:
        raise DomainError("n must be positive")
    if n > MAX_WORD_LENGTH:
        raise CapacityError(f"word length budget is {MAX_WORD_LENGTH}")
    letters = _letters(g.rank)
    hits = 0
    for v in range(g.vertex_count):
        frontier = {(0, v)}
        found = False
        for _ in range(n):
            nxt = set()
            for last, u in frontier:
                for x in letters:
                    if x == -last:
                        continue
                    w = g.step(u, x)
                    if w < 0:
                        continue
                    if w == v:
                        found = True
                        break
                    nxt.add((x, w))
                if found:
                    break
            if found:
                break
            frontier = nxt
        hits += found
    return Fraction(hits, g.vertex_count)


def sample_cosofic_irs(g: CoreGraph, r_max: int) -> LocalStatistics:
    """Uniform-root ball statistics of a finite Schreier graph."""
    if not g.is_complete():
        raise DomainError("Schreier graph must be complete")
    return local_statistics(g.to_rooted_graph(), r_max)


def grid_reference_statistics(r_max: int) -> LocalStatistics:
    """Ball statistics of the labelled Z^2 grid, read off a patch around the origin."""
    span = r_max + 1
    side = 2 * span + 1
    idx = lambda x, y: (x + span) * side + (y + span)  # noqa: E731
    edges = []
    for x in range(-span, span + 1):
        for y in range(-span, span + 1):
            if x < span:
                edges.append((idx(x, y), idx(x + 1, y), 1, True))
            if y < span:
                edges.append((idx(x, y), idx(x, y + 1), 2, True))
    patch = RootedGraph(side * side, tuple(edges), idx(0, 0))
    from .bs_space import vertex_codes

    codes = vertex_codes(patch, patch.root, r_max)
    return LocalStatistics(r_max, tuple({c: 1.0} for c in codes))
