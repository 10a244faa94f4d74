"""Canonical codes for rooted labelled balls.

Pendant trees are first folded into vertex labels (a rooted-tree encoding),
then the remaining core is coloured by iterated neighbourhood refinement and
the leftover symmetry is resolved by individualisation with backtracking. The
code is a self-delimiting byte serialisation of the lexicographically least
certificate, so it can be decoded back into a representative graph.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .errors import CapacityError, DomainError
from .rooted_graphs import RootedGraph

MAX_CODE_VERTICES = 512
WEIGHT_GRID = 1e-6

# edge-end directions
_UND, _OUT, _IN, _LOOP_UND, _LOOP_OR = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class BallCode:
    radius: float
    code: bytes

    @property
    def hex(self) -> str:
        return self.code.hex()


def weight_code(w: float) -> int:
    return int(round(w / WEIGHT_GRID))


# ------------------------------------------------------------ serialisation


def _put_int(out: bytearray, x: int) -> None:
    x = (x << 1) if x >= 0 else ((-x << 1) - 1)
    while True:
        b = x & 0x7F
        x >>= 7
        if x:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _encode(obj, out: bytearray) -> None:
    if isinstance(obj, tuple):
        out.append(1)
        _put_int(out, len(obj))
        for item in obj:
            _encode(item, out)
    else:
        out.append(0)
        _put_int(out, int(obj))


def _decode(buf: bytes, pos: int):
    tag = buf[pos]
    pos += 1
    x = shift = 0
    while True:
        b = buf[pos]
        pos += 1
        x |= (b & 0x7F) << shift
        shift += 7
        if not b & 0x80:
            break
    val = (x >> 1) if not x & 1 else -((x + 1) >> 1)
    if tag == 0:
        return val, pos
    items = []
    for _ in range(val):
        item, pos = _decode(buf, pos)
        items.append(item)
    return tuple(items), pos


# ------------------------------------------------------------- canonical form


def _rank(keys):
    order = {k: i for i, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


class _Core:
    """Mutable working copy of a ball for one canonisation."""

    def __init__(self, g: RootedGraph, marked: Optional[int]):
        n = g.vertex_count
        self.n = n
        self.root = g.root
        self.marked = marked
        self.alive = [True] * n
        # ends[v]: list of (edge type, neighbour, edge index)
        self.ends = [[] for _ in range(n)]
        for i, (s, t, lab, ori) in enumerate(g.edges):
            w = weight_code(g.weight(i))
            if s == t:
                self.ends[s].append(((lab, _LOOP_OR if ori else _LOOP_UND, w), s, i))
            elif ori:
                self.ends[s].append(((lab, _OUT, w), t, i))
                self.ends[t].append(((lab, _IN, w), s, i))
            else:
                self.ends[s].append(((lab, _UND, w), t, i))
                self.ends[t].append(((lab, _UND, w), s, i))
        self.pendant = [[] for _ in range(n)]
        self.labels = [()] * n
        # folding is canonical only where trees hang off a distinguished vertex
        self.anchored = self._reach({g.root} | ({marked} if marked is not None else set()))

    def _reach(self, start) -> set:
        seen = set(start)
        todo = list(start)
        while todo:
            u = todo.pop()
            for _, w, _ in self.ends[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    def strip_pendants(self) -> None:
        """Fold degree-one non-distinguished vertices into their parents."""
        deg = [len(e) for e in self.ends]
        stack = [v for v in range(self.n) if deg[v] == 1 and self._strippable(v)]
        while stack:
            v = stack.pop()
            if not self.alive[v] or deg[v] != 1:
                continue
            (etype, parent, idx), = [e for e in self.ends[v] if self.alive[e[1]]]
            if parent == v:
                continue
            self.alive[v] = False
            self.labels[v] = tuple(sorted(self.pendant[v]))
            lab, direction, w = etype
            # direction as seen from the parent
            flip = {_OUT: _IN, _IN: _OUT, _UND: _UND}[direction]
            self.pendant[parent].append(((lab, flip, w), self.labels[v]))
            self.ends[parent] = [e for e in self.ends[parent] if e[2] != idx]
            deg[parent] -= 1
            if deg[parent] == 1 and self._strippable(parent):
                stack.append(parent)
        for v in range(self.n):
            if self.alive[v]:
                self.labels[v] = tuple(sorted(self.pendant[v]))

    def _strippable(self, v: int) -> bool:
        return v != self.root and v != self.marked and self.alive[v] and v in self.anchored


def _refine(verts, ends, colors):
    k = len(set(colors[v] for v in verts))
    while True:
        sig = [
            (colors[v], tuple(sorted((et, colors[w]) for et, w, _ in ends[v])))
            for v in verts
        ]
        ranks = _rank(sig)
        new = dict(colors)
        for v, c in zip(verts, ranks):
            new[v] = c
        k2 = len(set(ranks))
        colors = new
        if k2 == k:
            return colors
        k = k2


def _twins(u, v, ends, colors) -> bool:
    if colors[u] != colors[v]:
        return False

    def profile(a, b):
        out = []
        for et, w, _ in ends[a]:
            if w == a:
                out.append((et, "self"))
            elif w == b:
                out.append((et, "other"))
            else:
                out.append((et, w))
        return sorted(out, key=repr)

    return profile(u, v) == profile(v, u)


def _certificate(core: _Core, verts, ends, colors, edges):
    pos = {v: colors[v] for v in verts}
    es = []
    for s, t, et in edges:
        ps, pt = pos[s], pos[t]
        lab, direction, w = et
        if direction == _UND and ps > pt:
            ps, pt = pt, ps
        es.append((ps, pt, lab, direction, w))
    labels = [None] * len(verts)
    for v in verts:
        labels[pos[v]] = core.labels[v]
    marked = pos[core.marked] if core.marked is not None else -1
    return (len(verts), pos[core.root], marked, tuple(labels), tuple(sorted(es)))


def _search(core, verts, ends, colors, edges, best):
    colors = _refine(verts, ends, colors)
    cells = {}
    for v in verts:
        cells.setdefault(colors[v], []).append(v)
    target = None
    for c in sorted(cells):
        if len(cells[c]) > 1 and (target is None or len(cells[c]) < len(target)):
            target = cells[c]
    if target is None:
        cert = _certificate(core, verts, ends, colors, edges)
        return cert if best is None or cert < best else best
    tried = []
    for v in sorted(target):
        if any(_twins(u, v, ends, colors) for u in tried):
            continue
        tried.append(v)
        indiv = {x: (colors[x], 0 if x == v else 1) for x in verts}
        ranks = _rank([indiv[x] for x in verts])
        child = dict(zip(verts, ranks))
        best = _search(core, verts, ends, child, edges, best)
    return best


def certificate(ball: RootedGraph, marked: Optional[int] = None):
    core = _Core(ball, marked)
    core.strip_pendants()
    verts = [v for v in range(core.n) if core.alive[v]]
    ends = {v: [(et, w, i) for et, w, i in core.ends[v] if core.alive[w]] for v in verts}
    edges = []
    for i, (s, t, lab, ori) in enumerate(ball.edges):
        if core.alive[s] and core.alive[t]:
            et = next(e[0] for e in ends[s] if e[2] == i and (e[0][1] != _IN))
            edges.append((s, t, et))
    init_keys = []
    for v in verts:
        init_keys.append((0 if v == core.root else 1, 0 if v == marked else 1, core.labels[v]))
    colors = dict(zip(verts, _rank(init_keys)))
    return _search(core, verts, ends, colors, edges, None)


@lru_cache(maxsize=1 << 17)
def _cached_code(ball: RootedGraph, marked: Optional[int]) -> bytes:
    out = bytearray()
    _encode(certificate(ball, marked), out)
    return bytes(out)


def canonical_code(
    ball: RootedGraph,
    radius: Optional[float] = None,
    marked: Optional[int] = None,
    max_vertices: int = MAX_CODE_VERTICES,
) -> BallCode:
    """Code identifying ``ball`` up to root- and label-preserving isomorphism.

    ``marked`` optionally distinguishes a second vertex (used for doubly
    rooted balls). ``radius`` is carried on the result only.
    """
    if ball.vertex_count > max_vertices:
        raise CapacityError(
            f"ball has {ball.vertex_count} vertices, code capacity is {max_vertices}"
        )
    if marked is not None and not 0 <= marked < ball.vertex_count:
        raise DomainError("marked vertex out of range")
    if radius is None:
        radius = _root_eccentricity(ball)
    return BallCode(radius, _cached_code(ball, marked))


def _root_eccentricity(ball: RootedGraph) -> float:
    from .rooted_graphs import distances_from

    return max(distances_from(ball, ball.root).values())


# ----------------------------------------------------------------- decoding


def decode_code(code) -> tuple:
    """Rebuild ``(graph, marked)`` from a code (bytes, hex string or BallCode).

    The graph is isomorphic to the coded ball; vertex ids follow the canonical
    order with pendant trees appended.
    """
    if isinstance(code, BallCode):
        code = code.code
    if isinstance(code, str):
        code = bytes.fromhex(code)
    cert, _ = _decode(code, 0)
    n_core, root, marked, labels, edges = cert
    out_edges, weights = [], []
    count = [n_core]

    def add(s, t, lab, direction, w):
        if direction in (_UND, _LOOP_UND):
            out_edges.append((s, t, lab, False))
        elif direction == _IN:
            out_edges.append((t, s, lab, True))
        else:
            out_edges.append((s, t, lab, True))
        weights.append(w * WEIGHT_GRID)

    def grow(parent, label):
        for (lab, direction, w), child_label in label:
            child = count[0]
            count[0] += 1
            add(parent, child, lab, direction, w)
            grow(child, child_label)

    for ps, pt, lab, direction, w in edges:
        add(ps, pt, lab, direction, w)
    for v, label in enumerate(labels):
        grow(v, label)
    g = RootedGraph(count[0], tuple(out_edges), root, tuple(weights))
    return g, (marked if marked >= 0 else None)
