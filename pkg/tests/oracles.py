"""Brute-force reference implementations shared by the tests."""
import itertools
from collections import deque

import numpy as np

from irslab.rooted_graphs import RootedGraph


def bfs_distances(g: RootedGraph, v: int) -> dict:
    adj = {u: set() for u in range(g.vertex_count)}
    for s, t, _, _ in g.edges:
        adj[s].add(t)
        adj[t].add(s)
    dist = {v: 0}
    q = deque([v])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def ball_is_tree(g: RootedGraph, v: int, r: int) -> bool:
    dist = bfs_distances(g, v)
    inside = {u for u, d in dist.items() if d <= r}
    edges = [e for e in g.edges if e[0] in inside and e[1] in inside]
    return len(edges) == len(inside) - 1 and all(e[0] != e[1] for e in edges)


def isomorphic(g: RootedGraph, h: RootedGraph, marked_g=None, marked_h=None) -> bool:
    """Root- (and mark-) preserving labelled isomorphism by permutation search."""
    if g.vertex_count != h.vertex_count or g.edge_count != h.edge_count:
        return False

    def multiset(graph, perm):
        out = []
        for i, (s, t, lab, ori) in enumerate(graph.edges):
            a, b = perm[s], perm[t]
            if not ori and a > b:
                a, b = b, a
            out.append((a, b, lab, ori, round(graph.weight(i), 6)))
        return sorted(out)

    target = multiset(h, list(range(h.vertex_count)))
    for perm in itertools.permutations(range(g.vertex_count)):
        if perm[g.root] != h.root:
            continue
        if marked_g is not None and perm[marked_g] != marked_h:
            continue
        if multiset(g, perm) == target:
            return True
    return False


def cheeger_brute(g: RootedGraph):
    from fractions import Fraction

    n = g.vertex_count
    best = None
    for k in range(1, n // 2 + 1):
        for s in itertools.combinations(range(n), k):
            s = set(s)
            cut = sum(1 for a, b, _, _ in g.edges if (a in s) != (b in s))
            val = Fraction(cut, k)
            if best is None or val < best:
                best = val
    return best


def random_multigraph(rng: np.random.Generator, n: int, m: int, labels: int = 2, oriented=False):
    edges = set()
    for _ in range(m):
        s, t = int(rng.integers(n)), int(rng.integers(n))
        ori = bool(rng.integers(2)) if oriented else False
        if not ori and s > t:
            s, t = t, s
        edges.add((s, t, int(rng.integers(labels)), ori))
    return RootedGraph(n, tuple(sorted(edges)), int(rng.integers(n)))


# ---------------------------------------------------------------- Chabauty


def brute_lattice_points(basis, r, span=None):
    """Integer combinations with norm <= r, searched over a box sized by the least singular value."""
    basis = np.asarray(basis, dtype=float)
    if span is None:
        span = int(np.ceil(r / np.linalg.svd(basis, compute_uv=False).min())) + 1
    axes = [np.arange(-span, span + 1)] * basis.shape[0]
    coef = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, basis.shape[0])
    pts = coef @ basis
    pts = pts[np.einsum("ij,ij->i", pts, pts) <= r * r + 1e-12]
    return sorted(tuple(p) for p in np.round(pts, 9))


def exact_rho_1d_lattices(alpha, beta, r_end):
    """Piecewise-constant integration of Hd(aZ ∩ B_r, bZ ∩ B_r) e^{-r} over [0, r_end].

    A lattice of step 0 stands for the trivial group.
    """
    events = {0.0, r_end}
    for step in (alpha, beta):
        if step > 0:
            events.update(k * step for k in range(1, int(r_end / step) + 1))
    events = sorted(e for e in events if e <= r_end)

    def points(step, r):
        if step == 0:
            return np.zeros(1)
        k = int(np.floor(r / step + 1e-12))
        return step * np.arange(-k, k + 1)

    total = 0.0
    for lo, hi in zip(events[:-1], events[1:]):
        mid = 0.5 * (lo + hi)
        a, b = points(alpha, mid), points(beta, mid)
        d = np.abs(a[:, None] - b[None, :])
        f = max(d.min(axis=1).max(), d.min(axis=0).max())
        total += f * (np.exp(-lo) - np.exp(-hi))
    return total


def random_subgroup_r2(rng):
    """Trivial, rank-1 or rank-2 lattice, a line, a line plus a lattice, or the plane."""
    from irslab.chabauty_rn import ClosedSubgroupRn

    def vec(lo=0.6, hi=2.0):
        ang = rng.uniform(0, 2 * np.pi)
        return tuple(rng.uniform(lo, hi) * np.array([np.cos(ang), np.sin(ang)]))

    kind = int(rng.integers(6))
    if kind == 0:
        return ClosedSubgroupRn(2)
    if kind == 1:
        return ClosedSubgroupRn(2, (), (vec(),))
    if kind == 2:
        while True:
            u, v = vec(), vec()
            if abs(u[0] * v[1] - u[1] * v[0]) > 0.3:
                return ClosedSubgroupRn(2, (), (u, v))
    if kind == 3:
        return ClosedSubgroupRn(2, (vec(1, 1),), ())
    if kind == 4:
        while True:
            u, v = vec(1, 1), vec()
            if abs(u[0] * v[1] - u[1] * v[0]) > 0.3:
                return ClosedSubgroupRn(2, (u,), (v,))
    return ClosedSubgroupRn.whole(2)


def rebased(h, rng):
    """Same subgroup with a random unimodular change of lattice basis."""
    from irslab.chabauty_rn import ClosedSubgroupRn

    lat = np.array(h.lattice_basis).reshape(-1, h.ambient_dim)
    if lat.shape[0] == 2:
        m = np.array([[1, int(rng.integers(-2, 3))], [0, 1]]) @ np.array([[1, 0], [int(rng.integers(-2, 3)), 1]])
        lat = m @ lat
    elif lat.shape[0] == 1:
        lat = -lat
    sub = np.array(h.subspace_basis).reshape(-1, h.ambient_dim) * 2.5
    if sub.shape[0] and lat.shape[0]:
        lat = lat + 0.7 * sub[0]
    return ClosedSubgroupRn(h.ambient_dim, tuple(map(tuple, sub)), tuple(map(tuple, lat)))


# -------------------------------------------------------------- free groups


def free_reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def subgroup_ball(generators, length, cap):
    """Reduced words of length <= ``length`` reachable as products of generators
    and inverses whose partial products all have length <= ``cap``."""
    letters = []
    for g in generators:
        g = free_reduce(g)
        if g:
            letters += [g, tuple(-x for x in reversed(g))]
    seen = {()}
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            for g in letters:
                v = free_reduce(w + g)
                if len(v) <= cap and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return {w for w in seen if len(w) <= length}


def all_reduced_words(rank, max_len):
    letters = [x for g in range(1, rank + 1) for x in (g, -g)]
    out = [()]
    layer = [()]
    for _ in range(max_len):
        layer = [w + (x,) for w in layer for x in letters if not w or w[-1] != -x]
        out += layer
    return out


def random_word(rng, rank, max_len):
    while True:
        n = int(rng.integers(1, max_len + 1))
        w = free_reduce(int(rng.choice([1, -1])) * int(rng.integers(1, rank + 1)) for _ in range(n))
        if w:
            return w


def subgroup_ball_deepening(generators, rank, length, start=10, limit=20):
    """Raise the partial-product cap until the length ball is full or stops growing."""
    full = sum(1 for _ in all_reduced_words(rank, length)) if rank <= 3 else None
    prev = None
    cap = start
    while cap <= limit:
        ball = subgroup_ball(generators, length, cap)
        if len(ball) == full or ball == prev:
            return ball
        prev, cap = ball, cap + 2
    return prev


# ---------------------------------------------------------------------- GH


def gh_brute(x, y, fixed=None):
    from irslab.gh_metric import distortion

    best = np.inf
    for f in itertools.product(range(y.size), repeat=x.size):
        if fixed and f[fixed[0]] != fixed[1]:
            continue
        for g in itertools.product(range(x.size), repeat=y.size):
            if fixed and g[fixed[1]] != fixed[0]:
                continue
            pairs = [(i, f[i]) for i in range(x.size)] + [(g[j], j) for j in range(y.size)]
            best = min(best, distortion(x, y, pairs))
    return best / 2


# ------------------------------------------------------------------ systole


def girth_brute(g, v, r):
    """Shortest cycle in the induced r-ball: min over edges of weight + detour avoiding it."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    from irslab.rooted_graphs import extract_ball

    ball = extract_ball(g, v, r)
    n = ball.vertex_count
    best = np.inf
    for i, (s, t, _, _) in enumerate(ball.edges):
        w = ball.weight(i)
        if s == t:
            best = min(best, w)
            continue
        rows, cols, vals = [], [], []
        for j, (a, b, _, _) in enumerate(ball.edges):
            if j == i or a == b:
                continue
            rows += [a, b]
            cols += [b, a]
            vals += [ball.weight(j)] * 2
        if not rows:
            continue
        # keep the lightest parallel edge per ordered pair
        m = {}
        for a, b, wv in zip(rows, cols, vals):
            m[(a, b)] = min(m.get((a, b), np.inf), wv)
        keys = list(m)
        mat = csr_matrix(([m[k] for k in keys], ([k[0] for k in keys], [k[1] for k in keys])), shape=(n, n))
        d = dijkstra(mat, indices=s)[t]
        best = min(best, w + d)
    return best
