"""Hot numeric kernels.

Every kernel exists in two forms: a numba-compiled one (``*_nb``) and a
fallback that needs only numpy/scipy (``*_np``). The unsuffixed name is bound to
whichever path :mod:`irslab._accel` selected. Kernels with no vectorised
formulation use the same source for both forms, so the fallback runs that
source in the interpreter.
"""
import heapq

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from ._accel import NUMBA_ENABLED, njit

__all__ = [
    "directed_hausdorff_sorted_1d",
    "prefix_directed_table",
    "cheeger_exhaustive",
    "tree_ball_flags",
    "ball_girths",
    "correspondence_bnb",
]


# ---------------------------------------------------------------- Hausdorff


def _directed_hausdorff_sorted_1d_py(x, y):
    # x, y sorted ascending, both non-empty
    ny = y.shape[0]
    j = 0
    best = 0.0
    for i in range(x.shape[0]):
        xi = x[i]
        while j + 1 < ny and y[j + 1] <= xi:
            j += 1
        d = abs(xi - y[j])
        if j + 1 < ny:
            d2 = abs(y[j + 1] - xi)
            if d2 < d:
                d = d2
        if d > best:
            best = d
    return best


def _directed_hausdorff_sorted_1d_np(x, y):
    idx = np.searchsorted(y, x)
    right = np.minimum(idx, y.shape[0] - 1)
    left = np.maximum(idx - 1, 0)
    d = np.minimum(np.abs(y[right] - x), np.abs(x - y[left]))
    return float(d.max())


directed_hausdorff_sorted_1d_nb = njit(_directed_hausdorff_sorted_1d_py)


def _prefix_directed_table_py(a, b, rows, cols):
    # T[p, q] = max_{i < rows[p]} min_{j < cols[q]} |a_i - b_j|
    # rows, cols: strictly increasing positive prefix lengths.
    nr = rows.shape[0]
    nc = cols.shape[0]
    dim = a.shape[1]
    out = np.zeros((nr, nc))
    colmax = np.zeros(nc)
    p = 0
    n_a = rows[nr - 1]
    n_b = cols[nc - 1]
    for i in range(n_a):
        run = np.inf
        q = 0
        for j in range(n_b):
            s = 0.0
            for t in range(dim):
                diff = a[i, t] - b[j, t]
                s += diff * diff
            if s < run:
                run = s
            while q < nc and cols[q] == j + 1:
                if run > colmax[q]:
                    colmax[q] = run
                q += 1
        while p < nr and rows[p] == i + 1:
            for q2 in range(nc):
                out[p, q2] = np.sqrt(colmax[q2])
            p += 1
    return out


def _prefix_directed_table_np(a, b, rows, cols, chunk=512):
    rows = np.asarray(rows)
    cols = np.asarray(cols)
    n_a = int(rows[-1])
    bb = b[: int(cols[-1])]
    out = np.zeros((rows.size, cols.size))
    carried = np.zeros(cols.size)
    for start in range(0, n_a, chunk):
        stop = min(start + chunk, n_a)
        diff = a[start:stop, None, :] - bb[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        prefmin = np.minimum.accumulate(d2, axis=1)[:, cols - 1]
        runmax = np.maximum(np.maximum.accumulate(prefmin, axis=0), carried)
        sel = (rows > start) & (rows <= stop)
        if sel.any():
            out[sel] = runmax[rows[sel] - start - 1]
        carried = runmax[-1]
    return np.sqrt(out)


prefix_directed_table_nb = njit(_prefix_directed_table_py)


# ------------------------------------------------------------------ Cheeger


def _cheeger_exhaustive_py(adj):
    # adj: (n, n) int64 multiplicities, zero diagonal
    n = adj.shape[0]
    half = n // 2
    deg = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for v in range(n):
            deg[u] += adj[u, v]
    inset = np.zeros(n, dtype=np.int64)
    size = 0
    cut = 0
    best_num = -1
    best_den = 1
    best_mask = 0
    mask = 0
    total = 1 << n
    for i in range(1, total):
        b = 0
        while not (i >> b) & 1:
            b += 1
        inner = 0
        for w in range(n):
            if inset[w] == 1:
                inner += adj[b, w]
        if inset[b] == 0:
            inset[b] = 1
            size += 1
            cut += deg[b] - 2 * inner
        else:
            inset[b] = 0
            size -= 1
            cut -= deg[b] - 2 * inner
        mask ^= 1 << b
        if size == 0 or size > half:
            continue
        if best_num < 0 or cut * best_den < best_num * size:
            best_num = cut
            best_den = size
            best_mask = mask
    return best_num, best_den, best_mask


def _cheeger_exhaustive_np(adj, chunk=1 << 16):
    n = adj.shape[0]
    half = n // 2
    iu, ju = np.nonzero(np.triu(adj, 1))
    mult = adj[iu, ju].astype(np.int64)
    best = None
    for start in range(1, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = (masks[:, None] >> np.arange(n)) & 1
        size = bits.sum(axis=1)
        cut = ((bits[:, iu] ^ bits[:, ju]) * mult).sum(axis=1)
        ok = size <= half
        if not ok.any():
            continue
        ratio = np.where(ok, cut / np.maximum(size, 1), np.inf)
        k = int(np.argmin(ratio))
        cand = (int(cut[k]), int(size[k]), int(masks[k]))
        if best is None or cand[0] * best[1] < best[0] * cand[1]:
            best = cand
    return best


cheeger_exhaustive_nb = njit(_cheeger_exhaustive_py)


# --------------------------------------------------------------- ball shape


def _tree_ball_flags_py(indptr, nbr, r):
    # unit-length edges; loops appear twice in nbr, parallel edges repeat.
    n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.bool_)
    stamp = np.full(n, -1, dtype=np.int64)
    depth = np.zeros(n, dtype=np.int64)
    queue = np.zeros(n, dtype=np.int64)
    for v in range(n):
        head = 0
        tail = 1
        queue[0] = v
        stamp[v] = v
        depth[v] = 0
        while head < tail:
            u = queue[head]
            head += 1
            if depth[u] == r:
                continue
            for e in range(indptr[u], indptr[u + 1]):
                w = nbr[e]
                if stamp[w] != v:
                    stamp[w] = v
                    depth[w] = depth[u] + 1
                    queue[tail] = w
                    tail += 1
        entries = 0
        for k in range(tail):
            u = queue[k]
            for e in range(indptr[u], indptr[u + 1]):
                if stamp[nbr[e]] == v:
                    entries += 1
        out[v] = entries == 2 * (tail - 1)
    return out


def _tree_ball_flags_np(indptr, nbr, r):
    n = indptr.shape[0] - 1
    adj = sparse.csr_matrix(
        (np.ones(nbr.shape[0]), nbr, indptr), shape=(n, n)
    )
    step = (adj + sparse.identity(n, format="csr")).astype(bool).astype(np.int64)
    reach = sparse.identity(n, format="csr", dtype=np.int64)
    for _ in range(int(r)):
        reach = (reach @ step).astype(bool).astype(np.int64)
    sizes = np.asarray(reach.sum(axis=1)).ravel()
    entries = np.asarray((reach @ adj).multiply(reach).sum(axis=1)).ravel()
    return entries == 2 * (sizes - 1)


tree_ball_flags_nb = njit(_tree_ball_flags_py)


def _ball_girths_py(indptr, nbr, wt, eid, centers, r, tol):
    # Shortest cycle inside the closed weighted r-ball of each centre.
    # Adjacency entries: loops once, other edges once per direction.
    n = indptr.shape[0] - 1
    out = np.full(centers.shape[0], np.inf)
    stamp = np.full(n, -1, dtype=np.int64)
    dist = np.full(n, np.inf)
    sdist = np.full(n, np.inf)
    sstamp = np.full(n, -1, dtype=np.int64)
    pedge = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    members = np.zeros(n, dtype=np.int64)
    src_tag = 0
    for ci in range(centers.shape[0]):
        c = centers[ci]
        # bounded Dijkstra for ball membership
        cnt = 0
        dist[c] = 0.0
        stamp[c] = ci
        heap = [(0.0, c)]
        while len(heap) > 0:
            d, u = heapq.heappop(heap)
            if d > dist[u] or done[u]:
                continue
            done[u] = True
            members[cnt] = u
            cnt += 1
            for e in range(indptr[u], indptr[u + 1]):
                w = nbr[e]
                nd = d + wt[e]
                if nd <= r + tol and (stamp[w] != ci or nd < dist[w]):
                    stamp[w] = ci
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        for k in range(cnt):
            done[members[k]] = False
        best = np.inf
        for k in range(cnt):
            s = members[k]
            src_tag += 1
            sdist[s] = 0.0
            sstamp[s] = src_tag
            pedge[s] = -1
            heap2 = [(0.0, s)]
            while len(heap2) > 0:
                d, u = heapq.heappop(heap2)
                if d > sdist[u] or done[u]:
                    continue
                if d >= best:
                    break
                done[u] = True
                for e in range(indptr[u], indptr[u + 1]):
                    w = nbr[e]
                    if stamp[w] != ci or not (dist[w] <= r + tol):
                        continue
                    nd = d + wt[e]
                    if sstamp[w] != src_tag or nd < sdist[w]:
                        if not done[w]:
                            sstamp[w] = src_tag
                            sdist[w] = nd
                            pedge[w] = eid[e]
                            heapq.heappush(heap2, (nd, w))
            # candidates from non-tree edges between settled vertices
            for k2 in range(cnt):
                u = members[k2]
                if not done[u]:
                    continue
                for e in range(indptr[u], indptr[u + 1]):
                    w = nbr[e]
                    if w < u or stamp[w] != ci or not done[w]:
                        continue
                    if w == u:
                        cand = 2.0 * sdist[u] + wt[e]
                    else:
                        if eid[e] == pedge[u] or eid[e] == pedge[w]:
                            continue
                        cand = sdist[u] + sdist[w] + wt[e]
                    if cand < best:
                        best = cand
            for k2 in range(cnt):
                done[members[k2]] = False
        out[ci] = best
    return out


def _ball_girths_np(indptr, nbr, wt, eid, centers, r, tol):
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    _, first = np.unique(eid, return_index=True)
    eu, ev, ew = rows[first], nbr[first], wt[first]
    loop = eu == ev
    lo = np.minimum(eu, ev)[~loop]
    hi = np.maximum(eu, ev)[~loop]
    w = ew[~loop]
    order = np.lexsort((w, lo * n + hi))
    lo, hi, w = lo[order], hi[order], w[order]
    key = lo * n + hi
    head = np.ones(key.size, dtype=bool)
    head[1:] = key[1:] != key[:-1]
    # a pair of parallel edges is itself a cycle: lightest two per pair
    second = np.flatnonzero(~head & np.r_[False, head[:-1]])
    par_lo, par_hi = lo[second], hi[second]
    par_len = w[second - 1] + w[second]
    gmat = sparse.coo_matrix(
        (np.r_[w[head], w[head]], (np.r_[lo[head], hi[head]], np.r_[hi[head], lo[head]])),
        shape=(n, n),
    ).tocsr()
    dc = csgraph.dijkstra(gmat, indices=np.asarray(centers), limit=r + tol)
    dc = np.atleast_2d(dc)
    out = np.full(len(centers), np.inf)
    for ci in range(len(centers)):
        inb = dc[ci] <= r + tol
        best = np.inf
        lsel = loop & inb[eu]
        if lsel.any():
            best = min(best, float(ew[lsel].min()))
        psel = inb[par_lo] & inb[par_hi]
        if psel.any():
            best = min(best, float(par_len[psel].min()))
        ball = np.flatnonzero(inb)
        sub = gmat[ball][:, ball]
        tri = sparse.triu(sub, 1).tocoo()
        if tri.nnz:
            d, pred = csgraph.dijkstra(sub, return_predecessors=True)
            a, b = tri.row, tri.col
            cand = d[:, a] + d[:, b] + tri.data
            cand[(pred[:, b] == a) | (pred[:, a] == b)] = np.inf
            best = min(best, float(cand.min()))
        out[ci] = best
    return out


ball_girths_nb = njit(_ball_girths_py)


# ------------------------------------------------------- GH correspondences


def _correspondence_bnb_py(dx, dy, fixed_a, fixed_b, var_side, var_pt, cand, ub):
    # Minimise the distortion of fixed pairs plus one pair per free variable.
    # var_side[k] == 0: free x = var_pt[k], choose a partner y from cand[k].
    # var_side[k] == 1: free y = var_pt[k], choose a partner x from cand[k].
    nf = fixed_a.shape[0]
    nv = var_side.shape[0]
    npairs = nf + nv
    pa = np.zeros(npairs, dtype=np.int64)
    pb = np.zeros(npairs, dtype=np.int64)
    cur = 0.0
    for i in range(nf):
        pa[i] = fixed_a[i]
        pb[i] = fixed_b[i]
        for j in range(i):
            d = abs(dx[pa[i], pa[j]] - dy[pb[i], pb[j]])
            if d > cur:
                cur = d
    best = ub
    if nv == 0:
        return min(cur, best)
    if cur >= best:
        return best
    level_max = np.zeros(nv + 1)
    level_max[0] = cur
    choice = np.full(nv, -1, dtype=np.int64)
    ncand = cand.shape[1]
    lvl = 0
    while lvl >= 0:
        choice[lvl] += 1
        if choice[lvl] >= ncand or cand[lvl, choice[lvl]] < 0:
            choice[lvl] = -1
            lvl -= 1
            continue
        c = cand[lvl, choice[lvl]]
        if var_side[lvl] == 0:
            a = var_pt[lvl]
            b = c
        else:
            a = c
            b = var_pt[lvl]
        m = level_max[lvl]
        pos = nf + lvl
        for j in range(pos):
            d = abs(dx[a, pa[j]] - dy[b, pb[j]])
            if d > m:
                m = d
                if m >= best:
                    break
        if m >= best:
            continue
        pa[pos] = a
        pb[pos] = b
        if lvl == nv - 1:
            best = m
            continue
        level_max[lvl + 1] = m
        lvl += 1
    return best


correspondence_bnb_nb = njit(_correspondence_bnb_py)


# ------------------------------------------------------------ dispatch table

if NUMBA_ENABLED:
    directed_hausdorff_sorted_1d = directed_hausdorff_sorted_1d_nb
    prefix_directed_table = prefix_directed_table_nb
    cheeger_exhaustive = cheeger_exhaustive_nb
    tree_ball_flags = tree_ball_flags_nb
    ball_girths = ball_girths_nb
    correspondence_bnb = correspondence_bnb_nb
else:
    directed_hausdorff_sorted_1d = _directed_hausdorff_sorted_1d_np
    prefix_directed_table = _prefix_directed_table_np
    cheeger_exhaustive = _cheeger_exhaustive_np
    tree_ball_flags = _tree_ball_flags_np
    ball_girths = _ball_girths_np
    correspondence_bnb = _correspondence_bnb_py

IMPLEMENTATIONS = {
    "directed_hausdorff_sorted_1d": (
        directed_hausdorff_sorted_1d_nb,
        _directed_hausdorff_sorted_1d_np,
    ),
    "prefix_directed_table": (prefix_directed_table_nb, _prefix_directed_table_np),
    "cheeger_exhaustive": (cheeger_exhaustive_nb, _cheeger_exhaustive_np),
    "tree_ball_flags": (tree_ball_flags_nb, _tree_ball_flags_np),
    "ball_girths": (ball_girths_nb, _ball_girths_np),
    "correspondence_bnb": (correspondence_bnb_nb, _correspondence_bnb_py),
}
