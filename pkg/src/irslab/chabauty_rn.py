"""Closed subgroups of R^n and the Chabauty metric between them.

A closed subgroup is stored as ``V + L`` with ``V`` a linear subspace and ``L``
a lattice in the orthogonal complement of ``V``. The metric is

    rho(H1, H2) = int_0^inf Hd(H1 ∩ B_r, H2 ∩ B_r) e^{-r} dr

with ``Hd`` the Euclidean Hausdorff distance and ``B_r`` the closed ball around
the origin.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import CapacityError, DomainError

MAX_DIM = 4
RANK_TOL = 1e-9
POINT_BUDGET = 10**6


# ------------------------------------------------------------------ lattice


def lll_reduce(basis: np.ndarray, delta: float = 0.75) -> np.ndarray:
    """LLL reduction of the rows of ``basis`` (textbook size-reduce and swap)."""
    b = np.array(basis, dtype=float, copy=True)
    k = b.shape[0]
    if k <= 1:
        return b

    def gso(b):
        bstar = np.zeros_like(b)
        mu = np.zeros((k, k))
        for i in range(k):
            v = b[i].copy()
            for j in range(i):
                mu[i, j] = b[i] @ bstar[j] / (bstar[j] @ bstar[j])
                v -= mu[i, j] * bstar[j]
            bstar[i] = v
        return bstar, mu

    bstar, mu = gso(b)
    i = 1
    guard = 0
    while i < k:
        guard += 1
        if guard > 10_000:
            break
        for j in range(i - 1, -1, -1):
            q = round(mu[i, j])
            if q:
                b[i] -= q * b[j]
                bstar, mu = gso(b)
        lhs = bstar[i] @ bstar[i]
        rhs = (delta - mu[i, i - 1] ** 2) * (bstar[i - 1] @ bstar[i - 1])
        if lhs >= rhs:
            i += 1
        else:
            b[[i, i - 1]] = b[[i - 1, i]]
            bstar, mu = gso(b)
            i = max(i - 1, 1)
    return b


def _sign_normalise(rows: np.ndarray) -> np.ndarray:
    out = rows.copy()
    for i, v in enumerate(out):
        nz = np.flatnonzero(np.abs(v) > RANK_TOL)
        if nz.size and v[nz[0]] < 0:
            out[i] = -v
    return out


# ------------------------------------------------------------------- groups


@dataclass(frozen=True)
class ClosedSubgroupRn:
    """Closed subgroup ``span(subspace_basis) + Z-span(lattice_basis)`` of R^n."""

    ambient_dim: int
    subspace_basis: tuple = ()
    lattice_basis: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        n = self.ambient_dim
        if not 1 <= n <= MAX_DIM:
            raise DomainError(f"ambient dimension must be 1..{MAX_DIM}")
        sub = tuple(tuple(float(x) for x in v) for v in self.subspace_basis)
        lat = tuple(tuple(float(x) for x in v) for v in self.lattice_basis)
        object.__setattr__(self, "subspace_basis", sub)
        object.__setattr__(self, "lattice_basis", lat)
        rows = sub + lat
        if any(len(v) != n for v in rows):
            raise DomainError("basis vectors must have the ambient dimension")
        if any(not math.isfinite(x) for v in rows for x in v):
            raise DomainError("basis entries must be finite")
        if rows:
            m = np.array(rows)
            s = np.linalg.svd(m, compute_uv=False)
            if len(rows) > n or s[-1] <= RANK_TOL * max(1.0, s[0]):
                raise DomainError("subspace and lattice bases must be jointly independent")

    # -- constructors --------------------------------------------------------

    @classmethod
    def trivial(cls, n: int) -> "ClosedSubgroupRn":
        return cls(n)

    @classmethod
    def whole(cls, n: int) -> "ClosedSubgroupRn":
        return cls(n, tuple(tuple(row) for row in np.eye(n)))

    @classmethod
    def scaled_integers(cls, alpha: float) -> "ClosedSubgroupRn":
        if not alpha > 0:
            raise DomainError("alpha must be positive")
        return cls(1, (), ((alpha,),))

    # -- canonical form ------------------------------------------------------

    @property
    def subspace_dim(self) -> int:
        return len(self.subspace_basis)

    @property
    def lattice_rank(self) -> int:
        return len(self.lattice_basis)

    def canonical(self):
        """``(orthonormal subspace basis, reduced lattice basis off the subspace)``."""
        hit = self._cache.get("canon")
        if hit is not None:
            return hit
        n = self.ambient_dim
        if self.subspace_basis:
            u, _, _ = np.linalg.svd(np.array(self.subspace_basis).T, full_matrices=False)
            onb = u[:, : self.subspace_dim].T
            proj = onb.T @ onb
        else:
            onb = np.zeros((0, n))
            proj = np.zeros((n, n))
        lat = np.array(self.lattice_basis, dtype=float).reshape(-1, n)
        lat = lat - lat @ proj
        if lat.shape[0]:
            lat = _sign_normalise(lll_reduce(lat))
            lat = lat[np.lexsort(np.round(lat.T[::-1], 9))]
            lat = lat[np.argsort(np.round(np.linalg.norm(lat, axis=1), 9), kind="stable")]
        out = (onb, lat, proj)
        self._cache["canon"] = out
        return out

    def contains(self, x: Sequence[float], tol: float = 1e-7) -> bool:
        onb, lat, proj = self.canonical()
        x = np.asarray(x, dtype=float)
        y = x - proj @ x
        if lat.shape[0] == 0:
            return bool(np.linalg.norm(y) <= tol)
        coef, *_ = np.linalg.lstsq(lat.T, y, rcond=None)
        rnd = np.round(coef)
        return bool(np.linalg.norm(lat.T @ rnd - y) <= tol)

    def to_dict(self) -> dict:
        return {
            "dim": self.ambient_dim,
            "subspace": [list(v) for v in self.subspace_basis],
            "lattice": [list(v) for v in self.lattice_basis],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedSubgroupRn":
        try:
            return cls(int(data["dim"]), tuple(data.get("subspace", [])), tuple(data.get("lattice", [])))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed subgroup document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ClosedSubgroupRn":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc


def same_subgroup(h1: ClosedSubgroupRn, h2: ClosedSubgroupRn, tol: float = 1e-7) -> bool:
    """Equality of represented sets (equal canonical forms up to basis change)."""
    if h1.ambient_dim != h2.ambient_dim:
        return False
    if (h1.subspace_dim, h1.lattice_rank) != (h2.subspace_dim, h2.lattice_rank):
        return False
    _, lat1, p1 = h1.canonical()
    _, lat2, p2 = h2.canonical()
    if np.abs(p1 - p2).max(initial=0.0) > tol:
        return False
    return all(h2.contains(v, tol) for v in lat1) and all(h1.contains(v, tol) for v in lat2)


# -------------------------------------------------------------- enumeration


def _lattice_points(lat: np.ndarray, r: float, budget: int) -> np.ndarray:
    """All integer combinations of the rows of ``lat`` with norm at most ``r``."""
    n = lat.shape[1] if lat.ndim == 2 else 0
    k = lat.shape[0]
    if k == 0:
        return np.zeros((1, n))
    # |m_i| <= r * |row i of the dual basis|
    dual = np.linalg.pinv(lat).T
    bounds = np.floor(r * np.linalg.norm(dual, axis=1) + 1e-9).astype(np.int64)
    box = int(np.prod(2 * bounds + 1, dtype=float))
    if box > 8 * budget:
        raise CapacityError(f"enumeration box of {box} points exceeds the point budget")
    axes = [np.arange(-b, b + 1) for b in bounds]
    coeffs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    pts = coeffs @ lat
    keep = np.einsum("ij,ij->i", pts, pts) <= r * r * (1 + 1e-12)
    pts = pts[keep]
    if pts.shape[0] > budget:
        raise CapacityError(f"{pts.shape[0]} lattice points exceed the point budget {budget}")
    return pts


def enumerate_in_ball(
    h: ClosedSubgroupRn, r: float, net_step: float, budget: int = POINT_BUDGET
) -> np.ndarray:
    """Points of ``h`` in the closed ``r``-ball, as an ``(m, n)`` array sorted by norm.

    Lattice parts are enumerated exactly. A subspace part is replaced by a grid
    of spacing ``net_step / sqrt(k)`` centred at the foot of each coset, which
    covers every slice of the ball within ``net_step``. The grid does not
    depend on ``r``, so nets for growing radii are nested.
    """
    if not r > 0:
        raise DomainError("radius must be positive")
    if not net_step > 0:
        raise DomainError("net_step must be positive")
    onb, lat, _ = h.canonical()
    centers = _lattice_points(lat, r, budget)
    k = onb.shape[0]
    if k == 0:
        pts = centers
    else:
        h_grid = net_step / math.sqrt(k)
        chunks = []
        total = 0
        for c in centers:
            rho = math.sqrt(max(r * r - float(c @ c), 0.0))
            m = int(math.floor(rho / h_grid + 1e-9))
            count = (2 * m + 1) ** k
            total += count
            if total > 8 * budget:
                raise CapacityError("subspace net exceeds the point budget")
            axis = np.arange(-m, m + 1) * h_grid
            grid = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
            grid = grid[np.einsum("ij,ij->i", grid, grid) <= rho * rho * (1 + 1e-12)]
            chunks.append(c + grid @ onb)
        pts = np.concatenate(chunks)
        if pts.shape[0] > budget:
            raise CapacityError(f"{pts.shape[0]} net points exceed the point budget {budget}")
    norms = np.linalg.norm(pts, axis=1)
    order = np.lexsort((*pts.T[::-1], norms))
    pts = pts[order]
    pts[0] = 0.0
    return pts


def covering_radius_bound(h: ClosedSubgroupRn, net_step: float) -> float:
    return net_step if h.subspace_dim else 0.0


# ---------------------------------------------------------------- Hausdorff


def hausdorff_distance(a, b) -> float:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("Hausdorff distance of an empty set")
    if a.shape[1] == 1:
        x, y = np.sort(a[:, 0]), np.sort(b[:, 0])
        return max(
            kernels.directed_hausdorff_sorted_1d(x, y), kernels.directed_hausdorff_sorted_1d(y, x)
        )
    rows_a = np.array([a.shape[0]], dtype=np.int64)
    rows_b = np.array([b.shape[0]], dtype=np.int64)
    ab = kernels.prefix_directed_table(a, b, rows_a, rows_b)[0, 0]
    ba = kernels.prefix_directed_table(b, a, rows_b, rows_a)[0, 0]
    return float(max(ab, ba))


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class Quadrature:
    r_cut: float = 12.0
    step: float = 1.0 / 64
    net_step: float = 0.25

    def __post_init__(self):
        if not (self.r_cut > 0 and self.step > 0 and self.net_step > 0):
            raise DomainError("r_cut, step and net_step must be positive")


@dataclass(frozen=True)
class ChabautyDistance:
    value: float
    error_bound: float
    quadrature_error: float = 0.0
    net_error: float = 0.0
    tail: float = 0.0

    def __iter__(self):
        yield self.value
        yield self.error_bound


class _Directed1D:
    """Directed distances between norm-prefixes of two point sets on the line."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a, self.b = a[:, 0], b[:, 0]
        self.sa, self.sb = np.sort(self.a), np.sort(self.b)
        self.memo = {}

    def _slice(self, sorted_vals, full, count):
        # the first ``count`` points by norm form a contiguous block of the sorted array
        radius = np.abs(full[count - 1])
        lo = np.searchsorted(sorted_vals, -radius, side="left")
        hi = np.searchsorted(sorted_vals, radius, side="right")
        return sorted_vals[lo:hi]

    def ab(self, p: int, q: int) -> float:
        key = (0, p, q)
        if key not in self.memo:
            x = self._slice(self.sa, self.a, p)
            y = self._slice(self.sb, self.b, q)
            self.memo[key] = kernels.directed_hausdorff_sorted_1d(x, y)
        return self.memo[key]

    def ba(self, q: int, p: int) -> float:
        key = (1, q, p)
        if key not in self.memo:
            y = self._slice(self.sb, self.b, q)
            x = self._slice(self.sa, self.a, p)
            self.memo[key] = kernels.directed_hausdorff_sorted_1d(y, x)
        return self.memo[key]


class _DirectedTable:
    def __init__(self, a, b, counts_a, counts_b):
        self.rows_a, self.inv_a = np.unique(counts_a, return_inverse=True)
        self.rows_b, self.inv_b = np.unique(counts_b, return_inverse=True)
        self.t_ab = kernels.prefix_directed_table(a, b, self.rows_a, self.rows_b)
        self.t_ba = kernels.prefix_directed_table(b, a, self.rows_b, self.rows_a)
        self.pos_a = {int(c): i for i, c in enumerate(self.rows_a)}
        self.pos_b = {int(c): i for i, c in enumerate(self.rows_b)}

    def ab(self, p, q):
        return float(self.t_ab[self.pos_a[p], self.pos_b[q]])

    def ba(self, q, p):
        return float(self.t_ba[self.pos_b[q], self.pos_a[p]])


def chabauty_distance(
    h1: ClosedSubgroupRn, h2: ClosedSubgroupRn, quad: Optional[Quadrature] = None, **kw
) -> ChabautyDistance:
    """Composite-midpoint estimate of ``rho(h1, h2)`` with a rigorous error bound.

    On each cell ``[a, b]`` the integrand is bracketed using nested balls:
    ``Hd(A_r, B_r)`` lies between ``max(d(A_a -> B_b), d(B_a -> A_b))`` and
    ``max(d(A_b -> B_a), d(B_b -> A_a))`` for every ``r`` in the cell, where
    ``d(X -> Y)`` is the directed distance. The error bound adds the cell
    brackets, the net covering radii and the tail ``(R + 1) e^{-R}``.
    """
    quad = quad or Quadrature(**kw)
    if h1.ambient_dim != h2.ambient_dim:
        raise DomainError("subgroups live in different dimensions")
    cells = int(math.ceil(quad.r_cut / quad.step - 1e-12))
    r_end = cells * quad.step
    tail = (r_end + 1.0) * math.exp(-r_end)
    if same_subgroup(h1, h2):
        return ChabautyDistance(0.0, tail, 0.0, 0.0, tail)
    a = enumerate_in_ball(h1, r_end, quad.net_step)
    b = enumerate_in_ball(h2, r_end, quad.net_step)
    radii = np.arange(2 * cells + 1) * (quad.step / 2)
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    ca = np.maximum(np.searchsorted(na, radii * (1 + 1e-12), side="right"), 1)
    cb = np.maximum(np.searchsorted(nb, radii * (1 + 1e-12), side="right"), 1)
    if h1.ambient_dim == 1:
        d = _Directed1D(a, b)
    else:
        d = _DirectedTable(a, b, ca, cb)
    value_terms, err_terms = [], []
    for c in range(cells):
        ia, im, ib = 2 * c, 2 * c + 1, 2 * c + 2
        lo_r, mid_r, hi_r = radii[ia], radii[im], radii[ib]
        pa, pm, pb = int(ca[ia]), int(ca[im]), int(ca[ib])
        qa, qm, qb = int(cb[ia]), int(cb[im]), int(cb[ib])
        f_mid = max(d.ab(pm, qm), d.ba(qm, pm))
        est = f_mid * math.exp(-mid_r) * quad.step
        mass = math.exp(-lo_r) - math.exp(-hi_r)
        if pa == pb and qa == qb:
            lower = upper = f_mid
        else:
            lower = max(d.ab(pa, qb), d.ba(qa, pb))
            upper = max(d.ab(pb, qa), d.ba(qb, pa))
        value_terms.append(est)
        err_terms.append(max(upper * mass - est, est - lower * mass, 0.0))
    value = math.fsum(value_terms)
    quad_err = math.fsum(err_terms)
    eta = covering_radius_bound(h1, quad.net_step) + covering_radius_bound(h2, quad.net_step)
    net_err = eta * (1.0 - math.exp(-r_end))
    return ChabautyDistance(value, quad_err + net_err + tail, quad_err, net_err, tail)
