"""Gromov-Hausdorff distances between finite pointed metric spaces.

Distances are half the least distortion of a correspondence. A minimal
correspondence can always be taken to be the union of the graph of a map
``X -> Y`` and the transposed graph of a map ``Y -> X``, so the exact search
assigns one partner to every point and runs a branch and bound over those
choices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .errors import DomainError

EXACT_CAP = 10
METRIC_TOL = 1e-9
MAX_SERIES_RADIUS = 8


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    d: np.ndarray
    basepoint: int = 0

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
            raise DomainError("distance matrix must be square and non-empty")
        if not np.all(np.isfinite(d)) or (d < 0).any():
            raise DomainError("distances must be finite and non-negative")
        if np.any(np.diag(d) != 0):
            raise DomainError("distance matrix needs a zero diagonal")
        if not np.array_equal(d, d.T):
            raise DomainError("distance matrix must be symmetric")
        # d[i, k] <= d[i, j] + d[j, k]
        if (d[:, None, :] > d[:, :, None] + d[None, :, :] + METRIC_TOL).any():
            raise DomainError("triangle inequality violated")
        if not 0 <= self.basepoint < d.shape[0]:
            raise DomainError("basepoint out of range")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def size(self) -> int:
        return self.d.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.d.max())

    @property
    def eccentricities(self) -> np.ndarray:
        return self.d.max(axis=1)

    def subspace(self, points: Sequence[int], basepoint: Optional[int] = None) -> "FiniteMetricSpace":
        pts = list(points)
        bp = pts.index(self.basepoint if basepoint is None else basepoint)
        return FiniteMetricSpace(self.d[np.ix_(pts, pts)], bp)

    def ball(self, radius: float) -> "FiniteMetricSpace":
        """Closed ball around the basepoint as a pointed metric subspace."""
        pts = np.flatnonzero(self.d[self.basepoint] <= radius + METRIC_TOL)
        return self.subspace(pts.tolist())

    def relabel(self, perm: Sequence[int]) -> "FiniteMetricSpace":
        """Copy in which new point ``i`` is old point ``perm[i]``."""
        perm = list(perm)
        return FiniteMetricSpace(self.d[np.ix_(perm, perm)], perm.index(self.basepoint))

    def to_dict(self) -> dict:
        return {"d": self.d.tolist(), "basepoint": self.basepoint}

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteMetricSpace":
        try:
            return cls(np.array(data["d"], dtype=float), int(data.get("basepoint", 0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed metric space document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "FiniteMetricSpace":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc

    @classmethod
    def two_point(cls, t: float, basepoint: int = 0) -> "FiniteMetricSpace":
        return cls(np.array([[0.0, t], [t, 0.0]]), basepoint)

    @classmethod
    def point(cls) -> "FiniteMetricSpace":
        return cls(np.zeros((1, 1)))


@dataclass(frozen=True)
class GhBounds:
    lower: float
    upper: float

    def __iter__(self):
        yield self.lower
        yield self.upper

    def contains(self, value: float, tol: float = 1e-12) -> bool:
        return self.lower - tol <= value <= self.upper + tol


# ------------------------------------------------------------------ helpers


def distortion(x: FiniteMetricSpace, y: FiniteMetricSpace, pairs) -> float:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    a, b = pairs[:, 0], pairs[:, 1]
    return float(np.abs(x.d[np.ix_(a, a)] - y.d[np.ix_(b, b)]).max(initial=0.0))


def _is_correspondence(x, y, pairs) -> bool:
    return {p for p, _ in pairs} == set(range(x.size)) and {q for _, q in pairs} == set(range(y.size))


def _greedy_pairs(x, y, fixed=()):
    ex, ey = x.eccentricities, y.eccentricities
    pairs = list(fixed)
    for i in range(x.size):
        cost = np.abs(ey - ex[i])
        if fixed:
            p, q = fixed[0]
            cost = cost + np.abs(y.d[q] - x.d[p, i])
        pairs.append((i, int(np.argmin(cost))))
    for j in range(y.size):
        cost = np.abs(ex - ey[j])
        if fixed:
            p, q = fixed[0]
            cost = cost + np.abs(x.d[p] - y.d[q, j])
        pairs.append((int(np.argmin(cost)), j))
    return sorted(set(pairs))


def _lower_bound(x, y) -> float:
    ex, ey = np.sort(x.eccentricities), np.sort(y.eccentricities)
    gap = max(
        np.abs(ex[:, None] - ey[None, :]).min(axis=1).max(),
        np.abs(ey[:, None] - ex[None, :]).min(axis=1).max(),
    )
    return 0.5 * max(abs(x.diameter - y.diameter), float(gap))


def _exact(x, y, fixed) -> float:
    if x.size + y.size > EXACT_CAP:
        raise DomainError(
            f"exact mode needs |X| + |Y| <= {EXACT_CAP}; got {x.size} + {y.size}"
        )
    ex, ey = x.eccentricities, y.eccentricities
    ub = distortion(x, y, _greedy_pairs(x, y, fixed))
    fixed_x = {p for p, _ in fixed}
    fixed_y = {q for _, q in fixed}
    # most eccentric points first: they constrain the most distances
    free = [(-ex[i], 0, i) for i in range(x.size) if i not in fixed_x]
    free += [(-ey[j], 1, j) for j in range(y.size) if j not in fixed_y]
    free.sort()
    nv = len(free)
    width = max(x.size, y.size)
    cand = np.full((nv, width), -1, dtype=np.int64)
    var_side = np.zeros(nv, dtype=np.int64)
    var_pt = np.zeros(nv, dtype=np.int64)
    for k, (_, side, pt) in enumerate(free):
        var_side[k], var_pt[k] = side, pt
        if side == 0:
            order = np.argsort(np.abs(ey - ex[pt]), kind="stable")
        else:
            order = np.argsort(np.abs(ex - ey[pt]), kind="stable")
        cand[k, : order.size] = order
    fa = np.array([p for p, _ in fixed], dtype=np.int64)
    fb = np.array([q for _, q in fixed], dtype=np.int64)
    best = kernels.correspondence_bnb(
        np.ascontiguousarray(x.d), np.ascontiguousarray(y.d), fa, fb, var_side, var_pt, cand, ub
    )
    return 0.5 * float(best)


# --------------------------------------------------------------- public API


def gh_distance(
    x: FiniteMetricSpace, y: FiniteMetricSpace, mode: str = "exact"
) -> Union[float, GhBounds]:
    """Unpointed GH distance; ``mode="bound"`` returns a cheap ``GhBounds``."""
    if mode == "exact":
        return _exact(x, y, ())
    if mode == "bound":
        upper = 0.5 * distortion(x, y, _greedy_pairs(x, y))
        return GhBounds(min(_lower_bound(x, y), upper), upper)
    raise DomainError(f"unknown mode {mode!r}")


def pointed_gh_distance(x: FiniteMetricSpace, y: FiniteMetricSpace) -> float:
    """Half the least distortion of a correspondence containing the basepoint pair.

    This differs from the infimum over embeddings of ``Hd + d(p, q)`` by at
    most a factor of 2 in either direction; it is not claimed to be equal.
    """
    return _exact(x, y, ((x.basepoint, y.basepoint),))


def pointed_gh_bounds(x: FiniteMetricSpace, y: FiniteMetricSpace) -> GhBounds:
    p, q = x.basepoint, y.basepoint
    upper = 0.5 * distortion(x, y, _greedy_pairs(x, y, ((p, q),)))
    lower = max(_lower_bound(x, y), 0.5 * abs(x.eccentricities[p] - y.eccentricities[q]))
    return GhBounds(min(lower, upper), upper)


@dataclass(frozen=True)
class GhdSeries:
    """Partial sum over ``n = 1..n_max``; ``value`` uses upper bounds for terms
    that fell back to bound mode and ``lower`` the matching lower bounds."""

    value: float
    tail_bound: float
    lower: float
    exact_terms: int
    terms: tuple

    @property
    def exact(self) -> bool:
        return self.exact_terms == len(self.terms)


def _pointed_term(x, y) -> GhBounds:
    if x.size + y.size <= EXACT_CAP:
        v = pointed_gh_distance(x, y)
        return GhBounds(v, v)
    return pointed_gh_bounds(x, y)


def _pointed_isometric(x, y) -> bool:
    return x.size == y.size and x.basepoint == y.basepoint and np.array_equal(x.d, y.d)


def ghd_series(x: FiniteMetricSpace, y: FiniteMetricSpace, n_max: int) -> GhdSeries:
    """``sum_n 2^-n Gd(B_X(n), B_Y(n))`` truncated at ``n_max``, with a tail bound."""
    if not 1 <= n_max <= MAX_SERIES_RADIUS:
        raise DomainError(f"n_max must be in 1..{MAX_SERIES_RADIUS}")
    terms = []
    for n in range(1, n_max + 1):
        bx, by = x.ball(n), y.ball(n)
        terms.append(GhBounds(0.0, 0.0) if _pointed_isometric(bx, by) else _pointed_term(bx, by))
    upper = math.fsum(2.0 ** -n * t.upper for n, t in enumerate(terms, 1))
    lower = math.fsum(2.0 ** -n * t.lower for n, t in enumerate(terms, 1))
    exact_terms = sum(t.lower == t.upper for t in terms)
    # every later ball pair has pointed distance at most this
    if _pointed_isometric(x, y):
        cap = 0.0
    elif x.eccentricities[x.basepoint] <= n_max and y.eccentricities[y.basepoint] <= n_max:
        cap = _pointed_term(x, y).upper
    else:
        cap = 0.5 * max(x.diameter, y.diameter)
    if cap > 0 and x.size + y.size <= EXACT_CAP and pointed_gh_distance(x, y) == 0.0:
        cap = 0.0
    return GhdSeries(upper, 2.0 ** -n_max * cap, lower, exact_terms, tuple(terms))


def random_metric_space(size: int, rng: np.random.Generator, scale: float = 1.0) -> FiniteMetricSpace:
    """Shortest-path metric of a random complete weighted graph."""
    from scipy.sparse.csgraph import shortest_path

    w = rng.uniform(0.1, scale, size=(size, size))
    w = np.triu(w, 1)
    w = w + w.T
    d = shortest_path(w, directed=False)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(d, int(rng.integers(size)))
