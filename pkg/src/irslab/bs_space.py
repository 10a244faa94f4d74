"""Local ball statistics of rooted graphs and distances between them."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .canonical import canonical_code, decode_code
from .errors import DomainError
from .rooted_graphs import RootedGraph, ball_order, extract_ball

EXACT = "exact"
PROB_TOL = 1e-12


@dataclass(frozen=True)
class MonteCarlo:
    count: int
    seed: int = 0


@dataclass(frozen=True, eq=True)
class LocalStatistics:
    """Distribution of canonical ball codes for radii ``1..radius``.

    ``per_radius[r - 1]`` maps hex codes to probabilities. ``sample_count`` is
    the number of sampled roots, or ``"exact"`` for exhaustive statistics.
    """

    radius: int
    per_radius: tuple
    sample_count: Union[int, str] = EXACT

    __hash__ = None

    def __post_init__(self):
        if self.radius < 1 or len(self.per_radius) != self.radius:
            raise DomainError("per_radius must have one table per radius 1..r_max")
        for table in self.per_radius:
            if any(p < 0 for p in table.values()):
                raise DomainError("negative probability")
            if abs(math.fsum(table.values()) - 1.0) > PROB_TOL:
                raise DomainError("probabilities must sum to 1")

    def at(self, r: int) -> dict:
        if not 1 <= r <= self.radius:
            raise DomainError(f"radius {r} outside 1..{self.radius}")
        return self.per_radius[r - 1]

    def marginal(self, r: int, source: Optional[int] = None) -> dict:
        """Push the ``source``-radius table forward to radius ``r`` by truncating balls."""
        source = self.radius if source is None else source
        if not 1 <= r <= source <= self.radius:
            raise DomainError("need 1 <= r <= source <= radius")
        out = Counter()
        for code, p in self.at(source).items():
            g, _ = decode_code(code)
            out[canonical_code(extract_ball(g, g.root, r)).hex] += p
        return dict(out)

    # -- serialisation ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "per_radius": [
                [{"code": c, "prob": p} for c, p in sorted(t.items())] for t in self.per_radius
            ],
            "sample_count": self.sample_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LocalStatistics":
        try:
            tables = tuple(
                {row["code"]: float(row["prob"]) for row in level} for level in data["per_radius"]
            )
            return cls(int(data["radius"]), tables, data["sample_count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed statistics document: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LocalStatistics":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "code", "probability"])
        for r, table in enumerate(self.per_radius, start=1):
            for code, p in sorted(table.items()):
                w.writerow([r, code, repr(p)])
        return buf.getvalue()


def _normalise(counts: Sequence[Counter], total) -> tuple:
    return tuple({c: k / total for c, k in table.items()} for table in counts)


def vertex_codes(g: RootedGraph, v: int, r_max: int) -> list:
    """Hex codes of the balls of radius ``1..r_max`` around ``v``."""
    big = extract_ball(g, v, r_max)
    out = []
    for r in range(1, r_max + 1):
        ball = big if r == r_max else extract_ball(big, 0, r)
        out.append(canonical_code(ball, radius=r).hex)
    return out


def local_statistics(
    g: RootedGraph,
    r_max: int,
    sampling: Union[str, MonteCarlo] = "exhaustive",
) -> LocalStatistics:
    """Empirical distribution of ball codes around uniform roots of ``g``."""
    if r_max < 1:
        raise DomainError("r_max must be positive")
    n = g.vertex_count
    if sampling == "exhaustive":
        roots = Counter(range(n))
        total, marker = n, EXACT
    elif isinstance(sampling, MonteCarlo):
        if sampling.count < 1:
            raise DomainError("sample count must be positive")
        rng = np.random.default_rng(sampling.seed)
        drawn = rng.integers(0, n, size=sampling.count)
        roots = Counter(dict(zip(*map(list, np.unique(drawn, return_counts=True)))))
        total, marker = sampling.count, sampling.count
    else:
        raise DomainError(f"unknown sampling mode {sampling!r}")
    counts = [Counter() for _ in range(r_max)]
    for v, k in sorted(roots.items()):
        for r, code in enumerate(vertex_codes(g, int(v), r_max)):
            counts[r][code] += int(k)
    return LocalStatistics(r_max, _normalise(counts, total), marker)


def statistics_from_codes(code_rows: Sequence[Sequence[str]], marker=None) -> LocalStatistics:
    """Build statistics from one row of per-radius codes per sampled root."""
    if not code_rows:
        raise DomainError("no samples")
    r_max = len(code_rows[0])
    counts = [Counter() for _ in range(r_max)]
    for row in code_rows:
        for r, code in enumerate(row):
            counts[r][code] += 1
    n = len(code_rows)
    return LocalStatistics(r_max, _normalise(counts, n), n if marker is None else marker)


def merge_statistics(a: LocalStatistics, b: LocalStatistics) -> LocalStatistics:
    """Pool two sampled statistics by their sample counts."""
    if a.radius != b.radius:
        raise DomainError("radius mismatch")
    if a.sample_count == EXACT or b.sample_count == EXACT:
        raise DomainError("only sampled statistics can be pooled")
    na, nb = a.sample_count, b.sample_count
    tables = []
    for ta, tb in zip(a.per_radius, b.per_radius):
        keys = sorted(set(ta) | set(tb))
        tables.append({k: (ta.get(k, 0.0) * na + tb.get(k, 0.0) * nb) / (na + nb) for k in keys})
    return LocalStatistics(a.radius, tuple(tables), na + nb)


# ---------------------------------------------------------------- distances


def tv_distance(a: LocalStatistics, b: LocalStatistics, r: int) -> float:
    if not 1 <= r <= min(a.radius, b.radius):
        raise DomainError(f"radius {r} out of range")
    ta, tb = a.at(r), b.at(r)
    return 0.5 * math.fsum(abs(ta.get(k, 0.0) - tb.get(k, 0.0)) for k in set(ta) | set(tb))


@dataclass(frozen=True)
class BsDistance:
    value: float
    tail_bound: float


def bs_distance(a: LocalStatistics, b: LocalStatistics) -> BsDistance:
    """``sum_r 2^-r tv_r`` up to the common radius; the omitted tail is at most ``2^-radius``."""
    if a.radius != b.radius:
        raise DomainError("statistics must share a radius")
    terms = [2.0 ** -r * tv_distance(a, b, r) for r in range(1, a.radius + 1)]
    return BsDistance(math.fsum(terms), 2.0 ** -a.radius)


def sampling_tv_bound(classes: int, n: int) -> float:
    """Confidence radius for the TV distance of an ``n``-sample empirical law."""
    return 3.0 * math.sqrt(classes / n)


def two_sample_tv_bound(classes: int, n1: int, n2: int) -> float:
    """Confidence radius for the TV distance between two independent samples."""
    return 3.0 * math.sqrt(classes * (1.0 / n1 + 1.0 / n2))


# ---------------------------------------------------------------------- MTP


@dataclass(frozen=True)
class MtpReport:
    radius: int
    defect: float
    witness: Optional[str]


def _root_weights(n: int, weights):
    if weights is None:
        return [Fraction(1, n)] * n
    w = [float(x) for x in weights]
    if len(w) != n:
        raise DomainError("one root weight per vertex required")
    if any(not math.isfinite(x) or x < 0 for x in w) or sum(w) <= 0:
        raise DomainError("root weights are not normalisable")
    s = math.fsum(w)
    return [x / s for x in w]


def mtp_defect(g: RootedGraph, r: int, root_weights=None) -> MtpReport:
    """Largest imbalance of the mass-transport identity over indicator test functions.

    Test functions are indicators of doubly rooted classes: the ``r``-ball
    around the first root with the second root marked inside it.
    """
    if r < 1:
        raise DomainError("radius must be positive")
    n = g.vertex_count
    w = _root_weights(n, root_weights)
    sent = Counter()
    received = Counter()
    for o in range(n):
        ball = extract_ball(g, o, r)
        for local, v in enumerate(ball_order(g, o, r)):
            code = canonical_code(ball, radius=r, marked=local).hex
            sent[code] += w[o]
            received[code] += w[v]
    best, witness = 0, None
    for code in sorted(set(sent) | set(received)):
        d = abs(sent[code] - received[code])
        if d > best:
            best, witness = d, code
    return MtpReport(r, float(best), witness)
