"""Random bi-infinite chains of metric-graph blocks, truncated to a window.

Two block templates are glued right-to-left along a line following a
Bernoulli sequence of labels. Template ``A`` carries a short cycle and ``B``
only long ones. Each block owns its vertices except the right attachment,
which belongs to the next block, so rooting uniformly in a block matches
uniform rooting in a long cyclic chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .bs_space import EXACT, LocalStatistics, statistics_from_codes, vertex_codes
from .errors import DomainError
from .rooted_graphs import BALL_TOL, RootedGraph, distances_from

INF = math.inf


# ---------------------------------------------------------------- templates


@dataclass(frozen=True)
class BlockTemplate:
    name: str
    graph: RootedGraph
    left: int
    right: int

    def __post_init__(self):
        g = self.graph
        if self.left == self.right:
            raise DomainError("left and right attachments must differ")
        if not (0 <= self.left < g.vertex_count and 0 <= self.right < g.vertex_count):
            raise DomainError("attachment vertex out of range")
        if not g.is_connected():
            raise DomainError("block template must be connected")

    @property
    def size(self) -> int:
        return self.graph.vertex_count

    @property
    def systole(self) -> Fraction:
        """Length of the shortest cycle, recovered as a small-denominator rational."""
        big = math.fsum(self.graph.weight(i) for i in range(self.graph.edge_count))
        s = min(local_systole(self.graph, v, big) for v in range(self.size))
        if s == INF:
            raise DomainError("template has no cycle")
        return Fraction(s).limit_denominator(10**6)

    @property
    def span(self) -> float:
        """Distance from the left to the right attachment."""
        return distances_from(self.graph, self.left)[self.right]

    def to_dict(self) -> dict:
        d = self.graph.to_dict()
        d.update(name=self.name, left=self.left, right=self.right)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "BlockTemplate":
        try:
            return cls(str(data.get("name", "?")), RootedGraph.from_dict(data), int(data["left"]), int(data["right"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed block template: {exc}") from exc


def two_loop_block(name: str, loop1: float, loop2: float) -> BlockTemplate:
    """Left and right unit edges to a hub carrying two triangles of given lengths."""
    # 0 = left, 1 = hub, 2 = right, 3-4 first loop, 5-6 second loop
    edges = [(0, 1, 0), (1, 2, 0), (1, 3, 0), (3, 4, 0), (1, 4, 0), (1, 5, 0), (5, 6, 0), (1, 6, 0)]
    weights = [1.0, 1.0] + [loop1 / 3] * 3 + [loop2 / 3] * 3
    return BlockTemplate(name, RootedGraph(7, tuple(edges), 1, tuple(weights)), 0, 2)


BLOCK_A = two_loop_block("A", 0.25, 1.0)
BLOCK_B = two_loop_block("B", 4.0, 4.0)
DEFAULT_TEMPLATES = {"A": BLOCK_A, "B": BLOCK_B}


# -------------------------------------------------------------------- chain


@dataclass(frozen=True)
class GluedChain:
    """Blocks at offsets ``-W..W``; ``labels[W]`` is the origin block."""

    labels: tuple
    graph: RootedGraph
    owned: tuple
    half_width: int
    cyclic: bool = False

    @property
    def origin_label(self) -> str:
        return self.labels[self.half_width]

    def block_vertices(self, offset: int) -> tuple:
        i = offset + self.half_width
        if not 0 <= i < len(self.labels):
            raise DomainError(f"block offset {offset} outside the window")
        return self.owned[i]

    @classmethod
    def from_labels(
        cls, labels: Sequence[str], templates: Optional[dict] = None, cyclic: bool = False
    ) -> "GluedChain":
        templates = templates or DEFAULT_TEMPLATES
        labels = tuple(labels)
        if len(labels) % 2 != 1:
            raise DomainError("a window has an odd number of blocks")
        if cyclic and len(labels) < 2:
            raise DomainError("a cyclic chain needs at least two blocks")
        edges, weights, owned = [], [], []
        next_id = 0
        prev_right = None
        first_left = None
        for k, lab in enumerate(labels):
            try:
                t = templates[lab]
            except KeyError:
                raise DomainError(f"no template for block label {lab!r}") from None
            ids = {}
            for v in range(t.size):
                if v == t.left and prev_right is not None:
                    ids[v] = prev_right
                elif v == t.right and cyclic and k == len(labels) - 1:
                    ids[v] = first_left
                else:
                    ids[v] = next_id
                    next_id += 1
            if first_left is None:
                first_left = ids[t.left]
            for i, (s, u, el, ori) in enumerate(t.graph.edges):
                edges.append((ids[s], ids[u], el, ori))
                weights.append(t.graph.weight(i))
            owned.append(tuple(sorted(ids[v] for v in range(t.size) if v != t.right)))
            prev_right = ids[t.right]
        g = RootedGraph(next_id, tuple(edges), 0, tuple(weights))
        return cls(labels, g, tuple(owned), len(labels) // 2, cyclic)


def _label_order(half_width: int) -> list:
    # offsets in draw order 0, 1, -1, 2, -2, ... so wider windows extend narrower ones
    order = [0]
    for k in range(1, half_width + 1):
        order += [k, -k]
    return order


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_labels(seed, half_width: int, p: float) -> tuple:
    if half_width < 1:
        raise DomainError("window half-width must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    u = _as_rng(seed).random(2 * half_width + 1)
    labels = [None] * (2 * half_width + 1)
    for k, offset in enumerate(_label_order(half_width)):
        labels[offset + half_width] = "A" if u[k] < p else "B"
    return tuple(labels)


def sample_chain(seed, half_width: int, p: float = 0.5, templates: Optional[dict] = None) -> GluedChain:
    """Bernoulli(p) labels on offsets ``-W..W`` (A with probability ``p``), glued."""
    return GluedChain.from_labels(sample_labels(seed, half_width, p), templates)


def sample_pointed(chain: GluedChain, seed, block: int = 0) -> tuple:
    """Root the chain at a uniform vertex owned by the block at offset ``block``."""
    verts = chain.block_vertices(block)
    v = verts[int(_as_rng(seed).integers(len(verts)))]
    return chain.graph.with_root(v), chain.labels[block + chain.half_width]


# ------------------------------------------------------------------ systole


def local_systoles(g: RootedGraph, centers: Sequence[int], r: float) -> np.ndarray:
    """Shortest cycle inside the closed ``r``-ball of each centre (``inf`` for trees)."""
    if not r > 0:
        raise DomainError("radius must be positive")
    indptr, nbr, wt, eid = g.csr(loops_twice=False)
    c = np.asarray(list(centers), dtype=np.int64)
    return kernels.ball_girths(indptr, nbr, wt, eid, c, float(r), BALL_TOL)


def local_systole(g: RootedGraph, v: int, r: float) -> float:
    return float(local_systoles(g, [v], r)[0])


def thick_fraction(chain: Union[GluedChain, RootedGraph], r: float, t: float) -> Fraction:
    """Fraction of vertices whose ``r``-ball has no cycle shorter than ``t``."""
    if not t > 0:
        raise DomainError("threshold must be positive")
    g = chain.graph if isinstance(chain, GluedChain) else chain
    s = local_systoles(g, range(g.vertex_count), r)
    return Fraction(int(np.count_nonzero(s >= t)), g.vertex_count)


# --------------------------------------------------------------- statistics


def window_consistency_bound(half_width: int, templates: Optional[dict] = None, block: int = 0) -> float:
    """Radii strictly below this cannot see past the window from the given block."""
    templates = templates or DEFAULT_TEMPLATES
    span = min(t.span for t in templates.values())
    return span * (half_width - 1 - abs(block))


@dataclass(frozen=True)
class ChainSample:
    labels: tuple
    root: int
    origin_label: str


def _draws(seed, samples: int):
    for child in np.random.SeedSequence(seed).spawn(samples):
        lab_ss, root_ss = child.spawn(2)
        yield np.random.default_rng(lab_ss), np.random.default_rng(root_ss)


def chain_statistics(
    p: float,
    half_width: int,
    r_max: int,
    samples: int,
    seed: int = 0,
    root_block: int = 0,
    templates: Optional[dict] = None,
    return_samples: bool = False,
):
    """Monte Carlo ball statistics of the random pointed chain.

    Each draw samples fresh labels and a uniform root in the block at offset
    ``root_block``. Label and root streams are split per draw from ``seed``,
    so results do not depend on the window width wherever balls stay inside it.
    """
    if samples < 1:
        raise DomainError("samples must be positive")
    if r_max < 1:
        raise DomainError("r_max must be positive")
    rows, meta = [], []
    for lab_rng, root_rng in _draws(seed, samples):
        chain = GluedChain.from_labels(sample_labels(lab_rng, half_width, p), templates)
        g, _ = sample_pointed(chain, root_rng, root_block)
        rows.append(vertex_codes(g, g.root, r_max))
        meta.append(ChainSample(chain.labels, g.root, chain.origin_label))
    stats = statistics_from_codes(rows)
    return (stats, meta) if return_samples else stats


def exhaustive_block_statistics(chain: GluedChain, r_max: int, blocks: Sequence[int]) -> LocalStatistics:
    """Statistics with the root uniform over the vertices owned by ``blocks``."""
    rows = []
    for b in blocks:
        for v in chain.block_vertices(b):
            rows.append(vertex_codes(chain.graph, v, r_max))
    return statistics_from_codes(rows, EXACT)
