"""Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned."""
import itertools
import math
import time

import numpy as np
import pytest

from irslab.bs_space import bs_distance, local_statistics, mtp_defect, two_sample_tv_bound, tv_distance
from irslab.chabauty_rn import ClosedSubgroupRn, Quadrature, chabauty_distance, same_subgroup
from irslab.chain_gluing import BLOCK_A, BLOCK_B, chain_statistics, sample_chain, thick_fraction
from irslab.free_group_subgroups import (
    contains,
    grid_reference_statistics,
    random_transitive_action,
    sample_cosofic_irs,
    schreier_from_permutations,
    stallings_core,
    torus_action,
)
from irslab.gh_metric import FiniteMetricSpace, gh_distance, random_metric_space
from irslab.random_graphs import random_connected_graph, random_regular_graph
from irslab.rooted_graphs import cheeger_constant, cycle_graph, from_edge_list, tree_ball_fraction
from oracles import all_reduced_words, random_subgroup_r2, random_word, rebased, subgroup_ball_deepening

pytestmark = pytest.mark.acceptance

SEED = 20240601


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_criterion_01_subgroup_limits(verdict):
    def run():
        to_r = []
        for k in range(1, 11):
            a = 2.0**-k
            q = Quadrature(r_cut=14.0, step=1 / 64, net_step=a / 16)
            to_r.append((a, chabauty_distance(ClosedSubgroupRn.scaled_integers(a), ClosedSubgroupRn.whole(1), q)))
        to_0 = []
        for k in range(2, 7):
            a = 2.0**k
            q = Quadrature(r_cut=14.0, step=1 / 64)
            to_0.append((a, chabauty_distance(ClosedSubgroupRn.scaled_integers(a), ClosedSubgroupRn.trivial(1), q)))
        return to_r, to_0

    (to_r, to_0), secs = _timed(run)
    dec = all(x[1].value > y[1].value for x, y in zip(to_r, to_r[1:]))
    near = all(d.value <= a / 2 + d.error_bound for a, d in to_r)
    far = all(d.value <= (a + 1) * math.exp(-a) + d.error_bound for a, d in to_0)
    worst = max(d.value - a / 2 for a, d in to_r)
    ok = dec and near and far and secs < 30
    verdict(1, ok, f"decreasing={dec} rho<=a/2+err={near} (max excess {worst:.3g}) "
            f"rho<=(a+1)e^-a+err={far} time={secs:.1f}s")


def test_criterion_02_chabauty_axioms(verdict):
    rng = np.random.default_rng(SEED)
    q = Quadrature(r_cut=10.0, step=1 / 64, net_step=0.25)
    sym = tri = zero = pos = True
    worst = 0.0

    def run():
        nonlocal sym, tri, zero, pos, worst
        for _ in range(200):
            a, b, c = (random_subgroup_r2(rng) for _ in range(3))
            if rng.random() < 0.25:
                b = rebased(a, rng)
            ab, ba = chabauty_distance(a, b, q), chabauty_distance(b, a, q)
            ac, bc = chabauty_distance(a, c, q), chabauty_distance(b, c, q)
            sym &= abs(ab.value - ba.value) <= ab.error_bound + ba.error_bound
            slack = ac.value - ab.value - bc.value
            worst = max(worst, slack - ac.error_bound - ab.error_bound - bc.error_bound)
            tri &= slack <= ac.error_bound + ab.error_bound + bc.error_bound
            same = same_subgroup(a, b)
            zero &= (ab.value == 0.0) == same
            pos &= same or ab.value > 0
            aa = chabauty_distance(a, rebased(a, rng), q)
            zero &= aa.value == 0.0

    _, secs = _timed(run)
    ok = sym and tri and zero and pos and secs < 120
    verdict(2, ok, f"symmetry={sym} triangle={tri} (worst slack {worst:.3g}) zero-iff-same={zero and pos} time={secs:.1f}s")


def test_criterion_03_stallings_oracle(verdict):
    rng = np.random.default_rng(SEED)
    words = all_reduced_words(2, 8)

    def run():
        agree = total = 0
        for _ in range(25):
            gens = [random_word(rng, 2, 6) for _ in range(3)]
            core = stallings_core(gens, 2)
            ball = subgroup_ball_deepening(gens, 2, 8)
            for w in words:
                total += 1
                agree += contains(core, w) == (w in ball)
        return agree, total

    (agree, total), secs = _timed(run)
    verdict(3, agree == total and secs < 120, f"agreement {agree}/{total} time={secs:.1f}s")


def test_criterion_04_finite_index_duality(verdict):
    rng = np.random.default_rng(SEED)
    words = all_reduced_words(2, 6)

    def run():
        bad = []
        for i in range(50):
            pts = int(rng.integers(1, 9))
            sch = schreier_from_permutations(random_transitive_action(2, pts, rng))
            core = stallings_core(sch.free_basis(), 2)
            # the core presents the stabilizer: members are exactly the words fixing the root
            same = all(contains(core, w) == (sch.trace(w, sch.basepoint) == sch.basepoint) for w in words)
            if not (core.is_complete() and core.vertex_count == pts and same):
                bad.append(i)
        return bad

    bad, secs = _timed(run)
    verdict(4, not bad and secs < 30, f"failures={bad} time={secs:.1f}s")


def test_criterion_05_cycle_convergence(verdict):
    def run():
        return {n: bs_distance(local_statistics(cycle_graph(n), 3), local_statistics(cycle_graph(2 * n), 3)).value
                for n in range(8, 41)}

    vals, secs = _timed(run)
    ok = all(v == 0.0 for v in vals.values()) and secs < 5
    verdict(5, ok, f"max distance over n=8..40 is {max(vals.values())} time={secs:.1f}s")


def test_criterion_06_torus_sofic(verdict):
    def run():
        ref = grid_reference_statistics(3)
        return [bs_distance(sample_cosofic_irs(schreier_from_permutations(torus_action(n)), 3), ref).value
                for n in (4, 8, 16)]

    d, secs = _timed(run)
    strictly = all(x > y for x, y in zip(d, d[1:]))
    # the literal criterion; n = 8 already cannot wrap, so its distance is also 0
    ok = strictly and d[-1] == 0.0 and secs < 30
    verdict(6, ok, f"distances n=4,8,16: {d} strictly-decreasing={strictly} "
            f"non-increasing={all(x >= y for x, y in zip(d, d[1:]))} zero-at-16={d[-1] == 0.0} time={secs:.1f}s")


def test_criterion_07_mtp(verdict):
    rng = np.random.default_rng(SEED)

    def run():
        worst = 0.0
        for _ in range(20):
            n = int(rng.integers(2, 51))
            g = random_connected_graph(n, int(rng.integers(0, n)), rng)
            worst = max(worst, mtp_defect(g, 2).defect)
        star = from_edge_list(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        return worst, mtp_defect(star, 1, [1, 0, 0, 0, 0]).defect

    (worst, star), secs = _timed(run)
    verdict(7, worst <= 1e-12 and star > 0.1 and secs < 60,
            f"max uniform defect {worst:.3g}, star defect {star:.3g} time={secs:.1f}s")


def test_criterion_08_gh(verdict):
    def run():
        p = FiniteMetricSpace.point()
        ts = [0.3 * k for k in range(1, 11)]
        halves = all(gh_distance(p, FiniteMetricSpace.two_point(t)) == t / 2 for t in ts)
        pool = [random_metric_space(int(np.random.default_rng(SEED + i).integers(1, 6)), np.random.default_rng(SEED + 100 + i), 2.0)
                for i in range(20)]
        d = np.array([[gh_distance(a, b) for b in pool] for a in pool])
        axioms = bool(np.all(np.abs(d - d.T) <= 1e-9) and np.all(np.diag(d) <= 1e-9))
        axioms &= all(d[i, k] <= d[i, j] + d[j, k] + 1e-9 for i, j, k in itertools.product(range(20), repeat=3))
        bracket = all(gh_distance(a, b, "bound").contains(d[i, j]) for (i, a), (j, b) in itertools.product(enumerate(pool), repeat=2))
        return halves, axioms, bracket

    (halves, axioms, bracket), secs = _timed(run)
    verdict(8, halves and axioms and bracket and secs < 120,
            f"t/2 exact={halves} axioms={axioms} bound-brackets={bracket} time={secs:.1f}s")


def test_criterion_09_cheeger(verdict):
    rng = np.random.default_rng(SEED)

    def run():
        c8 = cheeger_constant(cycle_graph(8)).value
        c12 = cheeger_constant(cycle_graph(12)).value
        ok = True
        for _ in range(20):
            n = int(rng.integers(2, 17))
            g = random_connected_graph(n, int(rng.integers(0, 2 * n)), rng)
            ok &= cheeger_constant(g, "bound").value >= cheeger_constant(g).value
        return c8, c12, ok

    (c8, c12, ok), secs = _timed(run)
    verdict(9, c8 * 2 == 1 and c12 * 3 == 1 and ok and secs < 60,
            f"h(C8)={c8} h(C12)={c12} sweep>=exact={ok} time={secs:.1f}s")


def test_criterion_10_exotic_chain(verdict):
    n, w, r = 10_000, 12, 3

    def run():
        s0, meta = chain_statistics(0.5, w, r, n, SEED, root_block=0, return_samples=True)
        s3 = chain_statistics(0.5, w, r, n, SEED + 1, root_block=3)
        freq = sum(m.origin_label == "A" for m in meta) / n
        tvs = []
        for k in range(1, r + 1):
            classes = len(set(s0.at(k)) | set(s3.at(k)))
            tvs.append((tv_distance(s0, s3, k), two_sample_tv_bound(classes, n, n)))
        t = 1.0
        assert float(BLOCK_A.systole) < t < float(BLOCK_B.systole)
        th1 = thick_fraction(sample_chain(SEED, w, 1.0), r, t)
        th0 = thick_fraction(sample_chain(SEED, w, 0.0), r, t)
        return freq, tvs, th1, th0

    (freq, tvs, th1, th0), secs = _timed(run)
    a = abs(freq - 0.5) <= 3 * math.sqrt(0.25 / n)
    b = all(tv <= bound for tv, bound in tvs)
    c = th1 < th0
    tv_txt = ", ".join(f"{tv:.4f}<={bd:.4f}" for tv, bd in tvs)
    verdict(10, a and b and c and secs < 180,
            f"(a) A-freq {freq:.4f} ok={a} (b) TV {tv_txt} ok={b} (c) thick p=1 {float(th1):.3f} < p=0 {float(th0):.3f} ok={c} time={secs:.1f}s")


def test_criterion_11_thick_trend(verdict):
    def run():
        out = []
        for n in (100, 1000, 10_000):
            g = random_regular_graph(n, 3, np.random.default_rng(SEED + n))
            out.append((n, float(tree_ball_fraction(g, 2))))
        return out

    fr, secs = _timed(run)
    sig = [3 * math.sqrt(max(f * (1 - f), 1e-12) / n) for n, f in fr]
    mono = all(fr[i + 1][1] >= fr[i][1] - sig[i] - sig[i + 1] for i in range(2))
    top = fr[-1][1] >= 0.99 - sig[-1]
    verdict(11, mono and top and secs < 60,
            f"fractions {[round(f, 4) for _, f in fr]} non-decreasing={mono} >=0.99 at 10^4={top} time={secs:.1f}s")
