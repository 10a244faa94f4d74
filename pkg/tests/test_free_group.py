from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irslab.bs_space import local_statistics
from irslab.errors import CapacityError, DomainError
from irslab.free_group_subgroups import (
    CoreGraph,
    chabauty_distance_fk,
    contains,
    format_word,
    free_reduce,
    grid_reference_statistics,
    parse_cycles,
    parse_word,
    random_transitive_action,
    sample_cosofic_irs,
    schreier_from_permutations,
    short_relation_probability,
    stallings_core,
    torus_action,
)
from oracles import all_reduced_words, random_word, subgroup_ball_deepening

W = parse_word


def test_word_parsing():
    assert W("abA") == (1, 2, -1)
    assert W("aA") == ()
    assert format_word((1, -2, 3)) == "aBc"
    with pytest.raises(DomainError):
        W("a1x!")
    with pytest.raises(DomainError):
        W("c", rank=2)


def test_core_examples():
    h = stallings_core([W("a")], 2)
    assert h.vertex_count == 1 and h.out == ((0, -1),)
    triv = stallings_core([], 2)
    assert triv.vertex_count == 1 and triv.edge_count == 0
    h = stallings_core([W("aa"), W("b"), W("abA")], 2)
    assert h.vertex_count == 2 and h.is_complete() and h.index() == 2


def test_core_property():
    rng = np.random.default_rng(0)
    for _ in range(50):
        h = stallings_core([random_word(rng, 2, 7) for _ in range(3)], 2)
        for v in range(h.vertex_count):
            if v != h.basepoint:
                assert h.degree(v) >= 2
        # folded: CoreGraph validation rejects non co-deterministic labelling
        CoreGraph(h.rank, h.out, h.basepoint)


def test_contains_examples():
    a = stallings_core([W("a")], 2)
    assert contains(a, W("aaaaa")) and not contains(a, W("b"))
    h = stallings_core([W("aa"), W("b"), W("abA")], 2)
    ball = subgroup_ball_deepening([W("aa"), W("b"), W("abA")], 2, 8)
    assert all(contains(h, w) == (w in ball) for w in all_reduced_words(2, 8))


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_contains_matches_product_enumeration(seed):
    rng = np.random.default_rng(seed)
    gens = [random_word(rng, 2, 5) for _ in range(2)]
    h = stallings_core(gens, 2)
    ball = subgroup_ball_deepening(gens, 2, 6)
    assert all(contains(h, w) == (w in ball) for w in all_reduced_words(2, 6))


@given(st.integers(0, 10_000))
def test_folding_idempotent(seed):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(1, 4))
    h = stallings_core([random_word(rng, rank, 6) for _ in range(int(rng.integers(0, 4)))], rank)
    assert stallings_core(h.free_basis(), rank) == h
    assert len(h.free_basis()) == h.edge_count - h.vertex_count + 1


def test_schreier_examples():
    m = 5
    cyc = schreier_from_permutations([[(i + 1) % m for i in range(m)]])
    assert cyc.vertex_count == m and cyc.is_complete()
    assert stallings_core(cyc.free_basis(), 1) == stallings_core([(1,) * m], 1)
    bouquet = schreier_from_permutations([[0], [0]])
    assert stallings_core(bouquet.free_basis(), 2) == stallings_core([W("a"), W("b")], 2)
    assert parse_cycles("(1 2 3)(4 5)", 6) == [1, 2, 0, 4, 3, 5]
    with pytest.raises(DomainError):
        schreier_from_permutations([[1, 0, 2, 3], [0, 1, 3, 2]])
    with pytest.raises(DomainError):
        schreier_from_permutations([[0, 0, 1]])


def _coset_count(gens, rank, max_len):
    """Index by coset enumeration with the membership oracle: greedily collect
    words whose pairwise quotients lie outside the subgroup."""
    h = stallings_core(gens, rank)
    reps = []
    for w in all_reduced_words(rank, max_len):
        if all(not contains(h, free_reduce(tuple(-x for x in reversed(u)) + w)) for u in reps):
            reps.append(w)
    return len(reps)


def test_six_point_action_index():
    rng = np.random.default_rng(6)
    perms = random_transitive_action(2, 6, rng)
    sch = schreier_from_permutations(perms)
    gens = sch.free_basis()
    assert sch.vertex_count == 6
    assert _coset_count(gens, 2, 6) == 6


@settings(max_examples=50)
@given(st.integers(0, 100_000))
def test_index_size_duality(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 9))
    perms = random_transitive_action(2, m, rng)
    sch = schreier_from_permutations(perms, int(rng.integers(m)))
    core = stallings_core(sch.free_basis(), 2)
    assert core.is_complete() and core.vertex_count == m
    assert _coset_count(sch.free_basis(), 2, max(m - 1, 1)) == m


def test_fk_distance_examples():
    a, a2, a3 = (stallings_core([(1,) * k], 2) for k in (1, 2, 3))
    same = chabauty_distance_fk(a, a, 6)
    assert not same.exact and same.value == 2.0**-6
    assert chabauty_distance_fk(a, a2, 8).value == 0.5
    d = chabauty_distance_fk(a2, a3, 8)
    assert d.exact and d.value == 0.25 and d.separating_length == 2
    with pytest.raises(CapacityError):
        chabauty_distance_fk(a, a2, 13)
    with pytest.raises(DomainError):
        chabauty_distance_fk(a, stallings_core([(1,)], 3), 4)


def _fk_brute(h1, h2, n_max):
    words = all_reduced_words(h1.rank, n_max)
    for n in range(1, n_max + 1):
        if any(contains(h1, w) != contains(h2, w) for w in words if len(w) == n):
            return 2.0**-n
    return 2.0**-n_max


@given(st.integers(0, 10_000))
def test_fk_distance_matches_word_enumeration_and_is_ultrametric(seed):
    rng = np.random.default_rng(seed)
    hs = [stallings_core([random_word(rng, 2, 4) for _ in range(2)], 2) for _ in range(3)]
    d = lambda x, y: chabauty_distance_fk(x, y, 6).value  # noqa: E731
    assert d(hs[0], hs[1]) == _fk_brute(hs[0], hs[1], 6)
    assert d(hs[0], hs[2]) <= max(d(hs[0], hs[1]), d(hs[1], hs[2]))


def test_short_relation_examples():
    bouquet = schreier_from_permutations([[0], [0]])
    assert short_relation_probability(bouquet, 1) == 1
    m = 7
    cyc = schreier_from_permutations([[(i + 1) % m for i in range(m)]])
    assert short_relation_probability(cyc, m - 1) == 0
    assert short_relation_probability(cyc, m) == 1
    torus = schreier_from_permutations(torus_action(4))
    # abAB closes at every vertex of the commuting torus action
    assert short_relation_probability(torus, 4) == 1
    assert short_relation_probability(torus, 3) == 0
    with pytest.raises(CapacityError):
        short_relation_probability(torus, 13)


@given(st.integers(0, 10_000))
def test_short_relation_matches_word_tracing(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 8))
    sch = schreier_from_permutations(random_transitive_action(2, m, rng))
    n = int(rng.integers(1, 5))
    words = [w for w in all_reduced_words(2, n) if w]
    hits = sum(any(sch.trace(w, v) == v for w in words) for v in range(m))
    assert short_relation_probability(sch, n) == Fraction(hits, m)


def test_cosofic_statistics():
    n = 6
    cyc = schreier_from_permutations([[(i + 1) % n for i in range(n)]])
    s = sample_cosofic_irs(cyc, 2)
    assert all(len(t) == 1 for t in s.per_radius)
    bouquet = schreier_from_permutations([[0], [0]])
    assert all(len(t) == 1 for t in sample_cosofic_irs(bouquet, 3).per_radius)


@given(st.integers(0, 10_000))
def test_reroot_invariance(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 9))
    perms = random_transitive_action(2, m, rng)
    a = sample_cosofic_irs(schreier_from_permutations(perms, 0), 2)
    b = sample_cosofic_irs(schreier_from_permutations(perms, int(rng.integers(m))), 2)
    assert a == b


def test_dirac_for_vertex_transitive():
    torus = schreier_from_permutations(torus_action(5))
    g = torus.to_rooted_graph()
    stats = local_statistics(g, 3)
    assert all(len(t) == 1 for t in stats.per_radius)


def test_torus_reaches_grid_statistics():
    ref = grid_reference_statistics(3)
    big = sample_cosofic_irs(schreier_from_permutations(torus_action(9)), 3)
    assert big == ref
    small = sample_cosofic_irs(schreier_from_permutations(torus_action(3)), 3)
    assert small != ref
