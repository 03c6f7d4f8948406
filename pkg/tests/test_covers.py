from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lengthlab.covers.cover import Budget, IncompleteCover, delta_cover, delta_trivial
from lengthlab.covers.deck import (
    WindowTooSmall,
    commutes,
    count_short_elements,
    deck_generators,
    delta_length,
    group_summary,
)
from lengthlab.covers.theorems import check_deck_isometry, check_local_isometry, corpus_loops
from lengthlab.lab.corpus import gen_cycle, gen_hawaiian, gen_tree
from lengthlab.spaces import EdgePath, ModelError

from oracles import full_ball_trivial

F = Fraction


def full_loop(g, m):
    return EdgePath.from_steps(g, 0, [(k, 1) for k in range(m)])


# -- delta_trivial -------------------------------------------------------------


def test_full_cycle_triviality(cycle6):
    loop = full_loop(cycle6, 12)
    assert delta_trivial(cycle6, loop, F(7, 2)) == "yes"
    assert delta_trivial(cycle6, loop, 2) == "no"


def test_constant_loop_trivial(cycle6, torus):
    for g in (cycle6, torus):
        const = EdgePath.from_steps(g, 0, [])
        for d in ("1/3", 1, 5):
            assert delta_trivial(g, const, d) == "yes"


def test_backtrack_is_trivial(torus):
    k, d, _ = torus.incidence(0)[0]
    loop = EdgePath.from_steps(torus, 0, [(k, d), (k, -d)] * 3)
    assert delta_trivial(torus, loop, "1/10") == "yes"


def test_open_loop_rejected(cycle6):
    with pytest.raises(ModelError):
        delta_trivial(cycle6, EdgePath.from_steps(cycle6, 0, [(0, 1)]), 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["1/2", "1", "3/2", "9/4", "13/4"]))
def test_ball_contained_loops_are_trivial(seed, delta):
    """Any loop inside one open delta-ball is delta-trivial (oracle: pointwise containment)."""
    g = gen_hawaiian([6, 3, 2], 12).graph
    rng = np.random.default_rng(seed)
    loops = corpus_loops(g, F(delta))
    loop = loops[int(rng.integers(len(loops)))]
    if full_ball_trivial(g, loop, F(delta)):
        assert delta_trivial(g, loop, delta) == "yes"


# -- delta_cover ---------------------------------------------------------------


def test_circle_line_cover(cycle6):
    c = delta_cover(cycle6, 2, 10)
    assert c.status == "complete"
    assert sorted(c.distance(f) for f in c.fiber) == [0, 6, 6]
    # an arc of the line: every vertex within 10 of the base lift, two per base vertex mostly
    assert len(c) == 2 * 20 + 1


def test_circle_trivial_cover(cycle6):
    c = delta_cover(cycle6, F(7, 2), 10)
    assert c.fiber == [0] and len(c) == cycle6.n


def test_torus_plane_cover(torus):
    c = delta_cover(torus, F(4, 5), 8)
    assert c.status == "complete"
    dists = sorted(c.distance(f) for f in c.fiber)
    assert dists[:3] == [0, 2, 2] and F(6) in dists


@pytest.mark.parametrize("backend", ["rewriting", "folding"])
def test_single_backends(cycle6, backend):
    c = delta_cover(cycle6, 2, 10, backend=backend)
    assert c.complete and c.backend == backend
    assert c.same_as(delta_cover(cycle6, 2, 10, backend="both"))


@pytest.mark.parametrize("delta", ["4/5", "3/2", "7/2"])
def test_backends_agree_on_torus(torus, delta):
    a = delta_cover(torus, delta, 6, backend="rewriting")
    b = delta_cover(torus, delta, 6, backend="folding")
    assert a.same_as(b)


def test_budget_exhaustion_is_incomplete(torus):
    c = delta_cover(torus, F(4, 5), 8, Budget(max_rules=2, max_pairs=5, max_nodes=20), backend="both")
    assert c.status == "incomplete"
    with pytest.raises(IncompleteCover):
        deck_generators(c)


def test_bad_arguments(cycle6):
    with pytest.raises(ModelError):
        delta_cover(cycle6, 0, 10)
    with pytest.raises(ModelError):
        delta_cover(cycle6, 2, 10, backend="magic")


def test_projection_is_local_isometry(cycle6, torus, hawaiian):
    for g, d, R in ((cycle6, 2, 10), (torus, F(4, 5), 6), (hawaiian, F(4, 5), 8)):
        c = delta_cover(g, d, R)
        assert check_local_isometry(c) == []


# -- deck group ----------------------------------------------------------------


def test_circle_deck_group(cycle6):
    c = delta_cover(cycle6, 2, 10)
    gens = deck_generators(c)
    assert len(gens) == 1
    assert delta_length(c, gens[0]) == 6
    assert deck_generators(delta_cover(cycle6, F(7, 2), 10)) == []


def test_torus_deck_group(torus):
    c = delta_cover(torus, F(4, 5), 8)
    gens = deck_generators(c)
    assert len(gens) == 2
    assert sorted(delta_length(c, h, gens) for h in gens) == [2, 6]
    assert commutes(gens[0], gens[1]) is True
    assert group_summary(c)["abelian"] is True
    for h in gens:
        assert check_deck_isometry(c, h) == []


def test_hawaiian_free_group_is_not_abelian(hawaiian):
    c = delta_cover(hawaiian, F(4, 5), 8)
    s = group_summary(c)
    assert s["rank"] == 3 and s["abelian"] is False


@pytest.mark.parametrize("delta,rank", [("4/5", 3), ("5/4", 2), ("2", 1), ("4", 0)])
def test_hawaiian_ranks(hawaiian, delta, rank):
    assert len(deck_generators(delta_cover(hawaiian, delta, 8))) == rank


def test_delta_length_at_least_delta(cycle6, torus, hawaiian):
    for g, d, R in ((cycle6, 2, 10), (torus, F(4, 5), 8), (torus, F(3, 2), 8), (hawaiian, F(4, 5), 10)):
        c = delta_cover(g, d, R)
        for h in deck_generators(c):
            assert delta_length(c, h) >= F(d)


def test_trees_have_no_deck_group():
    for seed in range(4):
        g = gen_tree(10, seed=seed).graph
        for d in ("1/2", 1, 3):
            assert deck_generators(delta_cover(g, d, 6)) == []


def test_count_short_elements(cycle6):
    c = delta_cover(cycle6, 2, 10)
    assert count_short_elements(c, 6) == 3
    assert count_short_elements(c, 5) == 1
    with pytest.raises(WindowTooSmall):
        count_short_elements(c, 11)


def test_window_radius_just_enough_on_the_circle():
    # lifts at s in [-6, 0]: |s| + |s + 6| + 6 = 12 = 2R, so R = 6 certifies
    c = delta_cover(gen_cycle(6, 12).graph, 2, 6)
    (h,) = deck_generators(c)
    assert delta_length(c, h) == 6


def test_small_window_refuses_delta_length(hawaiian):
    c = delta_cover(hawaiian, F(4, 5), 8)
    gens = deck_generators(c)
    lengths = []
    for h in gens:
        try:
            lengths.append(delta_length(c, h, gens))
        except WindowTooSmall:
            lengths.append(None)
    assert lengths == [2, 3, None]
    big = delta_cover(hawaiian, F(4, 5), 10)
    assert [delta_length(big, h) for h in deck_generators(big)] == [2, 3, 6]


def test_cover_json(cycle6):
    d = delta_cover(cycle6, 2, 10).to_json()
    assert d["status"] == "complete"
    assert [g["delta_length"] for g in d["generators"]] == ["6"]
    assert d["generators"][0]["loop"]["start"] == "v0"
