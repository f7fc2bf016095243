import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsa.dist import DegreeDistribution
from bcsa.decoder import peel, unresolved_users
from bcsa.graph import FrameGraph, sample_original, apply_pec

from _oracles import maximal_stopping_set


def test_singleton_chain_resolves_everyone():
    # slot 2 is a singleton; peeling user 1 frees slot 0, then user 0
    g = FrameGraph(3, ((0, 1), (0, 2)))
    result = peel(g)
    assert result.resolved == (True, True)
    assert result.iterations == 2
    assert unresolved_users(g) == ()


def test_two_user_collision_is_stuck():
    g = FrameGraph(2, ((0, 1), (0, 1)))
    result = peel(g)
    assert result.resolved == (False, False)
    assert result.n_resolved == 0
    assert unresolved_users(g) == (0, 1)


def test_zero_degree_user_never_resolves():
    g = FrameGraph(2, ((), (0,)))
    assert peel(g).resolved == (False, True)


def test_empty_graph():
    result = peel(FrameGraph(4, ()))
    assert result.resolved == ()
    assert result.iterations == 0


def test_partial_peel():
    # users 0 and 1 deadlock on slots 0,1; user 2 is clean on slot 2
    g = FrameGraph(3, ((0, 1), (0, 1), (2,)))
    result = peel(g)
    assert result.resolved == (False, False, True)


def test_slot_order_invariance():
    rng = np.random.default_rng(42)
    dist = DegreeDistribution.from_coeffs([0, 0, 0.6, 0.2, 0.2])
    for _ in range(200):
        g = sample_original(dist, 8, 10, seed=rng)
        asc = peel(g, slot_order="ascending")
        desc = peel(g, slot_order="descending")
        assert asc.resolved == desc.resolved
    with pytest.raises(ValueError):
        peel(g, slot_order="random")


def test_peel_complement_is_maximal_stopping_set():
    rng = np.random.default_rng(9)
    dist = DegreeDistribution.from_coeffs([0.1, 0.2, 0.4, 0.3])
    for _ in range(150):
        g = sample_original(dist, 6, 7, seed=rng)
        g = apply_pec(g, 0.2, seed=rng)
        assert set(unresolved_users(g)) == maximal_stopping_set(g.users)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(0, 9))
def test_removing_a_user_never_hurts_the_rest(seed, drop):
    # a resolved user cancels exactly its own interference, so deleting one
    # user outright can only keep or grow the resolved set of the others
    rng = np.random.default_rng(seed)
    dist = DegreeDistribution.from_coeffs([0, 0, 0.5, 0, 0.5])
    g = sample_original(dist, 10, 12, seed=rng)
    full = peel(g).resolved
    reduced = FrameGraph(
        g.n_slots, g.users[:drop] + g.users[drop + 1:])
    without = peel(reduced).resolved
    others = full[:drop] + full[drop + 1:]
    for was, now in zip(others, without):
        assert now or not was
