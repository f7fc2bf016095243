import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsa.graph import FrameGraph
from bcsa.stopsets import (Catalog, EnumerationBudgetError, StoppingSetRecord,
                           canonical_masks, count_configs, default_catalog,
                           enumerate_minimal, is_stopping_set, load_catalog,
                           save_catalog)

from _oracles import brute_force_config_count, is_minimal_stopping_set


@pytest.fixture(scope="module")
def catalog44():
    return enumerate_minimal(max_mu=4, q=4)


def test_counts_by_slot_budget(catalog44):
    assert catalog44.counts_by_mu() == {1: 1, 2: 2, 3: 6, 4: 22}
    assert len(catalog44) == 31


def test_smallest_sets_are_exactly_the_known_ones(catalog44):
    mu1 = [r for r in catalog44.records if r.mu == 1]
    assert len(mu1) == 1
    # two degree-1 users colliding in one slot
    assert mu1[0].profile == (0, 2, 0, 0, 0)
    assert mu1[0].nu == 2 and mu1[0].c == 1

    mu2 = sorted((r for r in catalog44.records if r.mu == 2),
                 key=lambda r: r.nu)
    assert [r.profile for r in mu2] == [(0, 0, 2, 0, 0), (0, 2, 1, 0, 0)]
    assert [r.c for r in mu2] == [1, 2]


def test_records_are_minimal_and_consistent(catalog44):
    for rec in catalog44.records:
        slot_lists = [tuple(cn for cn in range(rec.mu) if mask >> cn & 1)
                      for mask in rec.vn_masks]
        assert is_minimal_stopping_set(slot_lists)
        assert rec.nu == len(rec.vn_masks)
        assert sum(rec.profile) == rec.nu
        degs = sorted(bin(m).count("1") for m in rec.vn_masks)
        assert degs == sorted(
            d for d in range(len(rec.profile)) for _ in range(rec.profile[d]))
        assert rec.profile[0] == 0
        assert len(rec.edges()) == sum(degs)


def test_canonical_masks_idempotent_and_label_invariant(catalog44):
    rng = np.random.default_rng(0)
    for rec in catalog44.records:
        canon = canonical_masks(rec.vn_masks, rec.mu)
        assert canonical_masks(canon, rec.mu) == canon
        # relabel slots arbitrarily, shuffle users: same canonical form
        perm = rng.permutation(rec.mu)
        relabeled = []
        for mask in rec.vn_masks:
            new = 0
            for cn in range(rec.mu):
                if mask >> cn & 1:
                    new |= 1 << int(perm[cn])
            relabeled.append(new)
        rng.shuffle(relabeled)
        assert canonical_masks(relabeled, rec.mu) == canon


def test_distinct_topologies_can_share_a_profile(catalog44):
    # the four-slot tier carries repeated profiles that are not isomorphic
    seen = {}
    for rec in catalog44.records:
        seen.setdefault((rec.mu, rec.profile), []).append(
            canonical_masks(rec.vn_masks, rec.mu))
    dupes = {k: v for k, v in seen.items() if len(v) > 1}
    assert dupes, "expected at least one shared profile"
    for (mu, _), canons in dupes.items():
        assert mu == 4
        assert len(set(canons)) == len(canons)


def test_count_configs_matches_brute_force_everywhere(catalog44):
    for rec in catalog44.records:
        assert count_configs(rec) == brute_force_config_count(
            rec.vn_masks, rec.mu)


def test_count_configs_raw_masks_requires_mu():
    with pytest.raises(ValueError):
        count_configs((0b11, 0b11))
    assert count_configs((0b11, 0b11), mu=2) == 1


def test_is_stopping_set_basics():
    g = FrameGraph(4, ((0, 1), (0, 1), (2, 3), (1, 2)))
    assert is_stopping_set(g, (0, 1))
    assert not is_stopping_set(g, (0,))
    assert not is_stopping_set(g, ())
    # users 0,1 and 2 alone: slot 2,3 hold single copies
    assert not is_stopping_set(g, (0, 1, 2))
    # disconnected union of two stopping sets is not itself one here
    g2 = FrameGraph(4, ((0, 1), (0, 1), (2, 3), (2, 3)))
    assert is_stopping_set(g2, (0, 1))
    assert is_stopping_set(g2, (2, 3))
    assert not is_stopping_set(g2, (0, 1, 2, 3))
    with pytest.raises(ValueError):
        is_stopping_set(g, (0, 9))


def test_save_load_round_trip(tmp_path, catalog44):
    path = tmp_path / "cat.json"
    save_catalog(catalog44, path)
    loaded = load_catalog(path)
    assert loaded == catalog44


def test_default_catalog_matches_fresh_enumeration(catalog44):
    shipped = default_catalog()
    assert shipped.q == 4 and shipped.max_mu == 4
    assert shipped == catalog44


def test_with_mu_at_most(catalog44):
    small = catalog44.with_mu_at_most(2)
    assert small.counts_by_mu() == {1: 1, 2: 2}
    assert small.max_mu == 2


def test_budget_guard():
    with pytest.raises(EnumerationBudgetError):
        enumerate_minimal(max_mu=6, q=4)


def test_mu5_extension_total():
    # the five-slot enumeration is the expensive tier; degree cap must rise
    # with the slot budget for the census to be complete
    cat = enumerate_minimal(max_mu=5, q=5)
    counts = cat.counts_by_mu()
    assert counts[5] == 111
    assert len(cat) == 142


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_catalog_records_resist_peeling(seed):
    # embed a random catalog record into a larger frame; the embedded users
    # must be unresolvable
    from bcsa.decoder import peel
    rng = np.random.default_rng(seed)
    cat = default_catalog()
    rec = cat.records[int(rng.integers(len(cat.records)))]
    n = 12
    slot_map = rng.permutation(n)[:rec.mu]
    users = tuple(
        tuple(sorted(int(slot_map[cn]) for cn in range(rec.mu)
                     if mask >> cn & 1))
        for mask in rec.vn_masks)
    g = FrameGraph(n, users)
    assert peel(g).n_resolved == 0
    assert is_stopping_set(g, range(rec.nu))
