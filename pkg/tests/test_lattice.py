"""Lattice geometry, regions, models, and supports."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from perco.lattice import (
    Edge,
    LatticeError,
    NEG_INF,
    NoPath,
    NotStrictlyOrdered,
    POS_INF,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    Variant,
    band,
    edge_support,
    level_sites,
    pair_law_from_correlation,
    site_support,
    strictly_left_region,
    strictly_right_region,
    support_for,
)
from perco.paths import PathSpec

BOND = PercolationModel(p="1/2")
SITE = PercolationModel(variant="IndependentSite", p="1/2")


def admitted(model, region, level, lo=-6, hi=6):
    return [x for x in range(lo, hi + 1)
            if region.admits(x, level) and model.site_in_lattice(Site(x, level))]


class TestLevelSites:
    def test_bond_level0(self):
        assert level_sites(BOND, 0, (-2, 2)) == [Site(-2, 0), Site(0, 0), Site(2, 0)]

    def test_bond_level1(self):
        assert level_sites(BOND, 1, (-2, 2)) == [Site(-1, 1), Site(1, 1)]

    def test_site_lattice_no_parity(self):
        assert level_sites(SITE, 1, (0, 2)) == [Site(0, 1), Site(1, 1), Site(2, 1)]


class TestRegions:
    def test_strictly_left_single_point(self):
        region = strictly_left_region([Site(1, 1)], 0, 2)
        assert admitted(BOND, region, 1) == [-5, -3, -1]
        assert admitted(BOND, region, 0) == [-6, -4, -2, 0, 2, 4, 6]

    def test_strictly_left_empty_G_is_whole_slab(self):
        region = strictly_left_region([], 0, 3)
        assert region.bounds == Region.whole(0, 3).bounds

    def test_strictly_left_two_points(self):
        region = strictly_left_region([Site(0, 0), Site(2, 2)], 0, 2)
        assert region.level_bounds(0) == (NEG_INF, 0)
        assert region.level_bounds(1) == (NEG_INF, POS_INF)
        assert region.level_bounds(2) == (NEG_INF, 2)

    def test_strictly_right_uses_sup(self):
        region = strictly_right_region([Site(0, 1), Site(2, 1)], 0, 2)
        assert region.level_bounds(1) == (2, POS_INF)

    def test_band_of_sentinels_is_whole_slab(self):
        region = band(Sentinel.LEFT_INFINITE, Sentinel.RIGHT_INFINITE, 0, 2)
        assert region.bounds == Region.whole(0, 2).bounds

    def test_band_can_have_empty_levels(self):
        tau1 = PathSpec(0, (-2, -1, -2))
        tau2 = PathSpec(0, (2, 1, 2))
        region = band(tau1, tau2)
        assert admitted(BOND, region, 0) == [0]
        assert admitted(BOND, region, 1) == []
        assert admitted(BOND, region, 2) == [0]

    def test_band_unique_path(self):
        from perco.paths import enumerate_paths

        tau1 = PathSpec(0, (-2, -1, -2))
        tau2 = PathSpec(0, (2, 3, 2))
        region = band(tau1, tau2)
        assert admitted(BOND, region, 1) == [1]
        paths = enumerate_paths(BOND, [Site(0, 0)], [Site(0, 2)], region)
        assert [p.xs for p in paths] == [(0, 1, 0)]

    def test_band_rejects_crossing_walls(self):
        tau1 = PathSpec(0, (0, 1, 0))
        tau2 = PathSpec(0, (0, 1, 2))
        with pytest.raises(NotStrictlyOrdered):
            band(tau1, tau2)

    @given(
        st.lists(
            st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
            min_size=3, max_size=3,
        ),
        st.lists(
            st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
            min_size=3, max_size=3,
        ),
    )
    def test_intersection_is_componentwise(self, bounds_a, bounds_b):
        ra = Region(0, 2, tuple((min(a, b), max(a, b) + 1) for a, b in bounds_a))
        rb = Region(0, 2, tuple((min(a, b), max(a, b) + 1) for a, b in bounds_b))
        both = ra.intersect(rb)
        for level in range(3):
            for x in range(-7, 8):
                assert both.admits(x, level) == (ra.admits(x, level) and rb.admits(x, level))

    def test_region_json_roundtrip(self):
        region = strictly_left_region([Site(1, 1)], 0, 2)
        assert Region.from_json(region.to_json()).bounds == region.bounds


class TestSupports:
    def test_diamond_has_four_edges(self):
        sup = edge_support(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        assert len(sup.items) == 4

    def test_left_restricted_diamond_has_two_edges(self):
        region = strictly_left_region([Site(1, 1)], 0, 2)
        sup = edge_support(BOND, region, [Site(0, 0)], [Site(0, 2)])
        assert len(sup.items) == 2
        assert sup.items == (
            Edge(Site(0, 0), -1),
            Edge(Site(-1, 1), 1),
        )

    def test_out_of_reach_raises(self):
        with pytest.raises(NoPath):
            edge_support(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(4, 2)])

    def test_items_sorted_by_level_x_step(self):
        sup = edge_support(BOND, Region.whole(0, 3), [Site(-2, 0), Site(0, 0)], [Site(1, 3)])
        keys = [(e.src.y, e.src.x, e.step) for e in sup.items]
        assert keys == sorted(keys)

    def test_invariant_under_endpoint_reordering(self):
        region = Region.whole(0, 3)
        a = edge_support(BOND, region, [Site(-2, 0), Site(2, 0)], [Site(-1, 3), Site(1, 3)])
        b = edge_support(BOND, region, [Site(2, 0), Site(-2, 0)], [Site(1, 3), Site(-1, 3)])
        assert a.items == b.items

    def test_monotone_under_region_enlargement(self):
        small = strictly_left_region([Site(1, 1)], 0, 2)
        sup_small = edge_support(BOND, small, [Site(0, 0)], [Site(0, 2)])
        sup_big = edge_support(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        assert set(sup_small.items) <= set(sup_big.items)

    def test_site_support_contains_endpoints(self):
        sup = site_support(SITE, Region.whole(0, 2), [Site(0, 0)], [Site(1, 2)])
        assert Site(0, 0) in sup.index and Site(1, 2) in sup.index

    def test_kind_guards(self):
        with pytest.raises(LatticeError):
            site_support(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        with pytest.raises(LatticeError):
            edge_support(SITE, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])

    def test_support_for_rejects_off_lattice_sites(self):
        with pytest.raises(LatticeError):
            support_for(BOND, Region.whole(0, 2), [Site(1, 0)], [Site(0, 2)])


class TestModels:
    def test_float_probability_reads_as_decimal(self):
        assert PercolationModel(p=0.2).p == Fraction(1, 5)

    def test_bad_probability_rejected(self):
        with pytest.raises(LatticeError):
            PercolationModel(p="3/2")

    def test_pair_law_marginals_must_match(self):
        with pytest.raises(LatticeError):
            PercolationModel(
                variant="CorrelatedPairBond",
                p="1/2",
                pair_law=("1/2", "1/4", "1/8", "1/8"),
            )

    def test_pair_law_from_correlation(self):
        law = pair_law_from_correlation("1/2", "1/2")
        assert sum(law) == 1
        assert law[2] + law[3] == Fraction(1, 2)
        assert law[3] == Fraction(3, 8)
        with pytest.raises(LatticeError):
            pair_law_from_correlation("1/5", "-1/2")

    def test_zero_correlation_factorizes(self):
        m = PercolationModel(variant="CorrelatedPairBond", p="1/2",
                             pair_law=pair_law_from_correlation("1/2", 0))
        assert m.pair_law_factorizes
        m2 = PercolationModel(variant="CorrelatedPairBond", p="1/2",
                              pair_law=pair_law_from_correlation("1/2", "1/2"))
        assert not m2.pair_law_factorizes

    def test_range_must_straddle_zero(self):
        with pytest.raises(LatticeError):
            PercolationModel(variant="RangeSite", step_range=(1, 2))

    def test_json_roundtrip(self):
        m = PercolationModel(
            variant="CorrelatedPairBond", p="2/5",
            pair_law=pair_law_from_correlation("2/5", "1/4"),
        )
        again = PercolationModel.from_json(m.to_json())
        assert again.pair_law == m.pair_law and again.p == m.p

    def test_json_rejects_unknown_field(self):
        with pytest.raises(LatticeError, match="bogus"):
            PercolationModel.from_json({"variant": "IndependentBond", "bogus": 1})

    def test_json_per_edge_table(self):
        m = PercolationModel.from_json(
            {"variant": "IndependentBond", "p": 0.5, "per_edge": {"0,0,1": 0.25}}
        )
        assert m.edge_prob(Edge(Site(0, 0), 1)) == Fraction(1, 4)
        assert m.edge_prob(Edge(Site(0, 0), -1)) == Fraction(1, 2)
        assert not m.translation_invariant
