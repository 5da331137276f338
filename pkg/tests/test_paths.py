"""Path order, enumeration, boundary paths, and extreme-path extraction."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_force_extreme
from perco.lattice import (
    EmptyG,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    strictly_left_region,
    support_for,
)
from perco.paths import (
    Configuration,
    LevelMismatch,
    PathSpec,
    concat,
    enumerate_paths,
    enumerate_paths_through,
    leftmost_open_path,
    open_path_exists,
    path_leq,
    path_lt,
    pointwise_max,
    pointwise_min,
    rightmost_open_path,
    strictly_left_of_set,
    strictly_right_of_set,
    tau_boundary,
)

BOND = PercolationModel(p="1/2")
SITE01 = PercolationModel(variant="IndependentSite", p="1/2")
RANGE = PercolationModel(variant="RangeSite", p="1/2", step_range=(-1, 2))


class TestOrder:
    def test_basic_compare(self):
        a = PathSpec(0, (0, -1, 0))
        b = PathSpec(0, (0, 1, 0))
        assert path_leq(a, b)
        assert not path_lt(a, b)

    def test_reflexive(self):
        a = PathSpec(0, (0, -1, 0))
        assert path_leq(a, a)

    def test_not_leq_when_right(self):
        assert not path_leq(PathSpec(0, (0, 1, 0)), PathSpec(0, (0, -1, 0)))

    def test_sentinels(self):
        a = PathSpec(0, (0, 1, 0))
        assert path_leq(Sentinel.LEFT_INFINITE, a)
        assert path_lt(Sentinel.LEFT_INFINITE, a)
        assert path_leq(a, Sentinel.RIGHT_INFINITE)
        assert path_lt(Sentinel.LEFT_INFINITE, Sentinel.RIGHT_INFINITE)
        assert not path_lt(Sentinel.LEFT_INFINITE, Sentinel.LEFT_INFINITE)

    def test_level_mismatch(self):
        with pytest.raises(LevelMismatch):
            path_leq(PathSpec(0, (0, 1)), PathSpec(1, (1, 0)))

    def test_concat(self):
        joined = concat(PathSpec(0, (0, 1)), PathSpec(1, (1, 0)))
        assert joined == PathSpec(0, (0, 1, 0))


class TestEnumeration:
    def test_diamond(self):
        paths = enumerate_paths(BOND, [Site(0, 0)], [Site(0, 2)], Region.whole(0, 2))
        assert [p.xs for p in paths] == [(0, -1, 0), (0, 1, 0)]

    def test_full_slab_is_all_sign_choices(self):
        B = [Site(x, 4) for x in range(-4, 5) if (x + 4) % 2 == 0]
        paths = enumerate_paths(BOND, [Site(0, 0)], B, Region.whole(0, 4))
        assert len(paths) == 16

    def test_lexicographic_order(self):
        B = [Site(x, 3) for x in (-3, -1, 1, 3)]
        paths = enumerate_paths(BOND, [Site(0, 0)], B, Region.whole(0, 3))
        assert [p.xs for p in paths] == sorted(p.xs for p in paths)

    def test_through_constraint(self):
        paths = enumerate_paths_through(
            BOND, [Site(0, 0)], [Site(1, 1)], [Site(0, 2)], Region.whole(0, 2)
        )
        assert [p.xs for p in paths] == [(0, 1, 0)]


class TestTauBoundary:
    def test_single_point(self):
        assert tau_boundary(BOND, [Site(1, 1)], 0, 2).xs == (2, 1, 2)

    def test_point_at_bottom(self):
        assert tau_boundary(BOND, [Site(0, 0)], 0, 2).xs == (0, 1, 2)

    def test_two_points_take_the_nearer_cone(self):
        assert tau_boundary(BOND, [Site(1, 1), Site(3, 1)], 0, 2).xs == (2, 1, 2)

    def test_empty_raises(self):
        with pytest.raises(EmptyG):
            tau_boundary(BOND, [], 0, 2)
        with pytest.raises(EmptyG):
            tau_boundary(BOND, [Site(0, 6)], 0, 2)

    def _window_paths(self, model, n, w):
        A = [Site(x, 0) for x in range(-w, w + 1) if model.site_in_lattice(Site(x, 0))]
        B = [Site(x, n) for x in range(-w - n, w + n + 1) if model.site_in_lattice(Site(x, n))]
        return enumerate_paths(model, A, B, Region.whole(0, n))

    @pytest.mark.parametrize("model", [BOND, SITE01, RANGE], ids=["bond", "site01", "range"])
    def test_separation_equivalence_exhaustive(self, model):
        rnd = random.Random(11)
        paths = self._window_paths(model, 3, 3)
        for _ in range(25):
            G = []
            for _ in range(rnd.randint(1, 4)):
                y = rnd.randint(0, 3)
                xs = [x for x in range(-5, 6) if model.site_in_lattice(Site(x, y))]
                G.append(Site(rnd.choice(xs), y))
            left_tau = tau_boundary(model, G, 0, 3, side="left")
            right_tau = tau_boundary(model, G, 0, 3, side="right")
            for gamma in paths:
                assert strictly_left_of_set(gamma, G) == path_lt(gamma, left_tau)
                assert strictly_right_of_set(gamma, G) == path_lt(right_tau, gamma)


def _all_configs_match_brute(model, A, B, region):
    sup = support_for(model, region, A, B)
    for bits in range(1 << len(sup.items)):
        config = Configuration(sup, bits)
        for side, fast in (
            ("left", leftmost_open_path),
            ("right", rightmost_open_path),
        ):
            expect = brute_force_extreme(model, config, A, B, region, side)
            assert fast(config) == expect, (model.variant, bits, side)


class TestExtremePaths:
    def test_diamond_both_open(self):
        sup = support_for(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        config = Configuration(sup, 0b1111)
        assert leftmost_open_path(config).xs == (0, -1, 0)
        assert rightmost_open_path(config).xs == (0, 1, 0)

    def test_diamond_only_right_open(self):
        from perco.lattice import Edge

        sup = support_for(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        bits = (1 << sup.index[Edge(Site(0, 0), 1)]) | (1 << sup.index[Edge(Site(1, 1), -1)])
        config = Configuration(sup, bits)
        assert leftmost_open_path(config).xs == (0, 1, 0)

    def test_diamond_broken_left_top(self):
        sup = support_for(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        from perco.lattice import Edge

        bits = (1 << len(sup.items)) - 1
        bits &= ~(1 << sup.index[Edge(Site(-1, 1), 1)])
        config = Configuration(sup, bits)
        assert leftmost_open_path(config).xs == (0, 1, 0)

    def test_absence_is_none(self):
        sup = support_for(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        config = Configuration(sup, 0)
        assert leftmost_open_path(config) is None
        assert not open_path_exists(config)

    def test_exhaustive_bond_diamond_slab(self):
        _all_configs_match_brute(BOND, [Site(0, 0)], [Site(0, 2)], Region.whole(0, 2))
        _all_configs_match_brute(
            BOND, [Site(0, 0)], [Site(0, 4)],
            strictly_left_region([Site(3, 1)], 0, 4),
        )

    def test_exhaustive_site01(self):
        _all_configs_match_brute(
            SITE01, [Site(0, 0)], [Site(1, 2)], Region.whole(0, 2)
        )
        _all_configs_match_brute(
            SITE01, [Site(0, 0), Site(1, 0)], [Site(0, 3), Site(2, 3)],
            strictly_left_region([Site(3, 2)], 0, 3),
        )

    def test_exhaustive_range_site(self):
        _all_configs_match_brute(
            RANGE, [Site(0, 0)], [Site(0, 2), Site(1, 2)], Region.whole(0, 2)
        )

    @given(st.integers(0, (1 << 12) - 1))
    @settings(max_examples=60, deadline=None)
    def test_min_max_closure_bond(self, bits):
        sup = support_for(BOND, Region.whole(0, 3), [Site(0, 0)],
                          [Site(-1, 3), Site(1, 3)])
        bits &= (1 << len(sup.items)) - 1
        config = Configuration(sup, bits)
        from conftest import path_open_in_config

        open_paths = [
            p for p in enumerate_paths(BOND, [Site(0, 0)], [Site(-1, 3), Site(1, 3)],
                                       Region.whole(0, 3))
            if path_open_in_config(config, p)
        ]
        for p in open_paths:
            for q in open_paths:
                assert path_open_in_config(config, pointwise_min([p, q]))
                assert path_open_in_config(config, pointwise_max([p, q]))

    @given(st.integers(0, (1 << 15) - 1))
    @settings(max_examples=60, deadline=None)
    def test_min_max_closure_range_site(self, bits):
        sup = support_for(RANGE, Region.whole(0, 2), [Site(0, 0), Site(1, 0)],
                          [Site(0, 2), Site(2, 2)])
        bits &= (1 << len(sup.items)) - 1
        config = Configuration(sup, bits)
        from conftest import path_open_in_config

        open_paths = [
            p for p in enumerate_paths(RANGE, [Site(0, 0), Site(1, 0)],
                                       [Site(0, 2), Site(2, 2)], Region.whole(0, 2))
            if path_open_in_config(config, p)
        ]
        for p in open_paths:
            for q in open_paths:
                assert path_open_in_config(config, pointwise_min([p, q]))
                assert path_open_in_config(config, pointwise_max([p, q]))

    def test_enumeration_extremes_match_order_extremes(self):
        B = [Site(x, 3) for x in (-3, -1, 1, 3)]
        paths = enumerate_paths(BOND, [Site(0, 0)], B, Region.whole(0, 3))
        leftmost = paths[0]
        rightmost = paths[-1]
        assert all(path_leq(leftmost, p) for p in paths)
        assert all(path_leq(p, rightmost) for p in paths)


class TestConfiguration:
    def test_bits_out_of_range(self):
        sup = support_for(BOND, Region.whole(0, 2), [Site(0, 0)], [Site(0, 2)])
        with pytest.raises(Exception):
            Configuration(sup, 1 << 10)

    def test_view_with_other_targets(self):
        sup = support_for(BOND, Region.whole(0, 2), [Site(0, 0)],
                          [Site(-2, 2), Site(0, 2), Site(2, 2)])
        full = Configuration(sup, (1 << len(sup.items)) - 1)
        assert open_path_exists(full, [Site(0, 0)], [Site(2, 2)], Region.whole(0, 2))
        assert leftmost_open_path(
            full, [Site(0, 0)], [Site(2, 2)], Region.whole(0, 2)
        ).xs == (0, 1, 2)
