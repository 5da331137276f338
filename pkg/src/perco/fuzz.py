"""Seeded random geometries for the verification suites.

Everything takes an explicit random.Random so corpora are reproducible.
Generators retry until the structural preconditions hold (a crossing
exists, supports stay under the requested item budget, flanking points are
strictly separated).
"""

from __future__ import annotations

import random
from typing import Optional

from .lattice import (
    NoPath,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    strictly_left_region,
    strictly_right_region,
    support_for,
)
from .paths import PathSpec, enumerate_paths, pointwise_max, pointwise_min


def _level_candidates(model, level, lo, hi):
    return [x for x in range(lo, hi + 1) if model.site_in_lattice(Site(x, level))]


def _sample_level_set(rnd, model, level, lo, hi, count):
    xs = _level_candidates(model, level, lo, hi)
    if len(xs) < count:
        return None
    return tuple(Site(x, level) for x in sorted(rnd.sample(xs, count)))


def _support_size(model, region, A, B) -> Optional[int]:
    try:
        return len(support_for(model, region, A, B).items)
    except NoPath:
        return None


def random_geometry(
    rnd: random.Random,
    model: PercolationModel,
    *,
    max_height: int = 4,
    half_width: int = 4,
    max_items: int = 20,
    max_sources: int = 2,
    max_targets: int = 2,
    g_count: tuple = (0, 3),
    require_left_path: bool = False,
    tries: int = 200,
) -> dict:
    """A random (A, B, G) triple whose full-slab support fits the budget.

    When G is nonempty, at least one of the two laterally restricted
    regions still carries a crossing (both, when require_left_path forces
    the left one).
    """
    for _ in range(tries):
        n = rnd.randint(2, max_height)
        A = _sample_level_set(rnd, model, 0, -half_width, half_width,
                              rnd.randint(1, max_sources))
        B = _sample_level_set(rnd, model, n, -half_width, half_width,
                              rnd.randint(1, max_targets))
        if not A or not B:
            continue
        whole = Region.whole(0, n)
        size = _support_size(model, whole, A, B)
        if size is None or size > max_items:
            continue
        k = rnd.randint(*g_count)
        G = []
        for _ in range(k):
            y = rnd.randint(0, n)
            xs = _level_candidates(model, y, -half_width - 1, half_width + 1)
            if xs:
                G.append(Site(rnd.choice(xs), y))
        G = tuple(sorted(set(G)))
        if G:
            left_ok = _support_size(model, strictly_left_region(G, 0, n), A, B) is not None
            right_ok = _support_size(model, strictly_right_region(G, 0, n), A, B) is not None
            if require_left_path and not left_ok:
                continue
            if not (left_ok or right_ok):
                continue
        elif require_left_path:
            pass
        return {"A": A, "B": B, "G": G, "m": 0, "n": n}
    raise RuntimeError("geometry generator exhausted its tries")


def random_path(rnd: random.Random, model: PercolationModel, m: int, n: int,
                lo: int = -6, hi: int = 6) -> PathSpec:
    xs = _level_candidates(model, m, lo, hi)
    x = rnd.choice(xs)
    out = [x]
    steps = model.steps
    for _ in range(n - m):
        x += rnd.choice(steps)
        out.append(x)
    return PathSpec(m, tuple(out))


def random_band_triple(
    rnd: random.Random,
    model: PercolationModel,
    *,
    max_height: int = 4,
    max_items: int = 20,
    sentinel_prob: float = 0.3,
    tries: int = 300,
) -> dict:
    """Walls tau1 <= tau3 <= tau2 (outer pair strict) plus a geometry with a
    crossing in the outer band; outer walls may be sentinels."""
    from .lattice import band

    for _ in range(tries):
        n = rnd.randint(2, max_height)
        base = [random_path(rnd, model, 0, n) for _ in range(3)]
        tau3 = base[0]
        shift_l = rnd.randint(0, 2)
        shift_r = rnd.randint(0, 2)
        if shift_l + shift_r == 0:
            shift_r = 1
        unit = 2 if not model.is_site_model else 1
        lo_wall = pointwise_min(base)
        hi_wall = pointwise_max(base)
        tau1 = PathSpec(0, tuple(x - unit * shift_l for x in lo_wall.xs))
        tau2 = PathSpec(0, tuple(x + unit * shift_r for x in hi_wall.xs))
        if rnd.random() < sentinel_prob:
            tau1 = Sentinel.LEFT_INFINITE
        if rnd.random() < sentinel_prob:
            tau2 = Sentinel.RIGHT_INFINITE
        try:
            outer = band(tau1, tau2, 0, n)
        except Exception:
            continue
        a_xs = [x for x in _level_candidates(model, 0, -10, 10) if outer.admits(x, 0)]
        b_xs = [x for x in _level_candidates(model, n, -10, 10) if outer.admits(x, n)]
        if not a_xs or not b_xs:
            continue
        A = tuple(Site(x, 0) for x in sorted(rnd.sample(a_xs, min(len(a_xs), rnd.randint(1, 2)))))
        B = tuple(Site(x, n) for x in sorted(rnd.sample(b_xs, min(len(b_xs), rnd.randint(1, 2)))))
        size = _support_size(model, outer, A, B)
        if size is None or size > max_items:
            continue
        return {"tau1": tau1, "tau2": tau2, "tau3": tau3, "A": A, "B": B, "m": 0, "n": n}
    raise RuntimeError("band generator exhausted its tries")


def random_augmentation(
    rnd: random.Random,
    model: PercolationModel,
    *,
    max_height: int = 4,
    max_items: int = 18,
    tries: int = 300,
) -> dict:
    """Geometry plus a flanking point for the source or target set."""
    unit = 2 if not model.is_site_model else 1
    for _ in range(tries):
        geo = random_geometry(rnd, model, max_height=max_height,
                              max_items=max_items, g_count=(0, 0))
        at = rnd.choice(("start", "end"))
        side = rnd.choice(("left", "right"))
        anchor = geo["A"] if at == "start" else geo["B"]
        level = 0 if at == "start" else geo["n"]
        gap = unit * rnd.randint(1, 2)
        if side == "right":
            extra = Site(max(s.x for s in anchor) + gap, level)
        else:
            extra = Site(min(s.x for s in anchor) - gap, level)
        if not model.site_in_lattice(extra):
            continue
        new_set = tuple(sorted(anchor + (extra,)))
        whole = Region.whole(0, geo["n"])
        if at == "start":
            size = _support_size(model, whole, new_set, geo["B"])
        else:
            size = _support_size(model, whole, geo["A"], new_set)
        if size is None or size > max_items + 6:
            continue
        return {**geo, "extra": extra, "side": side, "at": at}
    raise RuntimeError("augmentation generator exhausted its tries")


def random_ordered_targets(
    rnd: random.Random,
    model: PercolationModel,
    *,
    max_height: int = 4,
    max_union_items: int = 18,
    tries: int = 400,
) -> dict:
    """A plus three laterally ordered target sets with crossings to the
    middle and right ones, for the conditional-chain checks."""
    from .lattice import union_support

    unit = 2 if not model.is_site_model else 1
    for _ in range(tries):
        n = rnd.randint(2, max_height)
        A = _sample_level_set(rnd, model, 0, -2, 2, rnd.randint(1, 2))
        if not A:
            continue
        x1 = rnd.randint(-n - 2, 0)
        x1 -= (x1 + n) % unit
        x2 = x1 + unit * rnd.randint(1, 2)
        x3 = x2 + unit * rnd.randint(1, 2)
        targets = [Site(x1, n), Site(x2, n), Site(x3, n)]
        if not all(model.site_in_lattice(s) for s in targets):
            continue
        whole = Region.whole(0, n)
        B1, B2, B3 = ((t,) for t in targets)
        sups = []
        for Bi in (B1, B2, B3):
            try:
                sups.append(support_for(model, whole, A, Bi))
            except NoPath:
                sups.append(None)
        if sups[1] is None or sups[2] is None:
            continue
        union = union_support([s for s in sups if s is not None])
        if len(union.items) > max_union_items:
            continue
        return {"A": A, "B1": B1, "B2": B2, "B3": B3, "m": 0, "n": n}
    raise RuntimeError("ordered-target generator exhausted its tries")
