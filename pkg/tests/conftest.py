"""Shared brute-force oracles for the test suite.

These deliberately avoid the production enumeration engine: weights are
plain Fraction products, extreme paths come from filtering the full path
list, so they can vouch for the fast paths.
"""

from __future__ import annotations

from fractions import Fraction

from perco.lattice import Edge, PercolationModel, Site, Variant
from perco.paths import Configuration, enumerate_paths, path_leq


def config_weight_fraction(model: PercolationModel, support, bits: int) -> Fraction:
    """Exact probability of one configuration, written independently of the
    engine's integer-numerator scheme."""
    w = Fraction(1)
    if model.variant is Variant.CORRELATED_PAIR_BOND:
        by_src = {}
        for i, e in enumerate(support.items):
            by_src.setdefault(e.src, {})[e.step] = (bits >> i) & 1
        for src, states in by_src.items():
            law = model.pair_law_at(src)
            if -1 in states and 1 in states:
                w *= law[(states[-1] << 1) | states[1]]
            elif -1 in states:
                p_open = law[2] + law[3]
                w *= p_open if states[-1] else 1 - p_open
            else:
                p_open = law[1] + law[3]
                w *= p_open if states[1] else 1 - p_open
        return w
    for i, item in enumerate(support.items):
        p = model.site_prob(item) if model.is_site_model else model.edge_prob(item)
        w *= p if (bits >> i) & 1 else 1 - p
    return w


def path_open_in_config(config: Configuration, path) -> bool:
    support = config.support
    if support.kind == "edge":
        for i in range(len(path.xs) - 1):
            e = Edge(Site(path.xs[i], path.m + i), path.xs[i + 1] - path.xs[i])
            if e not in support.index or not config.is_open(e):
                return False
        return True
    for i, x in enumerate(path.xs):
        s = Site(x, path.m + i)
        if s not in support.index or not config.is_open(s):
            return False
    return True


def brute_force_extreme(model, config, A, B, region, side: str):
    """Extreme open path as the order-minimum (maximum) over the filtered
    path enumeration; None when no path is open."""
    open_paths = [
        p for p in enumerate_paths(model, A, B, region)
        if path_open_in_config(config, p)
    ]
    if not open_paths:
        return None
    best = None
    for p in open_paths:
        if side == "left":
            if all(path_leq(p, q) for q in open_paths):
                best = p
                break
        else:
            if all(path_leq(q, p) for q in open_paths):
                best = p
                break
    assert best is not None, "open paths had no order extremum"
    return best


def brute_extreme_distribution(model, A, B, region, side: str, condition=None):
    """Conditional extreme-path law by direct summation over configurations."""
    from perco.lattice import support_for

    support = support_for(model, region, A, B)
    hist = {}
    total = Fraction(0)
    for bits in range(1 << len(support.items)):
        config = Configuration(support, bits)
        if condition is not None and not condition(config):
            continue
        extreme = brute_force_extreme(model, config, A, B, region, side)
        if extreme is None:
            continue
        w = config_weight_fraction(model, support, bits)
        total += w
        hist[extreme] = hist.get(extreme, Fraction(0)) + w
    return {p: w / total for p, w in hist.items() if w}


def brute_event_probability(model, support, event_fn) -> Fraction:
    total = Fraction(0)
    for bits in range(1 << len(support.items)):
        if event_fn(Configuration(support, bits)):
            total += config_weight_fraction(model, support, bits)
    return total
