"""Conditional connection inequalities for oriented percolation.

Connection events ("some open path from A to B inside a region") combine
into joint tables computed exactly over the union support, or by Monte
Carlo with Wilson intervals.  On top of this sit three checks: the
conditional chain for three laterally ordered target sets, the conditional
negative correlation of the outer two connections given the middle one, and
the monotonicity of the point-to-point connection probability in the
displacement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Optional, Sequence

import numpy as np

from .engine import joint_event_weights, sample_joint_event_counts
from .lattice import (
    LatticeError,
    PercolationModel,
    Region,
    Site,
    SupportTooLarge,
    support_for,
    union_support,
    _common_level,
)
from .oracle import (
    EventPredicate,
    NotStrictlySeparated,
    connection_predicate,
)
from .report import Report, ScalarRecord

Z99 = 2.5758293035489004


class ZeroDenominator(LatticeError):
    """A conditional probability's conditioning event has probability zero."""


class NonTranslationInvariantModel(LatticeError):
    """Displacement monotonicity needs one shared openness parameter."""


@dataclass(frozen=True)
class ConnectionEvent:
    """Existence of an open path from sources to targets inside a region."""

    sources: tuple
    targets: tuple
    region: Region

    def predicate(self, model: PercolationModel, name: Optional[str] = None) -> EventPredicate:
        return connection_predicate(model, self.sources, self.targets, self.region, name)


@dataclass
class EstimateReport:
    value: object
    stderr: float
    n: int
    method: str
    interval: tuple

    def to_json(self) -> dict:
        v = str(self.value) if isinstance(self.value, Fraction) else self.value
        lo, hi = self.interval
        return {
            "value": v,
            "stderr": self.stderr,
            "n": self.n,
            "method": self.method,
            "interval": [
                str(lo) if isinstance(lo, Fraction) else lo,
                str(hi) if isinstance(hi, Fraction) else hi,
            ],
        }


def wilson_interval(k: int, n: int, z: float = Z99) -> tuple:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _as_predicate(model, event) -> EventPredicate:
    if isinstance(event, ConnectionEvent):
        return event.predicate(model)
    if isinstance(event, EventPredicate):
        return event
    raise LatticeError(f"cannot interpret event {event!r}")


def joint_table(
    model: PercolationModel,
    events: Sequence,
    *,
    method: str = "exact",
    budget: int = 10**6,
    seed: int = 0,
    support_cap: int = 26,
    threads: int = 1,
):
    """Weights (exact) or counts (mc) per boolean combination of events.

    Returns (cells, denom): cell i collects outcomes where event j holds
    iff bit j of i is set; probabilities are cells[i] / denom.
    """
    preds = [_as_predicate(model, ev) for ev in events]
    spaces = [sp for pred in preds for sp in pred.spaces]
    if not spaces:
        cells = [0] * (1 << len(preds))
        combo = 0
        for j, pred in enumerate(preds):
            combo |= (1 if pred.scalar(None) else 0) << j
        cells[combo] = 1
        return cells, 1
    space = union_support(spaces)
    if len(space.items) > support_cap and method == "exact":
        raise SupportTooLarge(
            f"union support has {len(space.items)} items, cap is {support_cap}"
        )
    evaluators = [pred.vec(space) for pred in preds]
    if method == "exact":
        return joint_event_weights(model, space, evaluators, exact=True, threads=threads)
    if method != "mc":
        raise LatticeError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    counts = sample_joint_event_counts(model, space, evaluators, budget, rng)
    return [int(c) for c in counts], budget


def _mass(cells, want: dict, nevents: int):
    """Sum of cells matching the partial assignment want: {event_index: bool}."""
    total = 0
    for i, c in enumerate(cells):
        ok = True
        for j, val in want.items():
            if bool((i >> j) & 1) != val:
                ok = False
                break
        if ok:
            total += c
    return total


def event_probability(
    model: PercolationModel,
    event,
    method: str = "exact",
    budget: int = 10**6,
    seed: int = 0,
    *,
    support_cap: int = 26,
    threads: int = 1,
) -> EstimateReport:
    """Probability of one event (or predicate combination)."""
    cells, denom = joint_table(
        model, [event], method=method, budget=budget, seed=seed,
        support_cap=support_cap, threads=threads,
    )
    k = cells[1]
    if method == "exact":
        value = Fraction(k, denom) if denom else Fraction(0)
        return EstimateReport(value=value, stderr=0.0, n=denom, method="exact",
                              interval=(value, value))
    p = k / denom
    return EstimateReport(
        value=p,
        stderr=sqrt(max(p * (1 - p), 0.0) / denom),
        n=denom,
        method="mc",
        interval=wilson_interval(k, denom),
    )


def _check_laterally_ordered(*sets):
    for left, right in zip(sets, sets[1:]):
        if max(s.x for s in left) >= min(s.x for s in right):
            raise NotStrictlySeparated(
                f"{sorted(left)} is not strictly left of {sorted(right)}"
            )


def _ratio(num, den, exact: bool):
    if den == 0:
        return None
    return Fraction(num, den) if exact else num / den


def _ratio_stderr(num, den):
    if den == 0:
        return 0.0
    p = num / den
    return sqrt(max(p * (1 - p), 0.0) / den)


def _compare_record(claim, lhs, rhs, se, method, n, note="") -> ScalarRecord:
    if lhs is None or rhs is None:
        return ScalarRecord(
            claim=claim, lhs="undefined", rhs="undefined", gap="",
            method=method, n=n, holds=True, applicable=False,
            note=note or "conditioning event has probability zero",
        )
    gap = lhs - rhs
    holds = gap >= 0 if method == "exact" else gap >= -3 * se
    return ScalarRecord(
        claim=claim, lhs=lhs, rhs=rhs, gap=gap, method=method, n=n,
        holds=bool(holds), note=note,
    )


def verify_lemma61(
    model: PercolationModel,
    A,
    B1,
    B2,
    B3,
    *,
    method: str = "exact",
    budget: int = 10**6,
    seed: int = 0,
    sweep_xs: Optional[Sequence[int]] = None,
    support_cap: int = 26,
    threads: int = 1,
) -> Report:
    """Conditional connection chain for laterally ordered targets.

    With H_i the event of an open crossing from A to B_i and B1 left of B2
    left of B3, checks
      P(H1 | H2 & ~H3) >= P(H1 | H2) >= P(H1 | H2 & H3)
      P(H1 | H2) >= P(H1 | H3)
    and, sweeping a single source over x, that P(H1 | H2) never increases.
    """
    A = model.require_sites(A)
    B1 = model.require_sites(B1)
    B2 = model.require_sites(B2)
    B3 = model.require_sites(B3)
    _check_laterally_ordered(B1, B2, B3)
    m = _common_level(model, A, "A")
    n = _common_level(model, B1 + B2 + B3, "targets")
    whole = Region.whole(m, n)
    events = [
        ConnectionEvent(A, tuple(B), whole) for B in (B1, B2, B3)
    ]
    cells, denom = joint_table(
        model, events, method=method, budget=budget, seed=seed,
        support_cap=support_cap, threads=threads,
    )
    exact = method == "exact"
    w_h2 = _mass(cells, {1: True}, 3)
    w_h3 = _mass(cells, {2: True}, 3)
    if w_h2 == 0 or w_h3 == 0:
        raise ZeroDenominator("H2 and H3 must have positive probability")
    pairs = {
        "h1_h2_not3": _mass(cells, {0: True, 1: True, 2: False}, 3),
        "h2_not3": _mass(cells, {1: True, 2: False}, 3),
        "h1_h2": _mass(cells, {0: True, 1: True}, 3),
        "h1_h2_h3": _mass(cells, {0: True, 1: True, 2: True}, 3),
        "h2_h3": _mass(cells, {1: True, 2: True}, 3),
        "h1_h3": _mass(cells, {0: True, 2: True}, 3),
    }
    p_h1_given_h2 = _ratio(pairs["h1_h2"], w_h2, exact)
    p_h1_given_h2not3 = _ratio(pairs["h1_h2_not3"], pairs["h2_not3"], exact)
    p_h1_given_h2h3 = _ratio(pairs["h1_h2_h3"], pairs["h2_h3"], exact)
    p_h1_given_h3 = _ratio(pairs["h1_h3"], w_h3, exact)
    n_eff = denom if exact else budget
    records = [
        _compare_record(
            "P(H1|H2&~H3) >= P(H1|H2)",
            p_h1_given_h2not3, p_h1_given_h2,
            _ratio_stderr(pairs["h1_h2_not3"], pairs["h2_not3"]) + _ratio_stderr(pairs["h1_h2"], w_h2),
            method, n_eff,
        ),
        _compare_record(
            "P(H1|H2) >= P(H1|H2&H3)",
            p_h1_given_h2, p_h1_given_h2h3,
            _ratio_stderr(pairs["h1_h2"], w_h2) + _ratio_stderr(pairs["h1_h2_h3"], pairs["h2_h3"]),
            method, n_eff,
        ),
        _compare_record(
            "P(H1|H2) >= P(H1|H3)",
            p_h1_given_h2, p_h1_given_h3,
            _ratio_stderr(pairs["h1_h2"], w_h2) + _ratio_stderr(pairs["h1_h3"], w_h3),
            method, n_eff,
        ),
    ]
    records.append(
        _sweep_record(
            model, B1, B2, m, n, whole,
            sweep_xs, method, budget, seed, support_cap, threads,
        )
    )
    return Report(
        kind="lemma61",
        records=records,
        meta={
            "model": model.to_json(),
            "A": [[s.x, s.y] for s in A],
            "B1": [[s.x, s.y] for s in B1],
            "B2": [[s.x, s.y] for s in B2],
            "B3": [[s.x, s.y] for s in B3],
            "method": method,
        },
    )


def _sweep_record(model, B1, B2, m, n, whole, sweep_xs, method, budget, seed,
                  support_cap, threads) -> ScalarRecord:
    """P(H1 | H2) as a single source slides right, which must not increase."""
    if sweep_xs is None:
        width = n - m
        lo = min(s.x for s in B1) - width
        hi = max(s.x for s in B2) + width
        sweep_xs = range(lo, hi + 1)
    exact = method == "exact"
    values = []
    prev = None
    holds = True
    last_stderr = 0.0
    for x in sweep_xs:
        src = Site(x, m)
        if not model.site_in_lattice(src):
            continue
        ev1 = ConnectionEvent((src,), tuple(B1), whole)
        ev2 = ConnectionEvent((src,), tuple(B2), whole)
        cells, denom = joint_table(
            model, [ev1, ev2], method=method, budget=budget, seed=seed,
            support_cap=support_cap, threads=threads,
        )
        w2 = _mass(cells, {1: True}, 2)
        if w2 == 0:
            continue
        w12 = _mass(cells, {0: True, 1: True}, 2)
        val = _ratio(w12, w2, exact)
        se = _ratio_stderr(w12, w2)
        if prev is not None:
            ok = prev >= val if exact else prev - val >= -3 * (se + last_stderr)
            holds = holds and bool(ok)
        values.append([x, str(val) if exact else val])
        prev = val
        last_stderr = se
    return ScalarRecord(
        claim="P(H1|H2) nonincreasing in source x",
        lhs="sweep",
        rhs="",
        gap="",
        method=method,
        n=len(values),
        holds=holds,
        values=values,
    )


def verify_corollary62(
    model: PercolationModel,
    A,
    B1,
    B2,
    B3,
    *,
    method: str = "exact",
    budget: int = 10**6,
    seed: int = 0,
    support_cap: int = 26,
    threads: int = 1,
) -> Report:
    """Given the middle connection, the outer two connections are
    negatively correlated."""
    A = model.require_sites(A)
    B1 = model.require_sites(B1)
    B2 = model.require_sites(B2)
    B3 = model.require_sites(B3)
    _check_laterally_ordered(B1, B2, B3)
    m = _common_level(model, A, "A")
    n = _common_level(model, B1 + B2 + B3, "targets")
    whole = Region.whole(m, n)
    events = [ConnectionEvent(A, tuple(B), whole) for B in (B1, B2, B3)]
    cells, denom = joint_table(
        model, events, method=method, budget=budget, seed=seed,
        support_cap=support_cap, threads=threads,
    )
    exact = method == "exact"
    w2 = _mass(cells, {1: True}, 3)
    if w2 == 0:
        raise ZeroDenominator("H2 must have positive probability")
    w132 = _mass(cells, {0: True, 1: True, 2: True}, 3)
    w12 = _mass(cells, {0: True, 1: True}, 3)
    w32 = _mass(cells, {1: True, 2: True}, 3)
    if exact:
        joint = Fraction(w132, w2)
        product = Fraction(w12, w2) * Fraction(w32, w2)
        gap = joint - product
        holds = gap <= 0
        se = 0.0
    else:
        joint = w132 / w2
        product = (w12 / w2) * (w32 / w2)
        gap = joint - product
        se = _ratio_stderr(w132, w2) + 2 * _ratio_stderr(w12, w2)
        holds = gap <= 3 * se
    rec = ScalarRecord(
        claim="P(H1&H3|H2) <= P(H1|H2)*P(H3|H2)",
        lhs=joint,
        rhs=product,
        gap=gap,
        method=method,
        n=denom if exact else budget,
        holds=bool(holds),
    )
    return Report(
        kind="corollary62",
        records=[rec],
        meta={
            "model": model.to_json(),
            "A": [[s.x, s.y] for s in A],
            "B1": [[s.x, s.y] for s in B1],
            "B2": [[s.x, s.y] for s in B2],
            "B3": [[s.x, s.y] for s in B3],
            "method": method,
        },
    )


def verify_corollary63(
    model: PercolationModel,
    n: int,
    y_values: Optional[Sequence[int]] = None,
    *,
    method: Optional[str] = None,
    budget: int = 10**6,
    seed: int = 0,
    exact_max_level: int = 5,
    support_cap: int = 26,
    threads: int = 1,
) -> Report:
    """Point-to-point connection probability is nonincreasing in the
    displacement's distance from the drift center.

    For the bond lattice the center is 0, so the sequence over y >= 0 is
    nonincreasing; a site model with step range (a, b) is mirror symmetric
    around (a+b)n/2 and is swept from there.  Requires one shared openness
    parameter.
    """
    if not model.translation_invariant:
        raise NonTranslationInvariantModel(
            "displacement monotonicity needs a single shared parameter"
        )
    if method is None:
        method = "exact" if n <= exact_max_level else "mc"
    a = min(model.steps)
    b = max(model.steps)
    center = (a + b) * n / 2
    if y_values is None:
        ys = [y for y in range(int(np.ceil(center)), b * n + 1)
              if model.site_in_lattice(Site(y, n))]
    else:
        ys = list(y_values)
    origin = Site(0, 0)
    whole = Region.whole(0, n)
    exact = method == "exact"
    values = []
    for y in ys:
        target = Site(y, n)
        if not model.site_in_lattice(target):
            raise LatticeError(f"target {target} not on this lattice")
        if y > b * n or y < a * n:
            values.append((y, Fraction(0) if exact else 0.0, 0.0))
            continue
        est = event_probability(
            model, ConnectionEvent((origin,), (target,), whole),
            method=method, budget=budget, seed=seed + y,
            support_cap=support_cap, threads=threads,
        )
        values.append((y, est.value, est.stderr))
    holds = True
    for (y0, v0, s0), (y1, v1, s1) in zip(values, values[1:]):
        ok = v0 >= v1 if exact else v0 - v1 >= -3 * (s0 + s1)
        holds = holds and bool(ok)
    rec = ScalarRecord(
        claim="P(origin -> (y,n)) nonincreasing in y",
        lhs="sweep",
        rhs="",
        gap="",
        method=method,
        n=len(values),
        holds=holds,
        values=[[y, str(v) if exact else v] for y, v, _ in values],
    )
    return Report(
        kind="corollary63",
        records=[rec],
        meta={"model": model.to_json(), "n": n, "center": center, "method": method},
    )
