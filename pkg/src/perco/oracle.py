"""Exact conditional extreme-path laws and stochastic-order decisions.

The conditional law of the leftmost (or rightmost) open source-to-target
path, given that at least one open path exists (optionally intersected with
a further event), is computed by full enumeration of the support's
configurations, in exact rational arithmetic by default.

Stochastic order between two path laws is decided through a coupling
network: a flow of full mass through the order's comparable pairs exists
exactly when the order holds, the flow itself is a monotone coupling, and
a failed decision yields a violating up-set from the minimum cut.  An
independent up-set enumerator cross-checks the network decision at small
scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .engine import (
    VecView,
    exists_chunk,
    path_histograms,
    decode_path_code,
)
from .lattice import (
    LatticeError,
    NoPath,
    NotStrictlyOrdered,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    Support,
    SupportTooLarge,
    band,
    strictly_left_region,
    strictly_right_region,
    support_for,
    union_support,
    _common_level,
)
from .maxflow import FlowNetwork
from .paths import (
    Configuration,
    PathSpec,
    compile_view,
    default_view,
    open_path_exists,
    path_leq,
)
from .report import DominanceRecord, Report


class ZeroProbabilityCondition(LatticeError):
    """Conditioning event has probability zero together with a crossing."""


class IncompatibleBases(LatticeError):
    """Two path laws do not live on comparable path sets."""


class NotStrictlySeparated(LatticeError):
    """A site meant to flank a set overlaps its x-span."""


# --- events -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EventPredicate:
    """Named, pure predicate on configurations.

    spaces lists the supports whose items the predicate reads; an
    enumeration joins them to its own support before evaluating.  vec maps
    a host support to a vectorized evaluator over packed configuration ids.
    """

    name: str
    spaces: tuple
    scalar: Callable[[Configuration], bool]
    vec: Callable[[Support], Callable[[np.ndarray], np.ndarray]]

    def __and__(self, other: "EventPredicate") -> "EventPredicate":
        return EventPredicate(
            name=f"({self.name})&({other.name})",
            spaces=self.spaces + other.spaces,
            scalar=lambda cfg, a=self.scalar, b=other.scalar: a(cfg) and b(cfg),
            vec=lambda space, a=self.vec, b=other.vec: (
                lambda ids, fa=a(space), fb=b(space): fa(ids) & fb(ids)
            ),
        )

    def __or__(self, other: "EventPredicate") -> "EventPredicate":
        return EventPredicate(
            name=f"({self.name})|({other.name})",
            spaces=self.spaces + other.spaces,
            scalar=lambda cfg, a=self.scalar, b=other.scalar: a(cfg) or b(cfg),
            vec=lambda space, a=self.vec, b=other.vec: (
                lambda ids, fa=a(space), fb=b(space): fa(ids) | fb(ids)
            ),
        )

    def __invert__(self) -> "EventPredicate":
        return EventPredicate(
            name=f"~({self.name})",
            spaces=self.spaces,
            scalar=lambda cfg, a=self.scalar: not a(cfg),
            vec=lambda space, a=self.vec: (lambda ids, fa=a(space): ~fa(ids)),
        )


def constant_predicate(value: bool, name: Optional[str] = None) -> EventPredicate:
    name = name or ("true" if value else "false")
    return EventPredicate(
        name=name,
        spaces=(),
        scalar=lambda cfg: value,
        vec=lambda space: (lambda ids: np.full(ids.shape, value, dtype=bool)),
    )


def connection_predicate(
    model: PercolationModel, A, B, region: Region, name: Optional[str] = None
) -> EventPredicate:
    """Event that an open path runs from A to B inside region.

    Degenerates to the constant-false predicate when no structural path
    exists at all.
    """
    A = tuple(Site(*s) for s in A)
    B = tuple(Site(*s) for s in B)
    name = name or f"connect({list(map(tuple, A))}->{list(map(tuple, B))})"
    try:
        sup = support_for(model, region, A, B)
    except NoPath:
        return constant_predicate(False, name=name)

    def vec(space: Support):
        vv = VecView.from_view(compile_view(space, A, B, region))
        return lambda ids: exists_chunk(vv, ids)

    return EventPredicate(
        name=name,
        spaces=(sup,),
        scalar=lambda cfg: open_path_exists(cfg, A, B, region),
        vec=vec,
    )


# --- path distributions ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PathDistribution:
    """Finitely supported law on source-to-target paths."""

    sources: tuple
    targets: tuple
    region: Region
    weights: dict
    exact: bool = True

    def __post_init__(self):
        ordered = dict(sorted(self.weights.items(), key=lambda kv: kv[0].xs))
        object.__setattr__(self, "weights", ordered)
        total = sum(ordered.values())
        if self.exact:
            if total != 1:
                raise LatticeError(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise LatticeError(f"weights sum to {total}, not 1")

    @property
    def span(self) -> tuple:
        p = next(iter(self.weights))
        return (p.m, p.n)

    def paths(self):
        return list(self.weights)

    def mass(self, paths: Iterable[PathSpec]):
        zero = Fraction(0) if self.exact else 0.0
        return sum((self.weights.get(p, zero) for p in paths), zero)

    def expectation(self, phi):
        return sum(w * phi(p) for p, w in self.weights.items())

    @staticmethod
    def point_mass(path: PathSpec, sources, targets, region, exact=True) -> "PathDistribution":
        one = Fraction(1) if exact else 1.0
        return PathDistribution(tuple(sources), tuple(targets), region, {path: one}, exact)

    def descriptor(self, label: str = "") -> dict:
        return {
            "label": label,
            "A": [[s.x, s.y] for s in self.sources],
            "B": [[s.x, s.y] for s in self.targets],
            "region": self.region.to_json(),
            "weights": [
                {"path": p.to_json(), "weight": str(w) if self.exact else w}
                for p, w in self.weights.items()
            ],
        }

    def to_json(self) -> dict:
        out = self.descriptor()
        out.pop("label")
        out["exact"] = self.exact
        return out

    @staticmethod
    def from_json(obj) -> "PathDistribution":
        exact = bool(obj.get("exact", True))
        weights = {}
        for entry in obj["weights"]:
            w = entry["weight"]
            weights[PathSpec.from_json(entry["path"])] = (
                Fraction(w) if exact else float(w)
            )
        return PathDistribution(
            tuple(Site(*s) for s in obj["A"]),
            tuple(Site(*s) for s in obj["B"]),
            Region.from_json(obj["region"]),
            weights,
            exact,
        )


def exact_extreme_pair(
    model: PercolationModel,
    A,
    B,
    region: Region,
    condition: Optional[EventPredicate] = None,
    *,
    exact: bool = True,
    support_cap: int = 26,
    threads: int = 1,
):
    """Both extreme-path laws from a single enumeration pass."""
    A = tuple(Site(*s) for s in A)
    B = tuple(Site(*s) for s in B)
    main = support_for(model, region, A, B)
    if condition is not None and condition.spaces:
        space = union_support([main, *condition.spaces])
    else:
        space = main
    if len(space.items) > support_cap:
        raise SupportTooLarge(
            f"support has {len(space.items)} items, cap is {support_cap}"
        )
    view = default_view(space) if space is main else compile_view(space, A, B, region)
    cond_fn = condition.vec(space) if condition is not None else None
    res = path_histograms(
        model, space, view, condition=cond_fn, sides=("left", "right"),
        exact=exact, threads=threads,
    )
    if res.selected == 0:
        raise ZeroProbabilityCondition(
            "no crossing configuration satisfies the condition"
        )
    out = []
    for hist in (res.left, res.right):
        if exact:
            weights = {
                decode_path_code(view, code): Fraction(num, res.selected)
                for code, num in hist.items()
            }
        else:
            weights = {
                decode_path_code(view, code): num / res.selected
                for code, num in hist.items()
            }
        out.append(PathDistribution(tuple(A), tuple(B), region, weights, exact))
    return tuple(out)


def exact_extreme_distribution(
    model: PercolationModel,
    A,
    B,
    region: Region,
    side: str = "left",
    condition: Optional[EventPredicate] = None,
    *,
    exact: bool = True,
    support_cap: int = 26,
    threads: int = 1,
) -> PathDistribution:
    """Law of the leftmost or rightmost open path given a crossing (and an
    optional further event)."""
    if side not in ("left", "right"):
        raise LatticeError(f"side must be 'left' or 'right', got {side!r}")
    pair = exact_extreme_pair(
        model, A, B, region, condition,
        exact=exact, support_cap=support_cap, threads=threads,
    )
    return pair[0] if side == "left" else pair[1]


# --- stochastic order ------------------------------------------------------------


@dataclass
class DominanceResult:
    holds: bool
    certificate: Optional[dict] = None
    violating_up_set: Optional[list] = None
    lhs_up_mass: object = None
    rhs_up_mass: object = None

    def __bool__(self) -> bool:
        return self.holds


def _check_compatible(mu: PathDistribution, nu: PathDistribution):
    if mu.span != nu.span:
        raise IncompatibleBases(f"path spans differ: {mu.span} vs {nu.span}")


def stochastic_leq(
    mu: PathDistribution, nu: PathDistribution, *, method: str = "maxflow"
) -> DominanceResult:
    """Decide whether mu sits stochastically to the left of nu.

    method="maxflow" builds the coupling network and returns the coupling
    as certificate (or a violating up-set from the minimum cut);
    method="upsets" enumerates every up-set of the joint support and is the
    independent cross-check.
    """
    _check_compatible(mu, nu)
    if method == "upsets":
        return _stochastic_leq_upsets(mu, nu)
    if method != "maxflow":
        raise LatticeError(f"unknown method {method!r}")
    exact = mu.exact and nu.exact
    lhs = list(mu.weights.items())
    rhs = list(nu.weights.items())
    if not exact:
        lhs = [(p, float(w)) for p, w in lhs]
        rhs = [(p, float(w)) for p, w in rhs]
    total = sum(w for _, w in lhs)
    net = FlowNetwork()
    src, snk = ("src",), ("snk",)
    middle = {}
    for i, (p, w) in enumerate(lhs):
        net.add_edge(src, ("L", i), w)
    for j, (q, w) in enumerate(rhs):
        net.add_edge(("R", j), snk, w)
    for i, (p, _) in enumerate(lhs):
        for j, (q, _) in enumerate(rhs):
            if path_leq(p, q):
                middle[(i, j)] = len(net.edges)
                net.add_edge(("L", i), ("R", j), total)
    flow = net.max_flow(src, snk)
    if exact:
        holds = flow == total
    else:
        holds = abs(flow - total) <= 1e-9
    if holds:
        coupling = {}
        for (i, j), ei in middle.items():
            w = net.flow_on(ei)
            if w > 0:
                coupling[(lhs[i][0], rhs[j][0])] = w
        return DominanceResult(holds=True, certificate=coupling)
    cut = net.residual_reachable(src)
    seeds = [lhs[i][0] for i in range(len(lhs)) if ("L", i) in cut]
    universe = sorted({p for p, _ in lhs} | {q for q, _ in rhs}, key=lambda p: p.xs)
    up_set = [q for q in universe if any(path_leq(p, q) for p in seeds)]
    return DominanceResult(
        holds=False,
        violating_up_set=up_set,
        lhs_up_mass=mu.mass(up_set),
        rhs_up_mass=nu.mass(up_set),
    )


def up_sets(paths: Sequence[PathSpec], cap: int = 20):
    """All upward-closed subsets of the pointwise order on paths."""
    paths = sorted(set(paths), key=lambda p: p.xs)
    n = len(paths)
    if n > cap:
        raise SupportTooLarge(f"{n} paths exceed the up-set enumeration cap {cap}")
    above = []
    for i in range(n):
        mask = 0
        for j in range(n):
            if path_leq(paths[i], paths[j]):
                mask |= 1 << j
        above.append(mask)
    out = []
    for mask in range(1 << n):
        closure = 0
        rest = mask
        while rest:
            low = rest & -rest
            closure |= above[low.bit_length() - 1]
            rest ^= low
        if closure == mask:
            out.append([paths[j] for j in range(n) if (mask >> j) & 1])
    return out


def _stochastic_leq_upsets(mu: PathDistribution, nu: PathDistribution) -> DominanceResult:
    universe = sorted(set(mu.paths()) | set(nu.paths()), key=lambda p: p.xs)
    for up in up_sets(universe):
        lm, rm = mu.mass(up), nu.mass(up)
        if lm > rm and (mu.exact or lm - rm > 1e-12):
            return DominanceResult(
                holds=False, violating_up_set=up, lhs_up_mass=lm, rhs_up_mass=rm
            )
    return DominanceResult(holds=True)


# --- verification suites -----------------------------------------------------------


def _dominance_record(name, lo_label, lo, hi_label, hi, method, want_certificates):
    res = stochastic_leq(lo, hi, method=method)
    rec = DominanceRecord(
        inequality=name,
        lhs=lo.descriptor(lo_label),
        rhs=hi.descriptor(hi_label),
        holds=res.holds,
    )
    if res.holds and want_certificates and res.certificate is not None:
        rec.certificate = [
            {"lhs_path": p.to_json(), "rhs_path": q.to_json(), "weight": str(w)}
            for (p, q), w in sorted(res.certificate.items(), key=lambda kv: (kv[0][0].xs, kv[0][1].xs))
        ]
    if not res.holds:
        rec.violating_up_set = [p.to_json() for p in res.violating_up_set]
        rec.note = f"up-set mass {res.lhs_up_mass} > {res.rhs_up_mass}"
    return rec


def _skipped_record(name, note):
    return DominanceRecord(
        inequality=name, lhs={}, rhs={}, holds=True, applicable=False, note=note
    )


def verify_theorem1(
    model: PercolationModel,
    A,
    B,
    G,
    *,
    exact: bool = True,
    method: str = "maxflow",
    threads: int = 1,
    want_certificates: bool = False,
) -> Report:
    """Check the four restriction inequalities for extreme-path laws.

    Restricting the crossing to the region strictly left of G pulls both
    extreme-path laws stochastically left; restricting to the region
    strictly right of G pushes them right.
    """
    A = model.require_sites(A)
    B = model.require_sites(B)
    G = model.require_sites(G)
    m = _common_level(model, A, "A")
    n = _common_level(model, B, "B")
    whole = Region.whole(m, n)
    base_left, base_right = exact_extreme_pair(model, A, B, whole, exact=exact, threads=threads)
    records = []
    for side_name, region, restricted_is_lower in (
        ("left_of_G", strictly_left_region(G, m, n), True),
        ("right_of_G", strictly_right_region(G, m, n), False),
    ):
        names = (
            f"leftmost[{side_name}] {'<=' if restricted_is_lower else '>='} leftmost[whole]",
            f"rightmost[{side_name}] {'<=' if restricted_is_lower else '>='} rightmost[whole]",
        )
        try:
            rest_left, rest_right = exact_extreme_pair(
                model, A, B, region, exact=exact, threads=threads
            )
        except NoPath:
            for nm in names:
                records.append(_skipped_record(nm, f"no path inside {side_name}"))
            continue
        for nm, rest, base in zip(names, (rest_left, rest_right), (base_left, base_right)):
            lo, hi = (rest, base) if restricted_is_lower else (base, rest)
            lo_label = side_name if restricted_is_lower else "whole"
            hi_label = "whole" if restricted_is_lower else side_name
            records.append(
                _dominance_record(nm, lo_label, lo, hi_label, hi, method, want_certificates)
            )
    return Report(
        kind="theorem1",
        records=records,
        meta={
            "model": model.to_json(),
            "A": [[s.x, s.y] for s in A],
            "B": [[s.x, s.y] for s in B],
            "G": [[s.x, s.y] for s in G],
        },
    )


def _soft_band(tau_lo, tau_hi, m, n) -> Optional[Region]:
    try:
        return band(tau_lo, tau_hi, m, n)
    except NotStrictlyOrdered:
        return None


def _wall_json(tau):
    return tau.value if isinstance(tau, Sentinel) else tau.to_json()


def verify_proposition31(
    model: PercolationModel,
    tau1,
    tau2,
    tau3,
    A,
    B,
    *,
    exact: bool = True,
    method: str = "maxflow",
    threads: int = 1,
    want_certificates: bool = False,
) -> Report:
    """Check band monotonicity: widening a band on the left pulls the
    extreme-path laws left, widening on the right pushes them right.

    Walls satisfy tau1 <= tau3 <= tau2, where tau1/tau2 may be infinite
    sentinels; the middle wall splits the outer band into the two compared
    sub-bands.
    """
    A = model.require_sites(A)
    B = model.require_sites(B)
    m = _common_level(model, A, "A")
    n = _common_level(model, B, "B")
    for tau in (tau1, tau2, tau3):
        if not isinstance(tau, Sentinel):
            tau.validate(model)
            if (tau.m, tau.n) != (m, n):
                raise LatticeError("wall does not span the slab of A and B")
    if not (path_leq(tau1, tau3) and path_leq(tau3, tau2)):
        raise NotStrictlyOrdered("walls are not ordered tau1 <= tau3 <= tau2")
    outer = _soft_band(tau1, tau2, m, n)
    if outer is None:
        raise NotStrictlyOrdered("outer walls tau1 < tau2 must be strict")
    outer_pair = exact_extreme_pair(model, A, B, outer, exact=exact, threads=threads)
    records = []
    for part, region, name_fmt in (
        ("narrow_left", _soft_band(tau3, tau2, m, n), "{side}[band(tau1,tau2)] <= {side}[band(tau3,tau2)]"),
        ("narrow_right", _soft_band(tau1, tau3, m, n), "{side}[band(tau1,tau3)] <= {side}[band(tau1,tau2)]"),
    ):
        names = [name_fmt.format(side=s) for s in ("leftmost", "rightmost")]
        if region is None:
            for nm in names:
                records.append(_skipped_record(nm, "sub-band walls touch"))
            continue
        try:
            sub_pair = exact_extreme_pair(model, A, B, region, exact=exact, threads=threads)
        except NoPath:
            for nm in names:
                records.append(_skipped_record(nm, "no path in sub-band"))
            continue
        for i, nm in enumerate(names):
            if part == "narrow_left":
                lo, hi = outer_pair[i], sub_pair[i]
                labels = ("band(tau1,tau2)", "band(tau3,tau2)")
            else:
                lo, hi = sub_pair[i], outer_pair[i]
                labels = ("band(tau1,tau3)", "band(tau1,tau2)")
            records.append(
                _dominance_record(nm, labels[0], lo, labels[1], hi, method, want_certificates)
            )
    return Report(
        kind="prop31",
        records=records,
        meta={
            "model": model.to_json(),
            "A": [[s.x, s.y] for s in A],
            "B": [[s.x, s.y] for s in B],
            "tau1": _wall_json(tau1),
            "tau2": _wall_json(tau2),
            "tau3": _wall_json(tau3),
        },
    )


def verify_corollary2(
    model: PercolationModel,
    A,
    B,
    extra,
    side: str,
    at: str = "start",
    *,
    exact: bool = True,
    method: str = "maxflow",
    threads: int = 1,
    want_certificates: bool = False,
) -> Report:
    """Check that adding a flanking point to the sources (or targets) moves
    both extreme-path laws toward that side."""
    A = model.require_sites(A)
    B = model.require_sites(B)
    extra = Site(*extra)
    model.require_sites([extra])
    m = _common_level(model, A, "A")
    n = _common_level(model, B, "B")
    if side not in ("left", "right"):
        raise LatticeError("side must be 'left' or 'right'")
    if at not in ("start", "end"):
        raise LatticeError("at must be 'start' or 'end'")
    anchor = A if at == "start" else B
    want_level = m if at == "start" else n
    if extra.y != want_level:
        raise LatticeError(f"extra point must sit on level {want_level}")
    xs = [s.x for s in anchor]
    if side == "right" and extra.x <= max(xs):
        raise NotStrictlySeparated(f"{extra} is not strictly right of {anchor}")
    if side == "left" and extra.x >= min(xs):
        raise NotStrictlySeparated(f"{extra} is not strictly left of {anchor}")
    whole = Region.whole(m, n)
    base = exact_extreme_pair(model, A, B, whole, exact=exact, threads=threads)
    if at == "start":
        aug = exact_extreme_pair(model, tuple(A) + (extra,), B, whole, exact=exact, threads=threads)
        aug_label = "A+{a}"
    else:
        aug = exact_extreme_pair(model, A, tuple(B) + (extra,), whole, exact=exact, threads=threads)
        aug_label = "B+{b}"
    records = []
    op = ">=" if side == "right" else "<="
    for i, lawname in enumerate(("leftmost", "rightmost")):
        nm = f"{lawname}[{aug_label}] {op} {lawname}[base]"
        if side == "right":
            lo, hi = base[i], aug[i]
            labels = ("base", aug_label)
        else:
            lo, hi = aug[i], base[i]
            labels = (aug_label, "base")
        records.append(
            _dominance_record(nm, labels[0], lo, labels[1], hi, method, want_certificates)
        )
    return Report(
        kind="corollary2",
        records=records,
        meta={
            "model": model.to_json(),
            "A": [[s.x, s.y] for s in A],
            "B": [[s.x, s.y] for s in B],
            "extra": [extra.x, extra.y],
            "side": side,
            "at": at,
        },
    )
