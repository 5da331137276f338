"""Oriented planar lattices, openness models, and interval regions.

Two site universes are used.  The bond universe keeps the parity rule
(y >= 0, x + y even) and carries openness on the diagonal edges
(x, y) -> (x +- 1, y + 1).  The site universe drops the parity rule,
carries openness on the sites themselves, and allows an arbitrary
contiguous step range a <= 0 < b per level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

NEG_INF = float("-inf")
POS_INF = float("inf")

Bound = Union[int, float]


class LatticeError(ValueError):
    """Base class for geometry and model construction errors."""


class NotStrictlyOrdered(LatticeError):
    """Band walls are not strictly ordered at some level."""


class NoPath(LatticeError):
    """A requested path support is empty of complete paths."""


class EmptyG(LatticeError):
    """A boundary construction received an empty obstacle set."""


class SupportTooLarge(LatticeError):
    """A support exceeds the configured enumeration cap."""


class Site(NamedTuple):
    x: int
    y: int


class Edge(NamedTuple):
    src: Site
    step: int

    @property
    def dst(self) -> Site:
        return Site(self.src.x + self.step, self.src.y + 1)


class Sentinel(Enum):
    """Infinite boundary paths, strictly left/right of everything real."""

    LEFT_INFINITE = "-inf"
    RIGHT_INFINITE = "+inf"

    def at(self, level: int) -> float:
        return NEG_INF if self is Sentinel.LEFT_INFINITE else POS_INF

    def __repr__(self) -> str:
        return f"Sentinel({self.value})"


class Variant(str, Enum):
    INDEPENDENT_BOND = "IndependentBond"
    CORRELATED_PAIR_BOND = "CorrelatedPairBond"
    INDEPENDENT_SITE = "IndependentSite"
    RANGE_SITE = "RangeSite"


def as_prob(value) -> Fraction:
    """Coerce a probability to an exact Fraction.

    Floats are read through their decimal repr, so 0.2 means 1/5 rather
    than the nearest binary float.
    """
    if isinstance(value, Fraction):
        q = value
    elif isinstance(value, int):
        q = Fraction(value)
    elif isinstance(value, float):
        q = Fraction(repr(value))
    elif isinstance(value, str):
        q = Fraction(value)
    else:
        raise LatticeError(f"cannot interpret probability {value!r}")
    if not (0 <= q <= 1):
        raise LatticeError(f"probability {value!r} outside [0, 1]")
    return q


def pair_law_from_correlation(p, rho) -> tuple:
    """Joint law (q00, q01, q10, q11) for a bond pair with equal marginals p
    and correlation rho.  Raises if the requested correlation is infeasible
    at that marginal."""
    p = as_prob(p)
    rho = Fraction(repr(rho)) if isinstance(rho, float) else Fraction(rho)
    q11 = p * p + rho * p * (1 - p)
    q10 = p - q11
    q00 = 1 - 2 * p + q11
    law = (q00, q10, q10, q11)
    if any(q < 0 or q > 1 for q in law):
        raise LatticeError(f"correlation {rho} infeasible at marginal {p}")
    return law


@dataclass(frozen=True, eq=False)
class PercolationModel:
    """Openness law for one lattice variant.

    per_edge / per_site override the shared parameter p for individual
    items.  pair_law gives the joint (left, right) bond-pair law for the
    correlated variant, indexed q[(l << 1) | r]; independence across sites
    always holds.
    """

    variant: Variant = Variant.INDEPENDENT_BOND
    p: Fraction = Fraction(1, 2)
    per_edge: Mapping[Edge, Fraction] = field(default_factory=dict)
    per_site: Mapping[Site, Fraction] = field(default_factory=dict)
    pair_law: Optional[tuple] = None
    pair_law_per_site: Mapping[Site, tuple] = field(default_factory=dict)
    step_range: tuple = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "p", as_prob(self.p))
        object.__setattr__(
            self, "per_edge", {e: as_prob(v) for e, v in self.per_edge.items()}
        )
        object.__setattr__(
            self, "per_site", {s: as_prob(v) for s, v in self.per_site.items()}
        )
        if self.variant is Variant.CORRELATED_PAIR_BOND:
            law = self.pair_law
            if law is None:
                q11 = self.p * self.p
                law = (1 - 2 * self.p + q11, self.p - q11, self.p - q11, q11)
            law = tuple(as_prob(q) for q in law)
            if sum(law) != 1:
                raise LatticeError("pair law does not sum to 1")
            if law[2] + law[3] != self.p or law[1] + law[3] != self.p:
                raise LatticeError("pair law marginals disagree with p")
            object.__setattr__(self, "pair_law", law)
            checked = {}
            for s, q in self.pair_law_per_site.items():
                q = tuple(as_prob(v) for v in q)
                if sum(q) != 1:
                    raise LatticeError(f"pair law at {s} does not sum to 1")
                checked[s] = q
            object.__setattr__(self, "pair_law_per_site", checked)
        elif self.pair_law is not None:
            raise LatticeError("pair_law only applies to CorrelatedPairBond")
        if self.variant is Variant.INDEPENDENT_SITE:
            object.__setattr__(self, "step_range", (0, 1))
        if self.is_site_model:
            a, b = self.step_range
            if not (a <= 0 < b):
                raise LatticeError(f"step range {self.step_range} needs a <= 0 < b")

    # --- lattice geometry -------------------------------------------------

    @property
    def is_site_model(self) -> bool:
        return self.variant in (Variant.INDEPENDENT_SITE, Variant.RANGE_SITE)

    @property
    def steps(self) -> tuple:
        if self.is_site_model:
            a, b = self.step_range
            return tuple(range(a, b + 1))
        return (-1, 1)

    def site_in_lattice(self, site: Site) -> bool:
        if site.y < 0:
            return False
        if self.is_site_model:
            return True
        return (site.x + site.y) % 2 == 0

    def require_sites(self, sites: Iterable[Site]) -> tuple:
        out = []
        for s in sites:
            s = Site(*s)
            if not self.site_in_lattice(s):
                raise LatticeError(f"site {s} not on this lattice")
            out.append(s)
        return tuple(out)

    # --- openness probabilities -------------------------------------------

    def edge_prob(self, edge: Edge) -> Fraction:
        return self.per_edge.get(edge, self.p)

    def site_prob(self, site: Site) -> Fraction:
        return self.per_site.get(site, self.p)

    def pair_law_at(self, site: Site) -> tuple:
        return self.pair_law_per_site.get(site, self.pair_law)

    @property
    def translation_invariant(self) -> bool:
        return not (self.per_edge or self.per_site or self.pair_law_per_site)

    @property
    def pair_law_factorizes(self) -> bool:
        """True when every pair law is a product of its marginals."""
        if self.variant is not Variant.CORRELATED_PAIR_BOND:
            return True
        laws = [self.pair_law, *self.pair_law_per_site.values()]
        for q in laws:
            left = q[2] + q[3]
            right = q[1] + q[3]
            if q[3] != left * right:
                return False
        return True

    # --- JSON ingestion -----------------------------------------------------

    @staticmethod
    def from_json(obj: Mapping) -> "PercolationModel":
        known = {"variant", "p", "pair_law", "range", "per_edge", "per_site"}
        for key in obj:
            if key not in known:
                raise LatticeError(f"unknown model field {key!r}")
        kwargs = {}
        kwargs["variant"] = Variant(obj.get("variant", "IndependentBond"))
        if "p" in obj:
            kwargs["p"] = as_prob(obj["p"])
        if obj.get("pair_law") is not None:
            kwargs["pair_law"] = tuple(as_prob(q) for q in obj["pair_law"])
        if obj.get("range") is not None:
            a, b = obj["range"]
            kwargs["step_range"] = (int(a), int(b))
        if obj.get("per_edge"):
            table = {}
            for key, v in obj["per_edge"].items():
                x, y, k = (int(t) for t in key.split(","))
                table[Edge(Site(x, y), k)] = as_prob(v)
            kwargs["per_edge"] = table
        if obj.get("per_site"):
            table = {}
            for key, v in obj["per_site"].items():
                x, y = (int(t) for t in key.split(","))
                table[Site(x, y)] = as_prob(v)
            kwargs["per_site"] = table
        return PercolationModel(**kwargs)

    def to_json(self) -> dict:
        out = {"variant": self.variant.value, "p": str(self.p)}
        if self.variant is Variant.CORRELATED_PAIR_BOND:
            out["pair_law"] = [str(q) for q in self.pair_law]
        if self.is_site_model:
            out["range"] = list(self.step_range)
        if self.per_edge:
            out["per_edge"] = {
                f"{e.src.x},{e.src.y},{e.step}": str(v) for e, v in self.per_edge.items()
            }
        if self.per_site:
            out["per_site"] = {f"{s.x},{s.y}": str(v) for s, v in self.per_site.items()}
        return out


# --- regions ---------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Sub-lattice whose level sets are open intervals (lo, hi), exclusive.

    This is the class closed under the constructions used throughout:
    whole slabs, everything strictly left/right of a finite set, and the
    band strictly between two paths.  lower/upper record the band walls
    when the region was built from paths (or sentinels).
    """

    m: int
    n: int
    bounds: tuple
    lower: object = None
    upper: object = None

    def __post_init__(self):
        if self.n < self.m:
            raise LatticeError("region slab has n < m")
        if len(self.bounds) != self.n - self.m + 1:
            raise LatticeError("region bounds do not match slab height")

    @staticmethod
    def whole(m: int, n: int) -> "Region":
        return Region(m, n, tuple((NEG_INF, POS_INF) for _ in range(n - m + 1)),
                      lower=Sentinel.LEFT_INFINITE, upper=Sentinel.RIGHT_INFINITE)

    def level_bounds(self, level: int) -> tuple:
        return self.bounds[level - self.m]

    def admits(self, x: int, level: int) -> bool:
        if level < self.m or level > self.n:
            return False
        lo, hi = self.bounds[level - self.m]
        return lo < x < hi

    def admits_site(self, site: Site) -> bool:
        return self.admits(site.x, site.y)

    def covers(self, m: int, n: int) -> bool:
        return self.m <= m and n <= self.n

    def intersect(self, other: "Region") -> "Region":
        if (self.m, self.n) != (other.m, other.n):
            raise LatticeError("can only intersect regions on the same slab")
        bounds = tuple(
            (max(a_lo, b_lo), min(a_hi, b_hi))
            for (a_lo, a_hi), (b_lo, b_hi) in zip(self.bounds, other.bounds)
        )
        return Region(self.m, self.n, bounds)

    def to_json(self) -> dict:
        def bound(v):
            return None if v in (NEG_INF, POS_INF) else v

        return {
            "m": self.m,
            "n": self.n,
            "levels": [[bound(lo), bound(hi)] for lo, hi in self.bounds],
        }

    @staticmethod
    def from_json(obj: Mapping) -> "Region":
        bounds = tuple(
            (NEG_INF if lo is None else int(lo), POS_INF if hi is None else int(hi))
            for lo, hi in obj["levels"]
        )
        return Region(int(obj["m"]), int(obj["n"]), bounds)


def level_sites(model: PercolationModel, n: int, window: tuple) -> list:
    """All lattice sites on level n with window[0] <= x <= window[1]."""
    if n < 0:
        raise LatticeError("levels are nonnegative")
    lo, hi = window
    return [Site(x, n) for x in range(lo, hi + 1) if model.site_in_lattice(Site(x, n))]


def strictly_left_region(G: Iterable[Site], m: int, n: int) -> Region:
    """Region of points strictly left of G on each level of the slab.

    Levels where G is absent are unconstrained (the empty infimum is
    +infinity).
    """
    per_level = {}
    for s in G:
        s = Site(*s)
        if m <= s.y <= n:
            per_level[s.y] = min(per_level.get(s.y, s.x), s.x)
    bounds = tuple((NEG_INF, per_level.get(k, POS_INF)) for k in range(m, n + 1))
    return Region(m, n, bounds)


def strictly_right_region(G: Iterable[Site], m: int, n: int) -> Region:
    per_level = {}
    for s in G:
        s = Site(*s)
        if m <= s.y <= n:
            per_level[s.y] = max(per_level.get(s.y, s.x), s.x)
    bounds = tuple((per_level.get(k, NEG_INF), POS_INF) for k in range(m, n + 1))
    return Region(m, n, bounds)


def band(tau1, tau2, m: Optional[int] = None, n: Optional[int] = None) -> Region:
    """Region strictly between two walls (paths or sentinels), exclusive.

    Raises NotStrictlyOrdered when two real walls fail tau1 < tau2 at some
    level.  Both walls sentinel requires an explicit slab.
    """
    spans = []
    for tau in (tau1, tau2):
        if not isinstance(tau, Sentinel):
            spans.append((tau.m, tau.n))
    if spans:
        if len(spans) == 2 and spans[0] != spans[1]:
            raise LatticeError("band walls live on different slabs")
        wm, wn = spans[0]
        if m is None:
            m, n = wm, wn
        elif (m, n) != (wm, wn):
            raise LatticeError("explicit slab disagrees with wall span")
    elif m is None or n is None:
        raise LatticeError("band of two sentinels needs an explicit slab")
    bounds = []
    for k in range(m, n + 1):
        lo = tau1.at(k)
        hi = tau2.at(k)
        if lo >= hi:
            raise NotStrictlyOrdered(f"walls meet at level {k}: {lo} >= {hi}")
        bounds.append((lo, hi))
    return Region(m, n, tuple(bounds), lower=tau1, upper=tau2)


# --- finite supports --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Support:
    """Finite probability space carrier for one geometry.

    items are the edges (bond models) or sites (site models) lying on at
    least one source-to-target path inside the region, in deterministic
    (level, x, step) order; bit i of a configuration is the openness of
    items[i].
    """

    kind: str
    items: tuple
    index: Mapping
    m: int
    n: int
    region: Region
    sources: tuple
    targets: tuple
    level_xs: tuple        # per level, ascending x of path-relevant sites
    transitions: tuple     # per gap, tuples (from_pos, to_pos, edge_bit|None)
    site_bits: Optional[tuple]  # per level, tuple of item bits (site kind)

    def __len__(self) -> int:
        return len(self.items)

    def bit(self, item) -> int:
        return self.index[item]

    def width(self) -> int:
        return max((len(xs) for xs in self.level_xs), default=0)


def _reach_sets(model, region, A, B, m, n):
    steps = model.steps
    forward = [set() for _ in range(n - m + 1)]
    forward[0] = {s.x for s in A if region.admits_site(s)}
    for k in range(m, n):
        nxt = set()
        for x in forward[k - m]:
            for d in steps:
                if region.admits(x + d, k + 1) and model.site_in_lattice(Site(x + d, k + 1)):
                    nxt.add(x + d)
        forward[k - m + 1] = nxt
    backward = [set() for _ in range(n - m + 1)]
    backward[-1] = {s.x for s in B if region.admits_site(s)}
    for k in range(n - 1, m - 1, -1):
        prev = set()
        for x in backward[k - m + 1]:
            for d in steps:
                if region.admits(x - d, k) and model.site_in_lattice(Site(x - d, k)):
                    prev.add(x - d)
        backward[k - m] = prev
    return [sorted(f & b) for f, b in zip(forward, backward)]


def _common_level(model, sites, what: str) -> int:
    sites = model.require_sites(sites)
    if not sites:
        raise LatticeError(f"{what} is empty")
    levels = {s.y for s in sites}
    if len(levels) != 1:
        raise LatticeError(f"{what} spans several levels: {sorted(levels)}")
    return levels.pop()


def support_for(model: PercolationModel, region: Region, A, B) -> Support:
    """Build the bit-indexed support of all A-to-B paths inside region.

    Bond models get edge items, site models site items.  Raises NoPath when
    no complete path exists.
    """
    A = model.require_sites(A)
    B = model.require_sites(B)
    m = _common_level(model, A, "A")
    n = _common_level(model, B, "B")
    if m >= n:
        raise LatticeError("need source level strictly below target level")
    if not region.covers(m, n):
        raise LatticeError("region does not cover the path slab")
    level_xs = _reach_sets(model, region, A, B, m, n)
    if any(not xs for xs in level_xs):
        raise NoPath(f"no path from {A} to {B} inside region")
    pos = [
        {x: i for i, x in enumerate(xs)}
        for xs in level_xs
    ]
    steps = model.steps
    if model.is_site_model:
        items = tuple(
            Site(x, m + k) for k, xs in enumerate(level_xs) for x in xs
        )
        index = {s: i for i, s in enumerate(items)}
        site_bits = tuple(
            tuple(index[Site(x, m + k)] for x in xs) for k, xs in enumerate(level_xs)
        )
        transitions = []
        for k in range(n - m):
            trs = []
            for x in level_xs[k]:
                for d in steps:
                    if x + d in pos[k + 1]:
                        trs.append((pos[k][x], pos[k + 1][x + d], None))
            transitions.append(tuple(trs))
        kind = "site"
    else:
        edges = []
        for k in range(n - m):
            for x in level_xs[k]:
                for d in steps:
                    if x + d in pos[k + 1]:
                        edges.append(Edge(Site(x, m + k), d))
        edges.sort(key=lambda e: (e.src.y, e.src.x, e.step))
        items = tuple(edges)
        index = {e: i for i, e in enumerate(items)}
        site_bits = None
        transitions = []
        for k in range(n - m):
            trs = []
            for e in edges:
                if e.src.y == m + k:
                    trs.append((pos[k][e.src.x], pos[k + 1][e.dst.x], index[e]))
            transitions.append(tuple(trs))
        kind = "edge"
    return Support(
        kind=kind,
        items=items,
        index=index,
        m=m,
        n=n,
        region=region,
        sources=tuple(sorted(s for s in A if region.admits_site(s))),
        targets=tuple(sorted(s for s in B if region.admits_site(s))),
        level_xs=tuple(tuple(xs) for xs in level_xs),
        transitions=tuple(transitions),
        site_bits=site_bits,
    )


def edge_support(model: PercolationModel, region: Region, A, B) -> Support:
    """Support of a bond-model geometry; items are edges."""
    if model.is_site_model:
        raise LatticeError("edge_support needs a bond model; use site_support")
    return support_for(model, region, A, B)


def site_support(model: PercolationModel, region: Region, A, B) -> Support:
    """Support of a site-model geometry; items are sites."""
    if not model.is_site_model:
        raise LatticeError("site_support needs a site model; use edge_support")
    return support_for(model, region, A, B)


def union_support(parts: Sequence[Support]) -> Support:
    """Item-space union of several supports over the same slab and kind.

    The union has no canonical source/target pair; path questions against
    it go through perco.paths.compile_view with explicit geometry.
    """
    if not parts:
        raise LatticeError("nothing to unite")
    kind = parts[0].kind
    if any(p.kind != kind for p in parts):
        raise LatticeError("cannot unite edge and site supports")
    m = min(p.m for p in parts)
    n = max(p.n for p in parts)
    items = sorted(
        {it for p in parts for it in p.items},
        key=(lambda e: (e.src.y, e.src.x, e.step)) if kind == "edge" else None,
    )
    items = tuple(items)
    index = {it: i for i, it in enumerate(items)}
    if kind == "edge":
        sites_per_level = [set() for _ in range(n - m + 1)]
        for e in items:
            sites_per_level[e.src.y - m].add(e.src.x)
            sites_per_level[e.dst.y - m].add(e.dst.x)
    else:
        sites_per_level = [set() for _ in range(n - m + 1)]
        for s in items:
            sites_per_level[s.y - m].add(s.x)
    level_xs = tuple(tuple(sorted(xs)) for xs in sites_per_level)
    pos = [{x: i for i, x in enumerate(xs)} for xs in level_xs]
    transitions = []
    if kind == "edge":
        site_bits = None
        for k in range(n - m):
            trs = []
            for e in items:
                if e.src.y == m + k and e.dst.x in pos[k + 1]:
                    trs.append((pos[k][e.src.x], pos[k + 1][e.dst.x], index[e]))
            transitions.append(tuple(trs))
    else:
        site_bits = tuple(
            tuple(index[Site(x, m + k)] for x in xs) for k, xs in enumerate(level_xs)
        )
        steps_union = sorted({d for p in parts for d in _support_steps(p)})
        for k in range(n - m):
            trs = []
            for x in level_xs[k]:
                for d in steps_union:
                    if x + d in pos[k + 1]:
                        trs.append((pos[k][x], pos[k + 1][x + d], None))
            transitions.append(tuple(trs))
    return Support(
        kind=kind,
        items=items,
        index=index,
        m=m,
        n=n,
        region=Region.whole(m, n),
        sources=(),
        targets=(),
        level_xs=level_xs,
        transitions=tuple(transitions),
        site_bits=site_bits,
    )


def _support_steps(support: Support) -> set:
    out = set()
    if support.kind == "edge":
        for e in support.items:
            out.add(e.step)
    else:
        for k, trs in enumerate(support.transitions):
            for fp, tp, _ in trs:
                out.add(support.level_xs[k + 1][tp] - support.level_xs[k][fp])
    return out or {-1, 1}
