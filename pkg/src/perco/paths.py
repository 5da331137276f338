"""Paths on oriented lattices: partial order, enumeration, boundary paths,
and extraction of extreme open paths from a configuration.

A path from level m to level n is stored as the sequence of x-coordinates
per level.  The partial order is pointwise; the pointwise minimum or
maximum of two open paths is again an open path for every supported step
range, which is what makes the leftmost/rightmost open path well defined
and lets the extractor work level by level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .lattice import (
    EmptyG,
    LatticeError,
    NEG_INF,
    POS_INF,
    PercolationModel,
    Region,
    Sentinel,
    Site,
    Support,
)


class LevelMismatch(LatticeError):
    """Two paths do not share the same level span."""


@dataclass(frozen=True)
class PathSpec:
    """A lattice path: start level m and one x per level."""

    m: int
    xs: tuple

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(int(x) for x in self.xs))
        if not self.xs:
            raise LatticeError("empty path")

    @property
    def n(self) -> int:
        return self.m + len(self.xs) - 1

    def at(self, level: int):
        return self.xs[level - self.m]

    def sites(self):
        return [Site(x, self.m + i) for i, x in enumerate(self.xs)]

    def validate(self, model: PercolationModel) -> "PathSpec":
        steps = set(model.steps)
        for i, x in enumerate(self.xs):
            if not model.site_in_lattice(Site(x, self.m + i)):
                raise LatticeError(f"path point ({x},{self.m + i}) off lattice")
            if i and self.xs[i] - self.xs[i - 1] not in steps:
                raise LatticeError(
                    f"step {self.xs[i] - self.xs[i - 1]} at level {self.m + i} not allowed"
                )
        return self

    def to_json(self) -> dict:
        return {"m": self.m, "xs": list(self.xs)}

    @staticmethod
    def from_json(obj) -> "PathSpec":
        return PathSpec(int(obj["m"]), tuple(int(x) for x in obj["xs"]))


PathLike = Union[PathSpec, Sentinel]


def _span_check(p1: PathSpec, p2: PathSpec):
    if (p1.m, p1.n) != (p2.m, p2.n):
        raise LevelMismatch(f"paths span [{p1.m},{p1.n}] vs [{p2.m},{p2.n}]")


def path_leq(p1: PathLike, p2: PathLike) -> bool:
    """Pointwise order; the left sentinel is below everything, the right
    sentinel above everything."""
    if isinstance(p1, Sentinel):
        return p1 is Sentinel.LEFT_INFINITE or p2 is Sentinel.RIGHT_INFINITE
    if isinstance(p2, Sentinel):
        return p2 is Sentinel.RIGHT_INFINITE
    _span_check(p1, p2)
    return all(a <= b for a, b in zip(p1.xs, p2.xs))


def path_lt(p1: PathLike, p2: PathLike) -> bool:
    """Strict pointwise order (strictly left of)."""
    if isinstance(p1, Sentinel):
        return (p1 is Sentinel.LEFT_INFINITE and p2 is not Sentinel.LEFT_INFINITE) or (
            isinstance(p2, Sentinel) and p2 is Sentinel.RIGHT_INFINITE and p1 is not p2
        )
    if isinstance(p2, Sentinel):
        return p2 is Sentinel.RIGHT_INFINITE
    _span_check(p1, p2)
    return all(a < b for a, b in zip(p1.xs, p2.xs))


def pointwise_min(paths: Sequence[PathSpec]) -> PathSpec:
    first = paths[0]
    for p in paths[1:]:
        _span_check(first, p)
    return PathSpec(first.m, tuple(min(p.at(k) for p in paths) for k in range(first.m, first.n + 1)))


def pointwise_max(paths: Sequence[PathSpec]) -> PathSpec:
    first = paths[0]
    for p in paths[1:]:
        _span_check(first, p)
    return PathSpec(first.m, tuple(max(p.at(k) for p in paths) for k in range(first.m, first.n + 1)))


def concat(p1: PathSpec, p2: PathSpec) -> PathSpec:
    if p1.n != p2.m or p1.at(p1.n) != p2.at(p2.m):
        raise LatticeError("paths do not meet")
    return PathSpec(p1.m, p1.xs + p2.xs[1:])


# --- enumeration -------------------------------------------------------------


def enumerate_paths(model: PercolationModel, A, B, region: Region) -> list:
    """All paths from A to B inside region, in lexicographic order."""
    A = model.require_sites(A)
    B = model.require_sites(B)
    from .lattice import _common_level, _reach_sets

    m = _common_level(model, A, "A")
    n = _common_level(model, B, "B")
    if m >= n:
        raise LatticeError("need source level strictly below target level")
    level_xs = _reach_sets(model, region, A, B, m, n)
    allowed = [set(xs) for xs in level_xs]
    if any(not xs for xs in allowed):
        return []
    steps = model.steps
    out = []
    stack = [x for x in sorted(allowed[0], reverse=True)]
    prefix = []

    def walk(x, k):
        prefix.append(x)
        if k == n:
            out.append(PathSpec(m, tuple(prefix)))
        else:
            for d in steps:
                if x + d in allowed[k - m + 1]:
                    walk(x + d, k + 1)
        prefix.pop()

    for x in sorted(allowed[0]):
        walk(x, m)
    return out


def enumerate_paths_through(model: PercolationModel, A, C, B, region: Region) -> list:
    """Paths from A to B inside region that pass through a point of C."""
    C = model.require_sites(C)
    if not C:
        raise LatticeError("C is empty")
    levels = {s.y for s in C}
    if len(levels) != 1:
        raise LatticeError("C spans several levels")
    j = levels.pop()
    hits = {s.x for s in C}
    return [p for p in enumerate_paths(model, A, B, region) if p.m <= j <= p.n and p.at(j) in hits]


# --- boundary path of an obstacle set ----------------------------------------


def tau_boundary(model: PercolationModel, G, m: int, n: int, side: str = "left") -> PathSpec:
    """Path separating the paths strictly on one side of G.

    side="left": a slab path is strictly left of G iff it is strictly left
    of the returned path.  side="right" mirrors this.  Only obstacle points
    with levels inside [m, n] constrain slab paths, so points outside the
    slab are ignored.

    The construction takes, per obstacle point, the extreme path through it
    under the model's step range, and combines them pointwise.
    """
    pts = [Site(*s) for s in G]
    for s in pts:
        if not model.site_in_lattice(s):
            raise LatticeError(f"obstacle site {s} not on this lattice")
    pts = [s for s in pts if m <= s.y <= n]
    if not pts:
        raise EmptyG("no obstacle points inside the slab")
    a = min(model.steps)
    b = max(model.steps)
    xs = []
    for j in range(m, n + 1):
        if side == "left":
            vals = [
                (s.x + b * (j - s.y)) if j >= s.y else (s.x - a * (s.y - j))
                for s in pts
            ]
            xs.append(min(vals))
        elif side == "right":
            vals = [
                (s.x + a * (j - s.y)) if j >= s.y else (s.x - b * (s.y - j))
                for s in pts
            ]
            xs.append(max(vals))
        else:
            raise LatticeError(f"side must be 'left' or 'right', got {side!r}")
    return PathSpec(m, tuple(xs)).validate(model)


def strictly_left_of_set(path: PathSpec, G) -> bool:
    """True when every point of G at the path's levels lies strictly right
    of the path."""
    for s in G:
        s = Site(*s)
        if path.m <= s.y <= path.n and path.at(s.y) >= s.x:
            return False
    return True


def strictly_right_of_set(path: PathSpec, G) -> bool:
    for s in G:
        s = Site(*s)
        if path.m <= s.y <= path.n and path.at(s.y) <= s.x:
            return False
    return True


# --- configurations and extreme open paths -----------------------------------


@dataclass(frozen=True)
class Configuration:
    """Open/closed assignment on a support, packed into an int (open=1)."""

    support: Support
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << len(self.support.items)):
            raise LatticeError("configuration bits exceed the support")

    def is_open(self, item) -> bool:
        return (self.bits >> self.support.index[item]) & 1 == 1

    def open_items(self):
        return [it for i, it in enumerate(self.support.items) if (self.bits >> i) & 1]


@dataclass(frozen=True, eq=False)
class SupportView:
    """A (sources, targets, region) question compiled onto a support.

    Positions index the support's per-level site lists; transitions carry
    the edge bit to test (bond) or None (site, openness sits on the
    positions via site_bits).  Items absent from the support are treated as
    closed.
    """

    kind: str
    m: int
    n: int
    level_xs: tuple
    transitions: tuple      # per gap: tuple of (from_pos, to_pos, bit|None)
    succ: tuple             # per gap: dict from_pos -> ((to_pos, bit|None), ...)
    pred: tuple             # per gap: dict to_pos -> ((from_pos, bit|None), ...)
    site_bits: Optional[tuple]
    source_mask: int
    target_mask: int


def compile_view(support: Support, A=None, B=None, region: Optional[Region] = None) -> SupportView:
    """Bind a geometry to a support's item space.

    Defaults reproduce the support's own geometry.  A different region must
    sit inside the support's slab; positions outside it are dropped.
    """
    if A is None:
        A = support.sources
    if B is None:
        B = support.targets
    region = region or support.region
    A = tuple(Site(*s) for s in A)
    B = tuple(Site(*s) for s in B)
    m = support.m
    n = support.n
    keep = []
    for k in range(m, n + 1):
        xs = support.level_xs[k - m]
        keep.append({i for i, x in enumerate(xs) if region.admits(x, k)})
    transitions = []
    succ = []
    pred = []
    for k in range(n - m):
        trs = tuple(
            (fp, tp, bit)
            for fp, tp, bit in support.transitions[k]
            if fp in keep[k] and tp in keep[k + 1]
        )
        transitions.append(trs)
        s_map = {}
        p_map = {}
        for fp, tp, bit in trs:
            s_map.setdefault(fp, []).append((tp, bit))
            p_map.setdefault(tp, []).append((fp, bit))
        succ.append({fp: tuple(v) for fp, v in s_map.items()})
        pred.append({tp: tuple(v) for tp, v in p_map.items()})
    a_levels = {s.y for s in A}
    b_levels = {s.y for s in B}
    if A and a_levels != {m}:
        raise LatticeError("view sources must sit on the support's bottom level")
    if B and b_levels != {n}:
        raise LatticeError("view targets must sit on the support's top level")
    src_xs = {s.x for s in A}
    tgt_xs = {s.x for s in B}
    source_mask = 0
    for i, x in enumerate(support.level_xs[0]):
        if i in keep[0] and x in src_xs:
            source_mask |= 1 << i
    target_mask = 0
    for i, x in enumerate(support.level_xs[n - m]):
        if i in keep[n - m] and x in tgt_xs:
            target_mask |= 1 << i
    return SupportView(
        kind=support.kind,
        m=m,
        n=n,
        level_xs=support.level_xs,
        transitions=tuple(transitions),
        succ=tuple(succ),
        pred=tuple(pred),
        site_bits=support.site_bits,
        source_mask=source_mask,
        target_mask=target_mask,
    )


def default_view(support: Support) -> SupportView:
    cached = getattr(support, "_default_view", None)
    if cached is None:
        cached = compile_view(support)
        object.__setattr__(support, "_default_view", cached)
    return cached


def _open_pos_mask(view: SupportView, bits: int, k: int) -> int:
    mask = 0
    for pos, sb in enumerate(view.site_bits[k]):
        if (bits >> sb) & 1:
            mask |= 1 << pos
    return mask


def _forward_masks(view: SupportView, bits: int) -> list:
    h = view.n - view.m + 1
    out = [0] * h
    cur = view.source_mask
    if view.site_bits is not None:
        cur &= _open_pos_mask(view, bits, 0)
    out[0] = cur
    for k in range(h - 1):
        cur = out[k]
        if not cur:
            break
        nxt = 0
        for fp, tp, bit in view.transitions[k]:
            if (cur >> fp) & 1 and (bit is None or (bits >> bit) & 1):
                nxt |= 1 << tp
        if view.site_bits is not None:
            nxt &= _open_pos_mask(view, bits, k + 1)
        out[k + 1] = nxt
    return out


def _backward_masks(view: SupportView, bits: int) -> list:
    h = view.n - view.m + 1
    out = [0] * h
    cur = view.target_mask
    if view.site_bits is not None:
        cur &= _open_pos_mask(view, bits, h - 1)
    out[h - 1] = cur
    for k in range(h - 2, -1, -1):
        nxt = out[k + 1]
        if not nxt:
            break
        cur = 0
        for fp, tp, bit in view.transitions[k]:
            if (nxt >> tp) & 1 and (bit is None or (bits >> bit) & 1):
                cur |= 1 << fp
        if view.site_bits is not None:
            cur &= _open_pos_mask(view, bits, k)
        out[k] = cur
    return out


def _live_masks(view: SupportView, bits: int) -> Optional[list]:
    f = _forward_masks(view, bits)
    if not f[-1]:
        return None
    b = _backward_masks(view, bits)
    live = [x & y for x, y in zip(f, b)]
    if not live[0]:
        return None
    return live


def open_path_exists(config: Configuration, A=None, B=None, region=None) -> bool:
    view = (
        default_view(config.support)
        if A is None and B is None and region is None
        else compile_view(config.support, A, B, region)
    )
    return view_path_exists(view, config.bits)


def view_path_exists(view: SupportView, bits: int) -> bool:
    return _live_masks(view, bits) is not None


def extreme_positions(view: SupportView, bits: int, side: str) -> Optional[list]:
    """Per-level positions of the extreme open path, or None.

    Minimal-x (or maximal-x) descent over live positions; live positions
    always admit a continuation, so the fallback stack never unwinds in
    practice, but the search stays correct without that assumption.
    """
    live = _live_masks(view, bits)
    if live is None:
        return None
    h = view.n - view.m + 1
    take_min = side == "left"

    def ordered(mask):
        ps = []
        while mask:
            low = mask & -mask
            ps.append(low.bit_length() - 1)
            mask ^= low
        return ps if take_min else ps[::-1]

    chosen = []
    frames = [ordered(live[0])]
    while frames:
        opts = frames[-1]
        if not opts:
            frames.pop()
            if chosen:
                chosen.pop()
            continue
        pos = opts.pop(0)
        k = len(frames) - 1
        chosen.append(pos)
        if k == h - 1:
            return chosen
        nxt = []
        for tp, bit in view.succ[k].get(pos, ()):
            if (live[k + 1] >> tp) & 1 and (bit is None or (bits >> bit) & 1):
                nxt.append(tp)
        nxt.sort()
        frames.append(nxt if take_min else nxt[::-1])
    return None


def _positions_to_path(view: SupportView, positions: list) -> PathSpec:
    return PathSpec(view.m, tuple(view.level_xs[k][p] for k, p in enumerate(positions)))


def leftmost_open_path(config: Configuration, A=None, B=None, region=None) -> Optional[PathSpec]:
    """Leftmost open path of the configuration, or None when no open path
    exists (absence is a value, not an error)."""
    view = (
        default_view(config.support)
        if A is None and B is None and region is None
        else compile_view(config.support, A, B, region)
    )
    pos = extreme_positions(view, config.bits, "left")
    return None if pos is None else _positions_to_path(view, pos)


def rightmost_open_path(config: Configuration, A=None, B=None, region=None) -> Optional[PathSpec]:
    view = (
        default_view(config.support)
        if A is None and B is None and region is None
        else compile_view(config.support, A, B, region)
    )
    pos = extreme_positions(view, config.bits, "right")
    return None if pos is None else _positions_to_path(view, pos)
