"""Configuration enumeration and sampling over finite supports.

Exact mode works with integer weight numerators over one common
denominator, so histograms and event tables are exact integers; the int64
fast path is used whenever the largest possible per-configuration product
and the total weight both fit with headroom, otherwise a plain-Python exact
loop takes over.  Float mode mirrors the same pipeline in float64.

Enumeration is chunked over the configuration index range, and chunks can
be fanned out to worker threads (the heavy operations are numpy and release
the GIL).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .lattice import PercolationModel, Support, SupportTooLarge, Variant
from .paths import SupportView, default_view

_INT64_HEADROOM = 1 << 62
_MAX_VEC_WIDTH = 16

_LSB_TABLE = np.zeros(1 << 16, dtype=np.uint8)
for _i in range(16):
    _LSB_TABLE[1 << _i] = _i
_MSB_TABLE = np.zeros(1 << 16, dtype=np.uint8)
for _v in range(1, 1 << 16):
    _MSB_TABLE[_v] = _v.bit_length() - 1


# --- weight tables -----------------------------------------------------------


@dataclass
class WeightTables:
    """Per-item openness weights for one support.

    singles: (bit, closed_num, open_num, denom) per independent item.
    pairs: (left_bit, right_bit, (q00, q01, q10, q11) numerators, denom)
    per correlated bond pair fully inside the support.
    """

    singles: list
    pairs: list
    denom: int
    max_product: int

    @property
    def int64_safe(self) -> bool:
        return self.denom < _INT64_HEADROOM and self.max_product < _INT64_HEADROOM


def weight_tables(model: PercolationModel, support: Support) -> WeightTables:
    singles = []
    pairs = []
    if model.variant is Variant.CORRELATED_PAIR_BOND:
        by_src = {}
        for i, e in enumerate(support.items):
            by_src.setdefault(e.src, {})[e.step] = i
        for src in sorted(by_src):
            law = model.pair_law_at(src)
            d = 1
            for q in law:
                d = _lcm(d, q.denominator)
            nums = tuple(int(q * d) for q in law)
            steps = by_src[src]
            if -1 in steps and 1 in steps:
                pairs.append((steps[-1], steps[1], nums, d))
            elif -1 in steps:
                p_open = law[2] + law[3]
                singles.append(_single_entry(steps[-1], p_open))
            else:
                p_open = law[1] + law[3]
                singles.append(_single_entry(steps[1], p_open))
    elif model.is_site_model:
        for i, s in enumerate(support.items):
            singles.append(_single_entry(i, model.site_prob(s)))
    else:
        for i, e in enumerate(support.items):
            singles.append(_single_entry(i, model.edge_prob(e)))
    denom = 1
    max_product = 1
    for _, w0, w1, d in singles:
        denom *= d
        max_product *= max(w0, w1)
    for _, _, nums, d in pairs:
        denom *= d
        max_product *= max(nums)
    return WeightTables(singles=singles, pairs=pairs, denom=denom, max_product=max_product)


def _lcm(a, b):
    import math

    return a * b // math.gcd(a, b)


def _single_entry(bit: int, p: Fraction):
    d = p.denominator
    w1 = p.numerator
    return (bit, d - w1, w1, d)


def weights_chunk(tables: WeightTables, ids: np.ndarray, exact: bool) -> np.ndarray:
    if exact:
        w = np.ones(ids.shape, dtype=np.int64)
        for bit, w0, w1, _ in tables.singles:
            b = ((ids >> np.uint64(bit)) & np.uint64(1)).astype(np.int64)
            w *= np.where(b == 1, np.int64(w1), np.int64(w0))
        for bl, br, nums, _ in tables.pairs:
            l = ((ids >> np.uint64(bl)) & np.uint64(1)).astype(np.int64)
            r = ((ids >> np.uint64(br)) & np.uint64(1)).astype(np.int64)
            w *= np.take(np.array(nums, dtype=np.int64), (l << 1) | r)
        return w
    w = np.ones(ids.shape, dtype=np.float64)
    for bit, w0, w1, d in tables.singles:
        b = (ids >> np.uint64(bit)) & np.uint64(1)
        w *= np.where(b == 1, w1 / d, w0 / d)
    for bl, br, nums, d in tables.pairs:
        l = ((ids >> np.uint64(bl)) & np.uint64(1)).astype(np.int64)
        r = ((ids >> np.uint64(br)) & np.uint64(1)).astype(np.int64)
        w *= np.take(np.array(nums, dtype=np.float64) / d, (l << 1) | r)
    return w


def config_weight(tables: WeightTables, bits: int) -> int:
    """Exact integer numerator of one configuration (Python ints)."""
    w = 1
    for bit, w0, w1, _ in tables.singles:
        w *= w1 if (bits >> bit) & 1 else w0
    for bl, br, nums, _ in tables.pairs:
        w *= nums[(((bits >> bl) & 1) << 1) | ((bits >> br) & 1)]
    return w


# --- vectorized reachability --------------------------------------------------


@dataclass(eq=False)
class VecView:
    """numpy-friendly rendering of a SupportView."""

    height: int
    widths: list
    transitions: list       # per gap: list of (from_pos, to_pos, bit or -1)
    site_bits: Optional[list]
    source_mask: int
    target_mask: int
    strides: list

    @staticmethod
    def from_view(view: SupportView) -> "VecView":
        widths = [len(xs) for xs in view.level_xs]
        if max(widths) > _MAX_VEC_WIDTH:
            raise SupportTooLarge(
                f"level width {max(widths)} exceeds the vector engine cap {_MAX_VEC_WIDTH}"
            )
        transitions = [
            [(fp, tp, -1 if bit is None else bit) for fp, tp, bit in trs]
            for trs in view.transitions
        ]
        strides = []
        acc = 1
        for w in widths:
            strides.append(acc)
            acc *= max(w, 1)
        return VecView(
            height=view.n - view.m + 1,
            widths=widths,
            transitions=transitions,
            site_bits=None if view.site_bits is None else [list(t) for t in view.site_bits],
            source_mask=view.source_mask,
            target_mask=view.target_mask,
            strides=strides,
        )


def _open_masks(vv: VecView, ids: np.ndarray) -> Optional[list]:
    if vv.site_bits is None:
        return None
    out = []
    for level_bits in vv.site_bits:
        mask = np.zeros(ids.shape, dtype=np.uint32)
        for pos, sb in enumerate(level_bits):
            mask |= (((ids >> np.uint64(sb)) & np.uint64(1)).astype(np.uint32)) << np.uint32(pos)
        out.append(mask)
    return out


def _live_chunk(vv: VecView, ids: np.ndarray) -> list:
    opens = _open_masks(vv, ids)
    fwd = [None] * vv.height
    cur = np.full(ids.shape, vv.source_mask, dtype=np.uint32)
    if opens is not None:
        cur = cur & opens[0]
    fwd[0] = cur
    for k in range(vv.height - 1):
        nxt = np.zeros(ids.shape, dtype=np.uint32)
        for fp, tp, bit in vv.transitions[k]:
            reach = (fwd[k] >> np.uint32(fp)) & np.uint32(1)
            if bit >= 0:
                reach = reach & ((ids >> np.uint64(bit)) & np.uint64(1)).astype(np.uint32)
            nxt |= reach << np.uint32(tp)
        if opens is not None:
            nxt &= opens[k + 1]
        fwd[k + 1] = nxt
    bwd = [None] * vv.height
    cur = np.full(ids.shape, vv.target_mask, dtype=np.uint32)
    if opens is not None:
        cur = cur & opens[-1]
    bwd[-1] = cur
    for k in range(vv.height - 2, -1, -1):
        prv = np.zeros(ids.shape, dtype=np.uint32)
        for fp, tp, bit in vv.transitions[k]:
            reach = (bwd[k + 1] >> np.uint32(tp)) & np.uint32(1)
            if bit >= 0:
                reach = reach & ((ids >> np.uint64(bit)) & np.uint64(1)).astype(np.uint32)
            prv |= reach << np.uint32(fp)
        if opens is not None:
            prv &= opens[k]
        bwd[k] = prv
    return [f & b for f, b in zip(fwd, bwd)]


def exists_chunk(vv: VecView, ids: np.ndarray) -> np.ndarray:
    return _live_chunk(vv, ids)[0] != 0


def extreme_codes_chunk(vv: VecView, ids: np.ndarray, side: str):
    """(exists, code) for the extreme open path of each configuration.

    The extreme path's position at each level is the extreme live position,
    which is valid because live positions are exactly the points on open
    source-target paths and pointwise min/max of open paths stay open.
    """
    live = _live_chunk(vv, ids)
    exists = live[0] != 0
    table = _LSB_TABLE if side == "left" else _MSB_TABLE
    codes = np.zeros(ids.shape, dtype=np.uint64)
    for k, lv in enumerate(live):
        if side == "left":
            iso = lv & (~lv + np.uint32(1))
        else:
            iso = lv
        pos = table[iso]
        codes += pos.astype(np.uint64) * np.uint64(vv.strides[k])
    return exists, codes


def decode_path_code(view: SupportView, code: int):
    from .paths import PathSpec

    xs = []
    for level_xs in view.level_xs:
        w = max(len(level_xs), 1)
        xs.append(level_xs[int(code % w)])
        code //= w
    return PathSpec(view.m, tuple(xs))


# --- enumeration drivers -------------------------------------------------------


EventFn = Callable[[np.ndarray], np.ndarray]


def _chunks(total: int, chunk: int):
    lo = 0
    while lo < total:
        hi = min(lo + chunk, total)
        yield lo, hi
        lo = hi


@dataclass
class HistogramResult:
    left: dict
    right: dict
    selected: object       # total weight of {path exists} & condition
    total: object          # total weight of everything (denominator scale)
    denom: object
    exact: bool


def path_histograms(
    model: PercolationModel,
    support: Support,
    view: Optional[SupportView] = None,
    condition: Optional[EventFn] = None,
    sides: Sequence[str] = ("left", "right"),
    exact: bool = True,
    chunk: int = 1 << 18,
    threads: int = 1,
) -> HistogramResult:
    """Histogram the extreme open paths over every configuration.

    Keys of the histograms are path codes; decode with decode_path_code on
    the same view.
    """
    view = view or default_view(support)
    nbits = len(support.items)
    tables = weight_tables(model, support)
    if exact and not tables.int64_safe:
        return _path_histograms_python(model, support, view, condition, sides, tables)
    vv = VecView.from_view(view)
    total = 1 << nbits

    def run(lo, hi):
        ids = np.arange(lo, hi, dtype=np.uint64)
        w = weights_chunk(tables, ids, exact)
        keep = None
        out = {}
        sel = np.int64(0) if exact else 0.0
        for side in sides:
            exists, codes = extreme_codes_chunk(vv, ids, side)
            if keep is None:
                keep = exists if condition is None else (exists & condition(ids))
                sel = w[keep].sum(dtype=np.int64) if exact else float(w[keep].sum())
            kept_codes = codes[keep]
            kept_w = w[keep]
            uniq, inv = np.unique(kept_codes, return_inverse=True)
            sums = np.zeros(len(uniq), dtype=np.int64 if exact else np.float64)
            np.add.at(sums, inv, kept_w)
            out[side] = {int(c): (int(s) if exact else float(s)) for c, s in zip(uniq, sums)}
        return out, sel

    partials = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run, lo, hi) for lo, hi in _chunks(total, chunk)]
            partials = [f.result() for f in futures]
    else:
        partials = [run(lo, hi) for lo, hi in _chunks(total, chunk)]

    hists = {side: {} for side in sides}
    selected = 0
    for out, sel in partials:
        selected += int(sel) if exact else sel
        for side in sides:
            for c, s in out[side].items():
                hists[side][c] = hists[side].get(c, 0) + s
    return HistogramResult(
        left=hists.get("left", {}),
        right=hists.get("right", {}),
        selected=selected,
        total=tables.denom if exact else 1.0,
        denom=tables.denom,
        exact=exact,
    )


def _path_histograms_python(model, support, view, condition, sides, tables):
    from .paths import extreme_positions

    nbits = len(support.items)
    if nbits > 22:
        raise SupportTooLarge(
            "exact enumeration with arbitrary-precision weights is capped at 22 items"
        )
    hists = {side: {} for side in sides}
    vv = VecView.from_view(view)
    selected = 0
    for bits in range(1 << nbits):
        w = config_weight(tables, bits)
        if w == 0:
            continue
        cond_ok = True
        if condition is not None:
            cond_ok = bool(condition(np.array([bits], dtype=np.uint64))[0])
        if not cond_ok:
            continue
        pos = extreme_positions_scalar(view, bits, "left")
        if pos is None:
            continue
        selected += w
        for side in sides:
            if side == "left":
                p = pos
            else:
                p = extreme_positions_scalar(view, bits, "right")
            code = 0
            for k, q in enumerate(p):
                code += q * vv.strides[k]
            hists[side][code] = hists[side].get(code, 0) + w
    return HistogramResult(
        left=hists.get("left", {}),
        right=hists.get("right", {}),
        selected=selected,
        total=tables.denom,
        denom=tables.denom,
        exact=True,
    )


def extreme_positions_scalar(view: SupportView, bits: int, side: str):
    from .paths import extreme_positions

    return extreme_positions(view, bits, side)


def joint_event_weights(
    model: PercolationModel,
    space: Support,
    events: Sequence[EventFn],
    exact: bool = True,
    chunk: int = 1 << 18,
    threads: int = 1,
):
    """Total weight per boolean combination of the given events.

    Returns (table, denom): table[i] is the weight of the outcome where
    event j holds iff bit j of i is set.
    """
    nbits = len(space.items)
    tables = weight_tables(model, space)
    ncells = 1 << len(events)
    if exact and not tables.int64_safe:
        raise SupportTooLarge("event weights exceed the exact int64 engine; use floats")
    total = 1 << nbits

    def run(lo, hi):
        ids = np.arange(lo, hi, dtype=np.uint64)
        w = weights_chunk(tables, ids, exact)
        combo = np.zeros(ids.shape, dtype=np.int64)
        for j, ev in enumerate(events):
            combo |= ev(ids).astype(np.int64) << j
        cells = np.zeros(ncells, dtype=np.int64 if exact else np.float64)
        np.add.at(cells, combo, w)
        return cells

    acc = [0] * ncells
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run, lo, hi) for lo, hi in _chunks(total, chunk)]
            for f in futures:
                cells = f.result()
                for i in range(ncells):
                    acc[i] += int(cells[i]) if exact else float(cells[i])
    else:
        for lo, hi in _chunks(total, chunk):
            cells = run(lo, hi)
            for i in range(ncells):
                acc[i] += int(cells[i]) if exact else float(cells[i])
    return acc, tables.denom


def sample_bits(
    model: PercolationModel,
    space: Support,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw configurations from the model law, packed as uint64 ids."""
    n = len(space.items)
    if n > 63:
        raise SupportTooLarge("sampling is packed into 64-bit words")
    tables = weight_tables(model, space)
    ids = np.zeros(count, dtype=np.uint64)
    if tables.singles:
        probs = np.array([w1 / d for _, _, w1, d in tables.singles])
        u = rng.random((count, len(tables.singles)))
        cols = u < probs
        for j, (bit, _, _, _) in enumerate(tables.singles):
            ids |= cols[:, j].astype(np.uint64) << np.uint64(bit)
    for bl, br, nums, d in tables.pairs:
        cum = np.cumsum(np.array(nums, dtype=np.float64) / d)
        cat = np.searchsorted(cum, rng.random(count), side="right")
        cat = np.minimum(cat, 3)
        ids |= ((cat >> 1) & 1).astype(np.uint64) << np.uint64(bl)
        ids |= (cat & 1).astype(np.uint64) << np.uint64(br)
    return ids


def sample_joint_event_counts(
    model: PercolationModel,
    space: Support,
    events: Sequence[EventFn],
    n_samples: int,
    rng: np.random.Generator,
    chunk: int = 1 << 17,
):
    """Monte Carlo counts per boolean combination of the events."""
    ncells = 1 << len(events)
    counts = np.zeros(ncells, dtype=np.int64)
    remaining = n_samples
    while remaining > 0:
        take = min(chunk, remaining)
        ids = sample_bits(model, space, take, rng)
        combo = np.zeros(take, dtype=np.int64)
        for j, ev in enumerate(events):
            combo |= ev(ids).astype(np.int64) << j
        counts += np.bincount(combo, minlength=ncells).astype(np.int64)
        remaining -= take
    return counts


def total_and_T_weights(model: PercolationModel, support: Support, exact: bool = False):
    """Weight of every configuration plus membership in the open-crossing
    set, for kernel-scale supports."""
    n = len(support.items)
    if n > 20:
        raise SupportTooLarge("full state tables are capped at 20 items")
    tables = weight_tables(model, support)
    ids = np.arange(1 << n, dtype=np.uint64)
    w = weights_chunk(tables, ids, exact and tables.int64_safe)
    vv = VecView.from_view(default_view(support))
    t_mask = exists_chunk(vv, ids)
    return w, t_mask
