"""Resampling dynamics on crossing configurations.

One step has two halves: freeze everything on or left of the leftmost open
crossing and redraw the rest from the model, then freeze everything on or
right of the rightmost open crossing of the intermediate state and redraw
the rest with fresh randomness.  The frozen extreme path stays open, so the
dynamics never leaves the crossing set, and the conditional product law on
crossings is invariant.

A coupled version runs one copy on a support and another on the support of
a left-restricted region, sharing the per-item draws by item identity; the
coupling keeps both extreme paths of the restricted copy weakly left of
their unrestricted counterparts.

Item laterality against a path: an edge counts as on-or-left when both of
its endpoints satisfy x <= path(level); a site when its own x does.  This
makes the freeze sets a partition and keeps the event "this path is the
leftmost crossing" measurable from the frozen side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import weight_tables, weights_chunk, total_and_T_weights
from .lattice import (
    LatticeError,
    PercolationModel,
    Region,
    Site,
    Support,
    SupportTooLarge,
    Variant,
    strictly_left_region,
    support_for,
    _common_level,
)
from .paths import (
    Configuration,
    PathSpec,
    default_view,
    extreme_positions,
    leftmost_open_path,
    path_leq,
    rightmost_open_path,
)
from .report import Report, ScalarRecord


class UnsupportedModel(LatticeError):
    """The resampling dynamics needs independent items."""


class CounterRng:
    """Counter-based uniform streams keyed by (step index, half).

    Within a call, draw i belongs to item bit i, so the same (step, half,
    item) triple always sees the same uniform regardless of which chain
    consumes it.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & (2**64 - 1)

    def uniforms(self, step: int, half: int, count: int) -> np.ndarray:
        key = np.array([self.seed, (int(step) << 1) | int(half)], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key)).random(count)


def item_open_probs(model: PercolationModel, support: Support) -> np.ndarray:
    """Per-item open probability vector; requires independence across items."""
    if model.variant is Variant.CORRELATED_PAIR_BOND and not model.pair_law_factorizes:
        raise UnsupportedModel(
            "per-item resampling needs an independent (factorizing) pair law"
        )
    if model.is_site_model:
        return np.array([float(model.site_prob(s)) for s in support.items])
    return np.array([float(model.edge_prob(e)) for e in support.items])


def left_freeze_mask(support: Support, path: PathSpec) -> int:
    """Bits of the items on or left of the path."""
    mask = 0
    if support.kind == "edge":
        for i, e in enumerate(support.items):
            if e.src.x <= path.at(e.src.y) and e.dst.x <= path.at(e.dst.y):
                mask |= 1 << i
    else:
        for i, s in enumerate(support.items):
            if s.x <= path.at(s.y):
                mask |= 1 << i
    return mask


def right_freeze_mask(support: Support, path: PathSpec) -> int:
    mask = 0
    if support.kind == "edge":
        for i, e in enumerate(support.items):
            if e.src.x >= path.at(e.src.y) and e.dst.x >= path.at(e.dst.y):
                mask |= 1 << i
    else:
        for i, s in enumerate(support.items):
            if s.x >= path.at(s.y):
                mask |= 1 << i
    return mask


@dataclass(frozen=True)
class ChainState:
    """A configuration with at least one open crossing."""

    config: Configuration

    def __post_init__(self):
        lp = leftmost_open_path(self.config)
        if lp is None:
            raise LatticeError("chain states need an open crossing")
        object.__setattr__(self, "_leftmost", lp)
        object.__setattr__(self, "_rightmost", None)

    @property
    def support(self) -> Support:
        return self.config.support

    @property
    def bits(self) -> int:
        return self.config.bits

    def leftmost(self) -> PathSpec:
        return self._leftmost

    def rightmost(self) -> PathSpec:
        if self._rightmost is None:
            object.__setattr__(self, "_rightmost", rightmost_open_path(self.config))
        return self._rightmost


def _draw_bits(u: np.ndarray, probs: np.ndarray) -> int:
    bits = 0
    for i in np.flatnonzero(u < probs):
        bits |= 1 << int(i)
    return bits


def bhk_step(
    state: ChainState,
    model: PercolationModel,
    rng: CounterRng,
    step_index: int = 0,
    probs: Optional[np.ndarray] = None,
) -> ChainState:
    """One two-half resampling step."""
    support = state.support
    if probs is None:
        probs = item_open_probs(model, support)
    full = (1 << len(support.items)) - 1
    g_left = state.leftmost()
    keep = left_freeze_mask(support, g_left)
    draws = _draw_bits(rng.uniforms(step_index, 0, len(support.items)), probs)
    half_bits = (state.bits & keep) | (draws & ~keep & full)
    half = Configuration(support, half_bits)
    g_right = rightmost_open_path(half)
    keep2 = right_freeze_mask(support, g_right)
    draws2 = _draw_bits(rng.uniforms(step_index, 1, len(support.items)), probs)
    new_bits = (half_bits & keep2) | (draws2 & ~keep2 & full)
    return ChainState(Configuration(support, new_bits))


class ResamplingChain:
    """Sequential driver holding the step counter and cached tables."""

    def __init__(self, model, support, seed=0, start: Optional[int] = None):
        self.model = model
        self.support = support
        self.rng = CounterRng(seed)
        self.probs = item_open_probs(model, support)
        full = (1 << len(support.items)) - 1
        self.state = ChainState(Configuration(support, full if start is None else start))
        self.step_index = 0

    def step(self) -> ChainState:
        self.state = bhk_step(
            self.state, self.model, self.rng, self.step_index, self.probs
        )
        self.step_index += 1
        return self.state


# --- coupled dynamics -----------------------------------------------------------


@dataclass(frozen=True)
class CoupledState:
    eta: ChainState
    xi: ChainState


def in_X(state: CoupledState) -> bool:
    """Both extreme crossings of the restricted copy sit weakly left."""
    return path_leq(state.xi.leftmost(), state.eta.leftmost()) and path_leq(
        state.xi.rightmost(), state.eta.rightmost()
    )


def _embed_map(sub: Support, full: Support) -> list:
    out = []
    for item in sub.items:
        if item not in full.index:
            raise LatticeError("restricted support is not contained in the full one")
        out.append(full.index[item])
    return out


def _project_bits(full_bits: int, item_map: Sequence[int]) -> int:
    bits = 0
    for i, j in enumerate(item_map):
        bits |= ((full_bits >> j) & 1) << i
    return bits


def coupled_step(
    state: CoupledState,
    model: PercolationModel,
    rng: CounterRng,
    step_index: int = 0,
    item_map: Optional[Sequence[int]] = None,
    probs_full: Optional[np.ndarray] = None,
) -> CoupledState:
    """Advance both marginals with shared draws.

    The shared uniforms are indexed by the full support's bits; the
    restricted copy reads the draw of the identical item, and draws for
    items outside its support are simply unused.  Each marginal evolves
    exactly as its own single chain would.
    """
    eta, xi = state.eta, state.xi
    if item_map is None:
        item_map = _embed_map(xi.support, eta.support)
    if probs_full is None:
        probs_full = item_open_probs(model, eta.support)
    n_full = len(eta.support.items)
    full_e = (1 << n_full) - 1
    full_x = (1 << len(xi.support.items)) - 1

    u = rng.uniforms(step_index, 0, n_full)
    draws_full = _draw_bits(u, probs_full)
    draws_sub = _project_bits(draws_full, item_map)
    keep_e = left_freeze_mask(eta.support, eta.leftmost())
    keep_x = left_freeze_mask(xi.support, xi.leftmost())
    eta_half = Configuration(eta.support, (eta.bits & keep_e) | (draws_full & ~keep_e & full_e))
    xi_half = Configuration(xi.support, (xi.bits & keep_x) | (draws_sub & ~keep_x & full_x))

    u2 = rng.uniforms(step_index, 1, n_full)
    draws_full2 = _draw_bits(u2, probs_full)
    draws_sub2 = _project_bits(draws_full2, item_map)
    keep_e2 = right_freeze_mask(eta.support, rightmost_open_path(eta_half))
    keep_x2 = right_freeze_mask(xi.support, rightmost_open_path(xi_half))
    eta_new = Configuration(
        eta.support, (eta_half.bits & keep_e2) | (draws_full2 & ~keep_e2 & full_e)
    )
    xi_new = Configuration(
        xi.support, (xi_half.bits & keep_x2) | (draws_sub2 & ~keep_x2 & full_x)
    )
    return CoupledState(ChainState(eta_new), ChainState(xi_new))


class CoupledChain:
    def __init__(self, model, support_full, support_sub, seed=0):
        self.model = model
        self.rng = CounterRng(seed)
        self.item_map = _embed_map(support_sub, support_full)
        self.probs = item_open_probs(model, support_full)
        sub_full_bits = (1 << len(support_sub.items)) - 1
        eta_bits = 0
        for j in self.item_map:
            eta_bits |= 1 << j
        self.state = CoupledState(
            ChainState(Configuration(support_full, eta_bits)),
            ChainState(Configuration(support_sub, sub_full_bits)),
        )
        if not in_X(self.state):
            raise LatticeError("initial coupled state escapes the ordered set")
        self.step_index = 0

    def step(self) -> CoupledState:
        self.state = coupled_step(
            self.state, self.model, self.rng, self.step_index, self.item_map, self.probs
        )
        self.step_index += 1
        return self.state


# --- exact kernel ----------------------------------------------------------------


@dataclass
class KernelResult:
    states: list          # configuration bits of the crossing states, ascending
    matrix: object        # ndarray (float) or nested Fraction lists (exact)
    exact: bool

    def index(self, bits: int) -> int:
        from bisect import bisect_left

        i = bisect_left(self.states, bits)
        if i == len(self.states) or self.states[i] != bits:
            raise KeyError(f"state {bits} has no open crossing")
        return i


def _extreme_path_of_bits(support, bits, side):
    view = default_view(support)
    pos = extreme_positions(view, bits, side)
    return PathSpec(view.m, tuple(view.level_xs[k][p] for k, p in enumerate(pos)))


def conditional_stationary(model: PercolationModel, support: Support):
    """Crossing states and the model law conditioned on a crossing."""
    w, t_mask = total_and_T_weights(model, support)
    states = np.flatnonzero(t_mask)
    pi = w[states].astype(np.float64)
    pi /= pi.sum()
    return [int(s) for s in states], pi


def _half_rows(model, support, states, side):
    """Per-state (freeze_mask, frozen_base, frozen_weight) for one half."""
    probs = item_open_probs(model, support)
    rows = []
    for bits in states:
        g = _extreme_path_of_bits(support, bits, "left" if side == 0 else "right")
        if side == 0:
            fm = left_freeze_mask(support, g)
        else:
            fm = right_freeze_mask(support, g)
        base = bits & fm
        wf = 1.0
        for i in range(len(support.items)):
            if (fm >> i) & 1:
                wf *= probs[i] if (bits >> i) & 1 else 1.0 - probs[i]
        rows.append((fm, base, wf))
    return rows


def _apply_half(model, support, states, dist, side, ids, w_all):
    rows = _half_rows(model, support, states, side)
    y = np.zeros(len(ids))
    for mass, (fm, base, wf) in zip(dist, rows):
        if mass == 0.0:
            continue
        match = (ids & np.uint64(fm)) == np.uint64(base)
        y[match] += mass * w_all[match] / wf
    return y


def invariance_gap_tv(model: PercolationModel, support: Support) -> float:
    """Total-variation distance between the conditional law and its image
    under one full resampling step, computed without materializing the
    kernel."""
    n = len(support.items)
    if n > 20:
        raise SupportTooLarge("invariance check is capped at 20 items")
    states, pi = conditional_stationary(model, support)
    ids = np.arange(1 << n, dtype=np.uint64)
    w_all = weights_chunk(weight_tables(model, support), ids, exact=False)
    y_full = _apply_half(model, support, states, pi, 0, ids, w_all)
    mid = y_full[states]
    y_full = _apply_half(model, support, states, mid, 1, ids, w_all)
    out = y_full[states]
    return 0.5 * float(np.abs(out - pi).sum())


def exact_kernel(
    model: PercolationModel,
    support: Support,
    A=None,
    B=None,
    *,
    exact: bool = False,
    cap: int = 14,
) -> KernelResult:
    """Dense transition matrix of the two-half step on the crossing states.

    Float mode handles supports up to the cap; exact rational mode is
    limited to 10 items since the matrix holds Fractions.
    """
    n = len(support.items)
    if n > cap:
        raise SupportTooLarge(f"kernel needs |support| <= {cap}, got {n}")
    if exact and n > 10:
        raise SupportTooLarge("rational kernel mode is capped at 10 items")
    states, _ = conditional_stationary(model, support)
    idx = {bits: i for i, bits in enumerate(states)}
    if not exact:
        ids = np.arange(1 << n, dtype=np.uint64)
        w_all = weights_chunk(weight_tables(model, support), ids, exact=False)
        k_halves = []
        for side in (0, 1):
            rows = _half_rows(model, support, states, side)
            K = np.zeros((len(states), len(states)))
            state_arr = np.array(states, dtype=np.uint64)
            for i, (fm, base, wf) in enumerate(rows):
                match = (state_arr & np.uint64(fm)) == np.uint64(base)
                K[i, match] = w_all[state_arr[match].astype(np.int64)] / wf
            k_halves.append(K)
        return KernelResult(states=states, matrix=k_halves[0] @ k_halves[1], exact=False)

    def frac_probs():
        if model.is_site_model:
            return [model.site_prob(s) for s in support.items]
        return [model.edge_prob(e) for e in support.items]

    probs = frac_probs()

    def half_matrix(side):
        K = [[Fraction(0)] * len(states) for _ in states]
        for i, bits in enumerate(states):
            g = _extreme_path_of_bits(support, bits, "left" if side == 0 else "right")
            fm = left_freeze_mask(support, g) if side == 0 else right_freeze_mask(support, g)
            base = bits & fm
            for j, target in enumerate(states):
                if (target & fm) != base:
                    continue
                w = Fraction(1)
                for b in range(n):
                    if (fm >> b) & 1:
                        continue
                    w *= probs[b] if (target >> b) & 1 else 1 - probs[b]
                K[i][j] = w
            assert sum(K[i]) == 1
        return K

    K1 = half_matrix(0)
    K2 = half_matrix(1)
    K = [
        [sum(K1[i][k] * K2[k][j] for k in range(len(states))) for j in range(len(states))]
        for i in range(len(states))
    ]
    return KernelResult(states=states, matrix=K, exact=True)


def kernel_power_convergence(
    kernel: KernelResult, pi: np.ndarray, tol: float = 1e-8, max_iter: int = 100000
) -> list:
    """Iterations each point-mass start needs to come within tol (TV) of pi."""
    K = kernel.matrix
    if kernel.exact:
        K = np.array([[float(v) for v in row] for row in K])
    out = []
    for i in range(len(kernel.states)):
        x = np.zeros(len(kernel.states))
        x[i] = 1.0
        for it in range(1, max_iter + 1):
            x = x @ K
            if 0.5 * np.abs(x - pi).sum() < tol:
                out.append(it)
                break
        else:
            out.append(max_iter + 1)
    return out


# --- coupled estimation ------------------------------------------------------------


def up_set_indicator(path: PathSpec) -> Callable[[PathSpec], int]:
    return lambda q: 1 if path_leq(path, q) else 0


def chain_theorem1_estimate(
    model: PercolationModel,
    A,
    B,
    G,
    steps: int,
    burn_in: Optional[int] = None,
    seed: int = 0,
    *,
    batches: int = 50,
    tolerance: float = 0.01,
) -> Report:
    """Run the coupled dynamics and report the monotone-function gaps.

    For a family of up-set indicators, the long-run mean over the full
    support must weakly dominate the mean over the left-restricted support.
    Every step asserts membership in the ordered coupling set; the count of
    violations is reported (and must stay zero).
    """
    from .paths import enumerate_paths

    A = model.require_sites(A)
    B = model.require_sites(B)
    G = model.require_sites(G)
    m = _common_level(model, A, "A")
    n = _common_level(model, B, "B")
    whole = Region.whole(m, n)
    sup_full = support_for(model, whole, A, B)
    region_left = strictly_left_region(G, m, n)
    sup_sub = support_for(model, region_left, A, B)
    if burn_in is None:
        burn_in = 100 * len(sup_full.items)
    paths = enumerate_paths(model, A, B, whole)
    phis = [(f"up({list(p.xs)})", up_set_indicator(p)) for p in paths]
    chain = CoupledChain(model, sup_full, sup_sub, seed=seed)
    kept = max(steps - burn_in, 1)
    batch_len = max(kept // batches, 1)
    eta_batch = np.zeros((batches + 1, len(phis)))
    xi_batch = np.zeros((batches + 1, len(phis)))
    counts = np.zeros(batches + 1)
    violations = 0
    kept_so_far = 0
    for t in range(steps):
        state = chain.step()
        if not in_X(state):
            violations += 1
        if t < burn_in:
            continue
        b = min(kept_so_far // batch_len, batches)
        gl_eta = state.eta.leftmost()
        gl_xi = state.xi.leftmost()
        for j, (_, phi) in enumerate(phis):
            eta_batch[b, j] += phi(gl_eta)
            xi_batch[b, j] += phi(gl_xi)
        counts[b] += 1
        kept_so_far += 1
    used = counts > 0
    records = []
    entries = []
    total = counts[used].sum()
    for j, (name, _) in enumerate(phis):
        eta_mean = eta_batch[used, j].sum() / total
        xi_mean = xi_batch[used, j].sum() / total
        diff = eta_mean - xi_mean
        batch_means = (eta_batch[used, j] - xi_batch[used, j]) / counts[used]
        nb = used.sum()
        stderr = float(batch_means.std(ddof=1) / np.sqrt(nb)) if nb > 1 else 0.0
        entries.append(
            {
                "phi": name,
                "path_xs": list(paths[j].xs),
                "eta_mean": float(eta_mean),
                "xi_mean": float(xi_mean),
                "diff": float(diff),
                "stderr": stderr,
            }
        )
        records.append(
            ScalarRecord(
                claim=f"E[{name}](full) >= E[{name}](left-restricted)",
                lhs=float(eta_mean),
                rhs=float(xi_mean),
                gap=float(diff),
                method="mc",
                n=int(total),
                holds=bool(diff >= -tolerance),
                note=f"stderr={stderr:.3e}",
            )
        )
    records.append(
        ScalarRecord(
            claim="coupled states stay ordered",
            lhs=violations,
            rhs=0,
            gap=violations,
            method="mc",
            n=steps,
            holds=violations == 0,
        )
    )
    return Report(
        kind="chain_estimate",
        records=records,
        meta={
            "model": model.to_json(),
            "A": [[s.x, s.y] for s in A],
            "B": [[s.x, s.y] for s in B],
            "G": [[s.x, s.y] for s in G],
            "steps": steps,
            "burn_in": burn_in,
            "seed": seed,
            "x_violations": violations,
            "entries": entries,
        },
    )


def trajectory_rows(chain, steps: int):
    """Step-by-step extreme paths, for CSV dumps."""
    coupled = isinstance(chain, CoupledChain)
    for t in range(steps):
        state = chain.step()
        if coupled:
            yield {
                "step": t,
                "gamma_left_xs": " ".join(map(str, state.eta.leftmost().xs)),
                "gamma_right_xs": " ".join(map(str, state.eta.rightmost().xs)),
                "xi_gamma_left_xs": " ".join(map(str, state.xi.leftmost().xs)),
                "xi_gamma_right_xs": " ".join(map(str, state.xi.rightmost().xs)),
            }
        else:
            yield {
                "step": t,
                "gamma_left_xs": " ".join(map(str, state.leftmost().xs)),
                "gamma_right_xs": " ".join(map(str, state.rightmost().xs)),
            }
