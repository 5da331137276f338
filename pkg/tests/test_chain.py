"""Resampling dynamics: invariance, convergence, coupling, marginals."""

from fractions import Fraction

import numpy as np
import pytest

from conftest import config_weight_fraction
from perco.chain import (
    ChainState,
    CoupledChain,
    CounterRng,
    ResamplingChain,
    UnsupportedModel,
    bhk_step,
    chain_theorem1_estimate,
    conditional_stationary,
    coupled_step,
    exact_kernel,
    in_X,
    invariance_gap_tv,
    kernel_power_convergence,
    trajectory_rows,
)
from perco.lattice import (
    PercolationModel,
    Region,
    Site,
    band,
    pair_law_from_correlation,
    strictly_left_region,
    support_for,
)
from perco.paths import Configuration, PathSpec

BOND = PercolationModel(p="1/2")
WHOLE2 = Region.whole(0, 2)
DIAMOND = support_for(BOND, WHOLE2, [Site(0, 0)], [Site(0, 2)])


def stacked_diamonds():
    region = band(PathSpec(0, (-2, -3, -2, -3, -2)), PathSpec(0, (2, 3, 2, 3, 2)))
    return support_for(BOND, region, [Site(0, 0)], [Site(0, 4)])


class ScriptedRng:
    """Feeds chosen draw bit patterns; 0.25 encodes open at p=1/2."""

    def __init__(self, patterns):
        self.patterns = patterns

    def uniforms(self, step, half, n):
        bits = self.patterns[(step, half)]
        return np.array([0.25 if (bits >> i) & 1 else 0.75 for i in range(n)])


class TestSingleStep:
    def test_single_path_support_is_frozen(self):
        sup = support_for(BOND, WHOLE2, [Site(0, 0)], [Site(2, 2)])
        state = ChainState(Configuration(sup, 0b11))
        for pattern in range(4):
            rng = ScriptedRng({(0, 0): pattern, (0, 1): pattern})
            assert bhk_step(state, BOND, rng).bits == 0b11

    def test_diamond_two_half_steps_by_hand(self):
        left_only = 0b0101
        state = ChainState(Configuration(DIAMOND, left_only))
        rng = ScriptedRng({(0, 0): 0b1111, (0, 1): 0b0000})
        out = bhk_step(state, BOND, rng)
        assert out.bits == 0b1010  # right route open, left route resampled shut

    def test_all_open_draws_keep_all_open(self):
        state = ChainState(Configuration(DIAMOND, 0b1111))
        rng = ScriptedRng({(0, 0): 0b1111, (0, 1): 0b1111})
        assert bhk_step(state, BOND, rng).bits == 0b1111

    def test_result_always_crosses(self):
        rng = CounterRng(123)
        chain = ResamplingChain(BOND, DIAMOND, seed=123)
        for _ in range(200):
            state = chain.step()
            assert state.leftmost() is not None

    def test_correlated_pairs_rejected(self):
        model = PercolationModel(
            variant="CorrelatedPairBond", p="1/2",
            pair_law=pair_law_from_correlation("1/2", "1/2"),
        )
        state = ChainState(Configuration(DIAMOND, 0b1111))
        with pytest.raises(UnsupportedModel):
            bhk_step(state, model, CounterRng(0))

    def test_factorizing_pair_law_accepted(self):
        model = PercolationModel(
            variant="CorrelatedPairBond", p="1/2",
            pair_law=pair_law_from_correlation("1/2", 0),
        )
        state = ChainState(Configuration(DIAMOND, 0b1111))
        rng = ScriptedRng({(0, 0): 0b1111, (0, 1): 0b1111})
        assert bhk_step(state, model, rng).bits == 0b1111


class TestKernel:
    def test_single_path_kernel_is_identity(self):
        sup = support_for(BOND, WHOLE2, [Site(0, 0)], [Site(2, 2)])
        ker = exact_kernel(BOND, sup)
        assert ker.states == [0b11]
        assert ker.matrix.shape == (1, 1) and ker.matrix[0, 0] == 1.0

    @pytest.mark.parametrize("p", ["1/5", "1/2", "4/5"])
    def test_diamond_invariance(self, p):
        model = PercolationModel(p=p)
        assert invariance_gap_tv(model, DIAMOND) < 1e-12

    def test_stacked_diamonds_invariance(self):
        sup = stacked_diamonds()
        assert len(sup.items) == 8
        assert invariance_gap_tv(BOND, sup) < 1e-12

    def test_rows_are_stochastic(self):
        ker = exact_kernel(BOND, DIAMOND)
        assert np.allclose(ker.matrix.sum(axis=1), 1.0, atol=1e-12)

    def test_rational_kernel_exact_invariance(self):
        ker = exact_kernel(BOND, DIAMOND, exact=True)
        weights = {
            bits: config_weight_fraction(BOND, DIAMOND, bits) for bits in ker.states
        }
        total = sum(weights.values())
        pi = [weights[b] / total for b in ker.states]
        n = len(ker.states)
        out = [
            sum(pi[i] * ker.matrix[i][j] for i in range(n)) for j in range(n)
        ]
        assert out == pi

    def test_kernel_matches_scripted_transition(self):
        # one full step from the left-only state, enumerated over draw pairs
        ker = exact_kernel(BOND, DIAMOND, exact=True)
        start = 0b0101
        row = ker.matrix[ker.index(start)]
        counts = {}
        state = ChainState(Configuration(DIAMOND, start))
        for d1 in range(16):
            for d2 in range(16):
                rng = ScriptedRng({(0, 0): d1, (0, 1): d2})
                out = bhk_step(state, BOND, rng)
                counts[out.bits] = counts.get(out.bits, 0) + 1
        for j, target in enumerate(ker.states):
            assert Fraction(counts.get(target, 0), 256) == row[j]

    def test_invariance_matches_kernel_route(self):
        states, pi = conditional_stationary(BOND, DIAMOND)
        ker = exact_kernel(BOND, DIAMOND)
        direct = 0.5 * np.abs(pi @ ker.matrix - pi).sum()
        assert abs(direct - invariance_gap_tv(BOND, DIAMOND)) < 1e-14

    def test_convergence_from_every_state(self):
        for sup in (DIAMOND, stacked_diamonds()):
            states, pi = conditional_stationary(BOND, sup)
            ker = exact_kernel(BOND, sup)
            iters = kernel_power_convergence(ker, pi, tol=1e-8)
            assert max(iters) < 5000

    def test_site_model_invariance(self):
        model = PercolationModel(variant="IndependentSite", p="2/5")
        sup = support_for(model, WHOLE2, [Site(0, 0)], [Site(1, 2)])
        assert invariance_gap_tv(model, sup) < 1e-12


class TestCoupled:
    def test_equal_supports_stay_identical(self):
        sup_a = support_for(BOND, WHOLE2, [Site(0, 0)], [Site(0, 2)])
        sup_b = support_for(BOND, strictly_left_region([], 0, 2),
                            [Site(0, 0)], [Site(0, 2)])
        chain = CoupledChain(BOND, sup_a, sup_b, seed=9)
        for _ in range(100):
            state = chain.step()
            assert state.eta.bits == state.xi.bits

    def test_membership_preserved(self):
        sub = support_for(BOND, strictly_left_region([Site(1, 1)], 0, 2),
                          [Site(0, 0)], [Site(0, 2)])
        chain = CoupledChain(BOND, DIAMOND, sub, seed=31)
        for _ in range(2000):
            assert in_X(chain.step())

    def test_shared_draws_reach_matching_halves(self):
        # with the restricted copy equal to the unrestricted one and equal
        # states, a scripted draw produces equal updates
        sub = support_for(BOND, WHOLE2, [Site(0, 0)], [Site(0, 2)])
        state = CoupledChain(BOND, DIAMOND, sub, seed=0).state
        rng = ScriptedRng({(0, 0): 0b0110, (0, 1): 0b1001})
        out = coupled_step(state, BOND, rng)
        assert out.eta.bits == out.xi.bits

    def test_coupled_marginal_agrees_with_kernel(self):
        sub = support_for(BOND, strictly_left_region([Site(1, 1)], 0, 2),
                          [Site(0, 0)], [Site(0, 2)])
        chain = CoupledChain(BOND, DIAMOND, sub, seed=0)
        start = chain.state
        ker_full = exact_kernel(BOND, DIAMOND, exact=True)
        ker_sub = exact_kernel(BOND, sub, exact=True)
        eta_counts = {}
        xi_counts = {}
        for d1 in range(16):
            for d2 in range(16):
                rng = ScriptedRng({(0, 0): d1, (0, 1): d2})
                out = coupled_step(start, BOND, rng, item_map=chain.item_map)
                eta_counts[out.eta.bits] = eta_counts.get(out.eta.bits, 0) + 1
                xi_counts[out.xi.bits] = xi_counts.get(out.xi.bits, 0) + 1
        row = ker_full.matrix[ker_full.index(start.eta.bits)]
        for j, target in enumerate(ker_full.states):
            assert Fraction(eta_counts.get(target, 0), 256) == row[j]
        row = ker_sub.matrix[ker_sub.index(start.xi.bits)]
        # the restricted copy sees 2 relevant draws per half; the shared
        # uniforms marginalize out exactly
        for j, target in enumerate(ker_sub.states):
            assert Fraction(xi_counts.get(target, 0), 256) == row[j]


class TestEstimate:
    def test_diamond_estimate_matches_exact_law(self):
        report = chain_theorem1_estimate(
            BOND, [Site(0, 0)], [Site(0, 2)], [Site(1, 1)],
            steps=30000, burn_in=1000, seed=12,
        )
        assert report.all_hold
        assert report.meta["x_violations"] == 0
        entry = next(e for e in report.meta["entries"] if e["path_xs"] == [0, 1, 0])
        assert entry["xi_mean"] == 0.0
        sigma = max(entry["stderr"], 1e-4)
        assert abs(entry["eta_mean"] - 3 / 7) < 4 * sigma

    def test_empty_G_gives_zero_gaps(self):
        report = chain_theorem1_estimate(
            BOND, [Site(0, 0)], [Site(0, 2)], [], steps=2000, burn_in=100, seed=3
        )
        assert all(e["diff"] == 0.0 for e in report.meta["entries"])

    def test_default_burn_in_scales_with_support(self):
        report = chain_theorem1_estimate(
            BOND, [Site(0, 0)], [Site(0, 2)], [], steps=500, seed=3
        )
        assert report.meta["burn_in"] == 100 * len(DIAMOND.items)

    def test_trajectory_rows(self):
        chain = ResamplingChain(BOND, DIAMOND, seed=5)
        rows = list(trajectory_rows(chain, 10))
        assert len(rows) == 10
        assert set(rows[0]) == {"step", "gamma_left_xs", "gamma_right_xs"}
        sub = support_for(BOND, strictly_left_region([Site(1, 1)], 0, 2),
                          [Site(0, 0)], [Site(0, 2)])
        rows = list(trajectory_rows(CoupledChain(BOND, DIAMOND, sub, seed=5), 5))
        assert "xi_gamma_left_xs" in rows[0]

    def test_counter_rng_reproducible_and_half_independent(self):
        a = CounterRng(7).uniforms(3, 0, 5)
        b = CounterRng(7).uniforms(3, 0, 5)
        c = CounterRng(7).uniforms(3, 1, 5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
