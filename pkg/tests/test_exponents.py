import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pmfs
from guesswork.exponents import (
    ListGrowthRate,
    async_success_exponent,
    failure_exponent,
    in_guess_list,
    min_beta_async_exponent,
    sync_success_exponent,
    threshold_type,
)
from guesswork.oracle import cross_entropy_rows, entropy_rows, kl_rows, simplex_grid, simplex_grid_min
from guesswork.probability import Pmf, shannon_entropy, tilt

BER = Pmf.bernoulli(0.2)
H_BER = shannon_entropy(BER)
STEP = 1e-6
GRID = simplex_grid(2, STEP)


def grid_level(p, alpha):
    """min CE(q, p) subject to H(q) >= alpha, on the grid."""
    vals = np.where(entropy_rows(GRID) >= alpha, cross_entropy_rows(GRID, p.probs), np.inf)
    return float(vals.min())


def grid_sync(p, alpha):
    level = grid_level(p, alpha)
    return simplex_grid_min(
        lambda q: np.where(cross_entropy_rows(q, p.probs) <= level + 1e-12, kl_rows(q, p.probs), np.inf), 2, STEP
    ).value


def grid_async(p, alpha, beta, restrict=False):
    ph = tilt(p, beta).probs
    level = grid_level(p, alpha) if restrict else np.inf

    def f(q):
        v = kl_rows(q, p.probs) + np.maximum(cross_entropy_rows(q, ph) - alpha, 0.0)
        return np.where(cross_entropy_rows(q, p.probs) <= level + 1e-12, v, np.inf)

    return simplex_grid_min(f, 2, STEP).value


def test_list_growth_rate():
    r = ListGrowthRate.from_base_k(0.5, 4)
    assert r.alpha == pytest.approx(math.log(2))
    with pytest.raises(ValueError):
        ListGrowthRate(2.0, 2)


class TestThreshold:
    def test_full_entropy_is_uniform(self):
        assert threshold_type(BER, math.log(2)).allclose(Pmf.uniform(2), atol=1e-6)

    def test_entropy_of_p_is_p(self):
        assert threshold_type(BER, H_BER).allclose(BER, atol=1e-9)

    def test_bernoulli_06_vs_grid(self):
        q = threshold_type(BER, 0.6)
        assert shannon_entropy(q) == pytest.approx(0.6, abs=1e-10)
        # the solution sits on the q >= 0.2 branch
        assert q.probs[0] >= 0.2
        vals = np.where(entropy_rows(GRID) >= 0.6, cross_entropy_rows(GRID, BER.probs), np.inf)
        assert abs(GRID[int(np.argmin(vals)), 0] - q.probs[0]) <= 2e-6

    def test_in_guess_list(self):
        assert in_guess_list(Pmf.point_mass(2, 1), BER, 0.3)
        assert not in_guess_list(threshold_type(BER, 0.3), BER, 0.3)
        assert not in_guess_list(Pmf.uniform(2), BER, 0.6)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError):
            threshold_type(BER, 0.8)
        with pytest.raises(ValueError):
            sync_success_exponent(BER, -0.1)


class TestSync:
    @pytest.mark.parametrize("alpha", [0.51, 0.6, 0.69])
    def test_zero_above_entropy(self, alpha):
        assert sync_success_exponent(BER, alpha).value == 0.0

    def test_alpha_zero(self):
        assert sync_success_exponent(BER, 0.0).value == pytest.approx(-math.log(0.8), abs=1e-12)
        assert grid_sync(BER, 0.0) == pytest.approx(-math.log(0.8), abs=1e-6)

    @pytest.mark.parametrize("alpha", [0.05, 0.2, 0.35, 0.5])
    def test_matches_grid(self, alpha):
        assert sync_success_exponent(BER, alpha).value == pytest.approx(grid_sync(BER, alpha), abs=1e-5)

    @pytest.mark.parametrize("alpha", [0.1, 0.4, 0.65])
    def test_uniform_source(self, alpha):
        # every sequence has probability 2^-n, so P(G* <= J) = J 2^-n exactly
        u = Pmf.uniform(2)
        assert sync_success_exponent(u, alpha).value == pytest.approx(math.log(2) - alpha, abs=1e-12)

    def test_tied_top_symbols(self):
        # the two tied top symbols alone fill the list while alpha < log 2
        p = Pmf((0, 1, 2), [0.4, 0.4, 0.2])
        assert sync_success_exponent(p, 0.3).value == pytest.approx(-math.log(0.4) - 0.3, abs=1e-12)

    def test_tied_top_exhaustive(self):
        # finite-n check of the tied case: rate of log P(G* <= J) approaches the exponent
        from guesswork.probability import product_pmf

        p = Pmf((0, 1, 2), [0.4, 0.4, 0.2])
        alpha = 0.3
        rates = []
        for n in (6, 9, 12):
            probs = np.sort(product_pmf(p, n).probs)[::-1]
            j = math.ceil(math.exp(n * alpha))
            rates.append(-math.log(probs[:j].sum()) / n)
        want = sync_success_exponent(p, alpha).value
        assert abs(rates[-1] - want) < abs(rates[0] - want) + 1e-12
        assert abs(rates[-1] - want) < 0.05

    def test_monotone_in_alpha(self):
        vals = [sync_success_exponent(BER, a).value for a in np.linspace(0, math.log(2), 30)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_report_json(self):
        d = sync_success_exponent(BER, 0.3).to_json()
        assert d["solver"] == "tilted-bisection" and d["residual"] < 1e-10


class TestAsync:
    def test_beta_one_above_entropy(self):
        assert async_success_exponent(BER, 0.6, 1.0).value == 0.0

    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 3.0])
    def test_alpha_zero_vs_grid(self, beta):
        assert async_success_exponent(BER, 0.0, beta).value == pytest.approx(grid_async(BER, 0.0, beta), abs=1e-6)

    @pytest.mark.parametrize("alpha,beta", [(0.2, 0.5), (0.3, 2.0), (0.45, 1.0), (0.1, 6.0)])
    def test_general_vs_grid(self, alpha, beta):
        assert async_success_exponent(BER, alpha, beta).value == pytest.approx(grid_async(BER, alpha, beta), abs=2e-6)

    @pytest.mark.parametrize("alpha,beta", [(0.2, 0.5), (0.3, 2.0), (0.45, 1.0)])
    def test_restricted_vs_grid(self, alpha, beta):
        got = async_success_exponent(BER, alpha, beta, restrict_to_list_types=True).value
        assert got == pytest.approx(grid_async(BER, alpha, beta, restrict=True), abs=2e-6)

    @pytest.mark.parametrize("alpha", [0.1, 0.3, 0.45])
    def test_achieving_beta(self, alpha):
        # guessing from the threshold type's own tilt attains the list exponent
        q = threshold_type(BER, alpha)
        beta = math.log(q.probs[0] / q.probs[1]) / math.log(0.2 / 0.8)
        got = async_success_exponent(BER, alpha, beta).value
        assert got == pytest.approx(sync_success_exponent(BER, alpha).value, abs=1e-6)

    def test_negative_beta(self):
        with pytest.raises(ValueError):
            async_success_exponent(BER, 0.3, -1.0)

    @settings(max_examples=40)
    @given(pmfs(max_size=4), st.floats(0, 1), st.floats(0, 5))
    def test_never_beats_sync(self, p, frac, beta):
        alpha = frac * math.log(len(p))
        a = async_success_exponent(p, alpha, beta).value
        assert a >= sync_success_exponent(p, alpha).value - 1e-9


class TestMinBeta:
    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.65])
    def test_equals_sync(self, alpha):
        assert min_beta_async_exponent(BER, alpha).value == pytest.approx(
            sync_success_exponent(BER, alpha).value, abs=1e-5
        )

    def test_zero_above_entropy(self):
        assert min_beta_async_exponent(BER, 0.55).value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.1, 0.5])
    def test_uniform(self, alpha):
        u = Pmf.uniform(2)
        assert min_beta_async_exponent(u, alpha).value == pytest.approx(sync_success_exponent(u, alpha).value, abs=1e-6)

    def test_ternary(self):
        p = Pmf((0, 1, 2), [0.6, 0.3, 0.1])
        for alpha in (0.2, 0.5, 0.8):
            assert min_beta_async_exponent(p, alpha).value == pytest.approx(
                sync_success_exponent(p, alpha).value, abs=1e-5
            )


class TestFailure:
    def test_zero_below_entropy(self):
        assert failure_exponent(BER, 0.3).value == 0.0
        assert in_guess_list(BER, BER, 0.6)
        assert not in_guess_list(BER, BER, 0.3)

    def test_full_budget_is_infinite(self):
        assert failure_exponent(BER, math.log(2)).value == math.inf
        assert failure_exponent(BER, math.log(2)).to_json()["value"] == "inf"

    def test_vs_grid(self):
        level = grid_level(BER, 0.65)
        g = simplex_grid_min(
            lambda q: np.where(cross_entropy_rows(q, BER.probs) >= level - 1e-12, kl_rows(q, BER.probs), np.inf), 2, STEP
        ).value
        assert failure_exponent(BER, 0.65).value == pytest.approx(g, abs=1e-5)

    def test_monotone(self):
        vals = [failure_exponent(BER, a).value for a in np.linspace(0.3, 0.69, 25)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
