import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import pmfs
from guesswork.analytics import sync_exponent
from guesswork.markov import (
    MarkovModel,
    ReducibleMatrixError,
    is_irreducible,
    markov_iid_v_moment,
    markov_sync_exponent,
    optimal_markov_guesser,
    perron,
    tilted_matrix,
)
from guesswork.probability import Pmf, tilt

TWO_STATE = [[0.9, 0.1], [0.4, 0.6]]


class TestPerron:
    def test_stochastic(self):
        d = perron(TWO_STATE)
        assert d.lam == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(d.right / d.right[0], 1.0, atol=1e-10)

    def test_scaled_identity_like(self):
        # c * I is reducible; use a cyclic permutation scaled by c, whose root is c
        c = 2.5
        assert perron(c * np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]])).lam == pytest.approx(c, abs=1e-10)
        assert perron([[c]]).lam == pytest.approx(c)

    @given(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0.01, 3))
    def test_quadratic_formula(self, a, b, c, d):
        tr, det = a + d, a * d - b * c
        want = tr / 2 + math.sqrt(tr * tr / 4 - det)
        res = perron([[a, b], [c, d]])
        assert res.lam == pytest.approx(want, rel=1e-10)
        w = np.array([[a, b], [c, d]])
        assert np.allclose(w @ res.right, res.lam * res.right, rtol=1e-9)
        assert np.allclose(res.left @ w, res.lam * res.left, rtol=1e-9)
        assert res.left.sum() == pytest.approx(1.0) and res.left @ res.right == pytest.approx(1.0)

    def test_periodic_converges(self):
        assert perron([[0, 1], [1, 0]]).lam == pytest.approx(1.0, abs=1e-12)

    def test_reducible(self):
        assert not is_irreducible([[1, 0], [1, 1]])
        with pytest.raises(ReducibleMatrixError):
            perron([[1, 0], [1, 1]])

    def test_negative(self):
        with pytest.raises(ValueError):
            perron([[1, -1], [1, 1]])


class TestModel:
    def test_stationary(self):
        m = MarkovModel.from_transitions("ab", TWO_STATE)
        assert np.allclose(m.stationary.probs, [0.8, 0.2], atol=1e-12)

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValueError):
            MarkovModel(("a", "b"), np.array([[0.5, 0.4], [0.5, 0.5]]), Pmf.uniform(("a", "b")))

    def test_rejects_wrong_stationary(self):
        with pytest.raises(ValueError):
            MarkovModel(("a", "b"), np.array(TWO_STATE), Pmf.uniform(("a", "b")))

    def test_json_round_trip(self):
        m = MarkovModel.from_transitions(("x", "y"), TWO_STATE)
        m2 = MarkovModel.from_json(m.to_json())
        assert np.array_equal(m.transitions, m2.transitions) and m.states == m2.states

    def test_sample_frequencies(self):
        m = MarkovModel.from_transitions("ab", TWO_STATE)
        x = m.sample(np.random.default_rng(0), 20000, 5)
        assert abs((x[:, 0] == 0).mean() - 0.8) < 0.02
        after_a = x[:, 1][x[:, 0] == 0]
        assert abs((after_a == 0).mean() - 0.9) < 0.02


class TestGuesser:
    def test_rows_stochastic(self):
        g = optimal_markov_guesser(MarkovModel.from_transitions("ab", TWO_STATE), 1.0)
        assert np.allclose(g.transitions.sum(axis=1), 1.0, atol=1e-10)

    @given(pmfs(max_size=5), st.floats(0.2, 4))
    def test_rank_one_reduces_to_tilt(self, p, rho):
        src = MarkovModel.iid(p)
        g = optimal_markov_guesser(src, rho)
        t = tilt(p, 1 / (1 + rho)).probs
        assert np.max(np.abs(g.transitions - t[None, :])) <= 1e-10
        assert markov_sync_exponent(src, rho) == pytest.approx(sync_exponent(p, rho), abs=1e-10)

    def test_small_rho_recovers_source(self):
        src = MarkovModel.from_transitions("ab", TWO_STATE)
        g = optimal_markov_guesser(src, 1e-12)
        assert np.allclose(g.transitions, src.transitions, atol=1e-9)

    def test_uniform_chain(self):
        src = MarkovModel.from_transitions("ab", [[0.5, 0.5], [0.5, 0.5]])
        assert markov_sync_exponent(src, 2.0) == pytest.approx(2 * math.log(2), abs=1e-12)

    def test_small_rho_exponent(self):
        src = MarkovModel.from_transitions("ab", TWO_STATE)
        assert markov_sync_exponent(src, 1e-9) == pytest.approx(0.0, abs=1e-8)

    def test_finite_n_transfer_matches_enumeration(self):
        src = MarkovModel.from_transitions("ab", TWO_STATE)
        g = optimal_markov_guesser(src, 1.0)
        n = 6
        grid = np.array(np.meshgrid(*[[0, 1]] * n, indexing="ij")).reshape(n, -1).T
        lp = src.log_prob(grid)
        lq = g.log_prob(grid)
        want = math.log(np.exp(lp - lq).sum())
        assert markov_iid_v_moment(src, g, n, 1.0) == pytest.approx(want, abs=1e-12)

    def test_finite_n_approaches_exponent(self):
        src = MarkovModel.from_transitions("ab", TWO_STATE)
        g = optimal_markov_guesser(src, 1.0)
        e = markov_sync_exponent(src, 1.0)
        per = [markov_iid_v_moment(src, g, n, 1.0) / n for n in (8, 16, 64, 256)]
        assert abs(per[-1] - e) < abs(per[0] - e)
        assert abs(per[-1] / e - 1) < 0.01

    def test_tilted_matrix_rejects_negative(self):
        with pytest.raises(ValueError):
            tilted_matrix(MarkovModel.from_transitions("ab", TWO_STATE), -1.0)
