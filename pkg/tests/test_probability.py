import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import pmfs
from guesswork.probability import (
    ConditionalPmf,
    FrequencyFileError,
    NumericOverflowError,
    Pmf,
    ZipfSpec,
    conditional_tilt,
    cross_entropy,
    empirical_from_counts,
    harmonic_number,
    kl_divergence,
    product_pmf,
    read_frequency_file,
    renyi_entropy,
    shannon_entropy,
    tilt,
    truncate_top_k,
    zipf_pmf,
)

mpmath.mp.dps = 40


class TestPmf:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            Pmf((0, 1), [0.5, 0.6])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Pmf((0, 1), [1.5, -0.5])

    def test_rejects_duplicate_support(self):
        with pytest.raises(ValueError):
            Pmf(("a", "a"), [0.5, 0.5])

    def test_immutable(self, ber02):
        with pytest.raises(ValueError):
            ber02.probs[0] = 0.5

    def test_renormalized_drift_limits(self):
        p = Pmf.renormalized((0, 1), [0.3, 0.7 + 1e-9])
        assert math.fsum(p.probs) == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(ValueError):
            Pmf.renormalized((0, 1), [0.3, 0.71])

    def test_many_symbols_sum(self):
        rng = np.random.default_rng(1)
        p = Pmf.from_weights(range(10**4), rng.random(10**4))
        assert abs(math.fsum(p.probs) - 1.0) <= 1e-12


class TestTilt:
    def test_uniform_fixed(self):
        assert tilt(Pmf.uniform(4), 0.37).allclose(Pmf.uniform(4))

    def test_bernoulli_half(self, ber02):
        q = tilt(ber02, 0.5)
        # high-precision oracle
        a, b = mpmath.sqrt(mpmath.mpf("0.2")), mpmath.sqrt(mpmath.mpf("0.8"))
        assert q.probs[0] == pytest.approx(float(a / (a + b)), abs=1e-15)
        assert q.probs[1] == pytest.approx(float(b / (a + b)), abs=1e-15)
        assert q.allclose(Pmf.bernoulli(1 / 3))

    def test_identity(self, ber02):
        assert tilt(ber02, 1.0).allclose(ber02)

    def test_zero_is_uniform_on_support(self):
        p = Pmf((0, 1, 2), [0.5, 0.5, 0.0])
        assert np.allclose(tilt(p, 0.0).probs, [0.5, 0.5, 0.0])

    def test_large_theta_concentrates(self):
        q = tilt(Pmf((0, 1, 2), [0.5, 0.3, 0.2]), 2000.0)
        assert q.probs[0] == pytest.approx(1.0)

    def test_rejects_negative(self, ber02):
        with pytest.raises(ValueError):
            tilt(ber02, -1.0)

    def test_overflow_reported(self, ber02):
        with pytest.raises((NumericOverflowError, ValueError)):
            tilt(ber02, math.inf)

    @given(pmfs(), st.floats(0.05, 5), st.floats(0.05, 5))
    def test_group_property(self, p, a, b):
        assert tilt(tilt(p, a), b).allclose(tilt(p, a * b), atol=1e-9)

    @given(pmfs(), st.floats(0.05, 5))
    def test_preserves_order(self, p, theta):
        q = tilt(p, theta)
        strict = np.subtract.outer(p.probs, p.probs) > 1e-12
        assert np.all(np.subtract.outer(q.probs, q.probs)[strict] > 0)


class TestEntropies:
    def test_uniform(self):
        assert shannon_entropy(Pmf.uniform(7)) == pytest.approx(math.log(7), abs=1e-14)
        for a in (0.3, 0.5, 2.0, 7.0):
            assert renyi_entropy(Pmf.uniform(7), a) == pytest.approx(math.log(7), abs=1e-13)

    def test_point_mass(self):
        pm = Pmf.point_mass(3, 1)
        assert shannon_entropy(pm) == 0.0
        assert renyi_entropy(pm, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert renyi_entropy(pm, 3.0) == pytest.approx(0.0, abs=1e-15)

    def test_bernoulli_shannon(self, ber02):
        want = -(mpmath.mpf("0.2") * mpmath.log("0.2") + mpmath.mpf("0.8") * mpmath.log("0.8"))
        assert shannon_entropy(ber02) == pytest.approx(float(want), abs=1e-14)
        assert shannon_entropy(ber02) == pytest.approx(0.500402, abs=1e-6)

    def test_bernoulli_renyi_half(self, ber02):
        assert renyi_entropy(ber02, 0.5) == pytest.approx(math.log(1.8), abs=1e-14)

    def test_renyi_order_one_is_shannon(self, ber02):
        assert renyi_entropy(ber02, 1.0) == pytest.approx(shannon_entropy(ber02), abs=1e-14)
        assert renyi_entropy(ber02, 1.0 + 1e-7) == pytest.approx(shannon_entropy(ber02), abs=1e-6)

    def test_renyi_rejects_nonpositive_order(self, ber02):
        with pytest.raises(ValueError):
            renyi_entropy(ber02, 0.0)

    @given(pmfs(), st.floats(0.1, 4), st.floats(0.1, 4))
    def test_renyi_nonincreasing_in_order(self, p, a, b):
        lo, hi = sorted((a, b))
        assert renyi_entropy(p, lo) >= renyi_entropy(p, hi) - 1e-10


class TestDivergences:
    def test_self_divergence(self, ber02):
        assert kl_divergence(ber02, ber02) == 0.0

    def test_bernoulli_half_vs_02(self):
        # 0.5 log(0.5/0.2) + 0.5 log(0.5/0.8) = log 1.25
        half = mpmath.mpf("0.5")
        want = half * mpmath.log(half / mpmath.mpf("0.2")) + half * mpmath.log(half / mpmath.mpf("0.8"))
        got = kl_divergence(Pmf.bernoulli(0.5), Pmf.bernoulli(0.2))
        assert got == pytest.approx(float(want), abs=1e-14)
        assert got == pytest.approx(math.log(1.25), abs=1e-14)

    def test_support_mismatch_is_infinite(self):
        assert kl_divergence(Pmf.uniform(2), Pmf.point_mass(2, 0)) == math.inf
        assert cross_entropy(Pmf.uniform(2), Pmf.point_mass(2, 0)) == math.inf

    def test_different_alphabets_raise(self):
        with pytest.raises(ValueError):
            kl_divergence(Pmf.uniform(2), Pmf.uniform(3))

    @given(pmfs(min_size=3, max_size=3), pmfs(min_size=3, max_size=3))
    def test_cross_entropy_identity(self, q, p):
        assert cross_entropy(q, p) - kl_divergence(q, p) - shannon_entropy(q) == pytest.approx(0.0, abs=1e-12)

    @given(pmfs(), pmfs())
    def test_gibbs(self, q, p):
        if len(q) == len(p):
            assert kl_divergence(q, p) >= -1e-14


class TestZipf:
    def test_pdf_m2(self):
        assert zipf_pmf(ZipfSpec(2, 1.0)).allclose(Pmf((1, 2), [2 / 3, 1 / 3]))

    def test_pdf_s0_uniform(self):
        assert np.allclose(zipf_pmf(ZipfSpec(5, 0.0)).probs, 0.2)

    def test_cdf_s1_uniform(self):
        assert np.allclose(zipf_pmf(ZipfSpec(6, 1.0, "cdf")).probs, 1 / 6)

    def test_cdf_telescopes(self):
        p = zipf_pmf(ZipfSpec(10, 0.5, "cdf"))
        i = np.arange(1, 11)
        assert np.allclose(p.probs, (i**0.5 - (i - 1) ** 0.5) / 10**0.5, atol=1e-15)

    def test_harmonic(self):
        assert harmonic_number(3, 1.0) == pytest.approx(1 + 1 / 2 + 1 / 3, abs=1e-15)

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            ZipfSpec(0, 1.0)
        with pytest.raises(ValueError):
            ZipfSpec(5, 1.5, "cdf")
        with pytest.raises(ValueError):
            ZipfSpec(5, 1.0, normalizer=2.0)

    @given(st.integers(2, 200), st.floats(0.1, 2.0), st.floats(0.1, 3.0))
    def test_tilt_is_zipf(self, m, s, rho):
        p = zipf_pmf(ZipfSpec(m, s))
        assert tilt(p, 1 / (1 + rho)).allclose(zipf_pmf(ZipfSpec(m, s / (1 + rho))), atol=1e-12)


class TestEmpirical:
    def test_counts(self):
        p = empirical_from_counts([("a", 3), ("b", 1)])
        assert p.as_dict() == {"a": 0.75, "b": 0.25}

    def test_single_is_point_mass(self):
        assert empirical_from_counts([("a", 1)]).probs.tolist() == [1.0]

    def test_sorted_by_count(self):
        p = empirical_from_counts([("z", 1), ("a", 5), ("m", 5)])
        assert p.support == ("a", "m", "z")

    def test_many_rows(self):
        rows = [(f"pw{i}", (i * 7919) % 1000 + 1) for i in range(10**4)]
        p = empirical_from_counts(rows)
        assert abs(math.fsum(p.probs) - 1.0) <= 1e-12

    def test_rejects_bad_rows(self):
        with pytest.raises(ValueError):
            empirical_from_counts([("a", 1), ("a", 2)])
        with pytest.raises(ValueError):
            empirical_from_counts([("a", 0)])
        with pytest.raises(ValueError):
            empirical_from_counts([])

    def test_truncate(self):
        p = truncate_top_k(empirical_from_counts([("a", 5), ("b", 3), ("c", 2)]), 2)
        assert p.support == ("a", "b")
        assert p.probs.tolist() == pytest.approx([5 / 8, 3 / 8])


class TestFrequencyFile:
    def test_reads_and_skips_comments(self, tmp_path):
        f = tmp_path / "f.tsv"
        f.write_text("# header\npass\t3\n123456\t10\n", encoding="utf-8")
        assert read_frequency_file(f) == [("pass", 3), ("123456", 10)]

    @pytest.mark.parametrize(
        "body,line",
        [("a\t1\nb\n", 2), ("a\t1\nb\t-3\n", 2), ("a\tx\n", 1), ("a\t1\nb\t2\na\t4\n", 3), ("a\t1.5\n", 1)],
    )
    def test_errors_carry_line_numbers(self, tmp_path, body, line):
        f = tmp_path / "f.tsv"
        f.write_text(body, encoding="utf-8")
        with pytest.raises(FrequencyFileError) as e:
            read_frequency_file(f)
        assert e.value.lineno == line
        assert f"line {line}" in str(e.value)


class TestConditional:
    def test_single_row_is_tilt(self, ber02):
        c = conditional_tilt(ConditionalPmf({"y": ber02}), 0.5)
        assert c["y"].allclose(tilt(ber02, 0.5))

    def test_identity(self, ber02):
        c = ConditionalPmf({0: ber02, 1: Pmf.bernoulli(0.5)})
        out = conditional_tilt(c, 1.0)
        assert out[0].allclose(ber02) and out[1].allclose(Pmf.bernoulli(0.5))

    def test_two_rows(self, ber02):
        out = conditional_tilt(ConditionalPmf({0: ber02, 1: Pmf.bernoulli(0.5)}), 0.5)
        assert np.allclose(out[0].probs, [1 / 3, 2 / 3], atol=1e-15)
        assert np.allclose(out[1].probs, [0.5, 0.5], atol=1e-15)


def test_product_pmf_order_and_values(ber02):
    p2 = product_pmf(ber02, 2)
    assert p2.support == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert np.allclose(p2.probs, [0.04, 0.16, 0.16, 0.64], atol=1e-15)
