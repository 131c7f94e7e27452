import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skipqueue.batch import (FiniteSupport, Geometric, GeometricTailLaw, PowerLaw, TailClass,
                             from_config, mean_batch, to_config)

LAWS = [Geometric(0.5), Geometric(0.3), Geometric(0.9), FiniteSupport((0.2, 0.0, 0.5, 0.3)),
        GeometricTailLaw((0.5, 0.25), 1.0, 0.5), GeometricTailLaw((0.1, 0.2), 2.0, 0.6)]


class TestPmf:
    def test_half_geometric(self):
        assert Geometric(0.5).pmf(3) == 0.125

    def test_first_mass(self):
        assert Geometric(0.3).pmf(1) == pytest.approx(0.7, abs=1e-15)

    def test_zero_index_rejected(self):
        with pytest.raises(ValueError):
            Geometric(0.5).pmf(0)

    def test_finite_outside_support(self):
        assert FiniteSupport((0.5, 0.5)).pmf(3) == 0.0

    @pytest.mark.parametrize("probs", [(0.5, 0.4), (0.5, -0.1, 0.6), (0.5, 0.5, 0.0)])
    def test_finite_validation(self, probs):
        with pytest.raises(ValueError):
            FiniteSupport(probs)

    def test_geometric_tail_prefix_certificate(self):
        with pytest.raises(ValueError):
            GeometricTailLaw((0.9,), 1.0, 0.5)

    def test_geometric_tail_continuation_certificate(self):
        # r = 0.5 left, continuation 0.5 * 0.5 = 0.25 > C q^2 = 0.0625
        with pytest.raises(ValueError):
            GeometricTailLaw((0.5,), 0.25, 0.5)


class TestTail:
    def test_geometric(self):
        assert Geometric(0.5).tail(2) == 0.5

    def test_partial_summation(self):
        g = Geometric(0.5)
        assert g.tail(2) == pytest.approx(1 - g.pmf(1), abs=1e-12)

    def test_finite(self):
        f = FiniteSupport((0.2, 0.0, 0.5, 0.3))
        np.testing.assert_allclose(f.tail_array(6), [1.0, 0.8, 0.8, 0.3, 0.0, 0.0], atol=1e-15)

    @pytest.mark.parametrize("law", LAWS)
    def test_consistency(self, law):
        b = law.pmf_array(201)
        B = law.tail_array(201)
        for K in range(1, 201):
            assert math.fsum(b[:K]) + B[K] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("law", LAWS)
    def test_pmf_nonnegative_and_normalised(self, law):
        b = law.pmf_array(2000)
        assert b.min() >= 0
        assert math.fsum(b) == pytest.approx(1.0, abs=1e-12)

    def test_power_tail_against_partial_sums(self):
        p = PowerLaw(3.0)
        assert p.tail(1) == pytest.approx(1.0, abs=1e-14)
        assert p.tail(5) == pytest.approx(1 - math.fsum(p.pmf_array(4)), abs=1e-13)


class TestMean:
    def test_half_geometric_mean(self):
        assert mean_batch(Geometric(0.5)) == 2.0

    def test_heavy_geometric(self):
        assert mean_batch(Geometric(0.9)) == pytest.approx(10.0, rel=1e-14)

    @pytest.mark.parametrize("law", LAWS)
    def test_sum_of_tails_and_first_moment(self, law):
        n = 2000
        k = np.arange(1, n + 1)
        assert law.mean() == pytest.approx(math.fsum(law.tail_array(n)), abs=1e-10)
        assert law.mean() == pytest.approx(math.fsum(k * law.pmf_array(n)), abs=1e-10)

    def test_power_mean_diverges(self):
        with pytest.raises(ValueError):
            PowerLaw(2.0).mean()
        assert PowerLaw(3.0).mean() == pytest.approx(1.3684327776202058, rel=1e-12)


class TestTailClass:
    def test_half_geometric(self):
        assert Geometric(0.5).tail_class() == TailClass.geometric(1.0, 0.5)

    def test_finite(self):
        assert FiniteSupport((0.3, 0.7)).tail_class().kind == "finite"

    def test_general(self):
        assert GeometricTailLaw((0.5, 0.25), 1.0, 0.5).tail_class() == TailClass.geometric(1, 0.5)

    def test_heavy(self):
        assert PowerLaw(2.0).tail_class().kind == "heavy"

    @pytest.mark.parametrize("q", [0.1, 0.3, 0.5, 0.7, 0.95])
    def test_geometric_certificate_holds(self, q):
        law = Geometric(q)
        tc = law.tail_class()
        k = np.arange(1, 300)
        assert np.all(law.pmf(k) <= tc.C * q**k * (1 + 1e-12))

    @pytest.mark.parametrize("law", LAWS[4:])
    def test_general_certificate_holds(self, law):
        tc = law.tail_class()
        k = np.arange(1, 300)
        assert np.all(law.pmf(k) <= tc.C * tc.q**k * (1 + 1e-12))


class TestSample:
    @pytest.mark.parametrize("law", LAWS + [PowerLaw(3.0)])
    def test_empirical_frequencies(self, law):
        u = np.random.default_rng(5).random(200_000)
        x = law.sample(u)
        assert x.min() >= 1
        for k in (1, 2, 3, 4):
            p = law.pmf(k)
            assert np.mean(x == k) == pytest.approx(p, abs=5 * math.sqrt(p * (1 - p) / len(u)) + 1e-12)

    def test_geometric_inverse_transform_is_exact(self):
        g = Geometric(0.5)
        # P(X <= k) = 1 - q^k, so u just below that threshold maps to k
        for k in range(1, 20):
            assert g.sample(np.nextafter(1 - 0.5**k, 0)) == k

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1, exclude_max=True), st.sampled_from(LAWS))
    def test_sample_matches_cdf(self, u, law):
        k = int(law.sample(np.array([u]))[0])
        lower = 1 - law.tail(k)
        upper = 1 - law.tail(k + 1)
        assert lower - 1e-12 <= u <= upper + 1e-12


@pytest.mark.parametrize("law", LAWS + [PowerLaw(2.5)])
def test_config_round_trip(law):
    assert from_config(to_config(law)) == law


def test_config_rejects_unknown():
    with pytest.raises(ValueError):
        from_config({"kind": "poisson", "rate": 2})
    with pytest.raises(ValueError):
        from_config({"kind": "geometric", "q": 0.5, "C": 1})
