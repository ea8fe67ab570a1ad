import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwimm import (
    DeficitError,
    TruncatedPmf,
    charfn_modulus,
    exact_pmf_Y,
    exact_pmf_Y_multi,
    exact_pmf_Z,
    extinction_iterates,
    kolmogorov_diagnostic,
    make_law,
    make_model,
    step_pmf,
)
from gwimm.oracles import enumerate_population_pmf


class TestIterates:
    def test_geometric_closed_form(self, geo_bern):
        cache = extinction_iterates(geo_bern, 1000)
        ns = np.arange(1001, dtype=float)
        assert np.max(np.abs(cache.fj0 - ns / (ns + 1.0))) < 1e-12
        assert cache.fj0[0] == 0.0

    def test_F_product_values(self, geo_bern):
        cache = extinction_iterates(geo_bern, 30)
        assert cache.F[1] == pytest.approx(0.5, abs=1e-15)
        assert cache.F[2] == pytest.approx(3.0 / 8.0, abs=1e-15)
        assert cache.F[3] == pytest.approx(5.0 / 16.0, abs=1e-15)
        for n in range(1, 31):
            assert cache.F[n] == pytest.approx(
                math.comb(2 * n, n) / 4.0**n, rel=1e-12)

    def test_L_values(self, geo_bern):
        cache = extinction_iterates(geo_bern, 10)
        assert cache.L[1] == pytest.approx(2.0, abs=1e-14)
        assert cache.L[4] == pytest.approx(64.0 / 35.0, abs=1e-14)

    def test_L_cache_identity(self, geo_bern):
        cache = extinction_iterates(geo_bern, 100)
        n = np.arange(1, 101, dtype=float)
        assert np.max(np.abs(cache.L[1:] * n**geo_bern.gamma * cache.F[1:] - 1.0)) < 1e-12

    def test_monotonicity(self, bin_bern):
        cache = extinction_iterates(bin_bern, 500)
        assert np.all(np.diff(cache.fj0) > 0)
        assert np.all(np.diff(cache.F) < 0)
        assert np.all((cache.F > 0) & (cache.F <= 1))

    def test_cache_grows_consistently(self, geo_bern):
        small = extinction_iterates(geo_bern, 50)
        big = extinction_iterates(geo_bern, 200)
        assert np.array_equal(small.logF, big.logF[:51])

    def test_horizon_validation(self, geo_bern):
        with pytest.raises(ValueError):
            extinction_iterates(geo_bern, 0)

    def test_kolmogorov_diagnostic(self, geo_bern, bin_bern):
        kd = kolmogorov_diagnostic(extinction_iterates(geo_bern, 10**4))
        assert kd[98] == pytest.approx(0.99, abs=1e-12)   # n = 99
        assert kd[9998] == pytest.approx(0.9999, abs=1e-12)
        kb = kolmogorov_diagnostic(extinction_iterates(bin_bern, 10))
        assert kb[0] == pytest.approx(0.25, abs=1e-15)    # n = 1
        # converges to 1
        assert abs(kd[-1] - 1.0) < 1e-3

    def test_slow_variation(self, geo_bern, bin_bern):
        for model in (geo_bern, bin_bern):
            cache = extinction_iterates(model, 5 * 10**5)
            for c in (2, 5):
                ratio = cache.L[c * 10**5] / cache.L[10**5]
                assert abs(ratio - 1.0) < 0.01

    def test_lemma4_product_identity(self, geo_bern):
        cache = extinction_iterates(geo_bern, 10**4)
        k, n = 100, 10**4
        prod = cache.F_ratio(n, k)
        rhs = (k / n) ** geo_bern.gamma * math.exp(cache.logL[k] - cache.logL[n])
        assert 0.99 <= prod / rhs <= 1.01


class TestStepPmf:
    def test_two_steps_match_enumeration(self, bin_bern):
        start = TruncatedPmf(np.array([1.0] + [0.0] * 16))
        y1 = step_pmf(bin_bern, start)
        y2 = step_pmf(bin_bern, y1)
        assert np.allclose(y2.probs[:4], [0.375, 0.375, 0.125, 0.125], atol=1e-15)

    def test_single_step_from_zero_is_immigration(self, geo_bern):
        start = TruncatedPmf(np.array([1.0] + [0.0] * 8))
        y1 = step_pmf(geo_bern, start)
        assert np.allclose(y1.probs, geo_bern.immigration.pmf_array(8))

    def test_zero_probability_matches_F(self, bin_bern):
        cache = extinction_iterates(bin_bern, 4)
        y = TruncatedPmf(np.array([1.0] + [0.0] * 16))
        y = step_pmf(bin_bern, step_pmf(bin_bern, y))
        assert y.probs[0] == pytest.approx(cache.F[2], abs=1e-15)
        assert cache.F[2] == pytest.approx(3.0 / 8.0)

    def test_rejects_tiny_truncation(self, bin_bern):
        with pytest.raises(ValueError):
            step_pmf(bin_bern, TruncatedPmf(np.array([1.0])))

    def test_chain_agrees_with_engine_bounded(self, bin_bern):
        # bounded support: both routes are exact in the truncated ring
        y = TruncatedPmf(np.array([1.0] + [0.0] * 64))
        for _ in range(5):
            y = step_pmf(bin_bern, y)
        engine = exact_pmf_Y(bin_bern, 5, 64)
        assert np.max(np.abs(y.probs - engine.probs)) < 1e-14

    def test_chain_agrees_with_engine_unbounded(self, geo_bern):
        # unbounded support: the composition route drops extra tail mass, so
        # both are lower bounds agreeing to the deficit scale only
        y = TruncatedPmf(np.array([1.0] + [0.0] * 64))
        for _ in range(6):
            y = step_pmf(geo_bern, y)
        engine = exact_pmf_Y(geo_bern, 6, 64, deficit_ceiling=1.0)
        assert np.all(engine.probs >= y.probs - 1e-12)
        assert np.max(np.abs(y.probs - engine.probs)) <= y.deficit

    def test_deficit_monotone_across_steps(self, geo_bern):
        y = TruncatedPmf(np.array([1.0] + [0.0] * 24))
        prev = 0.0
        for _ in range(8):
            y = step_pmf(geo_bern, y)
            assert y.deficit >= prev - 1e-15
            prev = y.deficit


critical_quads = st.tuples(
    st.floats(min_value=0.0, max_value=0.4),
    st.floats(min_value=0.0, max_value=0.15),
).filter(lambda ab: 0.01 <= 2 * ab[0] + 3 * ab[1] <= 0.98)


class TestExactEngine:
    def test_n0_is_point_mass(self, bin_bern):
        pmf = exact_pmf_Y(bin_bern, 0, 8, initial=5)
        assert pmf[5] == 1.0
        assert pmf.deficit == 0.0

    def test_bounded_two_steps(self, bin_bern):
        pmf = exact_pmf_Y(bin_bern, 2, 16)
        assert np.allclose(pmf.probs[:4], [0.375, 0.375, 0.125, 0.125], atol=1e-15)
        assert pmf.deficit == 0.0

    def test_zero_coefficient_equals_F(self, geo_bern):
        cache = extinction_iterates(geo_bern, 64)
        pmf = exact_pmf_Y(geo_bern, 64, 4096)
        assert abs(pmf.probs[0] - cache.F[64]) < 1e-10

    @given(critical_quads, st.integers(min_value=1, max_value=4))
    @settings(max_examples=25, deadline=None)
    def test_engine_matches_enumeration(self, ab, n):
        a, b = ab
        offspring = [a + 2 * b, 1.0 - 2 * a - 3 * b, a, b]
        model = make_model({"family": "explicit", "probs": offspring},
                           {"family": "explicit", "probs": [0.25, 0.5, 0.25]})
        engine = exact_pmf_Y(model, n, 80)
        oracle = enumerate_population_pmf(
            [Fraction(p) for p in offspring],
            [Fraction(0.25), Fraction(0.5), Fraction(0.25)], n)
        for k in range(81):
            assert abs(engine[k] - float(oracle.get(k, 0))) < 1e-12

    def test_initial_particles(self, bin_bern):
        # founders evolve as plain offspring lines on top of the immigration flow
        pmf = exact_pmf_Y(bin_bern, 1, 8, initial=1)
        # Y_1 = ξ + η: ξ ∈ {0,2}, η ∈ {0,1} each w.p. 1/2
        assert np.allclose(pmf.probs[:4], [0.25, 0.25, 0.25, 0.25], atol=1e-15)

    def test_multi_checkpoints_match_single(self, geo_bern):
        multi = exact_pmf_Y_multi(geo_bern, [3, 7], 64, deficit_ceiling=1.0)
        for n in (3, 7):
            single = exact_pmf_Y(geo_bern, n, 64, deficit_ceiling=1.0)
            assert np.array_equal(multi[n].probs, single.probs)

    def test_deficit_ceiling_raises(self, geo_bern):
        with pytest.raises(DeficitError, match="increase"):
            exact_pmf_Y(geo_bern, 256, 64)

    def test_normalization_invariant(self, geo_bern, bin_bern):
        for model, n, K in ((geo_bern, 40, 512), (bin_bern, 25, 256)):
            pmf = exact_pmf_Y(model, n, K, deficit_ceiling=1.0)
            assert abs(math.fsum(pmf.probs.tolist()) + pmf.deficit - 1.0) < 1e-12


class TestExactCohort:
    def test_age_zero_is_immigration(self, geo_bern):
        pmf = exact_pmf_Z(geo_bern, 0, 8)
        assert np.allclose(pmf.probs, geo_bern.immigration.pmf_array(8))

    def test_one_step_binary(self, bin_bern):
        pmf = exact_pmf_Z(bin_bern, 1, 4)
        assert np.allclose(pmf.probs[:3], [0.75, 0.0, 0.25], atol=1e-15)

    def test_normalization(self, bin_bern):
        pmf = exact_pmf_Z(bin_bern, 12, 128, deficit_ceiling=1.0)
        assert abs(math.fsum(pmf.probs.tolist()) + pmf.deficit - 1.0) < 1e-12


class TestCharfn:
    def test_at_zero(self, geo_bern):
        assert charfn_modulus(geo_bern, 17, [0.0])[0] == pytest.approx(1.0, abs=1e-12)

    def test_bounded_by_one(self, bin_bern):
        ts = np.linspace(-math.pi / 2, math.pi / 2, 101)
        H = charfn_modulus(bin_bern, 64, ts)
        assert np.all(H <= 1.0 + 1e-12)

    def test_decay_scale_stable_under_doubling(self, bin_bern):
        ts = np.geomspace(1e-3, math.pi / 2, 200)
        sups = []
        for n in (128, 256, 512):
            sups.append(float(np.max(charfn_modulus(bin_bern, n, ts) * (n * ts) ** 0.5)))
        assert max(sups) < math.inf
        assert (sups[2] - sups[1]) / sups[1] < 0.05


class TestTruncatedPmf:
    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            TruncatedPmf(np.array([0.5, -0.1]))

    def test_clips_fft_noise(self):
        pmf = TruncatedPmf(np.array([1.0, -1e-18]))
        assert pmf.probs[1] == 0.0
        assert pmf.deficit <= 1e-15
