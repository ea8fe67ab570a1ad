import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwimm.series import (
    identity_series,
    series_compose_poly,
    series_mul,
    series_mul_direct,
    series_pow,
    series_recip,
    series_square,
    trim,
)

coeff_arrays = st.lists(
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=40
).map(np.array)


@given(coeff_arrays, coeff_arrays, st.integers(min_value=1, max_value=2200))
@settings(max_examples=60, deadline=None)
def test_mul_direct_and_fft_agree(a, b, K):
    # pad so K straddles the direct/FFT switchover with real content
    a = np.resize(a, K + 1)
    b = np.resize(b, K + 1)
    fast = series_mul(a, b, K)
    slow = series_mul_direct(a, b, K)
    assert np.max(np.abs(fast - slow)) < 1e-12


def test_mul_truncates_exactly():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([4.0, 5.0])
    assert np.allclose(series_mul(a, b, 1), [4.0, 13.0])
    assert np.allclose(series_mul(a, b, 4), [4.0, 13.0, 22.0, 15.0, 0.0])


@given(coeff_arrays, st.integers(min_value=0, max_value=9))
@settings(max_examples=40, deadline=None)
def test_pow_matches_repeated_multiplication(a, m):
    K = 24
    want = np.zeros(K + 1)
    want[0] = 1.0
    for _ in range(m):
        want = series_mul(want, a, K)
    got = series_pow(a, m, K)
    assert np.max(np.abs(got - want)) < 1e-10


def test_recip_is_multiplicative_inverse():
    # shaped like the actual use: 1/(2 - g) with g a probability series
    rng = np.random.default_rng(5)
    for K in (7, 100, 900):
        g = rng.uniform(0.0, 1.0, K + 1)
        g /= g.sum()
        a = -g
        a[0] += 2.0
        r = series_recip(a, K)
        prod = series_mul(a, r, K)
        unit = np.zeros(K + 1)
        unit[0] = 1.0
        assert np.max(np.abs(prod - unit)) < 1e-12


def test_recip_rejects_zero_constant_term():
    with pytest.raises(ValueError):
        series_recip(np.array([0.0, 1.0]), 4)


def test_compose_poly_matches_naive():
    rng = np.random.default_rng(11)
    coeffs = rng.uniform(0, 1, 5)
    g = rng.uniform(-0.3, 0.3, 9)
    K = 8
    want = np.zeros(K + 1)
    for m, c in enumerate(coeffs):
        want += c * series_pow(g, m, K)
    got = series_compose_poly(coeffs, g, K)
    assert np.max(np.abs(got - want)) < 1e-12


def test_identity_and_trim():
    s = identity_series(4)
    assert list(s) == [0.0, 1.0, 0.0, 0.0, 0.0]
    assert list(trim(np.array([1.0, 2.0]), 3)) == [1.0, 2.0, 0.0, 0.0]
    assert list(trim(np.array([1.0, 2.0, 3.0]), 1)) == [1.0, 2.0]
