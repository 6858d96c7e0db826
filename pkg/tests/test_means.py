from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhmeans import means as mn
from hhmeans.errors import DiagonalArgument, DomainError, OutOfDomain

mp.mp.dps = 50

positive = st.floats(min_value=1e-3, max_value=1e3)
weight = st.floats(min_value=0.01, max_value=0.99)


# high-precision literal closed forms


def mp_log_mean_w(a, b, nu):
    a, b, nu = mp.mpf(a), mp.mpf(b), mp.mpf(nu)
    if a == b:
        return a
    g = a ** (1 - nu) * b ** nu
    return ((1 - nu) / nu * (g - a) + nu / (1 - nu) * (b - g)) / (mp.log(b) - mp.log(a))


def mp_log_identric_w(a, b, nu):
    a, b, nu = mp.mpf(a), mp.mpf(b), mp.mpf(nu)
    A = (1 - nu) * a + nu * b
    # segment averages of log from a and from b to A
    ia = (A * mp.log(A) - a * mp.log(a)) / (A - a) - 1
    ib = (A * mp.log(A) - b * mp.log(b)) / (A - b) - 1
    return (1 - nu) * ia + nu * ib


def mp_log_alpha(a, b, nu):
    a, b, nu = mp.mpf(a), mp.mpf(b), mp.mpf(nu)
    A = (1 - nu) * a + nu * b
    M = (a + b) / 2
    # alpha = (I(M, A)^2 / I_{1/2}(a, b)) / I_nu(a, b)
    def log_identric(x, y):
        if x == y:
            return mp.log(x)
        return (y * mp.log(y) - x * mp.log(x)) / (y - x) - 1
    return 2 * log_identric(M, A) - log_identric(a, b) - mp_log_identric_w(a, b, nu)


def test_simple_means_examples():
    assert mn.weighted_arithmetic(1.0, 4.0, 0.5) == 2.5
    assert mn.weighted_geometric(1.0, 4.0, 0.5) == pytest.approx(2.0, rel=1e-15)
    assert mn.weighted_arithmetic(3.0, 7.0, 1.0) == 7.0
    assert mn.weighted_geometric(3.0, 7.0, 0.0) == 3.0


def test_log_mean_closed_form_at_half():
    assert mn.weighted_logarithmic(1.0, 4.0, 0.5) == pytest.approx(3.0 / math.log(4.0), rel=1e-15)
    assert mn.logarithmic_mean(1.0, 4.0) == pytest.approx(3.0 / math.log(4.0), rel=1e-15)


def test_log_mean_endpoints_and_diagonal():
    assert mn.weighted_logarithmic(2.0, 9.0, 0.0) == pytest.approx(2.0, rel=1e-15)
    assert mn.weighted_logarithmic(2.0, 9.0, 1.0) == pytest.approx(9.0, rel=1e-15)
    assert mn.weighted_logarithmic(5.0, 5.0, 0.3) == 5.0
    # near-diagonal stays continuous
    near = mn.weighted_logarithmic(5.0, 5.0 * (1 + 1e-12), 0.3)
    assert near == pytest.approx(5.0, rel=1e-11)


def test_log_mean_matches_mpmath():
    rng = np.random.default_rng(1)
    a = np.exp(rng.uniform(-7, 7, 400))
    b = a * np.exp(rng.choice([-1, 1], 400) * 10 ** rng.uniform(-12, 1, 400))
    nu = rng.uniform(0.01, 0.99, 400)
    got = mn.weighted_logarithmic(a, b, nu)
    worst = max(abs(float((g - mp_log_mean_w(x, y, w)) / mp_log_mean_w(x, y, w)))
                for g, x, y, w in zip(got, a, b, nu))
    assert worst < 1e-13


def test_identric_matches_mpmath():
    rng = np.random.default_rng(2)
    a = np.exp(rng.uniform(-7, 7, 300))
    b = a * np.exp(rng.choice([-1, 1], 300) * 10 ** rng.uniform(-6, 1, 300))
    nu = rng.uniform(0.01, 0.99, 300)
    got = mn.log_weighted_identric(a, b, nu)
    worst = max(abs(float(g - mp_log_identric_w(x, y, w))) / max(1.0, abs(float(mp_log_identric_w(x, y, w))))
                for g, x, y, w in zip(got, a, b, nu))
    assert worst < 1e-12


def test_identric_half_example():
    # I_{1/2}(1, 4) = 4^{4/3} / e
    assert mn.weighted_identric(1.0, 4.0, 0.5) == pytest.approx(4 ** (4 / 3) / math.e, rel=1e-14)


def test_identric_continuous_across_half():
    vals = [mn.log_weighted_identric(1.0, 4.0, 0.5 + d) for d in (-1e-9, 0.0, 1e-9)]
    assert max(vals) - min(vals) < 1e-8


def test_identric_diagonal_rejected():
    with pytest.raises(DiagonalArgument):
        mn.weighted_identric(2.0, 2.0, 0.3)
    with pytest.raises(OutOfDomain):
        mn.weighted_identric(1.0, 2.0, 0.0)


def test_kantorovich():
    assert mn.kantorovich(1.0, 4.0) == pytest.approx(25 / 16, rel=1e-15)
    assert mn.kantorovich(3.0, 3.0) == 1.0
    assert mn.log_kantorovich(1.0, 4.0) == pytest.approx(math.log(25 / 16), rel=1e-14)
    # extreme ratio does not overflow
    assert math.isfinite(mn.log_kantorovich(1e-300, 1e300))


def test_alpha_matches_mpmath_and_is_at_least_one():
    rng = np.random.default_rng(3)
    a = np.exp(rng.uniform(-7, 7, 300))
    b = a * np.exp(rng.choice([-1, 1], 300) * 10 ** rng.uniform(-5, 1, 300))
    nu = rng.uniform(0.01, 0.99, 300)
    got = mn.log_am_gm_correction(a, b, nu)
    assert np.all(got >= -1e-15)
    worst = max(abs(float(g - mp_log_alpha(x, y, w))) for g, x, y, w in zip(got, a, b, nu))
    assert worst < 1e-12


def test_alpha_band_is_continuous():
    lim = mn.log_am_gm_correction(1.0, 5.0, 0.5)
    for d in (1e-6, -1e-6, 1e-8):
        assert mn.log_am_gm_correction(1.0, 5.0, 0.5 + d) == pytest.approx(lim, abs=1e-5)
    with pytest.raises(DiagonalArgument):
        mn.am_gm_correction(2.0, 2.0, 0.4)


def test_identric_upper_bound_at_half_is_arithmetic_over_identric():
    # 2 log(a nabla b) - log I_{1/2}(a, b)
    a, b = 2.0, 8.0
    expected = 2 * math.log(5.0) - mn.log_identric(a, b)
    assert mn.log_identric_upper_bound(a, b, 0.5) == pytest.approx(expected, rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        mn.weighted_logarithmic(-1.0, 2.0, 0.5)
    with pytest.raises(DomainError):
        mn.weighted_arithmetic(1.0, 2.0, 1.5)
    with pytest.raises(ValueError):
        mn.LimitPolicy(eps_arg=0.0)


def test_classify_weight():
    assert mn.classify_weight(0.0) is mn.WeightClass.ENDPOINT
    assert mn.classify_weight(0.5 + 1e-9) is mn.WeightClass.NEAR_HALF
    assert mn.classify_weight(0.3) is mn.WeightClass.INTERIOR


def test_array_and_scalar_types():
    assert isinstance(mn.weighted_logarithmic(1.0, 2.0, 0.3), float)
    out = mn.weighted_logarithmic(np.array([1.0, 2.0]), 3.0, 0.3)
    assert out.shape == (2,)


@settings(max_examples=200, deadline=None)
@given(positive, positive, weight)
def test_ordering_geometric_log_arithmetic(a, b, nu):
    g = mn.weighted_geometric(a, b, nu)
    lm = mn.weighted_logarithmic(a, b, nu)
    ar = mn.weighted_arithmetic(a, b, nu)
    tol = 1e-13 * max(a, b)
    assert g - tol <= lm <= ar + tol


@settings(max_examples=200, deadline=None)
@given(positive, positive, weight, st.floats(min_value=1e-2, max_value=1e2))
def test_symmetry_and_homogeneity(a, b, nu, k):
    lm = mn.weighted_logarithmic(a, b, nu)
    assert mn.weighted_logarithmic(b, a, 1 - nu) == pytest.approx(lm, rel=1e-12)
    assert mn.weighted_logarithmic(k * a, k * b, nu) == pytest.approx(k * lm, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(positive, positive, weight)
def test_identric_between_geometric_and_arithmetic(a, b, nu):
    if abs(a - b) < 1e-8 * max(a, b):
        return
    li = mn.log_weighted_identric(a, b, nu)
    assert math.log(mn.weighted_geometric(a, b, nu)) - 1e-12 <= li
    assert li <= math.log(mn.weighted_arithmetic(a, b, nu)) + 1e-12
