from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from hhmeans import young as yg
from hhmeans.errors import DomainError
from hhmeans.means import logarithmic_mean, representing_function

mp.mp.dps = 50


def mp_gap(t, nu):
    t, nu = mp.mpf(t), mp.mpf(nu)
    return (1 - nu) + nu * t - t ** nu


def _samples(n, seed):
    rng = np.random.default_rng(seed)
    t = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), n))
    nu = rng.uniform(0.01, 0.99, n)
    return t, nu


def test_gap_matches_mpmath():
    rng = np.random.default_rng(0)
    t = np.exp(rng.choice([-1, 1], 500) * 10 ** rng.uniform(-10, 0.8, 500))
    nu = rng.uniform(0.01, 0.99, 500)
    got = yg.young_gap(t, nu)
    worst = max(abs(float((g - mp_gap(x, w)) / mp_gap(x, w))) for g, x, w in zip(got, t, nu))
    assert worst < 1e-13


def test_gap_trivial_points():
    assert yg.young_gap(1.0, 0.3) == 0.0
    assert yg.young_gap(5.0, 0.0) == 0.0
    assert yg.young_gap(5.0, 1.0) == 0.0


@pytest.mark.parametrize(
    "bounds",
    [yg.kittaneh_manasrah_bounds, yg.cartwright_field_bounds, yg.alzer_log_bounds],
)
def test_classical_bounds_hold(bounds):
    t, nu = _samples(5000, 1)
    bp = bounds(t, nu)
    scale = np.maximum(1.0, t)
    for s in bp.slacks():
        assert np.all(s >= -1e-13 * scale)


def test_two_weight_bounds_and_tag():
    t, nu = _samples(3000, 2)
    lam = np.random.default_rng(5).uniform(0.01, 0.99, 3000)
    bp = yg.alzer_two_weight_bounds(t, nu, lam)
    assert bp.holds(1e-12 * 1e3)
    assert yg.alzer_two_weight_bounds(3.0, 0.2, 0.8).tag == "reflected"
    assert yg.alzer_two_weight_bounds(3.0, 0.2, 0.7).tag == ""


def test_power_difference_identity():
    t, nu = _samples(2000, 3)
    lhs = yg.log_mean_power_difference(t, nu)
    direct = logarithmic_mean(t, 1.0) - logarithmic_mean(t ** nu, 1.0)
    rhs = yg.log_mean_power_difference_rhs(t, nu)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-12
    assert np.max(np.abs(lhs - direct) / np.maximum(1.0, np.abs(direct))) < 1e-10


def test_weighted_excess_identity_and_sign():
    t, nu = _samples(2000, 4)
    lhs = yg.weighted_log_mean_excess(t, nu)
    rhs = yg.weighted_log_mean_excess_rhs(t, nu)
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-12
    # sign is that of (2 nu - 1) log t
    sign = np.sign((2 * nu - 1) * np.log(t))
    assert np.all(np.sign(lhs) == sign)
    assert yg.weighted_log_mean_excess(3.0, 0.5) == 0.0


def test_weighted_excess_matches_definition():
    t, nu = _samples(300, 6)
    lhs = yg.weighted_log_mean_excess(t, nu)
    for g, x, w in zip(lhs, t, nu):
        x, w = mp.mpf(x), mp.mpf(w)
        h = mp.log(x)
        f = ((1 - w) / w * mp.expm1(w * h) + w / (1 - w) * mp.exp(w * h) * mp.expm1((1 - w) * h)) / h
        ref = f - mp.expm1(h) / h
        assert abs(float((g - ref) / ref)) < 1e-12
    assert representing_function(4.0, 0.5) == pytest.approx(3 / math.log(4), rel=1e-15)


def test_identities_reject_t_equal_one():
    with pytest.raises(DomainError):
        yg.log_mean_power_difference(1.0, 0.3)
    with pytest.raises(DomainError):
        yg.weighted_log_mean_excess(2.0, 0.0)


def test_log_mean_difference_bounds_directions():
    for t in (5.0, 0.2):
        pairs = yg.log_mean_difference_bounds(t, 0.3)
        assert len(pairs) == 4
        expected = yg.Direction.STANDARD if t > 1 else yg.Direction.REVERSED
        for bp in pairs:
            assert bp.direction is expected
            assert bp.holds(1e-13)
    t, nu = _samples(4000, 7)
    for side in (t > 1, t < 1):
        for bp in yg.log_mean_difference_bounds(t[side], nu[side]):
            assert bp.holds(1e-12 * 1e3)
    with pytest.raises(DomainError):
        yg.log_mean_difference_bounds(np.array([0.5, 2.0]), 0.3)


def test_bound_pair_slacks_without_middle():
    bp = yg.BoundPair(1.0, 3.0)
    assert bp.slacks() == (2.0,)
    assert bp.holds()
    assert not yg.BoundPair(3.0, 1.0).holds()
    assert yg.BoundPair(3.0, 1.0, error=2.5).holds()
