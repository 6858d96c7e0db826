"""The Young gap (1 - nu) + nu t - t**nu, its classical bounds, and two
identities rewriting differences of logarithmic means through it.

As in :mod:`hhmeans.means`, functions accept floats or broadcastable arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .means import (
    _args,
    _check_weight,
    _expm1_ratio,
    _ret,
    log_ratio,
)

__all__ = [
    "Direction",
    "BoundPair",
    "young_gap",
    "kittaneh_manasrah_bounds",
    "cartwright_field_bounds",
    "alzer_log_bounds",
    "alzer_two_weight_bounds",
    "log_mean_power_difference",
    "log_mean_power_difference_rhs",
    "weighted_log_mean_excess",
    "weighted_log_mean_excess_rhs",
    "log_mean_difference_bounds",
]


class Direction(str, enum.Enum):
    STANDARD = "standard"
    REVERSED = "reversed"


@dataclass(frozen=True)
class BoundPair:
    """A two-sided bound around ``middle``.

    With ``direction`` STANDARD the claim is lower <= middle <= upper; with
    REVERSED it is lower >= middle >= upper.  ``error`` is an absolute
    allowance (for instance a quadrature error estimate) granted on top of
    the caller's tolerance.  Fields may hold arrays when the producing
    function was called with array arguments.
    """

    lower: object
    upper: object
    direction: Direction = Direction.STANDARD
    middle: object = None
    error: object = 0.0
    tag: str = ""

    def slacks(self):
        """Oriented (middle - lower, upper - middle); both >= 0 when the bound
        holds.  Without a middle value the single slack upper - lower is
        returned."""
        sign = 1.0 if self.direction is Direction.STANDARD else -1.0
        if self.middle is None:
            return (sign * (np.asarray(self.upper, dtype=float) - np.asarray(self.lower, dtype=float)),)
        mid = np.asarray(self.middle, dtype=float)
        return (
            sign * (mid - np.asarray(self.lower, dtype=float)),
            sign * (np.asarray(self.upper, dtype=float) - mid),
        )

    def holds(self, tol: float = 0.0) -> bool:
        allowance = tol + np.asarray(self.error, dtype=float)
        return all(bool(np.all(s >= -allowance)) for s in self.slacks())


def _expm1mx(x):
    """expm1(x) - x without the cancellation for small |x|."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.5
    xs = np.where(small, x, 0.0)
    series = np.zeros_like(xs)
    for k in range(20, 1, -1):
        series = (series + 1.0) * xs / k
    # Horner leaves (expm1(x) - x)/x behind
    with np.errstate(over="ignore"):
        direct = np.expm1(x) - x
    return np.where(small, series * xs, direct)


def _gap_from_log(h, nu):
    # below 1/2 use nu E(h) - E(nu h); above it the mirrored form
    # t (nu' E(-h) - E(-nu' h)) with nu' = 1 - nu, so the cancellation
    # factor never exceeds 2.
    lo = nu * _expm1mx(h) - _expm1mx(nu * h)
    s = 1.0 - nu
    with np.errstate(over="ignore", invalid="ignore"):
        hi = np.exp(h) * (s * _expm1mx(-h) - _expm1mx(-s * h))
    out = np.where(nu <= 0.5, lo, hi)
    out = np.where((nu == 0.0) | (nu == 1.0) | (h == 0.0), 0.0, out)
    return np.maximum(out, 0.0)


def _check_t(t):
    if not np.all(np.isfinite(t) & (t > 0)):
        raise DomainError("t must be finite and strictly positive")


def young_gap(t, nu):
    """(1 - nu) + nu t - t**nu >= 0."""
    (t, nu), scalar = _args(t, nu)
    _check_t(t)
    _check_weight(nu)
    return _ret(_gap_from_log(log_ratio(1.0, t), nu), scalar)


def _pair(lower, upper, middle, scalar, direction=Direction.STANDARD, tag=""):
    return BoundPair(
        _ret(lower, scalar), _ret(upper, scalar), direction, _ret(middle, scalar), 0.0, tag
    )


def kittaneh_manasrah_bounds(t, nu) -> BoundPair:
    """r (sqrt t - 1)**2 <= gap <= R (sqrt t - 1)**2 with r, R = min, max(nu, 1 - nu)."""
    (t, nu), scalar = _args(t, nu)
    _check_t(t)
    _check_weight(nu)
    h = log_ratio(1.0, t)
    sq = np.expm1(0.5 * h) ** 2
    r = np.minimum(nu, 1.0 - nu)
    R = np.maximum(nu, 1.0 - nu)
    return _pair(r * sq, R * sq, _gap_from_log(h, nu), scalar)


def cartwright_field_bounds(t, nu) -> BoundPair:
    """nu(1-nu)(t-1)**2 / (2 max(t,1)) <= gap <= nu(1-nu)(t-1)**2 / (2 min(t,1))."""
    (t, nu), scalar = _args(t, nu)
    _check_t(t)
    _check_weight(nu)
    c = 0.5 * nu * (1.0 - nu) * (t - 1.0) ** 2
    lower = c / np.maximum(t, 1.0)
    upper = c / np.minimum(t, 1.0)
    return _pair(lower, upper, _gap_from_log(log_ratio(1.0, t), nu), scalar)


def alzer_log_bounds(t, nu) -> BoundPair:
    """nu(1-nu) min(t,1) log(t)**2 / 2 <= gap <= nu(1-nu) max(t,1) log(t)**2 / 2."""
    (t, nu), scalar = _args(t, nu)
    _check_t(t)
    _check_weight(nu)
    h = log_ratio(1.0, t)
    c = 0.5 * nu * (1.0 - nu) * h * h
    return _pair(c * np.minimum(t, 1.0), c * np.maximum(t, 1.0), _gap_from_log(h, nu), scalar)


def alzer_two_weight_bounds(t, nu, lam) -> BoundPair:
    """Compare the gap at weight nu with the gap at a second weight lam.

    min(nu/lam, (1-nu)/(1-lam)) gap(t, lam) <= gap(t, nu) <= max(...) gap(t, lam).
    The pair is tagged ``"reflected"`` when lam = 1 - nu.
    """
    (t, nu, lam), scalar = _args(t, nu, lam)
    _check_t(t)
    _check_weight(nu)
    if not np.all((lam > 0.0) & (lam < 1.0)):
        raise DomainError("the comparison weight must lie in (0, 1)")
    h = log_ratio(1.0, t)
    ratio_a = nu / lam
    ratio_b = (1.0 - nu) / (1.0 - lam)
    base = _gap_from_log(h, lam)
    tag = "reflected" if np.all(lam == 1.0 - nu) else ""
    return _pair(
        np.minimum(ratio_a, ratio_b) * base,
        np.maximum(ratio_a, ratio_b) * base,
        _gap_from_log(h, nu),
        scalar,
        tag=tag,
    )


# ---------------------------------------------------------------------------
# identities


def _identity_args(t, nu):
    (t, nu), scalar = _args(t, nu)
    _check_t(t)
    _check_weight(nu, interior=True, what="this identity")
    if np.any(t == 1.0):
        raise DomainError("both sides of the identity are 0/0 at t = 1")
    return t, nu, scalar


def log_mean_power_difference(t, nu):
    """L(t, 1) - L(t**nu, 1) for the classical logarithmic mean L.

    Evaluated from the power series sum_k h^k (1 - nu^k)/(k+1)! for
    |log t| < 1 and as a plain difference otherwise.
    """
    t, nu, scalar = _identity_args(t, nu)
    h = log_ratio(1.0, t)
    small = np.abs(h) < 1.0
    hs = np.where(small, h, 0.0)
    log_nu = np.log(nu)
    series = np.zeros_like(hs)
    term = np.ones_like(hs)
    for k in range(1, 26):
        term = term * hs / (k + 1)
        series = series - np.expm1(k * log_nu) * term
    direct = _expm1_ratio(h) - _expm1_ratio(nu * h)
    return _ret(np.where(small, series, direct), scalar)


def log_mean_power_difference_rhs(t, nu):
    """young_gap(t, nu) / (nu log t), the closed-form side of the identity."""
    t, nu, scalar = _identity_args(t, nu)
    h = log_ratio(1.0, t)
    return _ret(_gap_from_log(h, nu) / (nu * h), scalar)


def weighted_log_mean_excess(t, nu):
    """f_nu(t) - L(t, 1): how far the weighted logarithmic mean sits from the
    unweighted one.  Zero exactly at nu = 1/2."""
    t, nu, scalar = _identity_args(t, nu)
    h = log_ratio(1.0, t)
    small = np.abs(h) < 1.0
    hs = np.where(small, h, 0.0)
    # coefficient of h^(k-1)/k! is nu^(k-1) + sum_{j<k} nu^j - 1
    series = np.zeros_like(hs)
    power = np.ones_like(nu)  # nu^(k-1)
    partial = np.zeros_like(nu)  # sum_{j=1}^{k-1} nu^j
    term = np.ones_like(hs)  # h^(k-1)/k!
    for k in range(1, 27):
        if k > 1:
            term = term * hs / k
        series = series + (power + partial - 1.0) * term
        partial = partial + power * nu
        power = power * nu
    # f_nu(t) - L(t, 1) regrouped so that the factor (2 nu - 1) is explicit:
    # h (f_nu - L) = (2 nu - 1)/(1 - nu) (expm1(h) - expm1(nu h)/nu)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (2.0 * nu - 1.0) / (1.0 - nu) * (np.expm1(h) - np.expm1(nu * h) / nu) / h
    out = np.where(small, series, direct)
    return _ret(np.where(nu == 0.5, 0.0, out), scalar)


def weighted_log_mean_excess_rhs(t, nu):
    """(2 nu - 1) young_gap(t, nu) / (nu (1 - nu) log t)."""
    t, nu, scalar = _identity_args(t, nu)
    h = log_ratio(1.0, t)
    out = (2.0 * nu - 1.0) * _gap_from_log(h, nu) / (nu * (1.0 - nu) * h)
    return _ret(out, scalar)


def log_mean_difference_bounds(t, nu) -> list[BoundPair]:
    """Four bracketings of L(t, 1) - L(t**nu, 1), obtained by dividing the
    Kittaneh-Manasrah, Cartwright-Field, single-weight Alzer and reflected
    two-weight bounds by nu log t.  Reversed for 0 < t < 1.
    """
    t, nu, scalar = _identity_args(t, nu)
    if not scalar and np.any((t > 1.0) != (t.flat[0] > 1.0)):
        raise DomainError("array input must lie entirely on one side of t = 1")
    h = log_ratio(1.0, t)
    middle = log_mean_power_difference(t, nu)
    r = np.minimum(nu, 1.0 - nu)
    R = np.maximum(nu, 1.0 - nu)
    sq = np.expm1(0.5 * h) ** 2 / h
    tm1 = (t - 1.0) ** 2 / h
    half = 0.5 * (1.0 - nu)
    ratio_lo = (1.0 - nu) / nu * np.minimum(nu / (1.0 - nu), (1.0 - nu) / nu)
    ratio_hi = (1.0 - nu) / nu * np.maximum(nu / (1.0 - nu), (1.0 - nu) / nu)
    reflected = log_mean_power_difference(t, 1.0 - nu)
    direction = Direction.STANDARD if np.all(t > 1.0) else Direction.REVERSED
    brackets = [
        (r / nu * sq, R / nu * sq),
        (half * tm1 / np.maximum(t, 1.0), half * tm1 / np.minimum(t, 1.0)),
        (half * np.minimum(t, 1.0) * h, half * np.maximum(t, 1.0) * h),
        (ratio_lo * reflected, ratio_hi * reflected),
    ]
    return [_pair(lo, hi, middle, scalar, direction) for lo, hi in brackets]
