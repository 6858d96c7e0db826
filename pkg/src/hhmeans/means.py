"""Closed-form weighted means and related constants.

Every function accepts Python floats or numpy arrays (broadcast against each
other) and returns a float for scalar input, an array otherwise.  Removable
singularities (the diagonal a = b, the weights 0, 1/2, 1) are handled by
stable rewrites in terms of ``expm1``/``log1p`` rather than by evaluating the
textbook formula and hoping for the best.

Notation used in the comments: ``h = log(b/a)``, ``u = b/a - 1 = expm1(h)``,
``A = a (1 + nu u)`` is the weighted arithmetic mean and ``M = a (1 + u/2)``
the midpoint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DiagonalArgument, DomainError, OutOfDomain

__all__ = [
    "LimitPolicy",
    "DEFAULT_POLICY",
    "WeightClass",
    "classify_weight",
    "log_ratio",
    "weighted_arithmetic",
    "weighted_geometric",
    "weighted_logarithmic",
    "logarithmic_mean",
    "representing_function",
    "weighted_identric",
    "log_weighted_identric",
    "log_identric",
    "kantorovich",
    "log_kantorovich",
    "am_gm_correction",
    "log_am_gm_correction",
    "log_identric_upper_bound",
]

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class LimitPolicy:
    """Switch-over thresholds for series and limit branches.

    eps_arg is the relative distance |a-b|/max(a,b) below which a pair is
    treated as diagonal; eps_nu is the half-width of the band around
    nu = 1/2 in which limit forms replace formulas carrying 1/(1-2nu).
    """

    eps_arg: float = 1e-9
    eps_nu: float = 1e-7

    def __post_init__(self):
        for name in ("eps_arg", "eps_nu"):
            value = getattr(self, name)
            if not 0.0 < value < 1e-3:
                raise ValueError(f"{name} must lie in (0, 1e-3), got {value!r}")


DEFAULT_POLICY = LimitPolicy()


class WeightClass(enum.Enum):
    ENDPOINT = "endpoint"
    NEAR_HALF = "near-half"
    INTERIOR = "interior"


def classify_weight(nu: float, policy: LimitPolicy = DEFAULT_POLICY) -> WeightClass:
    """Classify a scalar weight for limit handling."""
    nu = float(nu)
    if not 0.0 <= nu <= 1.0:
        raise DomainError(f"weight must lie in [0, 1], got {nu!r}")
    if min(nu, 1.0 - nu) < policy.eps_nu:
        return WeightClass.ENDPOINT
    if abs(nu - 0.5) < policy.eps_nu:
        return WeightClass.NEAR_HALF
    return WeightClass.INTERIOR


# ---------------------------------------------------------------------------
# argument plumbing


def _args(*values):
    arrays = [np.asarray(v, dtype=float) for v in values]
    scalar = all(arr.ndim == 0 for arr in arrays)
    return np.broadcast_arrays(*arrays), scalar


def _ret(value, scalar):
    return float(value) if scalar else np.asarray(value, dtype=float)


def _check_pair(a, b):
    ok = np.isfinite(a) & np.isfinite(b) & (a > 0) & (b > 0)
    if not np.all(ok):
        raise DomainError("mean arguments must be finite and strictly positive")


def _check_weight(nu, interior=False, what="this quantity"):
    if not np.all((nu >= 0.0) & (nu <= 1.0)):
        raise DomainError("weight must lie in [0, 1]")
    if interior and np.any((nu == 0.0) | (nu == 1.0)):
        raise OutOfDomain(f"{what} is undefined at the weights 0 and 1")


def _near_diagonal(a, b, policy):
    return np.abs(b - a) < policy.eps_arg * np.maximum(a, b)


def log_ratio(a, b):
    """log(b/a), falling back to log b - log a when b/a over- or underflows."""
    (a, b), scalar = _args(a, b)
    with np.errstate(all="ignore"):
        ratio = b / a
        h = np.log(ratio)
    ok = np.isfinite(h) & (ratio >= _TINY)
    if not np.all(ok):
        h = np.where(ok, h, np.log(b) - np.log(a))
    return _ret(h, scalar)


# ---------------------------------------------------------------------------
# elementary helpers (all vectorised, no domain checks)


def _log1p_ratio(x):
    """log1p(x)/x with the removable point x = 0 filled in."""
    with np.errstate(all="ignore"):
        out = np.log1p(x) / x
    return np.where(x == 0.0, 1.0, out)


def _xlogx_excess(x):
    """psi(x) = (1+x) log1p(x) - x, accurate for small |x|."""
    return x * x * _xlogx_excess_ratio(x)


def _xlogx_excess_ratio(x):
    """chi(x) = psi(x)/x**2 = 1/2 - x/6 + x**2/12 - ... ."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.1
    xs = np.where(small, x, 0.0)
    series = np.zeros_like(xs)
    for k in range(22, 1, -1):
        series = series * (-xs) + 1.0 / (k * (k - 1))
    with np.errstate(all="ignore"):
        direct = ((1.0 + x) * np.log1p(x) - x) / (x * x)
        # (1+x) log(1+x) -> 0 at x = -1
        direct = np.where(x == -1.0, 1.0, direct)
    return np.where(small, series, direct)


def _expm1_ratio(x):
    """expm1(x)/x with the value 1 at the origin."""
    with np.errstate(all="ignore"):
        out = np.expm1(x) / x
    small = np.abs(x) < 1e-8
    return np.where(small, 1.0 + x / 2.0 + x * x / 6.0, out)


def _rep_from_log(h, nu, near):
    """f_nu(e^h) without cancellation; ``near`` selects the Taylor branch."""
    interior = (nu > 0.0) & (nu < 1.0)
    w = np.where(interior, nu, 0.5)
    with np.errstate(all="ignore"):
        direct = (
            (1.0 - w) / w * np.expm1(w * h)
            + w / (1.0 - w) * np.exp(w * h) * np.expm1((1.0 - w) * h)
        ) / h
    series = 1.0 + nu * h * (
        1.0 + (1.0 + 2.0 * nu) * h / 6.0 + (1.0 + nu + 2.0 * nu * nu) * h * h / 24.0
    )
    out = np.where(near | (h == 0.0), series, direct)
    out = np.where(nu == 0.0, 1.0, out)
    return np.where((nu == 1.0) & ~near, np.exp(h), out)


# ---------------------------------------------------------------------------
# means


def weighted_arithmetic(a, b, nu):
    """(1 - nu) a + nu b, exact at nu in {0, 1} and on the diagonal."""
    (a, b, nu), scalar = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu)
    out = np.where(nu == 1.0, b, a + nu * (b - a))
    return _ret(out, scalar)


def weighted_geometric(a, b, nu):
    """a**(1 - nu) * b**nu, evaluated as a * exp(nu log(b/a))."""
    (a, b, nu), scalar = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu)
    out = a * np.exp(nu * log_ratio(a, b))
    out = np.where(nu == 1.0, b, out)
    return _ret(out, scalar)


def weighted_logarithmic(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY):
    """Weighted logarithmic mean L_nu(a, b).

    Interpolates between the geometric and arithmetic means; L_0 = a and
    L_1 = b by continuity, L_nu(a, a) = a.  Homogeneity reduces the work to
    the representing function: L_nu(a, b) = a f_nu(b/a).
    """
    (a, b, nu), scalar = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu)
    h = log_ratio(a, b)
    out = a * _rep_from_log(h, nu, _near_diagonal(a, b, policy))
    out = np.where(nu == 1.0, b, out)
    out = np.where(a == b, a, out)
    return _ret(out, scalar)


def logarithmic_mean(a, b, policy: LimitPolicy = DEFAULT_POLICY):
    """Classical logarithmic mean (a - b)/(log a - log b), a on the diagonal."""
    (a, b), scalar = _args(a, b)
    _check_pair(a, b)
    h = log_ratio(a, b)
    near = _near_diagonal(a, b, policy)
    series = 1.0 + h / 2.0 + h * h / 6.0 + h * h * h / 24.0
    with np.errstate(all="ignore"):
        direct = np.expm1(h) / h
    out = a * np.where(near | (h == 0.0), series, direct)
    out = np.where(a == b, a, out)
    return _ret(out, scalar)


def representing_function(t, nu, policy: LimitPolicy = DEFAULT_POLICY):
    """f_nu(t) = L_nu(1, t); equals 1 at t = 1."""
    (t, nu), scalar = _args(t, nu)
    _check_pair(np.ones_like(t), t)
    _check_weight(nu)
    h = log_ratio(1.0, t)
    near = np.abs(t - 1.0) < policy.eps_arg * np.maximum(t, 1.0)
    return _ret(_rep_from_log(h, nu, near), scalar)


def _identric_tail(u, nu):
    """log I_nu(1, 1+u) for interior nu, regular at nu = 1/2."""
    nu_u = nu * u
    return (
        -1.0
        + (1.0 - 2.0 * nu) / (1.0 - nu) * (1.0 + nu_u) * _log1p_ratio(nu_u)
        + nu / (1.0 - nu) * (1.0 + u) * _log1p_ratio(u)
    )


def _check_off_diagonal(a, b, policy):
    if np.any(_near_diagonal(a, b, policy)):
        raise DiagonalArgument(
            "identric-type means need a != b; use the limit value a on the diagonal"
        )


def log_weighted_identric(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY):
    """log I_nu(a, b) for a != b and nu in (0, 1).

    The closed form is rewritten with u = b/a - 1 so that all three
    exponent blocks become bounded functions of nu*u and u; the rewrite has
    no 1/(1 - 2 nu) factor, so nu = 1/2 needs no special branch and returns
    the classical identric mean.
    """
    (a, b, nu), scalar = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu, interior=True, what="the weighted identric mean")
    _check_off_diagonal(a, b, policy)
    u = np.expm1(log_ratio(a, b))
    return _ret(np.log(a) + _identric_tail(u, nu), scalar)


def weighted_identric(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY):
    """Weighted identric mean I_nu(a, b)."""
    (a, b, nu), scalar = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu, interior=True, what="the weighted identric mean")
    _check_off_diagonal(a, b, policy)
    u = np.expm1(log_ratio(a, b))
    return _ret(a * np.exp(_identric_tail(u, nu)), scalar)


def log_identric(a, b):
    """log of the classical identric mean; log a on the diagonal."""
    (a, b), scalar = _args(a, b)
    _check_pair(a, b)
    u = np.expm1(log_ratio(a, b))
    return _ret(np.log(a) + u * _xlogx_excess_ratio(u), scalar)


def log_kantorovich(a, b):
    """log K(a, b) = 2 log cosh(h/2), computed as 2 log1p(2 sinh(h/4)**2)."""
    (a, b), scalar = _args(a, b)
    _check_pair(a, b)
    h = np.abs(log_ratio(a, b))
    hs = np.minimum(h, 600.0)
    moderate = 2.0 * np.log1p(2.0 * np.sinh(hs / 4.0) ** 2)
    large = h - 2.0 * np.log(2.0) + 2.0 * np.log1p(np.exp(-h))
    return _ret(np.where(h < 600.0, moderate, large), scalar)


def kantorovich(a, b):
    """Kantorovich constant (a + b)**2 / (4 a b); exactly 1 when a = b."""
    (a, b), scalar = _args(a, b)
    _check_pair(a, b)
    with np.errstate(all="ignore"):
        r = b / a
        direct = (1.0 + r) ** 2 / (4.0 * r)
    ok = np.isfinite(direct) & (r > 1e-150) & (r < 1e150)
    if not np.all(ok):
        direct = np.where(ok, direct, np.exp(log_kantorovich(a, b)))
    return _ret(np.where(a == b, 1.0, direct), scalar)


def _check_alpha_args(a, b, nu):
    _check_pair(a, b)
    _check_weight(nu, interior=True, what="the AM-GM correction factor")
    if np.any(a == b):
        raise DiagonalArgument("the AM-GM correction factor tends to 1 as b -> a")


def _midpoint_to_mean_log_identric(u, nu):
    """log I(M, A) - log a: identric mean of the midpoint and A."""
    w = (nu - 0.5) * u / (1.0 + 0.5 * u)
    return np.log1p(0.5 * u) + w * _xlogx_excess_ratio(w)


def log_am_gm_correction(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY):
    """log alpha_nu(a, b), the correction factor sharpening the AM-GM ratio.

    Outside the eps_nu band around 1/2 this is the closed form regrouped as
    twice the midpoint-defect integral of -log, which keeps every piece
    bounded near nu = 1/2.  Inside the band the limit
    2 (log(a nabla b) - log I_{1/2}(a, b)) is returned.
    """
    (a, b, nu), scalar = _args(a, b, nu)
    _check_alpha_args(a, b, nu)
    u = np.expm1(log_ratio(a, b))
    nu_u = nu * u
    # segment averages of -log starting at a and at b, both ending at A
    from_a = -nu_u * _xlogx_excess_ratio(nu_u)
    with np.errstate(all="ignore"):
        from_b = (_xlogx_excess(nu_u) - _xlogx_excess(u)) / ((1.0 - nu) * u)
    defect = 0.5 * (from_a + from_b) + _midpoint_to_mean_log_identric(u, nu)
    limit = 2.0 * (np.log1p(0.5 * u) - u * _xlogx_excess_ratio(u))
    band = np.abs(nu - 0.5) < policy.eps_nu
    return _ret(np.where(band, limit, 2.0 * defect), scalar)


def am_gm_correction(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY):
    """alpha_nu(a, b) >= 1."""
    return np.exp(log_am_gm_correction(a, b, nu, policy))


def log_identric_upper_bound(a, b, nu):
    """log of the closed-form upper bound for I_nu(a, b).

    Regrouped as 2 log I(M, A) - log I_{1/2}(a, b); at nu = 1/2 it reduces to
    2 log(a nabla b) - log I_{1/2}(a, b), the limiting bound.
    """
    (a, b, nu), scalar = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu, interior=True, what="the identric upper bound")
    if np.any(a == b):
        raise DiagonalArgument("the identric upper bound needs a != b")
    u = np.expm1(log_ratio(a, b))
    out = (
        np.log(a)
        + 2.0 * _midpoint_to_mean_log_identric(u, nu)
        - u * _xlogx_excess_ratio(u)
    )
    return _ret(out, scalar)
