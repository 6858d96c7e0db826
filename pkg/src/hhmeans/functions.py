"""Univariate convex-function descriptors, a small builtin registry and the
random secant test used to reject non-convex input."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "Interval",
    "ConvexFn",
    "ProbeResult",
    "BUILTINS",
    "builtin",
    "power_base",
    "convexity_probe",
]


@dataclass(frozen=True)
class Interval:
    """A real interval; infinite ends are always open."""

    lo: float = -math.inf
    hi: float = math.inf
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        if math.isinf(self.lo):
            object.__setattr__(self, "lo_open", True)
        if math.isinf(self.hi):
            object.__setattr__(self, "hi_open", True)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        above = x > self.lo if self.lo_open else x >= self.lo
        below = x < self.hi if self.hi_open else x <= self.hi
        return above & below

    def contains_closure(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo or (self.lo == other.lo and self.lo_open):
            lo, lo_open = self.lo, self.lo_open
        else:
            lo, lo_open = other.lo, other.lo_open
        if self.hi < other.hi or (self.hi == other.hi and self.hi_open):
            hi, hi_open = self.hi, self.hi_open
        else:
            hi, hi_open = other.hi, other.hi_open
        if lo > hi:
            raise DomainError(f"intervals {self} and {other} do not overlap")
        return Interval(lo, hi, lo_open, hi_open)

    def __str__(self):
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


@dataclass(frozen=True)
class ConvexFn:
    """A vectorised real function with a declared domain.

    Calling the object checks the domain and rejects non-finite output, so
    quadrature never silently integrates garbage.  ``nonnegative`` records
    that the function is known to be >= 0 on its domain.
    """

    func: Callable[[np.ndarray], np.ndarray]
    domain: Interval = field(default_factory=Interval)
    label: str = "f"
    nonnegative: bool = False

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        inside = self.domain.contains(arr)
        if not np.all(inside):
            bad = float(arr[~inside].flat[0]) if arr.ndim else float(arr)
            raise DomainError(f"{self.label}: {bad!r} outside domain {self.domain}", x=bad)
        with np.errstate(all="ignore"):
            y = np.asarray(self.func(arr), dtype=float)
        if not np.all(np.isfinite(y)):
            bad = float(arr[~np.isfinite(y)].flat[0]) if arr.ndim else float(arr)
            raise DomainError(f"{self.label}: non-finite value at {bad!r}", x=bad)
        return float(y) if arr.ndim == 0 else y


def _xlogx(x):
    return np.where(x == 0.0, 0.0, x * np.log(np.where(x == 0.0, 1.0, x)))


_POSITIVE = Interval(0.0, math.inf)

BUILTINS: dict[str, ConvexFn] = {
    "exp": ConvexFn(np.exp, Interval(), "exp(x)", nonnegative=True),
    "neglog": ConvexFn(lambda x: -np.log(x), _POSITIVE, "-log(x)"),
    "xlogx": ConvexFn(_xlogx, Interval(0.0, math.inf, lo_open=False), "x*log(x)"),
    "square": ConvexFn(np.square, Interval(), "x^2", nonnegative=True),
    "recip": ConvexFn(lambda x: 1.0 / x, _POSITIVE, "1/x", nonnegative=True),
    "identity": ConvexFn(lambda x: np.asarray(x, dtype=float) * 1.0, Interval(), "x"),
}


def builtin(name: str) -> ConvexFn:
    try:
        return BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin function {name!r}; choose from {sorted(BUILTINS)}") from None


def power_base(base: float) -> ConvexFn:
    """x -> base**x for a fixed base > 0."""
    if not base > 0:
        raise DomainError("power family needs a positive base")
    log_base = math.log(base)
    return ConvexFn(lambda x: np.exp(log_base * x), Interval(), f"{base!r}^x", nonnegative=True)


@dataclass(frozen=True)
class ProbeResult:
    passed: bool
    worst: float  # largest normalised excess of f over its chord
    witness: tuple[float, float, float]  # the triple attaining it


def convexity_probe(f: Callable, interval: Interval, trials: int = 10_000,
                    seed: int = 0, tol: float = 1e-9) -> ProbeResult:
    """Random three-point secant test.

    Draws ``trials`` sorted triples x < y < z from ``interval`` and checks
    f(y) <= the chord through (x, f(x)) and (z, f(z)), up to
    tol * max(1, |f|).  ``worst`` is the largest normalised excess.
    """
    if not interval.finite:
        raise ValueError("convexity probe needs a bounded interval")
    lo, hi = interval.lo, interval.hi
    if interval.lo_open:
        lo = float(np.nextafter(lo, hi))
    if interval.hi_open:
        hi = float(np.nextafter(hi, lo))
    if not lo < hi:
        raise ValueError("convexity probe needs an interval with interior")
    rng = np.random.default_rng(seed)
    pts = np.sort(rng.uniform(lo, hi, size=(trials, 3)), axis=1)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    fx, fy, fz = (np.asarray(f(v), dtype=float) for v in (x, y, z))
    span = z - x
    with np.errstate(all="ignore"):
        w = np.where(span > 0, (y - x) / span, 0.0)
    chord = fx + w * (fz - fx)
    scale = np.maximum.reduce([np.ones_like(fx), np.abs(fx), np.abs(fy), np.abs(fz)])
    excess = (fy - chord) / scale
    i = int(np.argmax(excess))
    worst = float(excess[i])
    return ProbeResult(worst <= tol, worst, (float(x[i]), float(y[i]), float(z[i])))
