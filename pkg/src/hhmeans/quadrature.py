"""Batched adaptive Gauss-Legendre quadrature.

Many independent integrals (one per row) are refined together so that the
integrand is called with large numpy blocks instead of one abscissa at a
time.  A panel is accepted once its two halves agree with the whole-panel
estimate to within the row's tolerance share (proportional to panel width),
or once the disagreement is at the level of floating-point noise.  Accepted
contributions are accumulated with ``np.add.at`` in a fixed order, so
results are bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureFailure

__all__ = ["QuadratureSpec", "DEFAULT_SPEC", "integrate_batch", "integrate"]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-11
    max_depth: int = 40
    panel_order: int = 15

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 10:
            raise ValueError("max_depth must be at least 10")
        if not 5 <= self.panel_order <= 30:
            raise ValueError("panel_order must lie in 5..30")


DEFAULT_SPEC = QuadratureSpec()


@lru_cache(maxsize=None)
def _rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panels(func, rows, lo, hi, nodes, weights):
    """Gauss-Legendre estimate and absolute-value estimate on each panel."""
    half = 0.5 * (hi - lo)
    x = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    fx = np.asarray(func(x, rows), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        raise QuadratureFailure("integrand returned a non-finite value")
    return half * (fx @ weights), np.abs(half) * (np.abs(fx) @ weights)


def integrate_batch(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    lo,
    hi,
    spec: QuadratureSpec = DEFAULT_SPEC,
):
    """Integrate ``func`` over [lo[i], hi[i]] for every row i.

    ``func(x, rows)`` receives abscissae of shape (m, k) and the row index of
    each of the m panels, and must return values of shape (m, k).

    Returns ``(values, errors, evaluations)`` as arrays shaped like the
    broadcast of lo and hi.
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    shape = lo.shape
    lo = lo.ravel()
    hi = hi.ravel()
    n = lo.size
    nodes, weights = _rule(spec.panel_order)
    k = spec.panel_order

    total = np.zeros(n)
    error = np.zeros(n)
    evals = np.zeros(n, dtype=np.int64)
    if n == 0:
        return total.reshape(shape), error.reshape(shape), evals.reshape(shape)

    rows = np.arange(n)
    whole, _ = _panels(func, rows, lo, hi, nodes, weights)
    evals += k
    width = np.abs(hi - lo)
    budget = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(whole))
    keep = width > 0.0
    a, b = lo[keep], hi[keep]
    rows = rows[keep]
    whole = whole[keep]
    depth = 0
    while rows.size:
        mid = 0.5 * (a + b)
        both_rows = np.concatenate([rows, rows])
        est, est_abs = _panels(
            func, both_rows, np.concatenate([a, mid]), np.concatenate([mid, b]), nodes, weights
        )
        np.add.at(evals, both_rows, k)
        m = rows.size
        left, right = est[:m], est[m:]
        refined = left + right
        diff = np.abs(refined - whole)
        share = budget[rows] * np.abs(b - a) / width[rows]
        noise = 50.0 * _EPS * (est_abs[:m] + est_abs[m:])
        ok = diff <= np.maximum(share, noise)
        # a row whose outstanding error already fits its whole budget is done
        # (this keeps endpoint singularities from exhausting max_depth)
        pending = error.copy()
        np.add.at(pending, rows, diff)
        ok |= (pending <= budget)[rows]
        if np.any(ok):
            np.add.at(total, rows[ok], refined[ok])
            np.add.at(error, rows[ok], diff[ok])
        bad = ~ok
        if not np.any(bad):
            break
        depth += 1
        if depth >= spec.max_depth:
            raise QuadratureFailure(
                f"tolerance not met after {spec.max_depth} subdivisions "
                f"({int(bad.sum())} panels outstanding)"
            )
        rows = np.concatenate([rows[bad], rows[bad]])
        a, b = np.concatenate([a[bad], mid[bad]]), np.concatenate([mid[bad], b[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    return total.reshape(shape), error.reshape(shape), evals.reshape(shape)


def integrate(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
              spec: QuadratureSpec = DEFAULT_SPEC):
    """Scalar convenience wrapper: returns (value, est_error, evaluations)."""
    value, err, n = integrate_batch(lambda x, rows: f(x), lo, hi, spec)
    return float(value), float(err), int(n)
