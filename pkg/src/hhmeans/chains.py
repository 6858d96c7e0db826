"""Mean-inequality chains as executable predicates.

Each chain is first built as a vectorised :class:`Evaluation` (term values
and oriented edge slacks for many samples at once); the scalar entry points
wrap one column of it into a :class:`ChainReport` or return the underlying
:class:`BoundPair`.

Multiplicative inequalities are checked as additive ones between
logarithms.  The tolerance is always relative to ``scale``: the largest
term magnitude for chains of means, max(a, b) for differences of means,
and 1 for log-space chains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DiagonalArgument, DomainError
from .hh import averaged_max_weight, averaged_min_weight
from .means import (
    DEFAULT_POLICY,
    LimitPolicy,
    _args,
    _check_pair,
    _check_weight,
    _expm1_ratio,
    log_am_gm_correction,
    log_identric_upper_bound,
    log_kantorovich,
    log_ratio,
    log_weighted_identric,
    representing_function,
    weighted_arithmetic,
    weighted_geometric,
    weighted_logarithmic,
)
from .young import BoundPair, Direction

__all__ = [
    "Evaluation",
    "ChainReport",
    "SequenceReport",
    "chain_evaluation",
    "bound_evaluation",
    "report_from",
    "five_term_evaluation",
    "eight_term_evaluation",
    "sequence_evaluation",
    "young_pq_evaluation",
    "five_term_chain",
    "eight_term_chain",
    "self_improving_sequence",
    "log_mean_geometric_gap_bounds",
    "arith_log_gap_bounds",
    "identric_kantorovich_bounds",
    "amgm_ratio_bounds",
    "identric_upper_bound_check",
    "young_pq_chain",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class Evaluation:
    """Vectorised chain data for n samples.

    values[k, i] is term k at sample i; slacks[e, i] is the oriented slack
    of edge e (>= 0 when the edge holds).  ``allowance`` is an absolute
    extra margin per sample (quadrature error estimates), ``scale`` the
    normaliser for the tolerance.
    """

    labels: tuple
    values: np.ndarray
    edges: tuple
    slacks: np.ndarray
    scale: np.ndarray
    allowance: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[1]

    def margins(self) -> np.ndarray:
        """(slack + allowance) / scale, shape (edges, n)."""
        return (self.slacks + self.allowance[None, :]) / self.scale[None, :]


def _flat(x, n):
    return np.broadcast_to(np.asarray(x, dtype=float), (n,)).astype(float)


def chain_evaluation(labels, values, scale=None, allowance=0.0, sign=1.0) -> Evaluation:
    """A chain claimed nondecreasing in the listed order (times ``sign``)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n = values.shape[1]
    sign = _flat(sign, n)
    slacks = sign[None, :] * np.diff(values, axis=0)
    rel = "<=" if np.all(sign > 0) else ">=" if np.all(sign < 0) else "~"
    edges = tuple(f"{labels[k]} {rel} {labels[k + 1]}" for k in range(len(labels) - 1))
    if scale is None:
        scale = np.max(np.abs(values), axis=0)
    scale = np.maximum(_flat(scale, n), np.finfo(float).tiny)
    return Evaluation(tuple(labels), values, edges, slacks, scale, _flat(allowance, n))


def bound_evaluation(bp: BoundPair, scale=1.0, labels=("lower", "middle", "upper")) -> Evaluation:
    """Turn a BoundPair into an Evaluation (two edges, or one without middle)."""
    sign = 1.0 if bp.direction is Direction.STANDARD else -1.0
    if bp.middle is None:
        values = np.stack([np.atleast_1d(bp.lower), np.atleast_1d(bp.upper)]).astype(float)
        labels = (labels[0], labels[-1])
    else:
        values = np.stack(
            [np.atleast_1d(bp.lower), np.atleast_1d(bp.middle), np.atleast_1d(bp.upper)]
        ).astype(float)
    return chain_evaluation(labels, values, scale, np.atleast_1d(bp.error), sign)


def merge_evaluations(parts, prefixes) -> Evaluation:
    """Stack several evaluations over the same samples side by side."""
    labels, edges = [], []
    for part, prefix in zip(parts, prefixes):
        labels += [f"{prefix}{lab}" for lab in part.labels]
        edges += [f"{prefix}{e}" for e in part.edges]
    values = np.concatenate([p.values for p in parts])
    # a per-edge allowance may differ between parts; fold it into the slack
    slacks = np.concatenate([p.slacks + p.allowance[None, :] for p in parts])
    scale = np.maximum.reduce([p.scale for p in parts])
    return Evaluation(tuple(labels), values, tuple(edges), slacks, scale, np.zeros_like(scale))


@dataclass(frozen=True)
class ChainReport:
    chain_name: str
    inputs: dict
    terms: tuple  # ((label, value), ...)
    slacks: tuple  # ((edge, value), ...)
    violated: bool
    min_slack: float
    min_slack_edge: str
    scale: float
    tol: float
    min_margin: float = 0.0
    allowance: float = 0.0

    def to_dict(self) -> dict:
        return {
            "chain": self.chain_name,
            "inputs": dict(self.inputs),
            "terms": {k: v for k, v in self.terms},
            "slacks": {k: v for k, v in self.slacks},
            "violated": self.violated,
            "min_slack": self.min_slack,
            "min_slack_edge": self.min_slack_edge,
            "min_margin": self.min_margin,
            "scale": self.scale,
            "tol": self.tol,
        }


def report_from(name: str, inputs: dict, ev: Evaluation, i: int = 0,
                tol: float = DEFAULT_TOL) -> ChainReport:
    """Report for sample i of an evaluation."""
    margins = ev.margins()[:, i]
    e = int(np.argmin(margins))
    return ChainReport(
        chain_name=name,
        inputs=dict(inputs),
        terms=tuple((lab, float(v)) for lab, v in zip(ev.labels, ev.values[:, i])),
        slacks=tuple((edge, float(s)) for edge, s in zip(ev.edges, ev.slacks[:, i])),
        violated=bool(margins[e] < -tol),
        min_slack=float(ev.slacks[e, i]),
        min_slack_edge=ev.edges[e],
        scale=float(ev.scale[i]),
        tol=tol,
        min_margin=float(margins[e]),
        allowance=float(ev.allowance[i]),
    )


@dataclass(frozen=True)
class SequenceReport:
    m_values: tuple
    g_values: tuple
    monotone: bool
    limit_gap: float
    target: float = float("nan")
    worst_step: float = 0.0


# ---------------------------------------------------------------------------
# chains of means


def _pair_weight(a, b, nu):
    (a, b, nu), _ = _args(a, b, nu)
    _check_pair(a, b)
    _check_weight(nu, interior=True, what="this chain")
    return np.ravel(a), np.ravel(b), np.ravel(nu)


def _split_mean(a, b, nu, lo_w, hi_w):
    """(a #_{lo_w} b) nabla_nu (a #_{hi_w} b)."""
    return (1.0 - nu) * weighted_geometric(a, b, lo_w) + nu * weighted_geometric(a, b, hi_w)


FIVE_TERM_LABELS = ("G_nu", "split_geometric", "L_nu", "mid(G_nu,A_nu)", "A_nu")
EIGHT_TERM_LABELS = (
    "G_nu",
    "split_geometric_3/4",
    "G_nu(sqrt)*L_nu(sqrt)",
    "mid(G_nu,split_geometric)",
    "split_geometric",
    "L_nu",
    "mid(G_nu,A_nu)",
    "A_nu",
)


def five_term_evaluation(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY) -> Evaluation:
    """G_nu <= split geometric <= L_nu <= mid(G_nu, A_nu) <= A_nu."""
    a, b, nu = _pair_weight(a, b, nu)
    g = weighted_geometric(a, b, nu)
    arith = weighted_arithmetic(a, b, nu)
    values = np.stack([
        g,
        _split_mean(a, b, nu, 0.5 * nu, 0.5 * (1.0 + nu)),
        weighted_logarithmic(a, b, nu, policy),
        0.5 * (g + arith),
        arith,
    ])
    return chain_evaluation(FIVE_TERM_LABELS, values)


def eight_term_evaluation(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY) -> Evaluation:
    """The eight-term refinement of the five-term chain.

    The seventh term combines G_nu and A_nu with the plain midpoint, as in
    the five-term chain.  Weighting that combination by nu instead breaks
    the chain: at (1, 4, nu = 0.1) it falls below L_nu.
    """
    a, b, nu = _pair_weight(a, b, nu)
    g = weighted_geometric(a, b, nu)
    arith = weighted_arithmetic(a, b, nu)
    split = _split_mean(a, b, nu, 0.5 * nu, 0.5 * (1.0 + nu))
    ra, rb = np.sqrt(a), np.sqrt(b)
    values = np.stack([
        g,
        _split_mean(a, b, nu, 0.75 * nu, 0.25 * (1.0 + 3.0 * nu)),
        weighted_geometric(ra, rb, nu) * weighted_logarithmic(ra, rb, nu, policy),
        0.5 * (g + split),
        split,
        weighted_logarithmic(a, b, nu, policy),
        0.5 * (g + arith),
        arith,
    ])
    return chain_evaluation(EIGHT_TERM_LABELS, values)


def five_term_chain(a: float, b: float, nu: float, tol: float = DEFAULT_TOL,
                    policy: LimitPolicy = DEFAULT_POLICY) -> ChainReport:
    ev = five_term_evaluation(a, b, nu, policy)
    return report_from("cor12", {"a": a, "b": b, "nu": nu}, ev, 0, tol)


def eight_term_chain(a: float, b: float, nu: float, tol: float = DEFAULT_TOL,
                     policy: LimitPolicy = DEFAULT_POLICY) -> ChainReport:
    ev = eight_term_evaluation(a, b, nu, policy)
    return report_from("thm28", {"a": a, "b": b, "nu": nu}, ev, 0, tol)


# ---------------------------------------------------------------------------
# self-improving sequence


def _sequence_values(t, nu, m_max, policy):
    """g_m for m = 0..m_max, shape (m_max + 1, n)."""
    h = log_ratio(1.0, t)
    rows = []
    for m in range(m_max + 1):
        s = 0.5 ** m
        rows.append(np.exp((1.0 - s) * nu * h) * representing_function(np.exp(s * h), nu, policy))
    return np.stack(rows)


def _check_sequence_args(t, nu, m_max):
    if not 1 <= int(m_max) <= 40:
        raise DomainError("m_max must lie in 1..40")
    (t, nu), _ = _args(t, nu)
    _check_pair(np.ones_like(t), t)
    _check_weight(nu, interior=True, what="the self-improving sequence")
    if np.any(t == 1.0):
        raise DomainError("the sequence is constant at t = 1; pick t != 1")
    return np.ravel(t), np.ravel(nu)


LIMIT_TOL = 1e-7


def sequence_evaluation(t, nu, m_max: int = 30, policy: LimitPolicy = DEFAULT_POLICY) -> Evaluation:
    """t^nu <= g_{m_max} <= ... <= g_0 = f_nu(t), plus a convergence edge
    |g_{m_max} - t^nu| <= 1e-7 t^nu when m_max >= 30."""
    t, nu = _check_sequence_args(t, nu, m_max)
    g = _sequence_values(t, nu, m_max, policy)
    target = np.exp(nu * log_ratio(1.0, t))
    values = np.concatenate([target[None, :], g[::-1]])
    labels = ("t^nu",) + tuple(f"g_{m}" for m in range(m_max, -1, -1))
    ev = chain_evaluation(labels, values)
    if m_max < 30:
        return ev
    # convergence edge expressed as a slack in the same units
    limit = LIMIT_TOL * target - np.abs(g[-1] - target)
    return Evaluation(
        ev.labels,
        ev.values,
        ev.edges + (f"|g_{m_max} - t^nu| <= 1e-7 t^nu",),
        np.concatenate([ev.slacks, limit[None, :]]),
        ev.scale,
        ev.allowance,
    )


def self_improving_sequence(t: float, nu: float, m_max: int = 30, tol: float = DEFAULT_TOL,
                            policy: LimitPolicy = DEFAULT_POLICY) -> SequenceReport:
    """g_m(t) = t^{(1 - 2^-m) nu} f_nu(t^{2^-m}) for m = 0..m_max.

    ``monotone`` is judged with tolerance tol * g_0; ``limit_gap`` is
    |g_{m_max} - t^nu|.
    """
    t_arr, nu_arr = _check_sequence_args(t, nu, m_max)
    g = _sequence_values(t_arr, nu_arr, m_max, policy)[:, 0]
    target = float(np.exp(nu_arr[0] * log_ratio(1.0, t_arr[0])))
    steps = g[:-1] - g[1:]
    scale = max(abs(float(g[0])), target)
    return SequenceReport(
        m_values=tuple(range(m_max + 1)),
        g_values=tuple(float(v) for v in g),
        monotone=bool(np.all(steps >= -tol * scale)) and float(g[-1]) >= target - tol * scale,
        limit_gap=abs(float(g[-1]) - target),
        target=target,
        worst_step=float(np.min(steps)),
    )


# ---------------------------------------------------------------------------
# difference and ratio bounds


def _off_diagonal(a, b, nu, what):
    a, b, nu = _pair_weight(a, b, nu)
    if np.any(a == b):
        raise DiagonalArgument(f"{what} needs a != b")
    return a, b, nu


def _bp(lower, middle, upper, scalar, direction=Direction.STANDARD, tag=""):
    out = lambda v: float(v[0]) if scalar else v
    return BoundPair(out(lower), out(upper), direction, None if middle is None else out(middle), 0.0, tag)


def _scalar(*values):
    return all(np.ndim(v) == 0 for v in values)


def log_mean_geometric_gap_bounds(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY) -> BoundPair:
    """Bracket L_nu(a, b) - a #_nu b.

    The bound is c / log(b/a) times (G - a)/nu + (b - G)/(1 - nu)
    - 4 (sqrt(ab) - G)/(1 - 2 nu) with c = min(nu, 1 - nu) for the lower
    and max(nu, 1 - nu) for the upper side.  With d = 1/2 - nu the last
    quotient is 2 G expm1(d h)/d, which is evaluated through expm1(x)/x and
    so is continuous through nu = 1/2 (where it equals 2 sqrt(ab) h).
    """
    scalar = _scalar(a, b, nu)
    a, b, nu = _off_diagonal(a, b, nu, "the log-mean gap bounds")
    h = log_ratio(a, b)
    g = weighted_geometric(a, b, nu)
    delta = 0.5 - nu
    bracket = (
        a * h * _expm1_ratio(nu * h)
        + g * h * _expm1_ratio((1.0 - nu) * h)
        - 2.0 * g * h * _expm1_ratio(delta * h)
    )
    r = np.minimum(nu, 1.0 - nu)
    middle = weighted_logarithmic(a, b, nu, policy) - g
    return _bp(r * bracket / h, middle, (1.0 - r) * bracket / h, scalar)


def arith_log_gap_bounds(a, b, nu) -> BoundPair:
    """r~(nu) (sqrt a - sqrt b)^2 <= A_nu - L_nu <= R~(nu) (sqrt a - sqrt b)^2."""
    scalar = _scalar(a, b, nu)
    a, b, nu = _pair_weight(a, b, nu)
    sq = (np.sqrt(a) - np.sqrt(b)) ** 2
    middle = weighted_arithmetic(a, b, nu) - weighted_logarithmic(a, b, nu)
    return _bp(averaged_min_weight(nu) * sq, middle, averaged_max_weight(nu) * sq, scalar)


def identric_kantorovich_bounds(a, b, nu) -> BoundPair:
    """log form of K^{r~} G_nu <= I_nu <= K^{R~} G_nu."""
    scalar = _scalar(a, b, nu)
    a, b, nu = _off_diagonal(a, b, nu, "the identric bounds")
    log_g = np.log(weighted_geometric(a, b, nu))
    log_k = log_kantorovich(a, b)
    return _bp(
        log_g + averaged_min_weight(nu) * log_k,
        log_weighted_identric(a, b, nu),
        log_g + averaged_max_weight(nu) * log_k,
        scalar,
    )


def _log_amgm_ratio(a, b, nu):
    """log(A_nu / G_nu) = log1p(nu u) - nu h."""
    h = log_ratio(a, b)
    return np.log1p(nu * np.expm1(h)) - nu * h


def amgm_ratio_bounds(a, b, nu, policy: LimitPolicy = DEFAULT_POLICY) -> BoundPair:
    """log form of alpha^r K^{r~} <= A_nu / G_nu <= alpha^R K^{R~},
    r, R = min, max(nu, 1 - nu)."""
    scalar = _scalar(a, b, nu)
    a, b, nu = _off_diagonal(a, b, nu, "the AM-GM ratio bounds")
    log_alpha = log_am_gm_correction(a, b, nu, policy)
    log_k = log_kantorovich(a, b)
    r = np.minimum(nu, 1.0 - nu)
    return _bp(
        r * log_alpha + averaged_min_weight(nu) * log_k,
        _log_amgm_ratio(a, b, nu),
        (1.0 - r) * log_alpha + averaged_max_weight(nu) * log_k,
        scalar,
    )


def identric_upper_bound_check(a, b, nu) -> BoundPair:
    """log I_nu(a, b) <= log of the closed-form upper bound (no middle)."""
    scalar = _scalar(a, b, nu)
    a, b, nu = _off_diagonal(a, b, nu, "the identric upper bound")
    return _bp(log_weighted_identric(a, b, nu), None, log_identric_upper_bound(a, b, nu), scalar)


# ---------------------------------------------------------------------------
# Young's inequality with exponents p, q


YOUNG_LABELS = ("ab", "log_mean_form", "a^p/p+b^q/q")


def young_pq_evaluation(x, y, nu) -> Evaluation:
    """The p, q form of the first, third and fifth terms of the five-term chain.

    Parametrised by X = a^p, Y = b^q and nu = 1/q, so p = 1/(1 - nu).
    """
    x, y, nu = _pair_weight(x, y, nu)
    h = log_ratio(x, y)
    g = weighted_geometric(x, y, nu)
    q_over_p = (1.0 - nu) / nu
    p_over_q = nu / (1.0 - nu)
    # (q/p)(X - ab) + (p/q)(ab - Y) over (p log a - q log b) = -h
    with np.errstate(all="ignore"):
        middle = (q_over_p * x * np.expm1(nu * h) + p_over_q * g * np.expm1((1.0 - nu) * h)) / h
    middle = np.where(h == 0.0, g, middle)
    values = np.stack([g, middle, weighted_arithmetic(x, y, nu)])
    return chain_evaluation(YOUNG_LABELS, values)


def young_pq_chain(a: float, b: float, p: float, tol: float = DEFAULT_TOL) -> ChainReport:
    """ab <= log-mean form <= a^p/p + b^q/q with q = p/(p - 1)."""
    if not p > 1.0:
        raise DomainError("the exponent p must exceed 1")
    if not (a > 0 and b > 0):
        raise DomainError("a and b must be positive")
    q = p / (p - 1.0)
    x, y = a ** p, b ** q
    if x == y:
        raise DomainError("a^p = b^q: the middle term is 0/0")
    ev = young_pq_evaluation(x, y, 1.0 / q)
    return report_from("young-pq", {"a": a, "b": b, "p": p}, ev, 0, tol)
