"""Randomised verification suites over every registered chain.

Sampling
--------
Each chain draws its own stream from numpy's PCG64 generator seeded with
``SeedSequence(seed, spawn_key=(chain_index,))``, so adding or running a
single chain never changes the samples of another.  Per sample the stream
yields, in this order: ``log a`` and ``log b`` uniform over the log of
their ranges, then ``nu`` uniform over ``nu_range``, each drawn as a block
of ``samples`` values.  With a user function two more blocks follow: the
abscissae ``x`` and ``y``, uniform over the function's sampling interval.

Quadrature-backed chains cycle through a family of builtin convex
functions (sample i uses family i mod 5).  exp and x^2 are applied on
(log a, log b); -log, x log x and 1/x on (a, b) directly.

Evaluation happens in chunks; every per-sample result is independent of the
chunking, so summaries are reproducible bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chains import (
    DEFAULT_TOL,
    Evaluation,
    amgm_ratio_bounds,
    arith_log_gap_bounds,
    bound_evaluation,
    chain_evaluation,
    eight_term_evaluation,
    five_term_evaluation,
    identric_kantorovich_bounds,
    identric_upper_bound_check,
    log_mean_geometric_gap_bounds,
    merge_evaluations,
    sequence_evaluation,
    young_pq_evaluation,
)
from .errors import ConfigError, DomainError, NegativeFunction
from .fnspec import convexity_probe, natural_domain, parse_fnspec, to_text, eval_fnspec
from .functions import BUILTINS, ConvexFn, Interval
from .hh import (
    hh_lower_gap_bounds,
    hh_ratio_bounds,
    hh_upper_gap_bounds,
    integrated_jensen_bounds,
    refined_jensen_bound,
    uniform_upper_gap_bounds,
)
from .quadrature import DEFAULT_SPEC, QuadratureSpec
from .young import log_mean_difference_bounds

__all__ = [
    "CHAINS",
    "CHAIN_IDS",
    "SuiteConfig",
    "SuiteSummary",
    "UserFunction",
    "prepare_function",
    "draw_samples",
    "evaluate_chain",
    "run_chain",
    "run_suite",
]


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SuiteConfig:
    samples: int = 1000
    seed: int = 0
    tol: float = DEFAULT_TOL
    a_range: tuple = (1e-3, 1e3)
    b_range: tuple = (1e-3, 1e3)
    nu_range: tuple = (0.01, 0.99)
    fn: str | None = None
    x_range: tuple = (-5.0, 5.0)
    m_max: int = 30
    chunk: int = 4096
    quadrature: QuadratureSpec = DEFAULT_SPEC

    def __post_init__(self):
        if not (isinstance(self.samples, int) and self.samples >= 1):
            raise ConfigError("samples must be a positive integer")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ConfigError("tol must be positive")
        for name in ("a_range", "b_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi < math.inf):
                raise ConfigError(f"{name} must satisfy 0 < lo <= hi < inf")
        lo, hi = self.nu_range
        if not 0 < lo <= hi < 1:
            raise ConfigError("nu_range must be a subinterval of (0, 1)")
        lo, hi = self.x_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError("x_range must be a finite interval lo < hi")
        if not 1 <= self.m_max <= 40:
            raise ConfigError("m_max must lie in 1..40")
        if self.chunk < 1:
            raise ConfigError("chunk must be positive")


@dataclass(frozen=True)
class UserFunction:
    """A parsed --fn expression restricted to its sampling interval."""

    fn: ConvexFn
    region: Interval
    sample_lo: float
    sample_hi: float


def prepare_function(src: str, x_range=(-5.0, 5.0), trials: int = 10_000) -> UserFunction:
    """Parse, restrict to x_range and probe convexity; ConfigError on failure."""
    try:
        ast = parse_fnspec(src)
    except ValueError as exc:
        raise ConfigError(f"--fn: {exc}") from exc
    dom = natural_domain(ast)
    if dom.interval is None:
        raise ConfigError(f"--fn {src!r} is defined nowhere")
    try:
        region = dom.interval.intersect(Interval(x_range[0], x_range[1], False, False))
    except DomainError as exc:
        raise ConfigError(f"--x-range does not meet the domain of {src!r}") from exc
    if not region.lo < region.hi:
        raise ConfigError("the sampling interval is empty")
    inside = [s for s in dom.singularities if region.lo <= s <= region.hi]
    if inside:
        raise ConfigError(
            f"{to_text(ast)} is singular at x = {inside[0]!r}; restrict --x-range to one side"
        )
    fn = ConvexFn(lambda v: eval_fnspec(ast, v), region, to_text(ast))
    try:
        probe = convexity_probe(ast, region, trials, seed=0)
    except DomainError as exc:
        raise ConfigError(f"--fn is not defined on all of {region}: {exc}") from exc
    if not probe.passed:
        x, y, z = probe.witness
        raise ConfigError(
            f"{to_text(ast)} failed the convexity probe on {region}: "
            f"f({y!r}) exceeds the chord through {x!r} and {z!r} by {probe.worst:.3g}"
        )
    # keep samples off open ends
    pad = 1e-9 * (region.hi - region.lo)
    lo = region.lo + (pad if region.lo_open else 0.0)
    hi = region.hi - (pad if region.hi_open else 0.0)
    return UserFunction(fn, region, lo, hi)


# ---------------------------------------------------------------------------
# sampling


@dataclass
class Samples:
    a: np.ndarray
    b: np.ndarray
    nu: np.ndarray
    x: np.ndarray | None = None
    y: np.ndarray | None = None

    def take(self, sl):
        pick = lambda v: None if v is None else v[sl]
        return Samples(self.a[sl], self.b[sl], self.nu[sl], pick(self.x), pick(self.y))


def draw_samples(cfg: SuiteConfig, chain_index: int, user: UserFunction | None = None) -> Samples:
    """The documented sample stream of one chain."""
    seq = np.random.SeedSequence(cfg.seed, spawn_key=(chain_index,))
    rng = np.random.Generator(np.random.PCG64(seq))
    n = cfg.samples
    log_a = rng.uniform(math.log(cfg.a_range[0]), math.log(cfg.a_range[1]), n)
    log_b = rng.uniform(math.log(cfg.b_range[0]), math.log(cfg.b_range[1]), n)
    nu = rng.uniform(cfg.nu_range[0], cfg.nu_range[1], n)
    x = y = None
    if user is not None:
        x = rng.uniform(user.sample_lo, user.sample_hi, n)
        y = rng.uniform(user.sample_lo, user.sample_hi, n)
    return Samples(np.exp(log_a), np.exp(log_b), nu, x, y)


# ---------------------------------------------------------------------------
# chain builders: each maps a chunk of samples to an Evaluation and a dict
# of named per-sample inputs for reporting


FAMILY = ("exp", "neglog", "xlogx", "square", "recip")
_LOG_EMBED = {"exp", "square"}
NONNEG_FAMILY = ("exp", "square", "recip")


def _scatter(parts, n) -> Evaluation:
    """Combine evaluations computed on disjoint index sets."""
    first = parts[0][1]
    values = np.zeros((first.values.shape[0], n))
    slacks = np.zeros((first.slacks.shape[0], n))
    scale = np.ones(n)
    allowance = np.zeros(n)
    for idx, ev in parts:
        values[:, idx] = ev.values
        slacks[:, idx] = ev.slacks
        scale[idx] = ev.scale
        allowance[idx] = ev.allowance
    return Evaluation(first.labels, values, first.edges, slacks, scale, allowance)


def _family_pairs(s: Samples, user: UserFunction | None, start: int):
    """Yield (index array, ConvexFn, x, y) groups for a chunk."""
    n = s.a.size
    if user is not None:
        yield np.arange(n), user.fn, s.x, s.y
        return
    which = (np.arange(n) + start) % len(FAMILY)
    for k, name in enumerate(FAMILY):
        idx = np.flatnonzero(which == k)
        if idx.size == 0:
            continue
        if name in _LOG_EMBED:
            x, y = np.log(s.a[idx]), np.log(s.b[idx])
        else:
            x, y = s.a[idx], s.b[idx]
        yield idx, BUILTINS[name], x, y


def _family_label(user, start, n):
    if user is not None:
        return [user.fn.label] * n
    return [BUILTINS[FAMILY[(start + i) % len(FAMILY)]].label for i in range(n)]


def _pair_inputs(s, **extra):
    return {"a": s.a, "b": s.b, "nu": s.nu, **extra}


def _quad_scale(f, x, y, *more):
    return np.maximum.reduce([np.abs(f(x)), np.abs(f(y))] + [np.abs(m) for m in more])


def _pair_quadrature(make):
    """Builder for chains of the form make(f, x, y, nu, spec) -> (BoundPair, scale)."""

    def build(s, cfg, user, start):
        n = s.a.size
        parts = []
        xs, ys = np.zeros(n), np.zeros(n)
        for idx, f, x, y in _family_pairs(s, user, start):
            bp = make(f, x, y, s.nu[idx], cfg.quadrature)
            parts.append((idx, bound_evaluation(bp, _quad_scale(f, x, y))))
            xs[idx], ys[idx] = x, y
        inputs = _pair_inputs(s, f=_family_label(user, start, n), x=xs, y=ys)
        return _scatter(parts, n), inputs

    return build


def _thm23(s, cfg, user, start):
    n = s.a.size
    parts = []
    ts = np.zeros(n)
    if user is not None:
        if not user.region.contains(1.0):
            raise ConfigError("the ratio bounds use the pair (t, 1); --x-range must contain 1")
        groups = [(np.arange(n), user.fn, s.x)]
        labels = [user.fn.label] * n
    else:
        which = (np.arange(n) + start) % len(NONNEG_FAMILY)
        groups = []
        labels = [BUILTINS[NONNEG_FAMILY[(start + i) % 3]].label for i in range(n)]
        t = s.b / s.a
        for k, name in enumerate(NONNEG_FAMILY):
            idx = np.flatnonzero(which == k)
            if idx.size:
                tt = np.log(t[idx]) if name in _LOG_EMBED else t[idx]
                groups.append((idx, BUILTINS[name], tt))
    for idx, f, t in groups:
        bp = hh_ratio_bounds(f, t, s.nu[idx], cfg.quadrature)
        scale = np.maximum.reduce([np.abs(bp.lower), np.abs(bp.middle), np.abs(bp.upper)])
        parts.append((idx, bound_evaluation(bp, scale)))
        ts[idx] = t
    return _scatter(parts, n), _pair_inputs(s, f=labels, t=ts)


def _cor214(s, cfg, user, start):
    n = s.a.size
    parts = []
    xs, ys = np.zeros(n), np.zeros(n)
    for idx, f, x, y in _family_pairs(s, user, start):
        nu = s.nu[idx]
        res = refined_jensen_bound(f, x, y, nu, cfg.quadrature)
        at_mean = f(x + nu * (y - x))
        values = np.stack([at_mean, res.value])
        ev = chain_evaluation(("f(A)", "chord - 2r D"), values, _quad_scale(f, x, y), res.est_error)
        parts.append((idx, ev))
        xs[idx], ys[idx] = x, y
    return _scatter(parts, n), _pair_inputs(s, f=_family_label(user, start, n), x=xs, y=ys)


def _cor215(s, cfg, user, start):
    n = s.a.size
    parts = []
    xs, ys = np.zeros(n), np.zeros(n)
    for idx, f, x, y in _family_pairs(s, user, start):
        bp = integrated_jensen_bounds(f, x, y, cfg.quadrature)
        parts.append((idx, bound_evaluation(bp, _quad_scale(f, x, y),
                                            labels=("segment average", "", "corrected midpoint"))))
        xs[idx], ys[idx] = x, y
    return _scatter(parts, n), {"a": s.a, "b": s.b, "f": _family_label(user, start, n), "x": xs, "y": ys}


def _prop26(s, cfg, user, start):
    n = s.a.size
    t = s.b / s.a
    names = ("km", "cf", "alzer", "reflected")
    parts = []
    for side in (t > 1.0, t < 1.0):
        idx = np.flatnonzero(side)
        if idx.size == 0:
            continue
        pairs = log_mean_difference_bounds(t[idx], s.nu[idx])
        scale = np.maximum(1.0, t[idx])
        evs = [bound_evaluation(bp, scale, ("lower", "difference", "upper")) for bp in pairs]
        parts.append((idx, merge_evaluations(evs, [f"{k}:" for k in names])))
    if np.any(t == 1.0):
        raise DomainError("a sample hit a = b exactly; change the seed")
    ev = _scatter(parts, n)
    # edge names should not depend on the side of the first chunk
    edges = tuple(e.replace(" <= ", " | ").replace(" >= ", " | ") for e in ev.edges)
    ev = Evaluation(ev.labels, ev.values, edges, ev.slacks, ev.scale, ev.allowance)
    return ev, _pair_inputs(s, t=t, direction=["standard" if v > 1 else "reversed" for v in t])


def _simple(fn, scale="terms"):
    def build(s, cfg, user, start):
        if scale == "operands":
            ev = bound_evaluation(fn(s.a, s.b, s.nu), np.maximum(s.a, s.b))
        elif scale == "log":
            ev = bound_evaluation(fn(s.a, s.b, s.nu), 1.0)
        else:
            ev = fn(s.a, s.b, s.nu)
        return ev, _pair_inputs(s)

    return build


def _cor29(s, cfg, user, start):
    t = s.b / s.a
    return sequence_evaluation(t, s.nu, cfg.m_max), {"t": t, "nu": s.nu}


def _young(s, cfg, user, start):
    p = 1.0 / (1.0 - s.nu)
    q = 1.0 / s.nu
    inputs = {"a": s.a ** (1.0 - s.nu), "b": s.b ** s.nu, "p": p, "q": q}
    return young_pq_evaluation(s.a, s.b, s.nu), inputs


@dataclass(frozen=True)
class ChainSpec:
    chain_id: str
    title: str
    build: Callable
    uses_fn: bool = False


CHAINS: tuple[ChainSpec, ...] = (
    ChainSpec("cor12", "five-term mean chain", _simple(five_term_evaluation)),
    ChainSpec("thm28", "eight-term mean chain", _simple(eight_term_evaluation)),
    ChainSpec("cor29", "self-improving sequence", _cor29),
    ChainSpec("thm23", "functional ratio bounds (f >= 0)", _thm23, True),
    ChainSpec("prop26", "log-mean power-difference brackets", _prop26),
    ChainSpec("thm210", "lower gap via midpoint defect",
              _pair_quadrature(hh_lower_gap_bounds), True),
    ChainSpec("cor213", "log-mean minus geometric mean",
              _simple(log_mean_geometric_gap_bounds, "operands")),
    ChainSpec("cor214", "refined Jensen upper bound", _cor214, True),
    ChainSpec("cor215", "integrated Jensen comparison", _cor215, True),
    ChainSpec("thm217", "upper gap with averaged weights",
              _pair_quadrature(hh_upper_gap_bounds), True),
    ChainSpec("cor218", "upper gap with constants 1/2 and 3/2",
              _pair_quadrature(uniform_upper_gap_bounds), True),
    ChainSpec("cor219-log", "arithmetic minus log mean", _simple(arith_log_gap_bounds, "operands")),
    ChainSpec("cor219-identric", "identric mean via Kantorovich constant",
              _simple(identric_kantorovich_bounds, "log")),
    ChainSpec("rem222-kant", "AM-GM ratio via correction factor",
              _simple(amgm_ratio_bounds, "log")),
    ChainSpec("rem222-identric", "closed-form identric upper bound",
              _simple(identric_upper_bound_check, "log")),
    ChainSpec("young-pq", "Young inequality with exponents p, q", _young),
)
CHAIN_IDS = tuple(c.chain_id for c in CHAINS)
_BY_ID = {c.chain_id: (i, c) for i, c in enumerate(CHAINS)}


def chain_spec(chain_id: str) -> tuple[int, ChainSpec]:
    try:
        return _BY_ID[chain_id]
    except KeyError:
        raise ConfigError(
            f"unknown chain {chain_id!r}; choose from {', '.join(CHAIN_IDS)} or all"
        ) from None


def evaluate_chain(chain_id: str, samples: Samples, cfg: SuiteConfig,
                   user: UserFunction | None = None, start: int = 0):
    """Evaluate one chain on given samples: (Evaluation, inputs)."""
    _, spec = chain_spec(chain_id)
    return spec.build(samples, cfg, user if spec.uses_fn else None, start)


# ---------------------------------------------------------------------------
# summaries


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


@dataclass(frozen=True)
class SuiteSummary:
    chain_id: str
    title: str
    samples: int
    violations: int
    tol: float
    min_margin: float
    worst_index: int
    worst_edge: str
    worst_slack: float
    worst_scale: float
    worst_allowance: float
    worst_inputs: dict = field(default_factory=dict)
    worst_terms: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_record(self, timings: bool = False) -> dict:
        """Flat record with a fixed key order."""
        rec = {
            "chain": self.chain_id,
            "title": self.title,
            "samples": self.samples,
            "violations": self.violations,
            "passed": self.passed,
            "tol": self.tol,
            "min_margin": self.min_margin,
            "worst_index": self.worst_index,
            "worst_edge": self.worst_edge,
            "worst_slack": self.worst_slack,
            "worst_scale": self.worst_scale,
            "worst_allowance": self.worst_allowance,
            "worst_inputs": ";".join(f"{k}={_fmt(v)}" for k, v in self.worst_inputs.items()),
            "worst_terms": ";".join(f"{k}={_fmt(v)}" for k, v in self.worst_terms.items()),
        }
        if timings:
            rec["wall_time"] = self.wall_time
        return rec


RECORD_KEYS = tuple(
    SuiteSummary("", "", 1, 0, 1.0, 0.0, 0, "", 0.0, 1.0, 0.0).to_record().keys()
)


def run_chain(chain_id: str, cfg: SuiteConfig, user: UserFunction | None = None) -> SuiteSummary:
    """Run one chain over cfg.samples seeded samples."""
    index, spec = chain_spec(chain_id)
    user = user if spec.uses_fn else None
    clock = time.perf_counter()
    samples = draw_samples(cfg, index, user)
    violations = 0
    best = (math.inf, -1, None, None, None)  # margin, global index, chunk ev, inputs, local
    for start in range(0, cfg.samples, cfg.chunk):
        chunk = samples.take(slice(start, start + cfg.chunk))
        try:
            ev, inputs = spec.build(chunk, cfg, user, start)
        except NegativeFunction as exc:
            raise ConfigError(f"{chain_id}: {exc}") from exc
        margins = ev.margins()
        per_sample = margins.min(axis=0)
        violations += int(np.count_nonzero(per_sample < -cfg.tol))
        local = int(np.argmin(per_sample))
        if per_sample[local] < best[0]:
            best = (float(per_sample[local]), start + local, ev, inputs, local)
    margin, index_global, ev, inputs, local = best
    edge = int(np.argmin(ev.margins()[:, local]))
    return SuiteSummary(
        chain_id=chain_id,
        title=spec.title,
        samples=cfg.samples,
        violations=violations,
        tol=cfg.tol,
        min_margin=margin,
        worst_index=index_global,
        worst_edge=ev.edges[edge],
        worst_slack=float(ev.slacks[edge, local]),
        worst_scale=float(ev.scale[local]),
        worst_allowance=float(ev.allowance[local]),
        worst_inputs={k: (v[local] if isinstance(v, list) else float(v[local])) for k, v in inputs.items()},
        worst_terms={lab: float(v) for lab, v in zip(ev.labels, ev.values[:, local])},
        wall_time=time.perf_counter() - clock,
    )


def run_suite(chain: str, cfg: SuiteConfig) -> list[SuiteSummary]:
    """Run one chain id or 'all' (in registry order)."""
    ids = CHAIN_IDS if chain == "all" else (chain_spec(chain)[1].chain_id,)
    user = prepare_function(cfg.fn, cfg.x_range) if cfg.fn else None
    return [run_chain(cid, cfg, user) for cid in ids]
