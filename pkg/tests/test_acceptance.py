"""Acceptance checks, one block per criterion.

Each test records its outcome through the ``acceptance`` fixture before
asserting, so the terminal summary lists PASS/FAIL for every criterion even
when a check fails.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from hhmeans import chains as ch
from hhmeans import hh
from hhmeans import young as yg
from hhmeans.errors import HHMeansError
from hhmeans.fnspec import convexity_probe, eval_fnspec, parse_fnspec, to_text
from hhmeans.functions import BUILTINS, Interval, power_base
from hhmeans.means import (
    log_weighted_identric,
    representing_function,
    weighted_logarithmic,
)
from hhmeans.suite import CHAIN_IDS, SuiteConfig, chain_spec, draw_samples
from test_fnspec import CORPUS

SEED = 42
SUITE_SAMPLES = 100_000


def _pairs(n, seed, lo=1e-3, hi=1e3):
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    b = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    nu = rng.uniform(0.01, 0.99, n)
    return a, b, nu


def _rel(x, ref, floor=0.0):
    x, ref = np.asarray(x, float), np.asarray(ref, float)
    return float(np.max(np.abs(x - ref) / np.maximum(np.abs(ref), floor)))


# ---------------------------------------------------------------------------
# 1. averaged weight constants


def test_criterion_1_averaged_weight_constants(acceptance):
    clock = time.perf_counter()
    half_lo = abs(hh.averaged_min_weight(0.5) - 0.25)
    half_hi = abs(hh.averaged_max_weight(0.5) - 0.75)
    grid = np.arange(1, 100) / 100.0
    lo, hi = hh.averaged_min_weight(grid), hh.averaged_max_weight(grid)
    sum_err = float(np.max(np.abs(lo + hi - 1.0)))
    sym_err = float(max(np.max(np.abs(lo - lo[::-1])), np.max(np.abs(hi - hi[::-1]))))
    q_lo, q_hi = hh.averaged_weights_by_quadrature(grid)
    quad_err = float(max(np.max(np.abs(q_lo - lo)), np.max(np.abs(q_hi - hi))))
    elapsed = time.perf_counter() - clock
    ok = (half_lo <= 1e-12 and half_hi <= 1e-12 and sum_err <= 1e-12 and sym_err <= 1e-12
          and quad_err <= 1e-10 and elapsed < 1.0)
    acceptance(1, "averaged weights", ok,
               f"|r-1/4|={half_lo:.1e} |R-3/4|={half_hi:.1e} sum={sum_err:.1e} "
               f"sym={sym_err:.1e} quad={quad_err:.1e} time={elapsed:.3f}s")
    assert ok


# ---------------------------------------------------------------------------
# 2. functional oracles


def test_criterion_2_functional_oracles(acceptance):
    n = 1000
    clock = time.perf_counter()
    a, b, nu = _pairs(n, 2)
    exp_err = _rel(hh.hh_functional(BUILTINS["exp"], np.log(a), np.log(b), nu).value,
                   weighted_logarithmic(a, b, nu))
    ref = -log_weighted_identric(a, b, nu)
    log_err = _rel(hh.hh_functional(BUILTINS["neglog"], a, b, nu).value, ref, 1.0)
    t = b / a
    power = np.array([hh.hh_functional(power_base(ti), 0.0, 1.0, w).value for ti, w in zip(t, nu)])
    pow_err = _rel(power, representing_function(t, nu))
    id_err = _rel(hh.hh_functional(BUILTINS["identity"], np.ones(n), t, nu).value, (1 - nu) + nu * t)
    elapsed = time.perf_counter() - clock
    errs = {"exp": exp_err, "-log": log_err, "t^x": pow_err, "id": id_err}
    ok = all(e <= 1e-9 for e in errs.values()) and elapsed < 30.0
    acceptance(2, "quadrature oracles", ok,
               " ".join(f"{k}={v:.1e}" for k, v in errs.items()) + f" time={elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 3. identity residuals


def test_criterion_3_identity_residuals(acceptance):
    rng = np.random.default_rng(3)
    t = np.exp(rng.uniform(-5, 5, 1000))
    nu = rng.uniform(0.01, 0.99, 1000)
    t = np.where(t == 1.0, 2.0, t)
    split = 0.0
    names = ("exp", "neglog", "xlogx", "square", "recip")
    for k, name in enumerate(names):
        f = BUILTINS[name]
        sl = slice(k, None, len(names))
        tk, wk = t[sl], nu[sl]
        direct_t1 = hh.hh_functional(f, tk, np.ones_like(tk), wk).value
        direct_1t = hh.hh_functional(f, np.ones_like(tk), tk, wk).value
        split = max(split, _rel(hh.hh_split_t1(f, tk, wk).value, direct_t1, 1.0),
                    _rel(hh.hh_split_1t(f, tk, wk).value, direct_1t, 1.0))
    power = _rel(yg.log_mean_power_difference(t, nu), yg.log_mean_power_difference_rhs(t, nu))
    excess = _rel(yg.weighted_log_mean_excess(t, nu), yg.weighted_log_mean_excess_rhs(t, nu))
    ok = split < 1e-10 and power < 1e-12 and excess < 1e-12
    acceptance(3, "identity residuals", ok,
               f"split routes={split:.1e} power difference={power:.1e} weighted excess={excess:.1e}")
    assert ok


# ---------------------------------------------------------------------------
# 4 and 9. full chain suite via the CLI


@pytest.fixture(scope="module")
def suite_runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    runs = []
    for k in range(2):
        path = out / f"run{k}.json"
        clock = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "hhmeans", "verify", "--chain", "all",
             "--samples", str(SUITE_SAMPLES), "--seed", str(SEED), "--output", str(path)],
            capture_output=True, text=True, timeout=900,
        )
        runs.append({
            "code": proc.returncode,
            "time": time.perf_counter() - clock,
            "bytes": path.read_bytes() if path.exists() else b"",
            "stderr": proc.stderr,
        })
    return runs


def _rows(run):
    return {r["chain"]: r for r in json.loads(run["bytes"])}


def test_criterion_4_exit_status_and_runtime(acceptance, suite_runs):
    first = suite_runs[0]
    ok = first["code"] == 0 and first["time"] < 300.0
    failing = [c for c, r in _rows(first).items() if not r["passed"]]
    acceptance(4, "verify all exit code", ok,
               f"exit={first['code']} time={first['time']:.1f}s failing={','.join(failing) or 'none'}")
    assert ok, first["stderr"]


@pytest.mark.parametrize("chain", CHAIN_IDS)
def test_criterion_4_chain(acceptance, suite_runs, chain):
    row = _rows(suite_runs[0])[chain]
    ok = row["violations"] == 0 and row["min_margin"] >= -1e-10
    acceptance(4, chain, ok,
               f"violations={row['violations']}/{row['samples']} min_margin={row['min_margin']:.3e} "
               f"worst_edge={row['worst_edge']!r}")
    assert ok, row


def test_criterion_4_prop26_covers_both_directions(acceptance):
    index, _ = chain_spec("prop26")
    s = draw_samples(SuiteConfig(samples=SUITE_SAMPLES, seed=SEED), index)
    t = s.b / s.a
    above, below = int(np.sum(t > 1)), int(np.sum(t < 1))
    standard = yg.log_mean_difference_bounds(t[t > 1], s.nu[t > 1])
    reversed_ = yg.log_mean_difference_bounds(t[t < 1], s.nu[t < 1])
    ok = (above > 0 and below > 0
          and all(bp.direction is yg.Direction.STANDARD for bp in standard)
          and all(bp.direction is yg.Direction.REVERSED for bp in reversed_))
    acceptance(4, "prop26 direction flip", ok, f"t>1: {above} t<1: {below}")
    assert ok


def test_criterion_9_determinism(acceptance, suite_runs):
    first, second = suite_runs
    ok = bool(first["bytes"]) and first["bytes"] == second["bytes"]
    acceptance(9, "byte-identical summaries", ok, f"{len(first['bytes'])} bytes")
    assert ok


# ---------------------------------------------------------------------------
# 5. self-improving sequence


def test_criterion_5_sequence(acceptance):
    rng = np.random.default_rng(5)
    t = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), 1000))
    nu = rng.uniform(0.01, 0.99, 1000)
    bad_monotone = ulp_level = 0
    worst_rise = worst_limit = 0.0
    for ti, w in zip(t, nu):
        rep = ch.self_improving_sequence(float(ti), float(w), 30)
        g = np.array(rep.g_values)
        rise = float(np.max(np.diff(g) / g[1:]))
        # once g_m has converged to t^nu, successive terms differ by rounding only
        ulp_level += rise > 0.0
        bad_monotone += rise > 1e-12
        worst_rise = max(worst_rise, rise)
        worst_limit = max(worst_limit, abs(g[-1] - ti ** w) / ti ** w)
    ok = bad_monotone == 0 and worst_limit < 1e-7
    acceptance(5, "sequence", ok,
               f"non-monotone={bad_monotone} (rounding-level rises {ulp_level}, largest {worst_rise:.1e}) "
               f"worst |g30-t^nu|/t^nu={worst_limit:.1e}")
    assert ok


# ---------------------------------------------------------------------------
# 6. limit branch of the log-mean minus geometric-mean bounds


def test_criterion_6_limit_branch(acceptance):
    details = []
    ok = True
    for a, b in ((1.0, 4.0), (0.3, 7.0), (5.0, 2.0)):
        limit = ch.log_mean_geometric_gap_bounds(a, b, 0.5)
        for sign in (1.0, -1.0):
            gaps, dist = [], {}
            for k in range(2, 6):
                bp = ch.log_mean_geometric_gap_bounds(a, b, 0.5 + sign * 10.0 ** -k)
                gaps.append(bp.upper - bp.lower)
                dist[k] = max(abs(bp.lower - limit.lower), abs(bp.upper - limit.upper))
            shrink = all(x > y for x, y in zip(gaps, gaps[1:]))
            ok &= shrink and dist[4] <= 1e-3
            details.append(f"({a:g},{b:g},{'+' if sign > 0 else '-'}) d4={dist[4]:.1e}")
    acceptance(6, "limit branch", ok, " ".join(details))
    assert ok


# ---------------------------------------------------------------------------
# 7. midpoint specialisation


def test_criterion_7_midpoint_specialisation(acceptance):
    rng = np.random.default_rng(7)
    worst = 0.0
    ok = True
    for name, lo, hi in (("exp", -5.0, 5.0), ("neglog", 1e-3, 1e3)):
        f = BUILTINS[name]
        if name == "exp":
            a, b = rng.uniform(lo, hi, 100), rng.uniform(lo, hi, 100)
        else:
            a = np.exp(rng.uniform(math.log(lo), math.log(hi), 100))
            b = np.exp(rng.uniform(math.log(lo), math.log(hi), 100))
        bp = hh.hh_upper_gap_bounds(f, a, b, 0.5)
        avg = hh.hh_functional(f, a, b, 0.5).value
        fm, fbar = f(0.5 * (a + b)), 0.5 * (f(a) + f(b))
        scale = np.maximum(1.0, np.maximum(np.abs(f(a)), np.abs(f(b))))
        # the bracket at 1/2 is the classical midpoint form
        worst = max(worst, float(np.max(np.abs((fbar - bp.upper) - (1.5 * fm - 0.5 * fbar)) / scale)),
                    float(np.max(np.abs((fbar - bp.lower) - (0.5 * fm + 0.5 * fbar)) / scale)))
        ok &= bool(np.all(1.5 * fm - 0.5 * fbar <= avg + 1e-9 * scale))
        ok &= bool(np.all(avg <= 0.5 * fm + 0.5 * fbar + 1e-9 * scale))
    ok &= worst <= 1e-9
    acceptance(7, "midpoint specialisation", ok, f"form residual={worst:.1e}")
    assert ok


# ---------------------------------------------------------------------------
# 8. function parser


def _fuzz_inputs(n, seed):
    """Half token soup, half single-character mutations of corpus entries."""
    rng = np.random.default_rng(seed)
    tokens = ["x", "1", "2.5", "1e3", ".5", "+", "-", "*", "/", "^", "(", ")", "exp(", "log(",
              "sqrt(", "abs(", "sin(", "y", " ", "e", ",", "$", "9e999"]
    chars = "x0123456789.e+-*/^() "
    for i in range(n):
        if i % 2 == 0:
            k = int(rng.integers(0, 25))
            yield "".join(tokens[j] for j in rng.integers(0, len(tokens), k))
            continue
        src = list(CORPUS[int(rng.integers(0, len(CORPUS)))])
        for _ in range(int(rng.integers(1, 4))):
            pos = int(rng.integers(0, len(src) + 1))
            op = int(rng.integers(0, 3))
            ch_ = chars[int(rng.integers(0, len(chars)))]
            if op == 0:
                src.insert(pos, ch_)
            elif src and op == 1:
                del src[min(pos, len(src) - 1)]
            elif src:
                src[min(pos, len(src) - 1)] = ch_
        yield "".join(src)


def test_criterion_8_parser(acceptance):
    xs = np.linspace(-3.0, 3.0, 100)
    round_trip_bad = []
    for src in CORPUS:
        ast = parse_fnspec(src)
        again = parse_fnspec(to_text(ast))
        for x in xs:
            try:
                want = eval_fnspec(ast, x)
            except HHMeansError:
                try:
                    eval_fnspec(again, x)
                    round_trip_bad.append(src)
                except HHMeansError:
                    pass
                continue
            got = eval_fnspec(again, x)
            if abs(got - want) > 1e-12 * max(1.0, abs(want)):
                round_trip_bad.append(src)
        if again != ast:
            round_trip_bad.append(src)

    crashes = []
    slowest = 0.0
    parsed = 0
    for src in _fuzz_inputs(10_000, 8):
        clock = time.perf_counter()
        try:
            ast = parse_fnspec(src)
            parsed += 1
            eval_fnspec(ast, np.array([-1.0, 0.0, 0.5, 2.0]))
        except HHMeansError:
            pass
        except Exception as exc:  # anything else is a crash
            crashes.append((src, repr(exc)))
        slowest = max(slowest, time.perf_counter() - clock)

    probe = (convexity_probe(parse_fnspec("exp(x)"), Interval(-5, 5), 10_000, 0).passed
             and convexity_probe(parse_fnspec("-log(x)"), Interval(1e-3, 1e3), 10_000, 0).passed
             and not convexity_probe(parse_fnspec("-(x^2)"), Interval(-5, 5), 10_000, 0).passed)
    ok = len(CORPUS) == 50 and not round_trip_bad and not crashes and slowest < 1.0 and probe
    acceptance(8, "parser", ok,
               f"corpus bad={len(set(round_trip_bad))} fuzz crashes={len(crashes)} parsed={parsed} "
               f"slowest={slowest * 1e3:.1f}ms probe={'ok' if probe else 'bad'}")
    assert ok, crashes[:5]
