"""Command-line front end: ``hhmeans {mean,verify,scan,report}``.

Exit codes: 0 all checks pass, 1 a violation was found, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import chains as ch
from . import means as mn
from .errors import ConfigError, DomainError, HHMeansError
from .hh import averaged_max_weight, averaged_min_weight
from .suite import (
    CHAIN_IDS,
    RECORD_KEYS,
    Samples,
    SuiteConfig,
    chain_spec,
    prepare_function,
    run_suite,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


# ---------------------------------------------------------------------------
# formatting helpers


def _num(v) -> str:
    """17 significant digits, enough to round-trip a double."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_rows(rows: list[dict], keys, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(rows, out, indent=2, allow_nan=True)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(keys)
    for row in rows:
        writer.writerow([_num(row.get(k, "")) for k in keys])


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _range(text: str, name: str) -> tuple[float, float]:
    parts = text.replace(":", ",").split(",")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--{name} expects 'lo,hi', got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
        raise ConfigError(f"--{name} must be a finite interval with lo <= hi")
    return lo, hi


def _grid(text: str, name: str) -> np.ndarray:
    """'lo:hi:n' (n evenly spaced points, ends included), 'v1,v2,...' or 'v'."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            count = int(n)
            if count < 0:
                raise ValueError
            values = np.linspace(float(lo), float(hi), count)
        elif text == "":
            values = np.array([])
        else:
            values = np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError:
        raise ConfigError(f"--{name}: cannot parse grid {text!r}") from None
    if values.size == 0:
        raise ConfigError(f"--{name}: empty grid")
    if not np.all(np.isfinite(values)):
        raise ConfigError(f"--{name}: grid values must be finite")
    return values


# ---------------------------------------------------------------------------
# mean


def _maybe(fn, *args):
    try:
        return float(fn(*args))
    except DomainError:
        return None


def mean_record(a: float, b: float, nu: float) -> dict:
    """All means and constants at (a, b, nu); undefined entries are None.

    On the diagonal the identric-type means and the correction factor take
    their limit values (a and 1).
    """
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError("a and b must be finite and positive")
    if not 0.0 <= nu <= 1.0:
        raise DomainError("nu must lie in [0, 1]")
    interior = 0.0 < nu < 1.0
    diagonal = a == b
    rec = {
        "a": a,
        "b": b,
        "nu": nu,
        "arithmetic": mn.weighted_arithmetic(a, b, nu),
        "geometric": mn.weighted_geometric(a, b, nu),
        "logarithmic": mn.weighted_logarithmic(a, b, nu),
        "log_mean": mn.logarithmic_mean(a, b),
        "identric": None,
        "kantorovich": mn.kantorovich(a, b),
        "avg_min_weight": None,
        "avg_max_weight": None,
        "amgm_correction": None,
    }
    if interior:
        rec["identric"] = a if diagonal else _maybe(mn.weighted_identric, a, b, nu)
        if rec["identric"] is None:  # numerically diagonal
            rec["identric"] = a
        rec["avg_min_weight"] = averaged_min_weight(nu)
        rec["avg_max_weight"] = averaged_max_weight(nu)
        rec["amgm_correction"] = 1.0 if diagonal else mn.am_gm_correction(a, b, nu)
        ev = ch.five_term_evaluation(a, b, nu)
        for label, value in zip(ev.labels, ev.values[:, 0]):
            rec[f"chain:{label}"] = float(value)
    return {k: (None if v is None else float(v)) for k, v in rec.items()}


def cmd_mean(args) -> int:
    rec = mean_record(args.a, args.b, args.nu)
    if args.format == "json":
        _emit(json.dumps(rec, indent=2) + "\n", None)
    else:
        width = max(len(k) for k in rec)
        lines = [f"{k:<{width}}  {'undefined' if v is None else _num(v)}" for k, v in rec.items()]
        _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _seed(args) -> int:
    env = os.environ.get("HHMEANS_SEED")
    if env is not None and env.strip() != "":
        try:
            return int(env, 0)
        except ValueError:
            raise ConfigError(f"HHMEANS_SEED must be an integer, got {env!r}") from None
    return args.seed


def config_from_args(args) -> SuiteConfig:
    return SuiteConfig(
        samples=args.samples,
        seed=_seed(args),
        tol=args.tol,
        a_range=_range(args.a_range, "a-range"),
        b_range=_range(args.b_range, "b-range"),
        nu_range=_range(args.nu_range, "nu-range"),
        fn=args.fn,
        x_range=_range(args.x_range, "x-range"),
        m_max=args.m_max,
        chunk=args.chunk,
    )


def cmd_verify(args) -> int:
    cfg = config_from_args(args)
    if args.chain != "all":
        chain_spec(args.chain)
    summaries = run_suite(args.chain, cfg)
    keys = RECORD_KEYS + (("wall_time",) if args.timings else ())
    rows = [s.to_record(args.timings) for s in summaries]
    buf = io.StringIO()
    _write_rows(rows, keys, args.format, buf)
    _emit(buf.getvalue(), args.output)
    for s in summaries:
        status = "PASS" if s.passed else "FAIL"
        print(
            f"{status} {s.chain_id:<16} violations={s.violations}/{s.samples} "
            f"min_margin={s.min_margin:.3e} ({s.wall_time:.2f}s)",
            file=sys.stderr,
        )
    return EXIT_OK if all(s.passed for s in summaries) else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# scan


def cmd_scan(args) -> int:
    a_vals = _grid(args.a, "a")
    b_vals = _grid(args.b, "b")
    nu_vals = _grid(args.nu, "nu")
    _, spec = chain_spec(args.chain)
    A, B, NU = (g.ravel() for g in np.meshgrid(a_vals, b_vals, nu_vals, indexing="ij"))
    if np.any(A <= 0) or np.any(B <= 0):
        raise ConfigError("scan grids for a and b must be positive")
    if np.any((NU <= 0) | (NU >= 1)):
        raise ConfigError("scan grid for nu must lie inside (0, 1)")
    cfg = SuiteConfig(samples=A.size, tol=args.tol, m_max=args.m_max)
    user = None
    if spec.uses_fn:
        if args.chain == "thm23":
            xs = B / A
            points = np.concatenate([xs, [1.0]])
        else:
            xs = A
            points = np.concatenate([A, B])
        lo, hi = float(points.min()), float(points.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        user = prepare_function(args.fn, (lo, hi))
        samples = Samples(A, B, NU, xs, B)
    else:
        samples = Samples(A, B, NU)
    ev, _ = spec.build(samples, cfg, user, 0)
    margins = ev.margins()
    rows = []
    for i in range(A.size):
        row = {"a": A[i], "b": B[i], "nu": NU[i]}
        row.update({f"term:{lab}": float(v) for lab, v in zip(ev.labels, ev.values[:, i])})
        row.update({f"slack:{e}": float(v) for e, v in zip(ev.edges, ev.slacks[:, i])})
        worst = float(margins[:, i].min())
        row["min_margin"] = worst
        row["violated"] = bool(worst < -args.tol)
        rows.append(row)
    keys = list(rows[0].keys())
    buf = io.StringIO()
    _write_rows(rows, keys, args.format, buf)
    _emit(buf.getvalue(), args.output)
    return EXIT_VIOLATION if any(r["violated"] for r in rows) and args.strict else EXIT_OK


# ---------------------------------------------------------------------------
# report


def _read_summaries(path: str) -> list[dict]:
    if not os.path.exists(path):
        raise ConfigError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    try:
        if stripped.startswith("["):
            rows = json.loads(text)
        else:
            rows = list(csv.DictReader(io.StringIO(text)))
    except (ValueError, csv.Error) as exc:
        raise ConfigError(f"{path}: not a summary file ({exc})") from None
    if not isinstance(rows, list) or not rows or not all(isinstance(r, dict) and "chain" in r for r in rows):
        raise ConfigError(f"{path}: not a summary file")
    return rows


def _as_int(v) -> int:
    return int(float(v))


def cmd_report(args) -> int:
    if not args.files:
        raise ConfigError("report needs at least one summary file")
    table: dict[str, dict] = {}
    for path in args.files:
        for row in _read_summaries(path):
            entry = table.setdefault(
                row["chain"], {"title": row.get("title", ""), "samples": 0, "violations": 0,
                               "min_margin": math.inf}
            )
            entry["samples"] += _as_int(row.get("samples", 0))
            entry["violations"] += _as_int(row.get("violations", 0))
            entry["min_margin"] = min(entry["min_margin"], float(row.get("min_margin", math.inf)))
    order = [c for c in CHAIN_IDS if c in table] + sorted(c for c in table if c not in CHAIN_IDS)
    lines = [f"{'chain':<16} {'status':<6} {'violations':>10} {'samples':>9} {'min_margin':>11}  title"]
    failed = False
    for cid in order:
        e = table[cid]
        bad = e["violations"] > 0
        failed |= bad
        flag = "FAIL" if bad else "PASS"
        lines.append(
            f"{cid:<16} {flag:<6} {e['violations']:>10} {e['samples']:>9} "
            f"{e['min_margin']:>11.3e}  {e['title']}" + ("  <--" if bad else "")
        )
    passed = sum(1 for c in order if table[c]["violations"] == 0)
    lines.append(f"{passed}/{len(order)} chains pass")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_VIOLATION if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhmeans",
        description="Weighted means, Hermite-Hadamard refinements and their numerical verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", help="print every mean and constant at (a, b, nu)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--nu", type=float, required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("verify", help="run seeded randomised checks of one chain or all")
    p.add_argument("--chain", default="all", help=f"one of {', '.join(CHAIN_IDS)} or all")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="overridden by HHMEANS_SEED")
    p.add_argument("--tol", type=float, default=ch.DEFAULT_TOL)
    p.add_argument("--a-range", default="1e-3,1e3")
    p.add_argument("--b-range", default="1e-3,1e3")
    p.add_argument("--nu-range", default="0.01,0.99")
    p.add_argument("--fn", default=None, help="convex function of x for quadrature chains")
    p.add_argument("--x-range", default="-5,5", help="sampling interval for --fn")
    p.add_argument("--m-max", type=int, default=30)
    p.add_argument("--chunk", type=int, default=4096, help=argparse.SUPPRESS)
    p.add_argument("--output", default=None, help="file to write (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timings", action="store_true", help="include wall_time in the output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="evaluate one chain on a grid")
    p.add_argument("--chain", required=True)
    p.add_argument("--a", default="1", help="grid: 'lo:hi:n', 'v1,v2,...' or 'v'")
    p.add_argument("--b", default="4")
    p.add_argument("--nu", default="0.5")
    p.add_argument("--fn", default="exp(x)", help="function for quadrature chains")
    p.add_argument("--tol", type=float, default=ch.DEFAULT_TOL)
    p.add_argument("--m-max", type=int, default=30)
    p.add_argument("--strict", action="store_true", help="exit 1 if any grid point violates")
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("report", help="aggregate verify outputs into a pass/fail table")
    p.add_argument("files", nargs="*")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, HHMeansError, OSError) as exc:
        print(f"hhmeans {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
