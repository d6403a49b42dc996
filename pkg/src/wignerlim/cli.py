"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure, 4 strip violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import checks, epstein, lattice, quadform, wigner
from .errors import (
    BudgetExceeded,
    CrossCheckFailure,
    IllConditioned,
    NoConvergence,
    NotPositiveDefinite,
    PoleError,
    StripViolation,
    TableTooSmall,
)
from .quadform import QuadForm, SurfaceRule

DEFAULTS_VERSION = 1
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_STRIP = 0, 1, 2, 3, 4
_NUMERIC_ERRORS = (NoConvergence, PoleError, CrossCheckFailure, BudgetExceeded, IllConditioned, TableTooSmall)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Formatting


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# Inputs


def _load_form(args) -> QuadForm:
    if getattr(args, "form", None):
        src = args.form
        try:
            text = src if src.lstrip().startswith("{") else open(src, encoding="utf-8").read()
            return QuadForm.from_json(json.loads(text))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read form {src!r}: {exc}") from exc
    if getattr(args, "cubic", False) or getattr(args, "dim", None):
        if not args.dim or args.dim < 1:
            raise ConfigError("--cubic needs -d/--dim >= 1")
        return quadform.identity_form(args.dim)
    raise ConfigError("give --form or --cubic -d D")


def _s_values(args) -> list[complex]:
    im = args.im or 0.0
    if args.re is not None:
        return [complex(args.re, im)]
    if args.re_min is None or args.re_max is None:
        raise ConfigError("give --re or --re-min/--re-max")
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    if args.steps == 1:
        return [complex(args.re_min, im)]
    return [complex(x, im) for x in np.linspace(args.re_min, args.re_max, args.steps)]


def _int_list(text: str | None) -> list[int] | None:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


def _float_list(text: str | None) -> list[float] | None:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _rule(args) -> SurfaceRule:
    if args.tol <= 0:
        raise ConfigError("--tol must be positive")
    return SurfaceRule(order=args.order, tol=args.tol)


# ---------------------------------------------------------------------------
# Commands


def _closed_form_error(d: int, s: complex, value: complex) -> float:
    # zeta/beta are accurate to ~1e-12 relative; d = 24 adds the L_Delta tail
    err = 1e-12 * abs(value)
    if d == 24:
        from .specfun import l_delta

        pref = abs((128.0 / 691.0) * (259.0 + 745.0 * 2.0 ** (4.0 - s.real) + 259.0 * 2.0 ** (12.0 - 2.0 * s.real)))
        err += pref * l_delta(s, 200).abs_err_estimate
    return err


def cmd_zeta(args) -> int:
    method = args.method
    # the boundary point is fixed by d
    svals = [None] if method == "boundary" else _s_values(args)
    rows = []
    if method in ("closed", "theta", "bessel", "boundary"):
        if args.form:
            raise ConfigError(f"--method {method} is for cubic forms (--cubic -d D)")
        d = args.dim
        if not d:
            raise ConfigError("--method needs -d/--dim")
    else:
        Q = _load_form(args)
    for s in svals:
        if method == "closed":
            v = epstein.z_closed_form(d, s)
            e = _closed_form_error(d, s, v)
        elif method == "theta":
            r = epstein.z_cubic_theta(d, s)
            v, e = r.value, r.abs_err_estimate
        elif method == "bessel":
            r = epstein.z_cubic_bessel(d, s)
            v, e = r.value, r.abs_err_estimate
        elif method == "boundary":
            s = complex(d / 2 - 1)
            r = epstein.z_boundary_value(d)
            v, e = r.value, r.abs_err_estimate
        else:
            r = epstein.z_epstein(Q, s)
            v, e = r.value, r.abs_err_estimate
        rows.append((s.real, s.imag, complex(v).real, complex(v).imag, float(e)))
    if args.format == "json":
        _emit(args, _json_text([dict(zip(("re_s", "im_s", "re_Z", "im_Z", "abs_err"), r)) for r in rows]))
    else:
        _emit(args, _csv_text(("re_s", "im_s", "re_Z", "im_Z", "abs_err"), rows))
    return EXIT_OK


def cmd_sigma(args) -> int:
    Q = _load_form(args)
    re = args.re if args.re is not None else args.s
    if re is None:
        raise ConfigError("give --re (or -s)")
    s = complex(re, args.im or 0.0)
    rule = _rule(args)
    if args.scheme == "cube":
        N_list = _int_list(args.N_list)
        if args.format == "csv":
            rows = wigner.sigma_sweep(Q, N_list or wigner.default_N_list(Q), s, rule)
            _emit(args, _csv_text(("N", "re_sigma", "im_sigma", "abs_err"), [(N, v.real, v.imag, e) for N, v, e in rows]))
            return EXIT_OK
        est = wigner.sigma_limit(Q, s, rule, N_list)
    else:
        if args.p is None:
            raise ConfigError("--scheme pball needs --p")
        if args.format == "csv":
            raise ConfigError("--scheme pball emits JSON only")
        est = wigner.sigma_hat_limit(Q, args.p, s, rule, N_max=args.N_max, lam=args.lam)
    out = {
        "defaults_version": DEFAULTS_VERSION,
        "dim": Q.dim,
        "s": s,
        "scheme": args.scheme,
        "value": est.value,
        "abs_err_estimate": est.abs_err_estimate,
        "model": est.model,
        "exponents": [complex(e) for e in est.exponents],
        "N_min": est.N_sequence[0],
        "N_max": est.N_sequence[-1],
        "N_count": len(est.N_sequence),
        "notes": est.notes,
    }
    if args.scheme == "cube":
        out["N_sequence"] = list(est.N_sequence)
    else:
        out["p"] = args.p
    _emit(args, _json_text(out))
    return EXIT_OK


def cmd_jump(args) -> int:
    Q = _load_form(args)
    rule = _rule(args)
    kw = {}
    if args.eps_list:
        kw["eps_list"] = _float_list(args.eps_list)
    rep = wigner.jump_verify(Q, rule, _int_list(args.N_list), **kw)
    out = rep.to_json()
    J = rep.jump
    tol = max(rep.jump_err, 1e-12)
    out["sign"] = "positive" if J > tol else ("negative" if J < -tol else "zero")
    out["defaults_version"] = DEFAULTS_VERSION
    out["form"] = Q.to_json()
    _emit(args, _json_text(out))
    return EXIT_OK


def cmd_count(args) -> int:
    d, p = args.dim, args.p
    if not d or d < 1:
        raise ConfigError("count needs -d/--dim >= 1")
    if p < 1:
        raise ConfigError("--p must be >= 1")
    N_max = args.N_max
    radii = _float_list(args.radii) or [float(n) for n in range(1, int(N_max) + 1)]
    counts = lattice.pball_counts(d, p, radii)
    rows = []
    for N, c in zip(radii, counts):
        vol = lattice.pball_volume(d, p, N)
        err = int(c) - vol - 1
        rows.append((N, int(c), vol, err, 8 * 2.0**-52 * max(vol, 1.0)))
    lam = lattice.lambda_estimate(d, p, int(N_max)) if N_max >= 16 else math.nan
    header = ("N", "count", "volume", "error", "abs_err")
    if args.format == "json":
        _emit(args, _json_text({"dim": d, "p": p, "lambda_hat": lam, "rows": [dict(zip(header, r)) for r in rows]}))
    else:
        _emit(args, _csv_text(header, rows))
        print(f"lambda_hat={fmt(lam)}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = []
    for item in args.only or []:
        names.extend(x.strip() for x in item.split(",") if x.strip())
    if args.list:
        sys.stdout.write("\n".join(checks.CHECKS) + "\n")
        return EXIT_OK
    try:
        results = checks.run_checks(names or None, trials=args.trials, seed=args.seed)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from exc
    failures = [r for r in results if not r.passed]
    summary = {
        "testsuite": "wignerlim-battery",
        "tests": len(results),
        "failures": len(failures),
        "testcases": [r.to_json(args.timings) for r in results],
    }
    _emit(args, _json_text(summary))
    for r in failures:
        print(f"FAIL {r.name}: value={fmt(r.value)} tolerance={fmt(r.tolerance)} {r.detail}", file=sys.stderr)
    return EXIT_FAILED if failures else EXIT_OK


def cmd_jump_scan(args) -> int:
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    rng = np.random.default_rng(args.seed)
    rule = _rule(args)
    rows = []
    for k in range(args.trials):
        Q = checks.random_form(args.dim, rng, cond_max=args.cond_max)
        r = quadform.v_q_prime_boundary(Q, rule)
        rows.append((k, r.value.real, r.abs_err_estimate, json.dumps(Q.matrix.tolist())))
    rows.sort(key=lambda r: abs(r[1]))
    _emit(args, _csv_text(("trial", "vq_prime", "abs_err", "matrix"), rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option defaults (flags override it)")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=None)


def _add_form(p: argparse.ArgumentParser) -> None:
    p.add_argument("--form", help='form as a JSON file or inline {"dim": d, "matrix": [[...]]}')
    p.add_argument("--cubic", action="store_true", help="use the identity form of dimension -d")
    p.add_argument("-d", "--dim", type=int)


def _add_rule(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", type=int, default=12, help="initial Gauss-Legendre order per face axis")
    p.add_argument("--tol", type=float, default=1e-10, help="surface cubature tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerlim", description="Epstein zeta functions and Wigner lattice limits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeta", help="evaluate Z_Q(s) on a point or a real grid")
    _add_common(p)
    _add_form(p)
    p.add_argument("--method", choices=("epstein", "theta", "bessel", "closed", "boundary"), default="epstein")
    p.add_argument("--re", type=float)
    p.add_argument("--im", type=float, default=0.0)
    p.add_argument("--re-min", type=float)
    p.add_argument("--re-max", type=float)
    p.add_argument("--steps", type=int, default=1)
    p.set_defaults(func=cmd_zeta, format="csv")

    p = sub.add_parser("sigma", help="Wigner limit sigma(s) over cubes or p-balls")
    _add_common(p)
    _add_form(p)
    _add_rule(p)
    p.add_argument("--re", type=float)
    p.add_argument("-s", type=float, default=None, help="real part of s (alias of --re)")
    p.add_argument("--im", type=float, default=0.0)
    p.add_argument("--scheme", choices=("cube", "pball"), default="cube")
    p.add_argument("--p", type=float)
    p.add_argument("--N-list", dest="N_list", help="comma-separated cube half-widths")
    p.add_argument("--N-max", dest="N_max", type=float, default=400.0, help="largest p-ball radius")
    p.add_argument("--lambda", dest="lam", type=float, help="counting exponent (default from the built-in table)")
    p.set_defaults(func=cmd_sigma, format="json")

    p = sub.add_parser("jump", help="both sides of the boundary jump relation")
    _add_common(p)
    _add_form(p)
    _add_rule(p)
    p.add_argument("--N-list", dest="N_list")
    p.add_argument("--eps-list", dest="eps_list")
    p.set_defaults(func=cmd_jump, format="json")

    p = sub.add_parser("count", help="p-ball lattice counts and the fitted exponent")
    _add_common(p)
    p.add_argument("-d", "--dim", type=int, required=False)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--N-max", dest="N_max", type=float, default=256.0)
    p.add_argument("--radii", help="comma-separated radii (default 1..N_max)")
    p.set_defaults(func=cmd_count, format="csv")

    p = sub.add_parser("verify", help="run the identity battery")
    _add_common(p)
    p.add_argument("--only", action="append", help="check name(s), comma-separated; repeatable")
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=20240601)
    p.add_argument("--list", action="store_true", help="list check names and exit")
    p.add_argument("--timings", action="store_true", help="include wall times (output is then not reproducible)")
    p.set_defaults(func=cmd_verify, format="json")

    p = sub.add_parser("jump-scan", help="random forms ranked by |V_Q'(d/2-1)|")
    _add_common(p)
    _add_rule(p)
    p.add_argument("-d", "--dim", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--cond-max", dest="cond_max", type=float, default=20.0)
    p.set_defaults(func=cmd_jump_scan, format="csv")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            conf = json.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    if not isinstance(conf, dict):
        raise ConfigError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    conf = {k.replace("-", "_"): v for k, v in conf.items()}
    unknown = sorted(set(conf) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if isinstance(conf.get("form"), dict):
        conf["form"] = json.dumps(conf["form"])
    subparser.set_defaults(**conf)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if os.environ.get("WIGNER_THREADS") not in (None, "") and not os.environ["WIGNER_THREADS"].isdigit():
            raise ConfigError("WIGNER_THREADS must be a non-negative integer")
        return args.func(args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_CONFIG
    except (ConfigError, NotPositiveDefinite) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StripViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRIP
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
