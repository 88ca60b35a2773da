"""Command-line front end."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import arith, modular, series, special, verify
from .config import ENV_MEMORY_BUDGET, ENV_WORKERS, RunConfig, parse_bytes
from .errors import ContractViolation, PoleError, RegionError, ShiftConvError
from .sums import Mode, PartialSumSeries, extract_phi, fit_main_terms, log_grid, partial_sums

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_EPILOG = f"""\
environment:
  {ENV_MEMORY_BUDGET}   memory budget in bytes (suffixes k, m, g accepted)
  {ENV_WORKERS}         worker count for lattice sums
Precedence: command-line flags > --config file > environment > built-in defaults.

exit codes: 0 success, 1 verification failure (failing identity on stderr), 2 usage error
"""


class UsageError(Exception):
    pass


# config errors surface as ValueError; domain violations are the caller's input
_BAD_INPUT = (UsageError, ContractViolation, RegionError, PoleError, OSError)


def fmt(x) -> str:
    """17 significant digits; integers print plainly."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _cjson(z) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def _dump(obj) -> str:
    # json writes floats as shortest round-trip repr (at most 17 significant digits)
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, complex):
        return _cjson(o)
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _write(args, text: str):
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_sieve(args, cfg: RunConfig) -> int:
    kind = args.kind
    if kind == "r2":
        values = arith.sieve_r2(args.max, memory_budget=cfg.memory_budget, workers=cfg.workers).values
    elif kind == "d":
        values = arith.sieve_divisor_count(args.max, memory_budget=cfg.memory_budget).values
    else:
        values = arith.sieve_sigma(args.max, args.nu, memory_budget=cfg.memory_budget).values
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if args.header:
        writer.writerow(["n", "value"] if values.dtype.kind in "iu" else ["n", "re", "im"])
    for n, v in enumerate(values.tolist()):
        if isinstance(v, complex):
            writer.writerow([n, fmt(v.real), fmt(v.imag)])
        else:
            writer.writerow([n, fmt(v)])
    _write(args, out.getvalue())
    return EXIT_OK


def cmd_sums_run(args, cfg: RunConfig) -> int:
    start = args.start if args.start is not None else cfg.grid_start
    stop = args.stop if args.stop is not None else cfg.grid_stop
    per = args.per_decade if args.per_decade is not None else cfg.grid_per_decade
    grid = log_grid(start, stop, per)
    mode = {"sharp": Mode.SHARP, "plus": Mode.SMOOTHED_PLUS, "minus": Mode.SMOOTHED_MINUS}[args.mode]
    ser = partial_sums(grid, args.w, args.h, mode, args.y)
    _write(args, ser.to_csv())
    return EXIT_OK


def _read_series(args) -> PartialSumSeries:
    try:
        if args.input in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(args.input, newline="") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}") from exc
    try:
        return PartialSumSeries.from_csv(text, h=args.h, w=args.w)
    except ContractViolation as exc:
        raise UsageError(str(exc)) from exc


def cmd_sums_fit(args, cfg: RunConfig) -> int:
    ser = _read_series(args)
    report = fit_main_terms(ser, model=args.model)
    payload = report.to_dict()
    if args.phi:
        payload["phi"] = {k: v for k, v in vars(extract_phi(report)).items() if v is not None}
    _write(args, _dump(payload))
    return EXIT_OK


def cmd_series_compare(args, cfg: RunConfig) -> int:
    truncated, tail = series.d0_truncated(args.s, args.w, args.N)
    closed, err = series.d0_closed_form(args.s, args.w, with_error=True)
    diff = abs(truncated - closed)
    ok = diff <= tail + err
    _write(args, _dump({
        "s": _cjson(args.s), "w": _cjson(args.w), "N": args.N,
        "closed_form": _cjson(closed), "truncated": _cjson(truncated),
        "difference": diff, "tail_bound": tail, "closed_form_error": err, "pass": ok,
    }))
    if not ok:
        print("FAIL series.d0_closed_form", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_modular_verify(args, cfg: RunConfig) -> int:
    rep = modular.verify_decomposition(args.z, args.w, args.radius, workers=cfg.workers)
    ok = max(rep.coset_residual, rep.fourier_residual) <= args.tolerance
    _write(args, _dump({
        "z": _cjson(rep.z), "w": _cjson(rep.w), "radius": rep.radius,
        "coset_residual": rep.coset_residual, "fourier_residual": rep.fourier_residual,
        "tail_bound": rep.tail_bound, "tolerance": args.tolerance, "pass": ok,
    }))
    if not ok:
        print("FAIL modular.decomposition_residual", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


_SPECIAL = {
    "gamma": (special.gamma_c, 1),
    "digamma": (special.digamma, 1),
    "zeta": (special.zeta_c, 1),
    "zeta_star": (special.zeta_star, 1),
    "l_chi4": (special.l_chi4, 1),
    "l_chi4_star": (special.l_chi4_star, 1),
    "bessel_k": (special.bessel_k, 2),
    "bessel_k_imag": (special.bessel_k_imag_order, 2),
    "kuznetsov": (special.kuznetsov_geometric_integral, 2),
    "whittaker_w": (special.whittaker_w, 3),
}


def cmd_special_eval(args, cfg: RunConfig) -> int:
    fn, arity = _SPECIAL[args.function]
    if len(args.args) != arity:
        raise UsageError(f"{args.function} takes {arity} argument(s), got {len(args.args)}")
    params = list(args.args)
    if args.function in ("bessel_k", "whittaker_w"):
        params[-1] = params[-1].real
    if args.function in ("bessel_k_imag", "kuznetsov"):
        params[0] = params[0].real
        if args.function == "kuznetsov":
            params[1] = params[1].real
    if args.function == "whittaker_w":
        params[0] = params[0].real
    val = fn(*params)
    v = complex(val.value)
    _write(args, _dump({
        "function": args.function,
        "args": [_cjson(a) for a in args.args],
        "value": _cjson(v),
        "abs_error_estimate": float(val.abs_error_estimate),
        "method": val.method.value,
    }))
    return EXIT_OK


def cmd_verify_all(args, cfg: RunConfig) -> int:
    only = (lambda ident: ident.startswith(args.only)) if args.only else None
    records = verify.run_all(args.level, only=only)
    summary = verify.summarize(records, args.level)
    _write(args, _dump({"identities": [r.to_dict() for r in records], "summary": summary}))
    for r in records:
        if not r.passed:
            print(f"FAIL {r.identity_id}: residual {fmt(r.residual)} > tolerance {fmt(r.tolerance)}", file=sys.stderr)
    return EXIT_OK if summary["failed"] == 0 else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'key = value' config file")
    common.add_argument("--workers", type=int, help="worker count (overrides config and environment)")
    common.add_argument("--memory-budget", help="memory budget in bytes, e.g. 2g")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")

    p = argparse.ArgumentParser(
        prog="shiftconv",
        description="Numerics for shifted convolution sums of r2 and divisor functions.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sieve", parents=[common], help="emit an arithmetic table as CSV")
    s.add_argument("--kind", choices=["r2", "d", "sigma"], required=True)
    s.add_argument("--max", type=int, required=True)
    s.add_argument("--nu", type=parse_complex, default=0j, help="order for --kind sigma")
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=cmd_sieve)

    sums = sub.add_parser("sums", help="partial sums and main-term fits").add_subparsers(dest="action", required=True)
    r = sums.add_parser("run", parents=[common], help="partial sums on a log grid, CSV X,re,im")
    r.add_argument("--h", type=int, default=1)
    r.add_argument("--w", type=parse_complex, default=0.5 + 0j)
    r.add_argument("--mode", choices=["sharp", "plus", "minus"], default="sharp")
    r.add_argument("--y", type=float, help="smoothing parameter for plus/minus")
    r.add_argument("--start", type=float)
    r.add_argument("--stop", type=float)
    r.add_argument("--per-decade", type=int)
    r.set_defaults(func=cmd_sums_run)
    f = sums.add_parser("fit", parents=[common], help="fit main terms to a CSV from 'sums run'")
    f.add_argument("--input", "-i", default="-")
    f.add_argument("--model", choices=["loglinear", "twopower"])
    f.add_argument("--h", type=int, default=1)
    f.add_argument("--w", type=parse_complex, default=0.5 + 0j)
    f.add_argument("--phi", action="store_true", help="include extracted phi_h values")
    f.set_defaults(func=cmd_sums_fit)

    ser = sub.add_parser("series", help="Dirichlet series").add_subparsers(dest="action", required=True)
    c = ser.add_parser("compare", parents=[common], help="D_0 closed form against the truncated series")
    c.add_argument("--s", type=parse_complex, required=True)
    c.add_argument("--w", type=parse_complex, required=True)
    c.add_argument("--N", type=int, default=10**6)
    c.set_defaults(func=cmd_series_compare)

    mod = sub.add_parser("modular", help="Eisenstein series").add_subparsers(dest="action", required=True)
    m = mod.add_parser("verify", parents=[common], help="check the level-4 decomposition of E(z, w)")
    m.add_argument("--z", type=parse_complex, required=True)
    m.add_argument("--w", type=parse_complex, required=True)
    m.add_argument("--radius", type=int, default=3000)
    m.add_argument("--tolerance", type=float, default=1e-3)
    m.set_defaults(func=cmd_modular_verify)

    sp = sub.add_parser("special", help="special functions").add_subparsers(dest="action", required=True)
    e = sp.add_parser("eval", parents=[common], help="evaluate one special function")
    e.add_argument("function", choices=sorted(_SPECIAL))
    e.add_argument("args", nargs="+", type=parse_complex)
    e.set_defaults(func=cmd_special_eval)

    v = sub.add_parser("verify", help="identity suite").add_subparsers(dest="action", required=True)
    a = v.add_parser("all", parents=[common], help="run every identity and emit a JSON report")
    a.add_argument("--level", choices=["quick", "full"], default="quick")
    a.add_argument("--only", help="restrict to identity ids with this prefix")
    a.set_defaults(func=cmd_verify_all)
    return p


def _config(args) -> RunConfig:
    overrides = {"workers": args.workers}
    if args.memory_budget is not None:
        try:
            overrides["memory_budget"] = parse_bytes(args.memory_budget)
        except ValueError as exc:
            raise UsageError(f"bad memory budget {args.memory_budget!r}") from exc
    try:
        if args.config:
            return RunConfig.from_file(args.config, **overrides)
        return RunConfig(**{k: v for k, v in overrides.items() if v is not None})
    except ValueError as exc:
        raise UsageError(f"bad configuration: {exc}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except _BAD_INPUT as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ShiftConvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


run = main

if __name__ == "__main__":
    sys.exit(main())
