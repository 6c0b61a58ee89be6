"""Command-line interface: ``uhermite <subcommand> ...``.

Exit codes: 0 on success, 2 on bad arguments, 1 when a computation fails
(certification, solver or quadrature error).  CSV numbers carry 17
significant digits.  ``UHERM_WORKING_DIGITS`` overrides the default working
precision of the root finders.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import curieweiss as cw
from . import freenormal as fn
from . import heatflow as hf
from .circleroots import EvalPrecision, empirical_moment, find_roots, newton_girard_reference
from .errors import UHermiteError
from .polycore import CirclePoly, RealPoly, unitary_hermite

__all__ = ["main", "run", "SCHEMAS", "parse_complex", "density_grid"]

_NUM = {"type": "number"}
_NUM_ARRAY = {"type": "array", "items": _NUM}

SCHEMAS = {
    "roots": {
        "type": "object",
        "required": ["n", "sigma2", "angles", "enclosure_width"],
        "properties": {"n": {"type": "integer"}, "sigma2": _NUM, "angles": _NUM_ARRAY,
                       "enclosure_width": _NUM},
    },
    "density": {
        "type": "object",
        "required": ["sigma2", "theta", "f"],
        "properties": {"sigma2": _NUM, "theta": _NUM_ARRAY, "f": _NUM_ARRAY},
    },
    "moments": {
        "type": "object",
        "required": ["n", "sigma2", "k", "empirical", "newton_girard", "limit"],
        "properties": {"n": {"type": "integer"}, "sigma2": _NUM, "k": {"type": "array", "items": {"type": "integer"}},
                       "empirical": _NUM_ARRAY, "newton_girard": _NUM_ARRAY, "limit": _NUM_ARRAY},
    },
    "cw-zeros": {
        "type": "object",
        "required": ["n", "beta", "y", "density"],
        "properties": {"n": {"type": "integer"}, "beta": _NUM, "y": _NUM_ARRAY, "density": _NUM_ARRAY},
    },
    "cw-energy": {
        "type": "object",
        "required": ["beta", "h", "free_energy", "table"],
        "properties": {
            "beta": _NUM,
            "h": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "free_energy": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
            "table": {"type": "array", "items": {
                "type": "object", "required": ["n", "log_partition_per_n", "error"],
                "properties": {"n": {"type": "integer"},
                               "log_partition_per_n": {"type": "array", "items": _NUM},
                               "error": _NUM}}},
        },
    },
    "heatflow": {
        "type": "object",
        "required": ["kind", "s", "roots"],
        "properties": {"kind": {"enum": ["real", "trig", "circle"]}, "s": _NUM_ARRAY,
                       "roots": {"type": "array", "items": _NUM_ARRAY}},
    },
    "verify": {
        "type": "object",
        "required": ["suite", "passed", "criteria"],
        "properties": {"suite": {"enum": ["fast", "full"]}, "passed": {"type": "boolean"},
                       "criteria": {"type": "array", "items": {
                           "type": "object", "required": ["number", "title", "passed", "details"],
                           "properties": {"number": {"type": "integer"}, "title": {"type": "string"},
                                          "passed": {"type": "boolean"},
                                          "details": {"type": "array", "items": {"type": "string"}},
                                          "seconds": _NUM}}}},
    },
}


def _g(x: float) -> str:
    return f"{float(x):.17g}"


def parse_complex(text: str) -> complex:
    """Parse ``"0.3"``, ``"0.3+0.2i"`` or ``"-1e-3-2i"`` (``j`` also accepted)."""
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be positive and finite")
    return v


def _nonneg_float(text):
    v = float(text)
    if not (v >= 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be nonnegative and finite")
    return v


def _precision(args) -> EvalPrecision:
    digits = args.working_digits
    return EvalPrecision(working_digits=digits, max_digits=max(256, digits))


# ---------------------------------------------------------------- commands
# each returns (json_payload, csv_header or None, csv_rows)

def cmd_roots(args):
    m = find_roots(unitary_hermite(args.n, args.sigma2 / args.n), _precision(args))
    payload = {"n": args.n, "sigma2": args.sigma2, "angles": m.angles.tolist(),
               "enclosure_width": float(m.enclosure_width)}
    return payload, None, [[a] for a in m.angles]


def density_grid(s2: float, n: int) -> np.ndarray:
    """Plot grid for the density.

    Uniform on the circle when the density is smooth (s2 > 4); otherwise it
    spans the support and clusters quadratically toward the edges, which keeps
    the trapezoid sum within a few percent of the best n-point grid.
    """
    if s2 > 4:
        return np.linspace(-math.pi, math.pi, n)
    m = fn.support_halfwidth(s2)
    return m * np.sin(0.5 * math.pi * np.linspace(-1.0, 1.0, n))


def cmd_density(args):
    theta = density_grid(args.sigma2, args.grid)
    f = fn.density(fn.FreeNormalParams(args.sigma2), theta)
    payload = {"sigma2": args.sigma2, "theta": theta.tolist(), "f": f.tolist()}
    return payload, ["theta", "f"], list(zip(theta, f))


def cmd_moments(args):
    if args.k > args.n:
        raise UHermiteError("--k must not exceed --n")
    m = find_roots(unitary_hermite(args.n, args.sigma2 / args.n), _precision(args))
    ks = list(range(1, args.k + 1))
    emp = [empirical_moment(m, k).real for k in ks]
    ng = newton_girard_reference(args.n, args.sigma2, args.k).tolist()
    lim = fn.moments(args.sigma2, args.k).tolist()
    payload = {"n": args.n, "sigma2": args.sigma2, "k": ks, "empirical": emp,
               "newton_girard": ng, "limit": lim}
    return payload, ["k", "empirical", "newton_girard", "limit"], list(zip(ks, emp, ng, lim))


def cmd_cw_zeros(args):
    y = cw.lee_yang_zeros(args.n, args.beta, _precision(args))
    dens = cw.lee_yang_density(args.beta, y)
    payload = {"n": args.n, "beta": args.beta, "y": y.tolist(), "density": np.atleast_1d(dens).tolist()}
    return payload, ["y", "density"], list(zip(y, np.atleast_1d(dens)))


def cmd_cw_energy(args):
    h = args.h
    F = cw.free_energy(cw.CWParams(args.beta, h))
    table = []
    for n in args.ns:
        v = cw.log_partition(n, cw.CWParams(args.beta, h)) / n
        # log Z_n is a principal log, so compare modulo 2 pi i / n
        k = round((v.imag - F.imag) * n / (2 * math.pi))
        table.append({"n": n, "log_partition_per_n": [v.real, v.imag],
                      "error": abs(v - F - 2j * math.pi * k / n)})
    payload = {"beta": args.beta, "h": [h.real, h.imag], "free_energy": [F.real, F.imag], "table": table}
    rows = [["inf", F.real, F.imag, 0.0]] + [
        [r["n"], *r["log_partition_per_n"], r["error"]] for r in table]
    return payload, ["n", "re", "im", "error"], rows


def load_flow_input(path):
    """Read a polynomial for the heat flow.

    Accepted forms: ``{"kind": "real", "coeffs": [a_0, ..., a_n]}``,
    ``{"kind": "trig", "coeffs": [[re, im], ...]}`` holding ``c_{-d}..c_d``,
    or a serialised CirclePoly (``{"n": ..., "coeffs": [[s, ln, s, ln], ...]}``).
    """
    with open(path) as fh:
        data = json.load(fh)
    if "n" in data:
        return "circle", CirclePoly.from_json(json.dumps(data))
    kind = data.get("kind")
    if kind == "real":
        return kind, RealPoly.from_floats([float(v) for v in data["coeffs"]])
    if kind == "trig":
        return kind, hf.TrigPoly([complex(*v) if isinstance(v, list) else complex(v) for v in data["coeffs"]])
    raise UHermiteError(f"unknown polynomial kind {kind!r} in {path}")


def cmd_heatflow(args):
    kind, poly = load_flow_input(args.input)
    svals = [args.s * k / args.steps for k in range(1, args.steps + 1)]
    roots = hf.root_trajectories(poly, svals, _precision(args))
    payload = {"kind": kind, "s": svals, "roots": roots.tolist()}
    header = ["s"] + [f"root{j + 1}" for j in range(roots.shape[1])]
    return payload, header, [[s, *r] for s, r in zip(svals, roots)]


def cmd_verify(args):
    from .acceptance import run_suite
    echo = None if args.format == "json" else print
    results = run_suite(args.suite, args.only, echo=echo)
    ok = all(r.passed for r in results)
    payload = {"suite": args.suite, "passed": ok, "criteria": [
        {"number": r.number, "title": r.title, "passed": r.passed, "details": [str(d) for d in r.details],
         "seconds": r.seconds} for r in results]}
    if args.format == "json":
        _emit_json(payload, args.output)
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return 0 if ok else 1


# ------------------------------------------------------------------ output

def _emit_json(payload, output):
    text = json.dumps(payload, indent=1)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _emit_csv(header, rows, output):
    lines = []
    if header:
        lines.append(",".join(header))
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, int) else _g(v)) for v in r))
    text = "\n".join(lines) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uhermite", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, precision=True):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--output", "-o", help="write to this file instead of stdout")
        if precision:
            p.add_argument("--working-digits", type=int, default=None,
                           help="initial working digits of the root finder (env UHERM_WORKING_DIGITS)")

    p = sub.add_parser("roots", help="zero angles of H_n(z; sigma2/n)")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--sigma2", type=_nonneg_float, required=True)
    common(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("density", help="density of the free unitary normal law on a theta grid")
    p.add_argument("--sigma2", type=_positive_float, required=True)
    p.add_argument("--grid", type=_positive_int, default=1000)
    common(p, precision=False)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("moments", help="empirical, Newton-Girard and limiting moments")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--sigma2", type=_positive_float, required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("cw-zeros", help="Lee-Yang zeroes of the Curie-Weiss model with the limit density")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--beta", type=_positive_float, required=True)
    common(p)
    p.set_defaults(func=cmd_cw_zeros)

    p = sub.add_parser("cw-energy", help="Curie-Weiss free energy and finite-n convergence")
    p.add_argument("--beta", type=_positive_float, required=True)
    p.add_argument("--h", type=parse_complex, required=True, help='complex field, e.g. "0.3+0.2i"')
    p.add_argument("--ns", type=_positive_int, nargs="+", default=[100, 200, 400, 800])
    common(p, precision=False)
    p.set_defaults(func=cmd_cw_energy)

    p = sub.add_parser("heatflow", help="root trajectories under the backward heat flow")
    p.add_argument("--input", required=True, help="polynomial as JSON")
    p.add_argument("--s", type=_nonneg_float, required=True, help="final flow time")
    p.add_argument("--steps", type=_positive_int, default=10)
    common(p)
    p.set_defaults(func=cmd_heatflow)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--suite", choices=["fast", "full"], default="fast")
    p.add_argument("--only", type=int, nargs="+", choices=range(1, 13), metavar="K")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_verify)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad input, 0 on --help
        return int(exc.code or 0)
    if hasattr(args, "working_digits") and args.working_digits is None:
        env = os.environ.get("UHERM_WORKING_DIGITS")
        try:
            args.working_digits = int(env) if env else 32
        except ValueError:
            print(f"uhermite: error: UHERM_WORKING_DIGITS={env!r} is not an integer", file=sys.stderr)
            return 2
    if getattr(args, "working_digits", None) is not None and args.working_digits < 16:
        ap.print_usage(sys.stderr)
        print("uhermite: error: working digits must be at least 16", file=sys.stderr)
        return 2
    if args.command == "cw-energy" and args.h.real == 0:
        print("uhermite: error: --h needs a nonzero real part", file=sys.stderr)
        return 2
    try:
        if args.command == "verify":
            return args.func(args)
        payload, header, rows = args.func(args)
    except (UHermiteError, ArithmeticError, ValueError) as exc:
        print(f"uhermite {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"uhermite {args.command}: {exc}", file=sys.stderr)
        return 1
    if args.format == "json":
        _emit_json(payload, args.output)
    else:
        _emit_csv(header, rows, args.output)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
