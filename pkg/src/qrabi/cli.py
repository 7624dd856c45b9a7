"""``qrabi`` command line: solve, sweep, oracle, fit-ridge, render.

Exit codes: 0 success, 2 invalid arguments, 3 solver failure, 4 validation
mismatch beyond tolerance.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

from . import __version__
from . import io as qio
from .errors import InvalidParameters, NonRectangularGrid, RabiError, UnknownField
from .oracle import oracle_statistics
from .params import RabiParams
from .solver import solve
from .stats import FIELDS
from .sweep import (CRITICAL_CURVE, METHODS, REFERENCE_RIDGE, extract_ridge, fit_quadratic,
                    refine_ridge, run_sweep)

EXIT_OK, EXIT_ARGS, EXIT_SOLVER, EXIT_VALIDATION = 0, 2, 3, 4
VALIDATION_TOLERANCE = 1e-6
ENERGY_TOLERANCE = 1e-7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: invalid_arguments: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ARGS)


def _config(args):
    cfg = qio.load_config(args.config) if getattr(args, "config", None) else qio.RunConfig()
    env = os.environ.get("RABI_WORKERS")
    if env:
        try:
            cfg = cfg.updated(workers=int(env))
        except ValueError as exc:
            raise InvalidParameters(f"RABI_WORKERS={env!r} is not an integer") from exc
    overrides = {k: getattr(args, k, None) for k in (
        "root_tolerance", "series_tolerance", "state_tail_tolerance", "convergence_target",
        "n_cap", "oracle_n_cap", "workers", "output", "format")}
    for name in ("delta_range", "g_range"):
        rng = getattr(args, name, None)
        if rng is not None:
            prefix = name.split("_")[0]
            overrides.update({f"{prefix}_lo": rng[0], f"{prefix}_hi": rng[1],
                              f"{prefix}_steps": int(rng[2])})
    return cfg.updated(**overrides)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args):
    cfg = _config(args)
    params = RabiParams.create(args.delta, args.g)
    gs = solve(params, **cfg.solver_options())
    validation, status = None, EXIT_OK
    if args.validate:
        ref = oracle_statistics(params, convergence_target=cfg.convergence_target,
                                hard_cap=cfg.oracle_n_cap)
        deltas = {f: abs(getattr(gs.stats, f) - getattr(ref.stats, f)) for f in FIELDS}
        deltas["energy"] = abs(gs.energy - ref.e0)
        ok = deltas["energy"] < ENERGY_TOLERANCE and all(
            deltas[f] < VALIDATION_TOLERANCE for f in FIELDS)
        validation = {"oracle_n_max": ref.n_max_used, "deltas": deltas, "passed": ok}
        status = EXIT_OK if ok else EXIT_VALIDATION
    fmt = args.format or "text"
    if fmt == "json":
        _emit(qio.dumps(qio.solution_document(gs, cfg, __version__, validation)), cfg.output)
        return status
    r = gs.root
    lines = [
        f"delta {params.delta:.12g}  g {params.g:.12g}  lambda {params.coupling_lambda:.12g}",
        f"root x {r.x_root!r}  parity {r.parity}  energy {r.energy!r}  residual {r.residual:.3g}"
        + (f"  closed_form {r.closed_form}" if r.closed_form else ""),
        f"truncation_n {gs.minus.truncation_n}  tail_norm {gs.minus.tail_norm:.3g}  "
        f"series_terms {r.n_used}",
    ]
    lines += [f"{f:10s} {getattr(gs.stats, f)!r}" for f in FIELDS]
    lines.append(f"{'mandel_q':10s} {gs.stats.mandel_q!r}")
    if validation is not None:
        lines.append(f"validation vs oracle (n_max {validation['oracle_n_max']}):")
        lines += [f"  d_{k:10s} {v:.3e}" for k, v in validation["deltas"].items()]
        lines.append("  PASS" if validation["passed"] else "  FAIL")
    _emit("\n".join(lines) + "\n", cfg.output)
    return status


def cmd_oracle(args):
    cfg = _config(args)
    params = RabiParams.create(args.delta, args.g)
    ref = oracle_statistics(params, convergence_target=cfg.convergence_target,
                            hard_cap=cfg.oracle_n_cap)
    if (args.format or "text") == "json":
        stats = ref.stats.as_dict()
        stats["mandel_q"] = ref.stats.mandel_q
        doc = {"version": __version__, "params": {"delta": params.delta, "g": params.g},
               "e0": ref.e0, "parity_expect": ref.parity_expect, "n_max_used": ref.n_max_used,
               "stats": stats}
        _emit(qio.dumps(doc), cfg.output)
        return EXIT_OK
    lines = [f"e0 {ref.e0!r}  parity {ref.parity_expect:.12g}  n_max {ref.n_max_used}"]
    lines += [f"{f:10s} {getattr(ref.stats, f)!r}" for f in FIELDS]
    _emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    records = run_sweep(cfg.delta_range, cfg.g_range, method=args.method, workers=cfg.workers,
                        options=cfg.sweep_options())
    _emit(qio.write_csv(records), cfg.output)
    failed = sum(1 for r in records if r.error)
    print(f"{len(records)} points, {failed} failed", file=sys.stderr)
    return EXIT_OK


def _read_text(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def cmd_fit_ridge(args):
    records = qio.read_csv(_read_text(args.input))
    if args.g_min is not None or args.g_max is not None:
        lo = -math.inf if args.g_min is None else args.g_min
        hi = math.inf if args.g_max is None else args.g_max
        records = [r for r in records if lo <= r.g <= hi]
    ridge = extract_ridge(records, args.quantity)
    points = ridge.points
    if args.refine:
        cfg = _config(args)
        points = refine_ridge(points, records, args.quantity, cfg.solver_options())
    fit = fit_quadratic(points)
    lines = [f"ridge of {args.quantity}: {len(points)} points"]
    lines += [f"  g {g:.6g}  delta* {d:.6g}" for g, d in points]
    if ridge.excluded:
        lines.append("excluded (boundary maximum): "
                     + ", ".join(f"{g:.6g}" for g in ridge.excluded))
    c2, c1, c0 = fit.coeffs
    lines.append(f"fit delta* = {c2:.6g} g^2 + {c1:.6g} g + {c0:.6g}   rms {fit.rms_residual:.3g}")
    for label, ref in (("2g^2", CRITICAL_CURVE), ("2g^2-1.5g+0.6", REFERENCE_RIDGE)):
        diffs = ", ".join(f"{a - b:+.3g}" for a, b in zip(fit.coeffs, ref))
        gmax = max(g for g, _ in points)
        gmin = min(g for g, _ in points)
        dev = max(abs(fit(g) - (ref[0] * g * g + ref[1] * g + ref[2]))
                  for g in (gmin, 0.5 * (gmin + gmax), gmax))
        lines.append(f"vs {label}: coeff diff ({diffs}), max curve gap {dev:.3g}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_render(args):
    rows = qio.read_rows(_read_text(args.input))
    _emit(qio.render_svg(rows, args.field), args.output)
    return EXIT_OK


def _tolerance_flags(p):
    p.add_argument("--config", help="key=value config file (flags override it)")
    p.add_argument("--root-tolerance", dest="root_tolerance", type=float)
    p.add_argument("--series-tolerance", dest="series_tolerance", type=float)
    p.add_argument("--state-tail-tolerance", dest="state_tail_tolerance", type=float)
    p.add_argument("--convergence-target", dest="convergence_target", type=float)
    p.add_argument("--n-cap", dest="n_cap", type=int)
    p.add_argument("--oracle-n-cap", dest="oracle_n_cap", type=int)


def build_parser():
    parser = _Parser(prog="qrabi", description="Exact ground state of the quantum Rabi model.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one (delta, g) point")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--validate", action="store_true", help="cross-check against the oracle")
    p.add_argument("--format", choices=("text", "json"))
    p.add_argument("--output")
    _tolerance_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="dense-diagonalization reference at one point")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--format", choices=("text", "json"))
    p.add_argument("--output")
    _tolerance_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="grid sweep to CSV")
    p.add_argument("--delta-range", dest="delta_range", nargs=3, type=float,
                   metavar=("LO", "HI", "STEPS"))
    p.add_argument("--g-range", dest="g_range", nargs=3, type=float,
                   metavar=("LO", "HI", "STEPS"))
    p.add_argument("--method", choices=METHODS, default="spectral")
    p.add_argument("--workers", type=int)
    p.add_argument("--output")
    _tolerance_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit-ridge", help="extract and fit the maximum ridge of a sweep CSV")
    p.add_argument("input")
    p.add_argument("--quantity", default="r", choices=qio.NUMERIC_COLUMNS)
    p.add_argument("--g-min", dest="g_min", type=float)
    p.add_argument("--g-max", dest="g_max", type=float)
    p.add_argument("--refine", action="store_true", help="re-solve exactly near each peak")
    _tolerance_flags(p)
    p.set_defaults(func=cmd_fit_ridge)

    p = sub.add_parser("render", help="SVG heatmap of one CSV column")
    p.add_argument("input")
    p.add_argument("--field", default="r")
    p.add_argument("--output")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidParameters, UnknownField, NonRectangularGrid) as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except RabiError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: io_error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
