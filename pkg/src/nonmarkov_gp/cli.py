"""Command-line entry point: ``compute``, ``sweep`` and ``spectral`` subcommands.

W and lambda are given as ratios to omega0, theta0 in radians.
Exit codes: 0 success, 2 configuration error, 3 numerical-domain error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .amplitude import SystemParams
from .errors import (
    ConfigurationError,
    DegenerateTrajectoryError,
    InvalidInputError,
    NumericalDomainError,
    UnsupportedVariantError,
)
from .geometric_phase import EVALUATORS, evaluate_phases, gp_exact, gp_unitary
from .numerics import QuadratureSettings, VolterraSettings, solve_volterra
from .spectral import correlation_kernel, load_tabulated
from .sweep import PRESETS, failed_points, figure_preset, parse_config, run_sweep, to_csv, to_json, emit

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4

log = logging.getLogger("nonmarkov_gp")


def _evaluator_list(text):
    names = tuple(e.strip() for e in text.split(",") if e.strip())
    bad = set(names) - set(EVALUATORS)
    if bad:
        raise argparse.ArgumentTypeError(f"unknown evaluator(s): {', '.join(sorted(bad))}")
    return names


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    ap = argparse.ArgumentParser(
        prog="nonmarkov-gp",
        description="Geometric phase of a qubit damped by a Lorentzian (leaky-cavity) bath.",
    )
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="all phase evaluators at one parameter point (JSON to stdout)")
    c.add_argument("--w", type=float, required=True, help="coupling W / omega0")
    c.add_argument("--lambda", dest="lam", type=float, required=True, help="spectral width lambda / omega0")
    c.add_argument("--theta0", type=float, required=True, help="initial polar angle [rad]")
    c.add_argument("--evaluators", type=_evaluator_list, default=EVALUATORS)
    c.add_argument("--samples", type=int, default=4096, help="Simpson intervals per period (even)")

    s = sub.add_parser("sweep", help="grid sweep from a figure preset or a config file")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", type=Path)
    s.add_argument("--out", type=Path, help="output file (default: stdout)")
    s.add_argument("--format", choices=("csv", "json"))
    s.add_argument("--samples", type=int, help="Simpson intervals per period (even)")
    s.add_argument("--workers", type=int, help="parallel workers (default: $NONMARKOV_GP_WORKERS or CPU count)")
    s.add_argument("--w-range", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    s.add_argument("--theta0-range", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    s.add_argument("--lambdas", type=_float_list, help="lambda family for fig2/fig3, e.g. 0,0.05,1,5")

    t = sub.add_parser("spectral", help="phase for a tabulated J(omega) via the Volterra solver")
    t.add_argument("--tabulated", type=Path, required=True, help="two-column file: omega/omega0, J/omega0")
    t.add_argument("--theta0", type=float, required=True)
    t.add_argument("--steps", type=int, default=4096, help="Volterra steps over one period (even)")
    t.add_argument("--amplitude-out", type=Path, help="also write t, Re c, Im c, |c| as CSV")
    return ap


def _resolution(samples, default=None):
    if samples is None:
        return default or QuadratureSettings()
    return QuadratureSettings(samples_per_period=samples)


def cmd_compute(args):
    params = SystemParams(W=args.w, lam=args.lam, theta0=args.theta0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        res = evaluate_phases(params, _resolution(args.samples), args.evaluators)
    for w in caught:
        log.warning("%s", w.message)
    record = {
        "w_over_omega0": args.w,
        "lambda_over_omega0": args.lam,
        "theta0": args.theta0,
        "phi_exact": res.phi_exact,
        "phi_unitary": res.phi_unitary,
        "phi_perturbative": res.phi_perturbative,
        "phi_kinematic": res.phi_kinematic,
        "phi_markovian": res.phi_markovian,
        "correction": res.correction,
        "quad_error": res.quadrature_error_estimate,
    }
    print(json.dumps(record, indent=1))
    return 0


def cmd_sweep(args):
    if args.preset:
        kwargs = {"resolution": _resolution(args.samples)}
        if args.w_range:
            kwargs["w_range"] = tuple(args.w_range)
        if args.theta0_range:
            kwargs["theta0_range"] = tuple(args.theta0_range)
        if args.lambdas:
            kwargs["lambdas"] = args.lambdas
        spec = figure_preset(args.preset, **kwargs)
    else:
        text = args.config.read_text(encoding="utf-8")
        spec = parse_config(text)
        if args.samples is not None:
            spec = type(spec)(spec.fixed, spec.axes, spec.evaluators, _resolution(args.samples), spec.output, spec.fmt)

    out = args.out or (Path(spec.output) if spec.output else None)
    fmt = args.format or (out.suffix.lstrip(".") if out and out.suffix in (".csv", ".json") else spec.fmt)
    records = run_sweep(spec, workers=args.workers)

    if out is None:
        sys.stdout.write(to_csv(records) if fmt == "csv" else to_json(records))
    else:
        emit(records, fmt, out)
        log.info("wrote %d records to %s", len(records), out)
    bad = failed_points(records)
    if bad:
        print(f"{len(bad)} of {len(records)} points failed:", file=sys.stderr)
        for r in bad:
            print(f"  W={r.w_over_omega0:g} lambda={r.lambda_over_omega0:g} theta0={r.theta0:g}: "
                  + "; ".join(r.errors), file=sys.stderr)
    return 0


def cmd_spectral(args):
    sd = load_tabulated(args.tabulated)
    if args.steps % 2:
        raise InvalidInputError("--steps must be even so the phase integral has complete Simpson panels")
    params = SystemParams(W=0.0, lam=0.0, theta0=args.theta0)
    traj = solve_volterra(correlation_kernel(sd), 1.0, params.period, VolterraSettings(args.steps))
    if np.max(np.abs(traj.c_values)) > 1.0 + 1e-6:
        raise NumericalDomainError(
            "|c(t)| exceeds 1: the tabulated grid is too coarse or truncated for this resolution"
        )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        est = gp_exact(params, QuadratureSettings(max(16, args.steps)), trajectory=traj)
    for w in caught:
        log.warning("%s", w.message)
    phi0 = gp_unitary(args.theta0)
    if args.amplitude_out:
        c = traj.c_values
        table = np.column_stack([traj.t_grid, c.real, c.imag, np.abs(c)])
        np.savetxt(args.amplitude_out, table, fmt="%.17g", delimiter=",", header="t,re_c,im_c,abs_c", comments="")
    print(json.dumps({
        "theta0": args.theta0,
        "total_weight": sd.total_weight,
        "min_abs_c": float(np.min(np.abs(traj.c_values))),
        "phi_exact": est.value,
        "phi_unitary": phi0,
        "correction": phi0 - est.value,
        "quad_error": None if math.isnan(est.error) else est.error,
    }, indent=1))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    handler = {"compute": cmd_compute, "sweep": cmd_sweep, "spectral": cmd_spectral}[args.command]
    try:
        return handler(args)
    except (NumericalDomainError, DegenerateTrajectoryError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, InvalidInputError, UnsupportedVariantError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
