"""Command-line front end: CSV curves and JSON summaries for offline plotting.

Exit codes: 0 success, 2 argument/validation error, 1 computational error.
All file outputs go through a temp-file-plus-rename so a crash never leaves
a half-written artifact, and fixed seeds make reruns byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import mm1
from .analysis import (EXP_WITH_SQRT_T, PURE_EXPONENTIAL, UnfitError,
                       compare_methods, fit_decay_rate, stationary_pk)
from .busy_period import (IterationLimitError, QueueModel, busy_cramer_abscissa,
                          busy_lst, busy_mean, cycle_moments)
from .distributions import DistributionSpecError, parse_service_spec
from .renewal import (Curve, TimeGrid, phi_via_renewal, read_curve_csv,
                      renewal_function, _curve_csv_text)
from .simulate import (CycleTruncationError, McConfig, estimate_phi,
                       estimate_stationary, first_cycle_study)
from .mm1 import SeriesTruncationError


class ValidationError(ValueError):
    """Bad command-line input; maps to exit code 2."""


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tq-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _make_grid(t_max: float, step: float) -> TimeGrid:
    if t_max <= 0:
        raise ValidationError(f"--t-max must be > 0, got {t_max}")
    if step <= 0:
        raise ValidationError(f"--step must be > 0, got {step}")
    n_points = int(math.floor(t_max / step + 1e-9)) + 1
    if n_points < 2:
        raise ValidationError("--t-max must cover at least one step")
    return TimeGrid(step=step, n_points=n_points)


def _make_model(args) -> QueueModel:
    try:
        service = parse_service_spec(args.service)
        return QueueModel(arrival_rate=args.lam, service=service)
    except (DistributionSpecError, ValueError) as exc:
        raise ValidationError(str(exc)) from exc


def _model_summary(model: QueueModel) -> dict:
    return {
        "arrival_rate": model.arrival_rate,
        "service": model.service.spec_string(),
        "rho": model.rho,
    }


def _cmd_simulate(args) -> int:
    model = _make_model(args)
    grid = _make_grid(args.t_max, args.step)
    cfg = McConfig(replications=args.reps, base_seed=args.seed, grid=grid)
    curve = estimate_phi(model, cfg, threads=args.threads)
    _atomic_write(args.output, _curve_csv_text(curve))
    horizon = 1000.0 * cycle_moments(model).cycle_mean
    phi_hat, se = estimate_stationary(model, horizon, seed=args.seed)
    summary = {
        "model": _model_summary(model),
        "seed": args.seed,
        "replications": args.reps,
        "phi_stationary_estimate": phi_hat,
        "stderr": se,
    }
    sys.stdout.write(_json_text(summary))
    return 0


def _cmd_mm1_exact(args) -> int:
    if args.lam <= 0 or args.mu <= 0:
        raise ValidationError("--lambda and --mu must be > 0")
    try:
        model = mm1.Mm1Model(args.lam, args.mu)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    grid = _make_grid(args.t_max, args.step)
    times = grid.times()
    phi_def = np.array([mm1.phi_exact(model, float(t)) for t in times])
    phi_lit = np.array([mm1.phi_exact(model, float(t), paper_literal=True)
                        for t in times])
    asym = np.array([mm1.phi_asymptotic(model, float(t)) if t > 0 else math.nan
                     for t in times])
    # the asymptote carries the printed constant; compare it against the
    # matching curve (shifted when the default normalization is requested)
    if args.paper_literal:
        gap = np.abs(phi_lit - asym)
    else:
        gap = np.abs(phi_def - (asym - (1.0 - model.rho)))
    lines = ["t,phi_exact,phi_paper_literal,phi_asymptotic,abs_gap"]
    for i, t in enumerate(times):
        lines.append(f"{t:.17g},{phi_def[i]:.17g},{phi_lit[i]:.17g},"
                     f"{asym[i]:.17g},{gap[i]:.17g}")
    _atomic_write(args.output, "\n".join(lines) + "\n")
    return 0


def _cmd_renewal(args) -> int:
    model = _make_model(args)
    grid = _make_grid(args.t_max, args.step)
    cfg = McConfig(replications=args.reps, base_seed=args.seed, grid=grid)
    study = first_cycle_study(model, cfg, threads=args.threads)
    renew = renewal_function(study.cycle_cdf)
    curve = phi_via_renewal(study.q, renew)
    _atomic_write(args.output, _curve_csv_text(curve))
    return 0


def _parse_range(text: str, name: str, parts: int):
    pieces = text.split(":")
    if len(pieces) != parts:
        raise ValidationError(
            f"{name} expects {parts} colon-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in pieces)
    except ValueError as exc:
        raise ValidationError(f"bad number in {name}: {exc}") from exc


def _cmd_busy_period(args) -> int:
    model = _make_model(args)
    summary = {
        "model": _model_summary(model),
        "busy_mean": busy_mean(model),
    }
    cm = cycle_moments(model)
    summary["cycle_mean"] = cm.cycle_mean
    summary["cycle_second"] = cm.cycle_second
    if args.abscissa:
        summary["cramer_abscissa"] = busy_cramer_abscissa(model, tol=1e-4)
    if args.s_grid is not None:
        lo, hi, step = _parse_range(args.s_grid, "--s-grid", 3)
        if step <= 0 or hi < lo or lo < 0:
            raise ValidationError(
                f"--s-grid needs 0 <= lo <= hi and step > 0, got {args.s_grid!r}")
        svals = np.arange(lo, hi + 1e-12, step)
        lines = ["s,busy_lst"]
        for s in svals:
            lines.append(f"{s:.17g},{busy_lst(model, float(s)):.17g}")
        _atomic_write(args.output, "\n".join(lines) + "\n")
        sys.stdout.write(_json_text(summary))
    else:
        _atomic_write(args.output, _json_text(summary))
    return 0


def _cmd_fit_rate(args) -> int:
    curve = read_curve_csv(args.input)
    if args.phi_inf is not None:
        phi_inf = args.phi_inf
    elif args.lam is not None and args.service is not None:
        phi_inf = stationary_pk(_make_model(args))
    elif args.lam is not None and args.mu is not None:
        service = parse_service_spec(f"exp:rate={args.mu}")
        phi_inf = stationary_pk(QueueModel(args.lam, service))
    else:
        raise ValidationError(
            "provide --phi-inf, or --lambda with --service (or --mu) so the "
            "stationary value can be computed")
    window = _parse_range(args.window, "--window", 2)
    model = EXP_WITH_SQRT_T if args.model == "sqrt" else PURE_EXPONENTIAL
    fit = fit_decay_rate(curve, phi_inf, window, model)
    payload = fit.as_dict()
    payload["phi_inf"] = phi_inf
    sys.stdout.write(_json_text(payload))
    return 0


def _cmd_compare(args) -> int:
    model = _make_model(args)
    grid = _make_grid(args.t_max, args.step)
    cfg = McConfig(replications=args.reps, base_seed=args.seed, grid=grid)
    report = compare_methods(model, cfg, threads=args.threads)
    report.pop("curves")
    _atomic_write(args.output, _json_text(report))
    return 0


def _add_model_args(p, need_seeded_grid=True):
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="arrival rate")
    p.add_argument("--service", required=True,
                   help="service spec, e.g. exp:rate=1.0 or erlang:shape=2,rate=2.0")
    if need_seeded_grid:
        p.add_argument("--t-max", dest="t_max", type=float, required=True)
        p.add_argument("--step", type=float, required=True)
        p.add_argument("--reps", type=int, required=True)
        p.add_argument("--seed", type=int, required=True,
                       help="base seed (mandatory: keeps outputs reproducible)")
        p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--output", required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transient-queue",
        description="Transient mean workload of the M/G/1 queue: exact "
                    "series, renewal numerics, regenerative simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate",
                       help="Monte-Carlo mean workload curve (CSV) plus a "
                            "stationary JSON summary on stdout")
    _add_model_args(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mm1-exact",
                       help="exact M/M/1 transient curve with the printed "
                            "asymptote (CSV)")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--t-max", dest="t_max", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--paper-literal", action="store_true",
                   help="compare the asymptote against the literal-mode curve")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_mm1_exact)

    p = sub.add_parser("renewal",
                       help="renewal-equation solution with simulated first-"
                            "cycle inputs (CSV)")
    _add_model_args(p)
    p.set_defaults(func=_cmd_renewal)

    p = sub.add_parser("busy-period",
                       help="busy-period transform curve and/or moment summary")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--service", required=True)
    p.add_argument("--s-grid", dest="s_grid", default=None,
                   help="lo:hi:step grid of transform arguments (CSV output)")
    p.add_argument("--abscissa", action="store_true",
                   help="include the numeric Cramer abscissa")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_busy_period)

    p = sub.add_parser("fit-rate",
                       help="fit the exponential decay rate of a stored curve")
    p.add_argument("--input", required=True)
    p.add_argument("--phi-inf", dest="phi_inf", type=float, default=None)
    p.add_argument("--window", required=True, help="t_lo:t_hi")
    p.add_argument("--model", choices=("pure", "sqrt"), default="sqrt")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--service", default=None)
    p.add_argument("--mu", type=float, default=None)
    p.set_defaults(func=_cmd_fit_rate)

    p = sub.add_parser("compare",
                       help="cross-method comparison report (JSON)")
    _add_model_args(p)
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"transient-queue: error: {exc}", file=sys.stderr)
        return 2
    except (DistributionSpecError, ValueError) as exc:
        print(f"transient-queue: error: {exc}", file=sys.stderr)
        return 2
    except (IterationLimitError, SeriesTruncationError, UnfitError,
            CycleTruncationError, OSError) as exc:
        print(f"transient-queue: computational error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
