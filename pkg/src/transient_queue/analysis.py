"""Stationary values, decay-rate fitting, and cross-method comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .busy_period import QueueModel
from .distributions import Exponential
from .renewal import Curve, phi_via_renewal, renewal_function
from .simulate import McConfig, estimate_phi, first_cycle_study

PURE_EXPONENTIAL = "pure_exponential"
EXP_WITH_SQRT_T = "exp_with_sqrt_t"

_MIN_FIT_POINTS = 10


class UnfitError(RuntimeError):
    """The requested window cannot support a decay-rate fit."""


@dataclass(frozen=True)
class FitResult:
    rate: float
    intercept: float
    window: tuple
    r_squared: float
    model: str
    n_points: int

    def as_dict(self) -> dict:
        return {
            "rate": self.rate,
            "intercept": self.intercept,
            "window": list(self.window),
            "r_squared": self.r_squared,
            "model": self.model,
            "n_points": self.n_points,
        }


def stationary_pk(model: QueueModel) -> float:
    """Stationary mean virtual waiting time lam * b2 / (2 (1 - rho))."""
    return (model.arrival_rate * model.service.moment(2)
            / (2.0 * (1.0 - model.rho)))


def fit_decay_rate(curve: Curve, phi_inf: float, window: tuple,
                   model: str = EXP_WITH_SQRT_T) -> FitResult:
    """Least-squares decay rate of |curve - phi_inf| on the window.

    ``pure_exponential`` fits log-gap = c - r t; ``exp_with_sqrt_t`` adds a
    fixed -0.5 log t term to the model (a 1/sqrt(t) algebraic prefactor).
    Points whose gap sits below 3 pointwise stderr are dropped as noise.
    """
    if model not in (PURE_EXPONENTIAL, EXP_WITH_SQRT_T):
        raise ValueError(f"unknown fit model {model!r}")
    t_lo, t_hi = window
    if not t_lo < t_hi:
        raise ValueError(f"window must satisfy t_lo < t_hi, got {window}")
    t = curve.times()
    gap = curve.values - phi_inf
    mask = (t >= t_lo) & (t <= t_hi) & (t > 0) & (gap != 0.0)
    if curve.stderr is not None:
        mask &= np.abs(gap) > 3.0 * curve.stderr
    t_fit = t[mask]
    gap_fit = gap[mask]
    if len(t_fit) < _MIN_FIT_POINTS:
        raise UnfitError(
            f"only {len(t_fit)} usable points in window {window} "
            f"(need >= {_MIN_FIT_POINTS})")
    signs = np.sign(gap_fit)
    if np.any(signs != signs[0]):
        raise UnfitError(
            f"gap changes sign inside window {window}; curve oscillates "
            f"around phi_inf")
    y = np.log(np.abs(gap_fit))
    if model == EXP_WITH_SQRT_T:
        y = y + 0.5 * np.log(t_fit)
    design = np.column_stack([np.ones_like(t_fit), -t_fit])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    intercept, rate = float(coef[0]), float(coef[1])
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if rate <= 0:
        raise UnfitError(
            f"fitted rate {rate:.3g} is not a decay (window {window})")
    return FitResult(rate=rate, intercept=intercept,
                     window=(float(t_lo), float(t_hi)),
                     r_squared=r_squared, model=model, n_points=len(t_fit))


def _default_fit_window(t_max: float) -> tuple:
    return (0.25 * t_max, 0.9 * t_max)


def compare_methods(model: QueueModel, cfg: McConfig,
                    threads: int = 1) -> dict:
    """Run every applicable method on one grid and cross-compare.

    Methods: exact series (M/M/1 only), renewal-equation pipeline (q and
    the cycle CDF simulated on first cycles, then the convolution
    solution), and the direct Monte-Carlo mean-workload estimate.
    """
    from . import mm1

    grid = cfg.grid
    t = grid.times()
    phi_inf = stationary_pk(model)

    is_mm1 = isinstance(model.service, Exponential)
    methods = ["simulation", "renewal"]
    exact = None
    if is_mm1:
        methods.insert(0, "exact_series")
        exact_model = mm1.Mm1Model(model.arrival_rate, model.service.rate)
        exact = mm1.phi_curve(exact_model, grid)

    sim_curve = estimate_phi(model, cfg, threads=threads)
    study = first_cycle_study(model, cfg, threads=threads)
    renewal_curve = phi_via_renewal(study.q, renewal_function(study.cycle_cdf))

    report: dict = {
        "model": {
            "arrival_rate": model.arrival_rate,
            "service": model.service.spec_string(),
            "rho": model.rho,
        },
        "mc": {"replications": cfg.replications, "base_seed": cfg.base_seed},
        "grid": {"step": grid.step, "n_points": grid.n_points},
        "methods": methods,
        "phi_stationary": phi_inf,
    }

    reference = exact if exact is not None else sim_curve
    live = t > 0
    se = np.where(sim_curve.stderr[live] > 0, sim_curve.stderr[live], np.inf)
    z = np.abs(sim_curve.values[live] - reference.values[live]) / se
    if exact is not None:
        report["max_z"] = float(z.max())
        report["frac_within_3stderr"] = float(np.mean(z <= 3.0))
    else:
        # no exact reference: compare the two MC-backed routes against
        # each other, with a small allowance for the renewal grid bias
        combined = np.sqrt(sim_curve.stderr**2
                           + np.nan_to_num(renewal_curve.stderr) ** 2)[live]
        diff = np.abs(renewal_curve.values[live] - sim_curve.values[live])
        allowance = 0.02 * np.maximum(np.abs(sim_curve.values[live]), 0.05)
        ok = diff <= 3.0 * combined + allowance
        report["frac_two_method_agree"] = float(np.mean(ok))
        report["max_z"] = float(np.max(diff / np.where(combined > 0,
                                                       combined, np.inf)))

    ref_vals = reference.values
    sel = ref_vals > 0.1
    if np.any(sel):
        rel = np.abs(renewal_curve.values[sel] - ref_vals[sel]) / ref_vals[sel]
        report["max_rel_gap"] = float(rel.max())
    else:
        report["max_rel_gap"] = math.nan

    fit_model = EXP_WITH_SQRT_T if is_mm1 else PURE_EXPONENTIAL
    fit_curve = exact if exact is not None else sim_curve
    try:
        fit = fit_decay_rate(fit_curve, phi_inf,
                             _default_fit_window(grid.horizon), fit_model)
        report["fit"] = fit.as_dict()
        if is_mm1:
            rate_ref = mm1.theoretical_rate(exact_model)
            report["fit"]["theoretical_rate"] = rate_ref
            report["fit"]["rel_err"] = abs(fit.rate - rate_ref) / rate_ref
    except UnfitError as exc:
        report["fit"] = {"error": str(exc)}

    verdict = {}
    if exact is not None:
        verdict["mc_within_3stderr_95pct"] = report["frac_within_3stderr"] >= 0.95
        verdict["renewal_within_2pct"] = report["max_rel_gap"] <= 0.02
    else:
        verdict["two_method_agreement_95pct"] = (
            report["frac_two_method_agree"] >= 0.95)
    report["verdict"] = verdict

    report["curves"] = {
        "simulation": sim_curve,
        "renewal": renewal_curve,
    }
    if exact is not None:
        report["curves"]["exact_series"] = exact
    return report
