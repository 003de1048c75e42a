"""Busy-period and regeneration-cycle analysis for the stable M/G/1 queue.

The busy-period transform is the minimal solution of a fixed-point equation
in the service transform; everything here works on the real axis only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import ServiceDistribution

_FP_MAX_ITER = 1_000_000
_FP_GROWTH_CAP = 1e12


class IterationLimitError(RuntimeError):
    """Fixed-point iteration failed to converge; carries the last iterate."""

    def __init__(self, message: str, last_iterate: float):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class QueueModel:
    """Poisson arrivals at ``arrival_rate`` into a single FIFO server."""

    arrival_rate: float
    service: ServiceDistribution

    def __post_init__(self):
        if self.arrival_rate <= 0:
            raise ValueError(f"arrival rate must be > 0, got {self.arrival_rate}")
        rho = self.rho
        if rho >= 1:
            raise ValueError(
                f"unstable queue: rho = arrival_rate * mean_service = {rho:.6g} "
                f"must be < 1"
            )

    @property
    def rho(self) -> float:
        return self.arrival_rate * self.service.moment(1)


@dataclass(frozen=True)
class CycleMoments:
    """First two moments of one regeneration cycle (idle period + busy period)."""

    busy_mean: float
    cycle_mean: float
    cycle_second: float
    source: str  # "analytic" or "simulated"

    def __post_init__(self):
        if self.cycle_second < self.cycle_mean**2:
            raise ValueError(
                f"cycle_second {self.cycle_second:.6g} violates Jensen bound "
                f"{self.cycle_mean**2:.6g}"
            )


def busy_lst(model: QueueModel, s: float, tol: float = 1e-12) -> float:
    """Busy-period transform E exp(-s * busy) for s >= 0.

    Iterates g <- beta(s + lam * (1 - g)) from g = 0, which converges
    monotonically to the minimal (probabilistically correct) root.
    """
    if s < 0:
        raise ValueError("busy_lst requires s >= 0; probe negative s via "
                         "busy_cramer_abscissa")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    lam = model.arrival_rate
    g = 0.0
    for _ in range(_FP_MAX_ITER):
        g_next = model.service.lst(s + lam * (1.0 - g))
        if abs(g_next - g) < tol:
            return g_next
        g = g_next
    raise IterationLimitError(
        f"busy-period fixed point did not reach tol={tol} after "
        f"{_FP_MAX_ITER} iterations", g)


def busy_mean(model: QueueModel) -> float:
    """Mean busy period b1 / (1 - rho)."""
    return model.service.moment(1) / (1.0 - model.rho)


def cycle_moments(model: QueueModel) -> CycleMoments:
    """Exact first two moments of the regeneration cycle.

    The cycle is an independent sum of an idle period Exp(lam) and a busy
    period, whose second moment is the standard M/G/1 identity
    b2 / (1 - rho)^3.
    """
    lam = model.arrival_rate
    rho = model.rho
    tau_mean = busy_mean(model)
    tau_second = model.service.moment(2) / (1.0 - rho) ** 3
    idle_second = 2.0 / lam**2
    cycle_second = idle_second + 2.0 * (1.0 / lam) * tau_mean + tau_second
    return CycleMoments(
        busy_mean=tau_mean,
        cycle_mean=1.0 / lam + tau_mean,
        cycle_second=cycle_second,
        source="analytic",
    )


def _probe_finite(model: QueueModel, s: float, tol: float = 1e-10,
                  max_iter: int = _FP_MAX_ITER) -> bool:
    """Classify whether the busy-period transform at -s (s > 0) is finite.

    Runs the fixed-point iteration for g = beta(-s + lam * (1 - g)) from 0.
    Divergent when the transform argument crosses the service Cramer
    abscissa, when iterates blow past a growth cap, or when the iteration
    hits the cap while still expanding.
    """
    lam = model.arrival_rate
    delta0 = model.service.cramer_abscissa()
    g = 0.0
    delta_prev = math.inf
    for _ in range(max_iter):
        arg = -s + lam * (1.0 - g)
        if arg <= -delta0 + 1e-12:
            return False
        g_next = model.service.lst(arg)
        if not math.isfinite(g_next) or g_next > _FP_GROWTH_CAP:
            return False
        delta = abs(g_next - g)
        if delta < tol:
            return True
        delta_prev = delta
        g = g_next
    # cap reached: creeping growth counts as divergence, a stalled
    # contraction as (very slow) convergence
    return delta <= delta_prev


def busy_cramer_abscissa(model: QueueModel, tol: float = 1e-4) -> float:
    """Numeric Cramer abscissa of the busy period, by bisection on s > 0.

    Returns the boundary between "fixed point converges" and "diverges"
    within ``tol``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    lo = 0.0
    hi = max(tol, 1e-3)
    while _probe_finite(model, hi):
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("no divergence detected up to s=1e9; "
                               "busy-period abscissa out of probe range")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _probe_finite(model, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
