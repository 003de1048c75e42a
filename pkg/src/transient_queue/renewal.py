"""Numerical renewal theory on a uniform time grid.

The renewal function here uses the convention that the zeroth convolution
power is included, so H(0) = 1 and dH carries a unit atom at the origin.
Increments of the driving CDF are placed at cell midpoints (values at the
two neighbouring grid points averaged), which removes the O(step) bias of
naive right-endpoint placement while keeping the recursion monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .busy_period import QueueModel, busy_mean

COARSE_GRID_WARNING = "coarse_grid"


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = i * step, i = 0 .. n_points-1."""

    step: float
    n_points: int

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"grid step must be > 0, got {self.step}")
        if self.n_points < 2:
            raise ValueError(f"grid needs >= 2 points, got {self.n_points}")

    def times(self) -> np.ndarray:
        return self.step * np.arange(self.n_points)

    @property
    def horizon(self) -> float:
        return self.step * (self.n_points - 1)


@dataclass(frozen=True)
class Curve:
    """A function sampled on a TimeGrid, with optional pointwise stderr."""

    grid: TimeGrid
    values: np.ndarray
    stderr: Optional[np.ndarray] = None
    warnings: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"values shape {values.shape} does not match grid "
                f"({self.grid.n_points} points)")
        if self.stderr is not None:
            stderr = np.asarray(self.stderr, dtype=float)
            object.__setattr__(self, "stderr", stderr)
            if stderr.shape != values.shape:
                raise ValueError("stderr length does not match values")
            if np.any(stderr < 0):
                raise ValueError("stderr must be nonnegative")

    def times(self) -> np.ndarray:
        return self.grid.times()


def write_curve_csv(curve: Curve, path) -> None:
    """Serialize as ``t,value[,stderr]`` rows at full double precision."""
    with open(path, "w", newline="") as fh:
        fh.write(_curve_csv_text(curve))


def _curve_csv_text(curve: Curve) -> str:
    t = curve.times()
    lines = []
    if curve.stderr is None:
        lines.append("t,value")
        for ti, vi in zip(t, curve.values):
            lines.append(f"{ti:.17g},{vi:.17g}")
    else:
        lines.append("t,value,stderr")
        for ti, vi, si in zip(t, curve.values, curve.stderr):
            lines.append(f"{ti:.17g},{vi:.17g},{si:.17g}")
    return "\n".join(lines) + "\n"


def read_curve_csv(path) -> Curve:
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names or ()
    if "t" not in names:
        raise ValueError(f"curve file {path} has no 't' column")
    t = np.atleast_1d(data["t"])
    value_col = next((c for c in ("value", "phi_exact") if c in names), None)
    if value_col is None:
        raise ValueError(
            f"curve file {path} has no 'value' (or 'phi_exact') column")
    values = np.atleast_1d(data[value_col])
    stderr = np.atleast_1d(data["stderr"]) if "stderr" in names else None
    if len(t) < 2:
        raise ValueError(f"curve file {path} has fewer than two rows")
    step = t[1] - t[0]
    if not np.allclose(np.diff(t), step, rtol=1e-9, atol=1e-12):
        raise ValueError(f"curve file {path} is not on a uniform grid")
    return Curve(TimeGrid(step=float(step), n_points=len(t)), values, stderr)


def default_grid(model: QueueModel, horizon: Optional[float] = None) -> TimeGrid:
    """Grid resolving both the idle and the busy timescale.

    step = min(1/(20 lam), b1/20), horizon defaults to 80 mean busy periods.
    """
    b1 = model.service.moment(1)
    step = min(1.0 / (20.0 * model.arrival_rate), b1 / 20.0)
    if horizon is None:
        horizon = 80.0 * busy_mean(model)
    n_points = int(math.floor(horizon / step + 1e-9)) + 1
    return TimeGrid(step=step, n_points=n_points)


def _validate_cdf(values: np.ndarray) -> None:
    if abs(values[0]) > 1e-12:
        raise ValueError(f"cycle CDF must have F(0)=0, got {values[0]!r}")
    if np.any(np.diff(values) < -1e-12):
        raise ValueError("cycle CDF must be nondecreasing")
    if np.any(values > 1.0 + 1e-12):
        raise ValueError("cycle CDF must not exceed 1")


def renewal_function(cycle_cdf: Curve) -> Curve:
    """Renewal function H (including the zeroth term, H(0)=1) for the cycle CDF.

    Solves the discretized renewal equation
    H(t_i) = 1 + sum_j H(t_i - t_j + step/2) * (F(t_j) - F(t_{j-1}))
    with the half-step evaluation realized by averaging neighbouring grid
    values of H; the j=1 increment makes the recursion weakly implicit.
    """
    F = cycle_cdf.values
    _validate_cdf(F)
    grid = cycle_cdf.grid
    n = grid.n_points
    dF = np.empty(n)
    dF[0] = 0.0
    dF[1:] = np.diff(F)
    H = np.empty(n)
    H[0] = 1.0
    pivot = 1.0 - 0.5 * dF[1]
    for i in range(1, n):
        past = H[i - 1 :: -1]  # H_{i-1}, ..., H_0
        s_lo = np.dot(dF[1 : i + 1], past)            # mass at left ends
        s_hi = np.dot(dF[2 : i + 1], past[: i - 1])   # mass at right ends, j >= 2
        H[i] = (1.0 + 0.5 * (s_lo + s_hi)) / pivot

    warnings = ()
    # coarse-grid guard: compare step against the mean cycle length implied
    # by the (possibly truncated) CDF itself
    mean_est = grid.step * float(np.sum(1.0 - F))
    if mean_est > 0 and grid.step > mean_est / 10.0:
        warnings = (COARSE_GRID_WARNING,)
    return Curve(grid, H, warnings=warnings)


def renewal_residual(H: Curve, cycle_cdf: Curve) -> np.ndarray:
    """Residual of the discrete renewal equation actually solved (== 0)."""
    F = cycle_cdf.values
    n = H.grid.n_points
    dF = np.empty(n)
    dF[0] = 0.0
    dF[1:] = np.diff(F)
    h = H.values
    res = np.empty(n)
    res[0] = h[0] - 1.0
    for i in range(1, n):
        past = h[i - 1 :: -1]
        s_lo = np.dot(dF[1 : i + 1], past)
        s_hi = np.dot(dF[2 : i + 1], past[: i - 1]) + dF[1] * h[i]
        res[i] = h[i] - 1.0 - 0.5 * (s_lo + s_hi)
    return res


def renewal_density(H: Curve) -> Curve:
    """Central-difference derivative of H (one-sided at the endpoints)."""
    return Curve(H.grid, np.gradient(H.values, H.grid.step))


def asymptote_remainder(H: Curve, cm) -> tuple[Curve, Curve]:
    """Split H into its linear asymptote and the decaying remainder.

    asymptote(t) = t / cycle_mean + cycle_second / (2 cycle_mean^2);
    remainder = H - asymptote.
    """
    t = H.times()
    asym = t / cm.cycle_mean + cm.cycle_second / (2.0 * cm.cycle_mean**2)
    return Curve(H.grid, asym), Curve(H.grid, H.values - asym)


def phi_via_renewal(q: Curve, H: Curve) -> Curve:
    """Stieltjes convolution phi(t) = int q(t-y) dH(y) over [0, t].

    dH contributes a unit atom at y=0 (so phi >= q pointwise) plus midpoint
    increments of H.  When q carries stderr, the same nonnegative weights
    are applied to it.
    """
    if q.grid != H.grid:
        raise ValueError("q and H must share one grid")
    n = q.grid.n_points
    dH = np.empty(n)
    dH[0] = 0.0
    dH[1:] = np.diff(H.values)
    if np.any(dH < -1e-12):
        raise ValueError("H must be nondecreasing")

    dH_next = np.empty(n)
    dH_next[:-1] = dH[1:]
    dH_next[-1] = 0.0

    def convolve(vec: np.ndarray) -> np.ndarray:
        full = np.convolve(vec, dH)
        lo = full[:n]                       # sum_j vec_{i-j}   dH_j, j <= i
        hi = np.empty(n)
        hi[:-1] = full[1:n]                 # sum_j vec_{i-j+1} dH_j, j <= i+1
        hi[-1] = full[n] if len(full) > n else 0.0
        hi -= vec[0] * dH_next              # drop the j = i+1 cell (above t_i)
        return vec + 0.5 * (lo + hi)

    values = convolve(q.values)
    stderr = convolve(q.stderr) if q.stderr is not None else None
    return Curve(q.grid, values, stderr=stderr)
