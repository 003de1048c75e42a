"""Independent oracles the tests check the library against.

Everything here is deliberately built from different primitives than the
code under test: power series instead of backward recurrences, an ODE
integrator instead of Bessel sums, closed forms instead of fixed points,
and a plain cycle-by-cycle walk instead of the vectorized path sampler.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

from transient_queue import Curve, McConfig, QueueModel, simulate_cycle, workload_at
from transient_queue.simulate import _stream, _DOMAIN_PHI


def bessel_series_scaled(n: int, x: float) -> float:
    """e^{-x} I_n(x) from the defining power series, summed with fsum."""
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    terms = []
    k = 0
    while True:
        log_term = ((2 * k + n) * math.log(x / 2.0)
                    - math.lgamma(k + 1) - math.lgamma(k + n + 1))
        terms.append(math.exp(log_term) if log_term > -745.0 else 0.0)
        if k > 2 and terms[-1] < 1e-25 * max(math.fsum(terms), 1e-300):
            break
        k += 1
        if k > 100_000:
            raise RuntimeError("series oracle did not converge")
    return math.exp(-x) * math.fsum(terms)


def mm1_busy_lst_closed_form(lam: float, mu: float, s: float) -> float:
    """Minimal root of the M/M/1 busy-period quadratic."""
    a = lam + mu + s
    return (a - math.sqrt(a * a - 4.0 * lam * mu)) / (2.0 * lam)


def mm1_busy_abscissa_closed_form(lam: float, mu: float) -> float:
    """Where the busy-period quadratic loses its real root."""
    return lam + mu - 2.0 * math.sqrt(lam * mu)


def birth_death_pn(lam: float, mu: float, t: float,
                   n_states: int = 200) -> np.ndarray:
    """State probabilities of the truncated birth-death chain at time t.

    Runge-Kutta integration (DOP853) of the forward equations with a
    reflecting upper boundary, from an empty system.
    """
    def rhs(_t, p):
        dp = np.empty_like(p)
        dp[0] = mu * p[1] - lam * p[0]
        dp[1:-1] = lam * p[:-2] + mu * p[2:] - (lam + mu) * p[1:-1]
        dp[-1] = lam * p[-2] - mu * p[-1]
        return dp

    p0 = np.zeros(n_states)
    p0[0] = 1.0
    sol = solve_ivp(rhs, (0.0, t), p0, method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"ODE oracle failed: {sol.message}")
    return sol.y[:, -1]


def birth_death_phi(lam: float, mu: float, t: float,
                    n_states: int = 400) -> float:
    """Mean workload E N(t) / mu from the ODE oracle."""
    p = birth_death_pn(lam, mu, t, n_states)
    return float(np.dot(p, np.arange(n_states))) / mu


def poisson_renewal(t):
    """Renewal function (zeroth term included) for Exp(1) cycles."""
    return 1.0 + np.asarray(t, dtype=float)


def erlang2_renewal(t):
    """Renewal function (zeroth term included) for Erlang(2, rate 1) cycles."""
    t = np.asarray(t, dtype=float)
    return 1.0 + t / 2.0 - 0.25 + np.exp(-2.0 * t) / 4.0


def phi_by_cycle_concatenation(model: QueueModel, cfg: McConfig) -> Curve:
    """Mean workload estimated by walking explicit regeneration cycles.

    Independent of the vectorized path sampler in estimate_phi: cycles are
    simulated one by one and the workload is read off each CyclePath.
    Uses its own stream domain offset so draws never coincide.
    """
    times = cfg.grid.times()
    n = len(times)
    s1 = np.zeros(n)
    s2 = np.zeros(n)
    for rep in range(cfg.replications):
        rng = _stream(cfg.base_seed, _DOMAIN_PHI + 1000, rep)
        w = np.zeros(n)
        start = 0.0
        i = 0
        while i < n:
            path = simulate_cycle(model, rng)
            end = start + path.cycle_length
            while i < n and times[i] < end:
                w[i] = workload_at(path, times[i] - start)
                i += 1
            start = end
        s1 += w
        s2 += w * w
    mean = s1 / cfg.replications
    var = np.maximum(s2 - cfg.replications * mean**2, 0.0) / max(cfg.replications - 1, 1)
    return Curve(cfg.grid, mean, stderr=np.sqrt(var / cfg.replications))
