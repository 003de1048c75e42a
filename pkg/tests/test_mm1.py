import math

import numpy as np
import pytest
import scipy.special

from transient_queue import (Mm1Model, SeriesTruncationError, TimeGrid,
                             bessel_i_scaled, bessel_i_scaled_array,
                             log_bessel_i_scaled, phi_asymptotic, phi_curve,
                             phi_exact, pn_array, pn_t, theoretical_rate)

from oracles import bessel_series_scaled, birth_death_pn

MM1 = Mm1Model(0.5, 1.0)


# ------------------------------------------------------------------ bessel

def test_bessel_trivial_values():
    assert bessel_i_scaled(0, 0.0) == 1.0
    assert bessel_i_scaled(3, 0.0) == 0.0
    # e^{-1} * 1.26606587775...; frozen from the power-series oracle
    assert bessel_i_scaled(0, 1.0) == pytest.approx(0.4657596075936404, abs=1e-12)


@pytest.mark.parametrize("x", [0.1, 1.0, 10.0, 30.0])
def test_bessel_against_series(x):
    arr = bessel_i_scaled_array(60, x)
    for n in range(61):
        assert arr[n] == pytest.approx(bessel_series_scaled(n, x), abs=1e-13)


@pytest.mark.parametrize("x", [0.3, 3.0, 80.0, 500.0])
def test_bessel_against_scipy(x):
    arr = bessel_i_scaled_array(50, x)
    ref = scipy.special.ive(np.arange(51), x)
    assert np.abs(arr - ref).max() < 1e-13


def test_bessel_normalization_identity():
    # I~_0 + 2 sum I~_n = 1 with the (1,2,2,...) weights
    for x in (0.5, 7.0, 120.0):
        arr = bessel_i_scaled_array(int(x + 40 * math.sqrt(x) + 50), x)
        assert arr[0] + 2 * arr[1:].sum() == pytest.approx(1.0, abs=1e-12)


def test_log_bessel_matches_miller():
    for x in (0.5, 5.0, 50.0, 300.0):
        direct = bessel_i_scaled_array(60, x)
        logged = np.exp(log_bessel_i_scaled(60, x))
        assert np.abs(logged / direct - 1.0).max() < 1e-12


def test_log_bessel_beyond_underflow():
    # values underflow around n ~ 800 at x=10; the log form keeps going
    logs = log_bessel_i_scaled(2000, 10.0)
    assert np.all(np.isfinite(logs))
    assert np.all(np.diff(logs) < 0)
    # spot check: I_n(x) ~ (x/2)^n / n! * (1 + (x/2)^2/(n+1) + ...)
    n = 1500
    expected = (n * math.log(5.0) - math.lgamma(n + 1) - 10.0
                + math.log1p(25.0 / (n + 1)))
    assert logs[n] == pytest.approx(expected, abs=1e-3)


def test_bessel_input_validation():
    with pytest.raises(ValueError):
        bessel_i_scaled_array(10, -1.0)
    with pytest.raises(ValueError):
        bessel_i_scaled_array(-1, 1.0)


def test_generating_identity_at_sqrt_rho():
    # sum_n y^n I~_n + sum_n y^{-n} I~_n reproduces e^{(x/2)(y+1/y) - x}
    lam, mu = 0.5, 1.0
    y = math.sqrt(mu / lam)
    for t in (1.0, 5.0, 20.0):
        x = 2.0 * math.sqrt(lam * mu) * t
        n_hi = int(x + 40 * math.sqrt(x) + 60)
        arr = bessel_i_scaled_array(n_hi, x)
        n = np.arange(n_hi + 1)
        total = float(np.dot(y**n, arr) + np.dot(y ** (-n[1:]), arr[1:]))
        expected = math.exp((x / 2.0) * (y + 1.0 / y) - x)
        assert total == pytest.approx(expected, rel=1e-10)


# ---------------------------------------------------------------------- pn

def test_pn_initial_condition():
    assert pn_t(MM1, 0, 0.0) == 1.0
    assert pn_t(MM1, 4, 0.0) == 0.0


def test_pn_against_ode_oracle():
    oracle = birth_death_pn(0.5, 1.0, 5.0)
    mine = pn_array(MM1, 5.0, 50)
    assert np.abs(mine - oracle[:51]).max() < 1e-8


def test_pn_long_time_limit():
    # stationary rho^n (1-rho), reached within the decay-term tolerance
    assert pn_t(MM1, 1, 200.0) == pytest.approx(0.25, abs=1e-6)
    assert pn_t(MM1, 0, 200.0) == pytest.approx(0.5, abs=1e-6)


def test_pn_normalization():
    for t in (0.1, 1.0, 5.0, 20.0, 100.0):
        x = 2.0 * math.sqrt(0.5) * t
        n_hi = int(math.ceil(x + 40.0 * math.sqrt(x) + 60.0))
        p = pn_array(MM1, t, n_hi)
        assert abs(p.sum() - 1.0) < 1e-10


def test_pn_in_unit_interval():
    for t in (0.5, 2.0, 10.0, 50.0):
        p = pn_array(MM1, t, 80)
        assert np.all(p >= 0.0)
        assert np.all(p <= 1.0)


def test_pn_other_loads_against_oracle():
    for lam, mu in ((0.2, 1.0), (0.9, 1.2)):
        model = Mm1Model(lam, mu)
        oracle = birth_death_pn(lam, mu, 4.0, n_states=250)
        mine = pn_array(model, 4.0, 40)
        assert np.abs(mine - oracle[:41]).max() < 1e-8


def test_pn_rejects_negative():
    with pytest.raises(ValueError):
        pn_t(MM1, -1, 1.0)
    with pytest.raises(ValueError):
        pn_t(MM1, 0, -1.0)


# --------------------------------------------------------------------- phi

def test_phi_exact_at_zero():
    assert phi_exact(MM1, 0.0) == 0.0


def test_phi_exact_stationary_limits():
    assert phi_exact(MM1, 200.0) == pytest.approx(1.0, abs=1e-6)
    assert phi_exact(MM1, 200.0, paper_literal=True) == pytest.approx(
        1.5, abs=1e-6)


def test_phi_gap_monotone_decay():
    ts = np.arange(5.0, 60.0, 2.5)
    gaps = np.abs([phi_exact(MM1, float(t)) - 1.0 for t in ts])
    assert np.all(np.diff(gaps) < 0)


def test_phi_curve_matches_pointwise():
    grid = TimeGrid(0.5, 7)
    curve = phi_curve(MM1, grid)
    for i, t in enumerate(grid.times()):
        assert curve.values[i] == phi_exact(MM1, float(t))


def test_phi_truncation_cap():
    with pytest.raises(SeriesTruncationError):
        phi_exact(MM1, 3.0e5)


# -------------------------------------------------------------- asymptotic

def test_asymptotic_coefficient_value():
    # direct arithmetic on the printed rational function at rho = 1/2
    u = math.sqrt(0.5)
    numerator = 1 + 3 * u + 4 * 0.5 + 4 * 0.5 * u + 3 * 0.25 - 0.25 * u
    denominator = 1.0 * (1 - u - 0.25 + 0.25 * u)
    assert numerator == pytest.approx(7.10876, abs=5e-6)
    assert denominator == pytest.approx(0.21967, abs=5e-6)
    coefficient = numerator / denominator
    assert coefficient == pytest.approx(32.36, abs=0.01)
    # the implementation carries exactly this coefficient
    t = 10.0
    prefactor = (math.exp(-theoretical_rate(MM1) * t)
                 / math.sqrt(4 * math.pi * math.sqrt(0.5) * t))
    assert phi_asymptotic(MM1, t) == pytest.approx(1.5 + prefactor * coefficient,
                                                   rel=1e-12)


def test_asymptotic_long_time_limit():
    assert phi_asymptotic(MM1, 1e6) == pytest.approx(1.5, abs=1e-12)


def test_asymptotic_requires_positive_t():
    with pytest.raises(ValueError):
        phi_asymptotic(MM1, 0.0)


def test_decay_exponent_value():
    assert theoretical_rate(MM1) == pytest.approx(0.08578644, abs=1e-8)
    assert theoretical_rate(Mm1Model(0.25, 1.0)) == pytest.approx(0.25)
    # critical slowing: rate vanishes as rho -> 1
    assert theoretical_rate(Mm1Model(0.999, 1.0)) < 1e-6


def test_asymptotic_approaches_exact_literal():
    # both tend to the same constant, so the difference dies out; the
    # printed 1/sqrt(t) coefficient overstates the true remainder, which
    # carries an extra t^{-1} factor, so no ratio check is made here
    diffs = [abs(phi_asymptotic(MM1, t) - phi_exact(MM1, t, paper_literal=True))
             for t in (25.0, 50.0, 100.0, 200.0)]
    assert all(d1 > d2 for d1, d2 in zip(diffs, diffs[1:]))
    assert diffs[-1] < 1e-7


def test_model_validation():
    with pytest.raises(ValueError):
        Mm1Model(1.0, 1.0)
    with pytest.raises(ValueError):
        Mm1Model(-0.5, 1.0)
