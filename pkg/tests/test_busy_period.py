import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transient_queue import (CycleMoments, Deterministic, Erlang, Exponential,
                             HyperExponential, QueueModel, Uniform,
                             busy_cramer_abscissa, busy_lst, busy_mean,
                             cycle_moments, simulated_cycle_moments)
from transient_queue.busy_period import _probe_finite

from oracles import mm1_busy_abscissa_closed_form, mm1_busy_lst_closed_form

MM1 = QueueModel(0.5, Exponential(1.0))

STABLE_MODELS = [
    MM1,
    QueueModel(0.8, Exponential(1.0)),
    QueueModel(0.5, Deterministic(1.0)),
    QueueModel(0.3, Erlang(2, 2.0)),
    QueueModel(0.4, HyperExponential((0.3, 0.7), (1.0, 2.0))),
    QueueModel(0.6, Uniform(0.5, 1.5)),
]


def test_queue_model_rejects_unstable():
    with pytest.raises(ValueError, match="rho"):
        QueueModel(2.0, Exponential(1.0))
    with pytest.raises(ValueError, match="rho"):
        QueueModel(1.0, Deterministic(1.0))


def test_busy_lst_examples():
    assert busy_lst(MM1, 0.0) == pytest.approx(1.0, abs=1e-10)
    for s in (0.1, 1.0):
        assert busy_lst(MM1, s) == pytest.approx(
            mm1_busy_lst_closed_form(0.5, 1.0, s), abs=1e-10)


def test_busy_lst_rejects_negative_s():
    with pytest.raises(ValueError):
        busy_lst(MM1, -0.01)


@pytest.mark.parametrize("model", STABLE_MODELS,
                         ids=lambda m: m.service.spec_string())
def test_busy_lst_decreasing_and_bounded(model):
    s_grid = np.linspace(0.0, 5.0, 26)
    values = [busy_lst(model, float(s)) for s in s_grid]
    assert all(0.0 < v <= 1.0 + 1e-12 for v in values)
    assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("model", STABLE_MODELS,
                         ids=lambda m: m.service.spec_string())
def test_busy_lst_slope_matches_mean(model):
    h = 1e-5
    slope = -(busy_lst(model, h, tol=1e-14) - busy_lst(model, 0.0, tol=1e-14)) / h
    assert slope == pytest.approx(busy_mean(model), rel=1e-3)


def test_busy_mean_examples():
    assert busy_mean(MM1) == 2.0
    assert busy_mean(QueueModel(0.5, Deterministic(1.0))) == 2.0
    assert busy_mean(QueueModel(0.8, Exponential(1.0))) == pytest.approx(5.0)


def test_cycle_moments_mm1():
    cm = cycle_moments(MM1)
    assert cm.cycle_mean == pytest.approx(4.0)
    assert cm.cycle_mean == pytest.approx(1.0 / MM1.arrival_rate + cm.busy_mean,
                                          abs=1e-12)
    assert cm.cycle_second == pytest.approx(32.0)
    assert cm.cycle_second / (2 * cm.cycle_mean**2) == pytest.approx(1.0)
    assert cm.source == "analytic"


@pytest.mark.parametrize("model", [MM1, QueueModel(0.5, Deterministic(1.0))],
                         ids=("mm1", "md1"))
def test_cycle_moments_vs_simulation(model):
    cm = cycle_moments(model)
    sim = simulated_cycle_moments(model, 100_000, seed=314)
    n = 100_000
    # crude stderr for the second moment via the fourth-moment bound of a
    # cycle sample; generous factors keep this a 3-sigma-style check
    assert sim.busy_mean == pytest.approx(cm.busy_mean, rel=0.05)
    assert sim.cycle_mean == pytest.approx(cm.cycle_mean, rel=0.03)
    assert sim.cycle_second == pytest.approx(cm.cycle_second, rel=0.15)
    assert sim.source == "simulated"


def test_cycle_moments_jensen_guard():
    with pytest.raises(ValueError):
        CycleMoments(busy_mean=1.0, cycle_mean=4.0, cycle_second=15.0,
                     source="analytic")


def test_abscissa_examples():
    got = busy_cramer_abscissa(MM1, tol=1e-5)
    assert got == pytest.approx(mm1_busy_abscissa_closed_form(0.5, 1.0),
                                abs=1e-4)
    got = busy_cramer_abscissa(QueueModel(0.25, Exponential(1.0)), tol=1e-5)
    assert got == pytest.approx(0.25, abs=1e-4)


def test_probe_finite_at_zero():
    for model in STABLE_MODELS:
        assert _probe_finite(model, 1e-12)


@pytest.mark.parametrize("model", [MM1, QueueModel(0.5, Deterministic(1.0)),
                                   QueueModel(0.3, Erlang(2, 2.0))],
                         ids=("mm1", "md1", "erlang"))
def test_abscissa_brackets_divergence(model):
    absc = busy_cramer_abscissa(model, tol=1e-5)
    assert _probe_finite(model, 0.9 * absc)
    assert not _probe_finite(model, 1.1 * absc)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(0.05, 0.9), mu=st.floats(0.95, 4.0), s=st.floats(0.0, 4.0))
def test_busy_lst_matches_closed_form_mm1(lam, mu, s):
    if lam / mu >= 0.95:
        return
    model = QueueModel(lam, Exponential(mu))
    assert busy_lst(model, s, tol=1e-13) == pytest.approx(
        mm1_busy_lst_closed_form(lam, mu, s), abs=1e-9)
