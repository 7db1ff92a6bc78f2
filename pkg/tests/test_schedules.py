"""Schedule evaluation, invariants, and validation."""

import math

import numpy as np
import pytest

from alleetip.schedules import (
    Constant,
    LogSigmoid,
    Oscillatory,
    Sigmoid,
    Tabulated,
    evaluate,
    log_ratio,
    sup_after,
    validate,
)

SIG = dict(high=0.9, low=0.1, shift=1.0, width=0.1)


def test_sigmoid_midpoint_is_mean_of_levels():
    for direction in ("increasing", "decreasing"):
        s = Sigmoid(direction=direction, **SIG)
        assert evaluate(s, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_sigmoid_saturation_limits():
    inc = Sigmoid(direction="increasing", **SIG)
    assert evaluate(inc, 1e6) == pytest.approx(0.9, abs=1e-12)
    assert evaluate(inc, -1e6) == pytest.approx(0.1, abs=1e-12)
    dec = Sigmoid(direction="decreasing", **SIG)
    assert evaluate(dec, 1e6) == pytest.approx(0.1, abs=1e-12)
    assert evaluate(dec, -1e6) == pytest.approx(0.9, abs=1e-12)


def test_sigmoid_monotonicity_on_dense_grid():
    ts = np.linspace(-3.0, 6.0, 4001)
    inc = np.asarray(Sigmoid(direction="increasing", **SIG).value_at(ts))
    dec = np.asarray(Sigmoid(direction="decreasing", **SIG).value_at(ts))
    assert np.all(np.diff(inc) >= 0.0), "increasing direction must be nondecreasing"
    assert np.all(np.diff(dec) <= 0.0), "decreasing direction must be nonincreasing"


def test_log_sigmoid_is_sigmoid_in_log_space():
    s = LogSigmoid(direction="increasing", **SIG)
    ts = np.linspace(0.0, 3.0, 301)
    ln_a = np.log(np.asarray(s.value_at(ts)))
    ln_hi, ln_lo = math.log(0.9), math.log(0.1)
    expected = (ln_hi - ln_lo) / (1.0 + np.exp(-(ts - 1.0) / 0.1)) + ln_lo
    assert np.abs(ln_a - expected).max() < 1e-12


def test_oscillatory_reference_points():
    o = Oscillatory(amplitude=0.8, base=0.01, period=1.0)
    assert evaluate(o, 0.0) == pytest.approx(0.01, abs=1e-15)
    assert evaluate(o, 0.25) == pytest.approx(0.81, abs=1e-12)


def test_oscillatory_half_period():
    o = Oscillatory(amplitude=0.8, base=0.01, period=1.0)
    ts = np.linspace(0.0, 4.0, 257)
    a0 = np.asarray(o.value_at(ts))
    a1 = np.asarray(o.value_at(ts + 0.5))
    assert np.abs(a0 - a1).max() < 1e-12


def test_tabulated_interpolation_and_clamping():
    tab = Tabulated((0.0, 1.0, 2.0), (0.2, 0.4, 0.3))
    assert evaluate(tab, 0.5) == pytest.approx(0.3)
    assert evaluate(tab, 1.5) == pytest.approx(0.35)
    assert evaluate(tab, -5.0) == pytest.approx(0.2)
    assert evaluate(tab, 9.0) == pytest.approx(0.3)


def test_tabulated_strict_mode_rejects_out_of_range():
    tab = Tabulated((0.0, 1.0), (0.2, 0.4), clamp=False)
    with pytest.raises(ValueError, match="outside knot range"):
        evaluate(tab, 2.0)


@pytest.mark.parametrize(
    "bad",
    [
        lambda: Constant(-1.0),
        lambda: Constant(0.0),
        lambda: Sigmoid(high=0.1, low=0.9, shift=0.0, width=0.1),
        lambda: Sigmoid(high=0.9, low=0.1, shift=0.0, width=0.0),
        lambda: Sigmoid(high=0.9, low=0.1, shift=0.0, width=0.1, direction="up"),
        lambda: Oscillatory(amplitude=-0.1, base=0.1, period=1.0),
        lambda: Oscillatory(amplitude=0.1, base=0.0, period=1.0),
        lambda: Oscillatory(amplitude=0.1, base=0.1, period=0.0),
        lambda: Tabulated((0.0, 0.0), (0.1, 0.2)),
        lambda: Tabulated((0.0, 1.0), (0.1, -0.2)),
        lambda: Tabulated((0.0,), (0.1,)),
    ],
)
def test_construction_invariants(bad):
    with pytest.raises(ValueError):
        bad()


def test_log_ratio_constant():
    assert log_ratio(Constant(0.5), 1.0, 0.0) == pytest.approx(math.log(2.0), abs=1e-15)


def test_log_ratio_oscillatory_at_zero():
    # direct evaluation: ln(1 / 0.01)
    got = log_ratio(Oscillatory(amplitude=0.8, base=0.01, period=1.0), 1.0, 0.0)
    assert got == pytest.approx(math.log(1.0 / 0.01), abs=1e-12)


def test_log_ratio_vanishes_as_threshold_meets_capacity():
    vals = [log_ratio(Constant(1.0 - d), 1.0, 0.0) for d in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] > 0.0


def test_log_ratio_raises_on_invariant_breach():
    with pytest.raises(ValueError, match="reaches capacity"):
        log_ratio(Constant(1.5), 1.0, 0.0)


def test_validate_accepts_and_rejects():
    assert validate(Constant(0.5), 1.0, horizon=10.0).ok
    report = validate(Constant(1.5), 1.0, horizon=10.0)
    assert not report.ok and report.first_violation_time == 0.0

    report = validate(Oscillatory(amplitude=1.2, base=0.01, period=1.0), 1.0, horizon=2.0)
    assert not report.ok
    # peak of the first oscillation sits at a quarter period
    assert abs(report.first_violation_time - 0.25) < 0.1


def test_validate_positive_everywhere_implies_positive_log_ratio():
    rng = np.random.default_rng(7)
    from conftest import random_schedule

    for _ in range(50):
        sched = random_schedule(rng)
        assert validate(sched, 1.0, horizon=10.0).ok
        ts = np.linspace(0.0, 10.0, 501)
        assert np.all(np.asarray(log_ratio(sched, 1.0, ts)) > 0.0)


def test_sup_after_bounds_every_kind():
    rng = np.random.default_rng(11)
    from conftest import random_schedule

    for _ in range(50):
        sched = random_schedule(rng)
        t0 = float(rng.uniform(0.0, 6.0))
        bound = sup_after(sched, t0)
        ts = np.linspace(t0, t0 + 50.0, 2001)
        assert np.asarray(sched.value_at(ts)).max() <= bound + 1e-12
