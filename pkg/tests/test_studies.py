"""Convergence ladders and scheme-comparison tables (spot checks).

The full published-table reproduction lives in the acceptance suite;
these tests pin the machinery on cheap configurations.
"""

import math

import pytest

from alleetip.model import ModelParams
from alleetip.schedules import Constant, Oscillatory, Sigmoid
from alleetip.studies import (
    extinction_table,
    state_convergence_study,
    tau_convergence_study,
)

C05 = Constant(0.5)
SIG_INC = Sigmoid(high=0.9, low=0.1, shift=1.0, width=0.1, direction="increasing")
OSC = Oscillatory(amplitude=0.8, base=0.01, period=1.0)
P32 = ModelParams(r=1.0, K=1.0, x0=0.32)


class TestTauStudy:
    def test_closed_form_reference_errors(self):
        rows = tau_convergence_study(P32, C05, [1e-2, 1e-3])
        euler = {r.h: r for r in rows["euler"]}
        cub = {r.h: r for r in rows["cubature"]}
        assert euler[1e-2].error == pytest.approx(1.023e-1, rel=0.02)
        assert euler[1e-3].error == pytest.approx(4.227e-2, rel=0.02)
        assert cub[1e-2].error == pytest.approx(1.773e-2, rel=0.02)
        assert cub[1e-3].error == pytest.approx(1.726e-3, rel=0.02)

    def test_rate_definition(self):
        rows = tau_convergence_study(P32, C05, [1e-2, 1e-3])
        for scheme in ("euler", "cubature"):
            first, last = rows[scheme]
            assert last.rate is None
            assert first.rate == pytest.approx(
                math.log10(first.error / last.error), rel=1e-12
            )

    def test_single_rung_has_no_rate(self):
        rows = tau_convergence_study(P32, C05, [1e-2])
        assert rows["euler"][0].rate is None

    def test_exact_engine_reference_agrees_with_closed_form(self):
        closed = tau_convergence_study(P32, C05, [1e-2])
        engine = tau_convergence_study(P32, C05, [1e-2], reference="exact-engine", horizon=3.0)
        assert engine["cubature"][0].error == pytest.approx(
            closed["cubature"][0].error, abs=1e-6
        )

    def test_closed_form_requires_constant_schedule(self):
        with pytest.raises(ValueError):
            tau_convergence_study(P32, SIG_INC, [1e-2])

    def test_nonextinct_configuration_rejected(self):
        with pytest.raises(ValueError, match="not finite"):
            tau_convergence_study(ModelParams(1.0, 1.0, 0.6), C05, [1e-2])

    def test_decreasing_h_list_enforced(self):
        with pytest.raises(ValueError):
            tau_convergence_study(P32, C05, [1e-3, 1e-2])


class TestStateStudy:
    def test_worst_case_errors_match_published_scale(self):
        rows = state_convergence_study(P32, C05, [1e-2, 1e-3], t_end=10.0)
        euler = {r.h: r for r in rows["euler"]}
        cub = {r.h: r for r in rows["cubature"]}
        assert euler[1e-2].error == pytest.approx(1.535e-3, rel=0.02)
        assert cub[1e-2].error == pytest.approx(2.206e-3, rel=0.02)
        assert euler[1e-2].rate == pytest.approx(1.0, abs=0.005)

    def test_error_ordering_reverses_for_smaller_start(self):
        big = state_convergence_study(P32, C05, [1e-2], t_end=10.0)
        small = state_convergence_study(
            ModelParams(1.0, 1.0, 0.16), C05, [1e-2], t_end=10.0
        )
        assert big["euler"][0].error < big["cubature"][0].error
        assert small["euler"][0].error > small["cubature"][0].error

    def test_mean_metric_available_and_smaller(self):
        worst = state_convergence_study(P32, C05, [1e-2], t_end=10.0, metric="max")
        mean = state_convergence_study(P32, C05, [1e-2], t_end=10.0, metric="mean")
        for scheme in ("euler", "cubature"):
            assert mean[scheme][0].error < worst[scheme][0].error

    def test_zero_window_rejected(self):
        with pytest.raises(ValueError):
            state_convergence_study(P32, C05, [1e-2], t_end=0.0)


class TestExtinctionTable:
    def test_sigmoid_row(self):
        rows = extinction_table(P32, SIG_INC, [0.12], 1e-4, horizon=12.0)
        row = rows[0]
        assert row.tau_euler == pytest.approx(1.5756, abs=2.0001e-4)
        assert row.tau_cubature == pytest.approx(1.5910, abs=2.0001e-4)
        assert row.difference == pytest.approx(row.tau_euler - row.tau_cubature, rel=1e-12)
        assert row.difference < 0.0

    def test_oscillatory_gap_magnitude(self):
        rows = extinction_table(
            P32, OSC, [0.04], 1e-3, horizon=5.0, euler_sampling="step-start"
        )
        assert abs(rows[0].difference) == pytest.approx(0.043, rel=0.10)

    def test_survivor_flagged_infinite(self):
        rows = extinction_table(P32, C05, [0.32, 0.6], 1e-3, horizon=3.0)
        assert math.isfinite(rows[0].tau_euler)
        assert rows[1].tau_euler == math.inf
        assert rows[1].tau_cubature == math.inf
        assert math.isnan(rows[1].difference)
