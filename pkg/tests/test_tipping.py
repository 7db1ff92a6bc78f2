"""Crossing detection, the accumulated-impact inequality, and verdicts."""

import math

import numpy as np
import pytest

from alleetip.integrators import Trajectory, cubature_integrate
from alleetip.model import ModelParams
from alleetip.schedules import Constant, Oscillatory, Sigmoid
from alleetip.tipping import basin_scan, classify, detect_crossings, threshold_check

SIG_INC = Sigmoid(high=0.9, low=0.1, shift=1.0, width=0.1, direction="increasing")
OSC = Oscillatory(amplitude=0.8, base=0.01, period=1.0)


def make_traj(times, states):
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    return Trajectory(times, states, None, None, "cubature")


class TestDetectCrossings:
    def test_no_crossing_at_capacity(self):
        traj = cubature_integrate(ModelParams(1.0, 1.0, 1.0), SIG_INC, 1e-3, 5.0)
        assert detect_crossings(traj, SIG_INC) == []

    def test_single_downward_crossing_before_extinction(self):
        traj = cubature_integrate(ModelParams(1.0, 1.0, 0.40), SIG_INC, 1e-3, 10.0)
        crossings = detect_crossings(traj, SIG_INC)
        downward = [c for c in crossings if c.direction == "downward"]
        assert len(downward) == 1
        assert traj.extinction_time == pytest.approx(9.0831, abs=0.02)
        assert downward[0].time < traj.extinction_time

    def test_oscillatory_has_multiple_crossings(self):
        traj = cubature_integrate(ModelParams(1.0, 1.0, 0.24), OSC, 1e-4, 5.0)
        crossings = detect_crossings(traj, OSC)
        assert len(crossings) > 2
        directions = {c.direction for c in crossings}
        assert directions == {"downward", "upward"}

    def test_interpolated_crossing_time(self):
        # state falls through a constant threshold 0.5 between t=1 and t=2
        traj = make_traj([0.0, 1.0, 2.0], [0.8, 0.6, 0.4])
        crossings = detect_crossings(traj, Constant(0.5))
        assert len(crossings) == 1
        assert crossings[0].direction == "downward"
        assert crossings[0].time == pytest.approx(1.5)

    def test_grazing_touch_not_counted(self):
        traj = make_traj([0.0, 1.0, 2.0], [0.8, 0.5, 0.8])
        assert detect_crossings(traj, Constant(0.5)) == []

    def test_pass_through_exact_grid_value_counted_once(self):
        traj = make_traj([0.0, 1.0, 2.0], [0.8, 0.5, 0.2])
        crossings = detect_crossings(traj, Constant(0.5))
        assert len(crossings) == 1
        assert crossings[0].direction == "downward"

    def test_empty_trajectory_rejected(self):
        with pytest.raises(ValueError):
            detect_crossings(make_traj([], []), Constant(0.5))


class TestThresholdCheck:
    def test_constant_analytic_true_case(self):
        # cumulative impact saturates at 1/ln2 = 1.4427 > 1/(-ln 0.32) = 0.8776
        report = threshold_check(ModelParams(1.0, 1.0, 0.32), Constant(0.5), horizon=60.0)
        assert report.satisfied and report.conclusive
        assert report.l_horizon == pytest.approx(1.0 / math.log(2.0), abs=1e-6)
        assert report.margin == pytest.approx(
            1.0 / math.log(2.0) - 1.0 / (-math.log(0.32)), abs=1e-6
        )

    def test_constant_analytic_false_case(self):
        report = threshold_check(ModelParams(1.0, 1.0, 0.6), Constant(0.5), horizon=60.0)
        assert not report.satisfied and report.conclusive
        assert report.margin < 0.0

    def test_near_capacity_start_always_false(self):
        report = threshold_check(ModelParams(1.0, 1.0, 1.0 - 1e-9), Constant(0.5), horizon=60.0)
        assert not report.satisfied

    def test_short_horizon_is_inconclusive(self):
        # for x0 just above the tipping set, a short window cannot decide
        report = threshold_check(ModelParams(1.0, 1.0, 0.44), SIG_INC, horizon=10.0)
        assert not report.satisfied
        assert not report.conclusive
        long_report = threshold_check(ModelParams(1.0, 1.0, 0.44), SIG_INC, horizon=300.0)
        assert long_report.satisfied

    def test_domain(self):
        with pytest.raises(ValueError):
            threshold_check(ModelParams(1.0, 1.0, 0.0), Constant(0.5), horizon=1.0)


class TestClassify:
    def test_tipped_trajectory(self):
        v = classify(ModelParams(1.0, 1.0, 0.32), SIG_INC, 1e-4, 10.0)
        assert v.outcome == "extinct"
        assert v.tau == pytest.approx(5.7914, abs=1e-3)
        assert v.r_tipped
        assert v.threshold_satisfied

    def test_extinction_without_crossing_is_not_tipping(self):
        # starts below the threshold's initial value: doomed, but not rate-induced
        v = classify(ModelParams(1.0, 1.0, 0.04), SIG_INC, 1e-4, 10.0)
        assert v.outcome == "extinct"
        assert not v.r_tipped
        assert v.threshold_satisfied
        assert all(c.direction != "downward" for c in v.crossings)

    def test_survivor_persists_at_long_horizon(self):
        v = classify(ModelParams(1.0, 1.0, 0.56), SIG_INC, 1e-3, 100.0)
        assert v.outcome == "persist-to-K"
        assert not v.r_tipped
        assert not v.threshold_satisfied

    def test_slow_death_is_undecided_at_table_horizon(self):
        # this initial condition dies at tau ~ 11.8, past the display window
        v10 = classify(ModelParams(1.0, 1.0, 0.44), SIG_INC, 1e-3, 10.0)
        assert v10.outcome == "undecided-at-horizon"
        v20 = classify(ModelParams(1.0, 1.0, 0.44), SIG_INC, 1e-3, 20.0)
        assert v20.outcome == "extinct"
        assert v20.r_tipped

    def test_capacity_start(self):
        v = classify(ModelParams(1.0, 1.0, 1.0), SIG_INC, 1e-3, 5.0)
        assert v.outcome == "persist-to-K"
        assert not v.threshold_satisfied

    def test_zero_start(self):
        v = classify(ModelParams(1.0, 1.0, 0.0), SIG_INC, 1e-3, 5.0)
        assert v.outcome == "extinct"
        assert v.tau == 0.0
        assert not v.r_tipped


class TestBasinScan:
    def test_increasing_sigmoid_table_window(self):
        grid = [round(0.04 * i, 10) for i in range(26)]
        verdicts = basin_scan(ModelParams(1.0, 1.0, 0.5), SIG_INC, grid, 1e-3, 10.0)
        extinct = {v.x0 for v in verdicts if v.outcome == "extinct"}
        assert extinct == {0.0} | {round(0.04 * i, 10) for i in range(1, 11)}

    def test_outcome_boundary_is_monotone(self):
        grid = [round(0.04 * i, 10) for i in range(1, 26)]
        verdicts = basin_scan(ModelParams(1.0, 1.0, 0.5), SIG_INC, grid, 1e-3, 40.0)
        extinct_flags = [v.outcome == "extinct" for v in verdicts]
        # once survival starts it never flips back
        switches = sum(
            1 for a, b in zip(extinct_flags, extinct_flags[1:]) if a != b
        )
        assert switches <= 1

    def test_necessity_on_random_scenarios(self):
        rng = np.random.default_rng(23)
        from conftest import random_schedule

        for _ in range(25):
            sched = random_schedule(rng)
            x0 = float(rng.uniform(0.02, 0.98))
            v = classify(ModelParams(1.0, 1.0, x0), sched, 5e-3, 15.0)
            if v.r_tipped:
                assert v.threshold_margin > 0.0

    def test_rejects_out_of_range_initial_conditions(self):
        with pytest.raises(ValueError):
            basin_scan(ModelParams(1.0, 1.0, 0.5), SIG_INC, [1.5], 1e-3, 5.0)


def test_crossing_implies_nonmonotone_increasing_case():
    # trajectories that cross the rising threshold rise then fall
    for x0 in (0.2, 0.32, 0.4):
        traj = cubature_integrate(ModelParams(1.0, 1.0, x0), SIG_INC, 1e-3, 10.0)
        crossings = detect_crossings(traj, SIG_INC)
        diffs = np.diff(traj.states[traj.states > 0.0])
        has_down = any(c.direction == "downward" for c in crossings)
        nonmonotone = bool(np.any(diffs > 1e-12) and np.any(diffs < -1e-12))
        assert has_down == nonmonotone or not has_down
        if has_down:
            assert traj.extinct


def test_no_crossing_implies_monotone_increasing_case():
    for x0 in (0.04, 0.08, 0.6, 0.9):
        traj = cubature_integrate(ModelParams(1.0, 1.0, x0), SIG_INC, 1e-3, 10.0)
        crossings = detect_crossings(traj, SIG_INC)
        if crossings:
            continue
        alive = traj.states[traj.states > 0.0]
        diffs = np.diff(alive)
        assert np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12)
