# test/test_trajectory.py

import math

import pytest

from hcspdc import dc as D
from hcspdc.errors import EvalError, FormatError
from hcspdc.trajectory import (Interval, RealFn, Segment, Trajectory, check_locality,
                               constant_trajectory)

R = D.StVar("R")


def ramp(tail: str = "none") -> Trajectory:
    """x climbs from 0 to 1 while R holds, then rests at 1 until t = 3."""
    segs = [
        Segment(0.0, 1.0, {"R": 1}, {"x": RealFn.affine(0.0, 0.0, 1.0)}, {"x": 1.0}),
        Segment(1.0, 3.0, {"R": 0}, {"x": RealFn.const(1.0)}, {"x": 1.0}),
    ]
    return Trajectory(segs, {"x": 1.0}, tail)


class TestInterval:
    def test_length_and_text(self):
        assert Interval(1.0, 3.5).length == 2.5
        assert str(Interval(0.0, math.inf)) == "[0, inf]"

    @pytest.mark.parametrize("lo,hi", [(2.0, 1.0), (math.inf, math.inf)])
    def test_malformed(self, lo, hi):
        with pytest.raises(EvalError):
            Interval(lo, hi)


class TestRealFn:
    def test_affine(self):
        f = RealFn.affine(1.0, 2.0, -1.0)
        assert f(3.0) == 0.0
        assert f.integral(1.0, 3.0) == pytest.approx(2.0)

    def test_samples_interpolate_and_integrate(self):
        f = RealFn.samples([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])
        assert f(0.5) == pytest.approx(0.5)
        assert f.knots(0.0, 2.0) == [1.0]
        assert f.integral(0.0, 2.0) == pytest.approx(1.0)


class TestTrajectory:
    """Point values, durations and the different tails."""

    def test_values_and_signals(self):
        tr = ramp()
        assert tr.value_at("x", 0.5) == pytest.approx(0.5)
        assert tr.value_at("x", 3.0) == 1.0
        assert tr.signal_at("R", 0.5) == 1 and tr.signal_at("R", 1.0) == 0
        assert tr.breakpoints() == [0.0, 1.0, 3.0]

    def test_duration_of_state_and_negation_sum_to_length(self):
        tr = ramp()
        a, b = 0.25, 2.5
        assert tr.duration(R, a, b) + tr.duration(D.StNot(R), a, b) == pytest.approx(b - a)

    def test_beyond_the_end(self):
        with pytest.raises(EvalError):
            ramp().value_at("x", 4.0)
        with pytest.raises(EvalError):
            list(ramp().pieces(0.0, 4.0))

    def test_constant_tail_runs_forever(self):
        tr = ramp("constant")
        assert tr.end == math.inf and tr.full_interval() == Interval(0.0, math.inf)
        assert tr.value_at("x", 100.0) == 1.0
        assert tr.duration(D.StNot(R), 0.0, math.inf) == math.inf
        assert tr.duration(R, 0.0, math.inf) == 1.0

    def test_open_tail_is_cut_at_the_horizon(self):
        tr = ramp("open")
        assert tr.end == 3.0
        assert sum(p.hi - p.lo for p in tr.pieces(0.0, 10.0)) == 3.0

    def test_runs_and_run_end(self):
        tr = ramp()
        assert tr.runs(D.StNot(R), 0.0, 3.0) == [(1.0, 3.0)]
        assert tr.run_end(R, 0.0) == 1.0

    def test_extreme(self):
        tr = ramp()
        assert tr.extreme("x", 0.0, 1.0, upper=True) == pytest.approx(1.0)
        assert tr.extreme("x", 0.0, 1.0, upper=False) == 0.0

    def test_integral_skips_frozen_pieces(self):
        tr = ramp()
        assert tr.integral("x", 0.0, 3.0) == pytest.approx(2.5)
        assert tr.integral("x", 0.0, 3.0, frozen="R") == pytest.approx(2.0)


class TestDerived:
    def test_restrict_gives_an_open_run(self):
        tr = ramp().restrict(0.5)
        assert tr.T == 0.5 and tr.tail == "open"
        assert tr.final["x"] == pytest.approx(0.5)
        assert check_locality(tr, ["x"])

    def test_extended_appends_a_quiet_segment(self):
        tr = ramp().extended(5.0)
        assert tr.segments[-1].t0 == 3.0 and tr.T == 5.0
        assert tr.signal_at("R", 4.0) == 0 and tr.tail == "constant"

    def test_with_signals(self):
        tr = ramp().with_signals({"N": [0, 1]})
        assert tr.signal_at("N", 2.0) == 1 and tr.signal_at("N", 0.5) == 0
        assert tr.signal_names() == ["N", "R"]

    def test_constant_trajectory(self):
        tr = constant_trajectory({"x": 2.0}, 1.5, {"R": 1})
        assert tr.value_at("x", 1.0) == 2.0 and tr.duration(R, 0.0, 1.5) == 1.5
        assert constant_trajectory({"x": 2.0}, 0.0).T == 0.0


class TestLocality:
    def test_agreeing_segments(self):
        assert check_locality(ramp(), ["x", "x_dot"])

    def test_jump_at_a_breakpoint(self):
        segs = [
            Segment(0.0, 1.0, {}, {"x": RealFn.const(0.0)}, {"x": 0.0}),
            Segment(1.0, 2.0, {}, {"x": RealFn.const(5.0)}, {"x": 5.0}),
        ]
        assert not check_locality(Trajectory(segs, {"x": 5.0}), ["x"])

    def test_missing_variable(self):
        assert not check_locality(ramp(), ["y"])


class TestPersistence:
    def test_json_keeps_values(self, tmp_path):
        path = tmp_path / "run.json"
        ramp("constant").dump(str(path))
        tr = Trajectory.load(str(path))
        assert tr.tail == "constant" and tr.T == 3.0
        assert tr.value_at("x", 0.25) == pytest.approx(0.25)
        assert tr.signal_at("R", 0.25) == 1

    def test_unknown_function_kind(self):
        obj = ramp().to_json()
        obj["segments"][0]["reals"]["x"]["kind"] = "spline"
        with pytest.raises(FormatError):
            Trajectory.from_json(obj)

    def test_missing_horizon(self):
        obj = ramp().to_json()
        del obj["horizon"]
        with pytest.raises(FormatError):
            Trajectory.from_json(obj)

    def test_unknown_tail(self):
        with pytest.raises(FormatError):
            Trajectory([], {}, "sometimes")
