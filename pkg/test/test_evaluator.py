# test/test_evaluator.py

import pytest
from hypothesis import given, settings, strategies as st

from hcspdc import dc as D
from hcspdc.errors import EvalError, NegativeOccurrence, UnknownSymbol, UnsupportedQuantifier
from hcspdc.evaluator import (EvalConfig, Evaluator, Truth, chop_candidates, eval_formula, eval_term,
                              unfold_mu)
from hcspdc.trajectory import Interval, RealFn, Segment, Trajectory

from conftest import FULL

T, F, U = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN
R = D.StVar("R")
NOT_R = D.StNot(R)


def ramp(tail: str = "none") -> Trajectory:
    """R holds on [0, 1) while x climbs to 1; then R is off and x rests until t = 3."""
    segs = [
        Segment(0.0, 1.0, {"R": 1}, {"x": RealFn.affine(0.0, 0.0, 1.0)}, {"x": 1.0}),
        Segment(1.0, 3.0, {"R": 0}, {"x": RealFn.const(1.0)}, {"x": 1.0}),
    ]
    return Trajectory(segs, {"x": 1.0}, tail)


def quiet(T_: float = 2.0) -> Trajectory:
    """R never holds, constant forever after T_."""
    seg = Segment(0.0, T_, {"R": 0}, {"x": RealFn.const(0.0)}, {"x": 0.0})
    return Trajectory([seg], {"x": 0.0}, "constant")


def flow(slope: float, frozen: int = 0) -> Trajectory:
    seg = Segment(0.0, 2.0, {"N": frozen},
                  {"x": RealFn.affine(0.0, 0.0, 1.0 if not frozen else 0.0), "x_dot": RealFn.const(slope)},
                  {"x": 2.0 if not frozen else 0.0, "x_dot": slope})
    return Trajectory([seg], dict(seg.end))


def ev(phi, tr=None, lo=0.0, hi=3.0, **cfg) -> Truth:
    tr = tr or ramp()
    return eval_formula(phi, tr, Interval(lo, hi), EvalConfig(**cfg))


class TestTruth:
    def test_negation(self):
        assert ~T is F and ~F is T and ~U is U

    def test_connectives(self):
        assert (T & U) is U and (F & U) is F
        assert (T | U) is T and (F | U) is U

    def test_text(self):
        assert str(U) == "unknown" and Truth.of(True) is T


class TestAtomsAndDurations:
    def test_terms(self):
        assert eval_term(D.Dur(R), ramp(), Interval(0.0, 3.0)) == 1.0
        assert eval_term(D.LEN, ramp(), Interval(0.5, 3.0)) == 2.5
        assert eval_term(D.TVar("x", True), ramp(), Interval(0.0, 0.5)) == pytest.approx(0.5)

    def test_almost_everywhere(self):
        assert ev(D.Ae(R), hi=1.0) is T
        assert ev(D.Ae(R), hi=2.0) is F

    def test_point_intervals(self):
        assert ev(D.Ae(R), lo=1.0, hi=1.0) is F
        assert ev(D.Ae0(R), lo=1.0, hi=1.0) is T

    def test_primed_variable_reads_the_right_end(self):
        assert ev(D.Atom("=", D.TVar("x", True), D.const(1)), hi=2.0) is T
        assert ev(D.Atom("=", D.TVar("x"), D.const(0)), hi=2.0) is T

    def test_unknown_state_variable(self):
        with pytest.raises(UnknownSymbol):
            ev(D.Ae(D.StVar("Q")))

    def test_unknown_process_variable(self):
        with pytest.raises(UnknownSymbol):
            ev(D.Atom("<", D.TVar("y"), D.ZERO))

    def test_interval_beyond_the_run(self):
        with pytest.raises(EvalError):
            ev(D.TOP, hi=5.0)


class TestChop:
    def test_split_at_a_breakpoint(self):
        assert ev(D.Chop(D.Ae(R), D.Ae(NOT_R))) is T
        assert ev(D.Chop(D.Ae(NOT_R), D.Ae(R))) is F

    def test_split_at_a_length(self):
        assert ev(D.chop(D.len_eq(2), D.len_eq(1))) is T

    def test_left_part_may_take_the_whole_infinite_interval(self):
        phi = D.Chop(D.Ae(NOT_R), D.BOT)
        tr = quiet()
        assert eval_formula(phi, tr) is T
        assert eval_formula(phi, tr, Interval(0.0, 2.0)) is F

    def test_candidates(self):
        pts = chop_candidates(D.Chop(D.len_eq(1), D.TOP), ramp(), Interval(0.0, 3.0))
        assert pts == [0.0, 1.0, 2.0, 3.0]

    def test_grid_adds_candidates(self):
        pts = chop_candidates(D.Chop(D.TOP, D.TOP), ramp(), Interval(0.0, 3.0), EvalConfig(grid=7))
        assert 0.5 in pts and 2.5 in pts

    def test_strict_mode_on_sampled_segments(self):
        seg = Segment(0.0, 1.0, {"R": 0}, {"x": RealFn.samples([0.0, 0.5, 1.0], [0.0, 0.2, 0.4])}, {"x": 0.4})
        tr = Trajectory([seg], {"x": 0.4})
        phi = D.Chop(D.Ae(R), D.Ae(R))
        assert eval_formula(phi, tr, cfg=EvalConfig()) is F
        assert eval_formula(phi, tr, cfg=EvalConfig(strict=True)) is U


class TestModalities:
    def test_box_over_subintervals(self):
        assert ev(D.Box(D.implies(D.Ae(R), D.Atom("<=", D.LEN, D.const(1))))) is T
        assert ev(D.Box(D.implies(D.Ae(NOT_R), D.Atom("<=", D.LEN, D.const(1))))) is F

    def test_box_of_constant_variable(self):
        keep = D.Atom("=", D.TVar("x", True), D.TVar("x"))
        assert ev(D.Box(keep), lo=1.0) is T
        assert ev(D.Box(keep)) is F

    def test_box_point_skips_the_right_end(self):
        below = D.Atom("<", D.TVar("x"), D.const(1))
        assert ev(D.BoxPoint(below), hi=1.0) is T
        assert ev(D.BoxPoint(below)) is F

    def test_box_prefix(self):
        assert ev(D.BoxPrefix(D.Ae0(R)), hi=1.0) is T
        assert ev(D.BoxPrefix(D.Ae0(R))) is F

    def test_dlc_looks_past_the_interval(self):
        assert ev(D.Dlc(D.len_eq(2)), hi=0.0) is T
        assert ev(D.Dlc(D.len_eq(5)), hi=0.0) is F

    def test_evolves_by_derivative(self):
        phi = D.EvolvesBy("x", "x_dot", "N")
        assert ev(phi, flow(1.0), hi=2.0) is T
        assert ev(phi, flow(2.0), hi=2.0) is F

    def test_evolves_skips_frozen_pieces(self):
        assert ev(D.EvolvesBy("x", "x_dot", "N"), flow(1.0, frozen=1), hi=2.0) is T


class TestOpenEnd:
    """A run cut at the horizon: length-sensitive formulas read as possibilities."""

    def test_longer_length_is_possible(self):
        assert ev(D.len_eq(5), ramp("open")) is T
        assert ev(D.len_eq(5)) is F

    def test_negation_of_a_possibility_is_unknown(self):
        assert ev(D.FNot(D.len_eq(5)), ramp("open")) is U

    def test_negation_of_an_impossibility_is_true(self):
        assert ev(D.FNot(D.len_eq(2)), ramp("open")) is T


class TestFixpoints:
    """mu, star and the unfolding depth."""

    STAR = D.StarF(D.len_eq(1))

    def test_star_of_unit_pieces(self):
        assert ev(self.STAR) is T
        assert ev(self.STAR, hi=2.5) is F

    def test_unfoldings_become_true_once_deep_enough(self):
        results = [ev(unfold_mu(self.STAR, k)) for k in range(7)]
        assert results == [F, F, F, F, T, T, T]

    def test_shallow_depth_never_gives_a_wrong_answer(self):
        for depth in range(1, 8):
            assert ev(self.STAR, mu_depth=depth) in (T, U)
            assert ev(self.STAR, hi=2.5, mu_depth=depth) in (F, U)

    def test_exhausted_depth_is_reported(self):
        e = Evaluator(ramp(), EvalConfig(mu_depth=1))
        assert e.evaluate(self.STAR) is U
        assert e.exhausted

    def test_negative_occurrence(self):
        bad = D.MuF("X", D.FNot(D.FVar("X")))
        with pytest.raises(NegativeOccurrence):
            ev(bad)
        with pytest.raises(NegativeOccurrence):
            unfold_mu(bad, 2)

    def test_unbound_formula_variable(self):
        with pytest.raises(UnknownSymbol):
            ev(D.FVar("X"))


class TestQuantifiers:
    def test_monotone_bound(self):
        def bounded(c):
            return D.Forall("v", D.implies(D.Box(D.Atom("<=", D.TVar("x"), D.Rigid("v"))),
                                           D.Atom("<=", D.Rigid("v"), D.const(c))))
        assert ev(bounded(5)) is T
        assert ev(bounded(0.5)) is F

    def test_equality_only_use(self):
        assert ev(D.Forall("v", D.f_or(D.Atom("=", D.TVar("x"), D.Rigid("v")),
                                       D.Atom("!=", D.TVar("x"), D.Rigid("v"))))) is T
        assert ev(D.Forall("v", D.Atom("=", D.TVar("x"), D.Rigid("v")))) is F

    def test_other_shapes_are_rejected(self):
        with pytest.raises(UnsupportedQuantifier):
            ev(D.Forall("v", D.Atom("<", D.Rigid("v"), D.LEN)))

    def test_rigid_values_from_the_caller(self):
        assert eval_formula(D.Atom("<", D.LEN, D.Rigid("c")), ramp(), rigid={"c": 4.0}) is T


# ── Properties over random finite runs ───────────────────────────────────────

@st.composite
def runs(draw):
    lengths = draw(st.lists(st.floats(0.1, 3.0), min_size=1, max_size=6))
    bits = draw(st.lists(st.integers(0, 1), min_size=len(lengths), max_size=len(lengths)))
    segs, t = [], 0.0
    for n, b in zip(lengths, bits):
        segs.append(Segment(t, t + n, {"R": b}, {"x": RealFn.const(float(b))}, {"x": float(b)}))
        t += n
    tr = Trajectory(segs, {"x": float(bits[-1])})
    a = draw(st.floats(0.0, t))
    b = draw(st.floats(a, t))
    return tr, Interval(a, b)


_atoms = st.one_of(
    st.just(D.Ae(R)),
    st.just(D.Ae0(NOT_R)),
    st.integers(0, 4).map(lambda c: D.Atom("<", D.LEN, D.const(c))),
    st.integers(0, 3).map(lambda c: D.Atom(">=", D.Dur(R), D.const(c))),
)
_formulas = st.recursive(_atoms, lambda inner: st.one_of(
    st.tuples(inner, inner).map(lambda t: D.Chop(*t)),
    st.tuples(st.sampled_from(["and", "or", "implies"]), inner, inner).map(lambda t: D.FBin(*t)),
    inner.map(D.FNot),
), max_leaves=4)


class TestProperties:
    @settings(max_examples=1000 if FULL else 200, deadline=None)
    @given(runs())
    def test_state_and_its_negation_share_the_length(self, case):
        tr, sigma = case
        total = eval_term(D.Dur(R), tr, sigma) + eval_term(D.Dur(NOT_R), tr, sigma)
        assert total == pytest.approx(sigma.length, abs=1e-9)
        assert eval_term(D.Dur(D.S_TRUE), tr, sigma) == pytest.approx(sigma.length, abs=1e-9)

    @settings(max_examples=200 if FULL else 50, deadline=None)
    @given(runs(), _formulas)
    def test_negation_flips_the_verdict(self, case, phi):
        tr, sigma = case
        assert eval_formula(D.FNot(phi), tr, sigma) is ~eval_formula(phi, tr, sigma)

    @settings(max_examples=100 if FULL else 30, deadline=None)
    @given(runs())
    def test_true_chops_into_true(self, case):
        tr, sigma = case
        assert eval_formula(D.Chop(D.TOP, D.TOP), tr, sigma) is T
