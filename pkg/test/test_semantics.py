# test/test_semantics.py

import glob
import os

import pytest

from hcspdc import dc as D
from hcspdc import syntax as S
from hcspdc.dc_format import parse_formula
from hcspdc.errors import CompileError, NameClash
from hcspdc.evaluator import Truth, eval_formula
from hcspdc.parser import parse_process
from hcspdc.semantics import (SemContext, asplit, compile_process, condition, const_formula, esplit,
                              loc_formula, negligible_duration, program_context, seq_glue, split_frame)
from hcspdc.trajectory import Interval, RealFn, Segment, Trajectory

from conftest import GOLDEN_DIR

GOLDEN = {
    "skip": "skip",
    "assign": "x := x + 1",
    "await": "await x > 0",
    "seq": "x := 1; y := 2",
    "clock": "<x_dot = 1 & x < 2>",
}


def P(text: str) -> S.Process:
    return parse_process(text)


def read_golden(name: str) -> D.DcFormula:
    with open(os.path.join(GOLDEN_DIR, "sem", f"{name}.sexp")) as fh:
        return parse_formula(fh.read())


def jump(at_end: bool) -> Trajectory:
    """x is 0 on [0, 1) and 1 afterwards; the jump sits at t = 1 or inside at t = 0.5."""
    cut = 1.0 if at_end else 0.5
    segs = [Segment(0.0, cut, {}, {"x": RealFn.const(0.0)}, {"x": 1.0 if at_end else 0.0})]
    if not at_end:
        segs.append(Segment(cut, 1.0, {}, {"x": RealFn.const(1.0)}, {"x": 1.0}))
    return Trajectory(segs, {"x": 1.0})


class TestGolden:
    """Compile output for small programs, checked against files under golden/sem."""

    def test_every_golden_file_is_covered(self):
        names = {os.path.splitext(os.path.basename(p))[0]
                 for p in glob.glob(os.path.join(GOLDEN_DIR, "sem", "*.sexp"))}
        assert names == set(GOLDEN)

    @pytest.mark.parametrize("name", sorted(GOLDEN))
    def test_compile_matches_golden(self, name):
        assert compile_process(P(GOLDEN[name])) == read_golden(name)

    @pytest.mark.parametrize("name", sorted(GOLDEN))
    def test_printed_form_reads_back(self, name):
        phi = compile_process(P(GOLDEN[name]))
        assert parse_formula(D.pretty(phi, width=60)) == phi


class TestAuxiliaryFormulas:
    def test_loc_holds_on_a_continuous_run(self):
        segs = [Segment(0.0, 1.0, {}, {"x": RealFn.affine(0.0, 0.0, 1.0)}, {"x": 1.0}),
                Segment(1.0, 2.0, {}, {"x": RealFn.const(1.0)}, {"x": 1.0})]
        phi = loc_formula(S.VarSet.of(["x"]))
        assert eval_formula(phi, Trajectory(segs, {"x": 1.0})) is Truth.TRUE
        assert eval_formula(phi, Trajectory(segs, {"x": 1.0}), Interval(0.5, 2.0)) is Truth.TRUE

    def test_loc_fails_on_a_jump(self):
        phi = loc_formula(S.VarSet.of(["x"]))
        assert eval_formula(phi, jump(at_end=False)) is Truth.FALSE

    def test_const_keeps_everything_but_the_targets(self):
        V = S.VarSet.of(["x", "y"])
        assert const_formula(V, ["x"]) == D.f_and(
            D.Box(D.Atom("=", D.TVar("y", True), D.TVar("y"))),
            D.BoxPrefix(D.Atom("=", D.TVar("x", True), D.TVar("x"))))

    def test_const_lets_targets_change_at_the_right_end(self):
        tr = jump(at_end=True)
        V = S.VarSet.of(["x"])
        assert eval_formula(const_formula(V, ["x"]), tr) is Truth.TRUE
        assert eval_formula(const_formula(V), tr) is Truth.FALSE

    def test_const_rejects_unknown_targets(self):
        with pytest.raises(CompileError):
            const_formula(S.VarSet.of(["x"]), ["y"])

    def test_dotted_variables_are_not_kept_stable(self):
        assert const_formula(S.VarSet.of(["x_dot"])) == D.TOP

    def test_negligible_duration(self):
        assert negligible_duration("R#1.2") == D.Dur(D.StVar("R#1.2"))

    def test_sequential_glue(self):
        assert seq_glue() == D.f_and(D.Ae0(D.st_and(D.StVar("N"), D.StNot(D.StVar("R")))), D.FIN)

    def test_conditions_on_booleans(self):
        assert condition(P("await on").b, S.VarSet.of(["on"], ["on"])) == D.PropVar("on")


class TestSplit:
    def test_markers_must_differ(self):
        with pytest.raises(NameClash):
            esplit("R", "R", "R2", S.VarSet(), S.SKIP, S.SKIP, D.TOP)

    def test_markers_must_be_fresh_in_the_body(self):
        inner = D.esplit("R1", "A", "B", S.VarSet(), S.VarSet(), S.VarSet(), D.TOP)
        with pytest.raises(NameClash):
            asplit("R", "R1", "R2", S.VarSet(), S.SKIP, S.SKIP, inner)

    def test_operand_variables_are_recorded(self):
        s = esplit("R", "R1", "R2", S.VarSet.of(["x", "y"]), P("x := 1"), P("y := 1"), D.TOP)
        assert s.exists and s.v1.names == {"x"} and s.v2.names == {"y"}

    def test_frame_partitions_the_marker(self):
        s = D.esplit("R", "R1", "R2", S.VarSet.of(["x", "y"]), S.VarSet.of(["x"]), S.VarSet.of(["y"]), D.TOP)
        frame = split_frame(s)
        assert isinstance(frame, D.FBin) and isinstance(frame.left, D.Ae0)
        assert {"R", "R1", "R2"} <= D.state_symbols(frame)


class TestCompile:
    def test_parallel_becomes_an_existential_split(self):
        phi = compile_process(P("x := 1 || y := 1"))
        assert isinstance(phi, D.Split) and phi.exists
        assert (phi.r, phi.r1, phi.r2) == ("R", "R#1.1", "R#1.2")

    def test_nested_parallel_markers(self):
        phi = compile_process(P("x := 1 || (y := 1 || z := 1)"))
        inner = [g for g in D.walk_formula(phi.body) if isinstance(g, D.Split)]
        assert inner and inner[0].r == "R#1.2"

    def test_while_is_a_star_then_exit(self):
        phi = compile_process(P("while x < 3 do { x := x + 1 }"))
        assert isinstance(phi, D.Chop) and isinstance(phi.left, D.StarF)

    def test_mu_and_recursion_variable(self):
        phi = compile_process(P("mu X. { x := x + 1; X }"))
        assert isinstance(phi, D.MuF) and D.free_fvars(phi) == frozenset()

    def test_terminated(self):
        phi = compile_process(S.EPS, SemContext(V=S.VarSet()))
        assert phi == D.Ae0(D.StNot(D.StVar("R")))

    def test_bounds_encoding_of_the_evolution_law(self):
        p = P("<x_dot = 1 & x < 2>")
        phi = compile_process(p, program_context(p, bounds_encoding=True))
        assert not any(isinstance(g, D.EvolvesBy) for g in D.walk_formula(phi))
        assert any(isinstance(g, D.Forall) for g in D.walk_formula(phi))

    def test_markers_must_differ(self):
        with pytest.raises(CompileError):
            compile_process(P("skip"), SemContext(R="R", N="R"))

    def test_context_must_cover_controlled_variables(self):
        with pytest.raises(CompileError):
            compile_process(P("x := 1"), SemContext(V=S.VarSet.of(["y"])))

    def test_sugar_is_rejected(self):
        with pytest.raises(CompileError):
            compile_process(P("wait 1"))
