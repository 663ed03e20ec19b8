# test/test_dc.py

import pytest
from hypothesis import given, settings, strategies as st

from hcspdc import dc as D
from hcspdc import syntax as S
from hcspdc.dc_format import parse_formula, parse_term, read_sexp, to_varset
from hcspdc.errors import FormatError, UnknownSymbol
from hcspdc.parser import parse_expr

R = D.StVar("R")
N = D.StVar("N")


class TestIdioms:
    """Constructors keep formulas in one canonical shape."""

    def test_conjunction_drops_true_and_nests_right(self):
        a, b = D.Ae(R), D.Ae(N)
        assert D.f_and(D.TOP, a, b) == D.FBin("and", a, b)
        assert D.f_and(a, b, D.POINT) == D.FBin("and", a, D.FBin("and", b, D.POINT))
        assert D.f_and() == D.TOP

    def test_disjunction_drops_false(self):
        assert D.f_or(D.BOT, D.Ae(R)) == D.Ae(R)
        assert D.f_or() == D.BOT

    def test_chop_chain(self):
        a, b, c = D.Ae(R), D.Ae(N), D.POINT
        assert D.chop(a, b, c) == D.Chop(a, D.Chop(b, c))

    def test_negative_constants(self):
        assert D.const(-1.5) == D.TNeg(D.Const("1.5"))
        assert D.const("2.0") == D.Const("2")

    def test_fin_and_point(self):
        assert D.FIN == D.Atom("<", D.LEN, D.INF)
        assert D.POINT == D.Atom("=", D.LEN, D.ZERO)


class TestExprFormula:
    """HCSP boolean expressions read as DC formulas at an interval end."""

    def test_comparison(self):
        assert D.expr_formula(parse_expr("x == 1")) == D.Atom("=", D.TVar("x"), D.Const("1"))

    def test_primed_reading(self):
        assert D.expr_formula(parse_expr("x < y"), primed=True) == \
            D.Atom("<", D.TVar("x", True), D.TVar("y", True))

    def test_flags_are_propositional(self):
        assert D.expr_formula(parse_expr("not ch?")) == D.FNot(D.PropVar("ch?"))

    def test_declared_booleans_are_propositional(self):
        assert D.expr_formula(parse_expr("on"), bools={"on"}) == D.PropVar("on")
        assert D.expr_formula(parse_expr("on")) == D.Atom("!=", D.TVar("on"), D.ZERO)


class TestTraversal:
    def test_free_and_bound_formula_variables(self):
        f = D.f_or(D.FVar("X"), D.MuF("Y", D.Chop(D.Ae(R), D.FVar("Y"))))
        assert D.free_fvars(f) == {"X"}

    def test_substitution_stops_at_rebinding(self):
        inner = D.MuF("X", D.FVar("X"))
        assert D.subst_fvar(inner, "X", D.TOP) == inner
        assert D.subst_fvar(D.Chop(D.FVar("X"), D.TOP), "X", D.POINT) == D.Chop(D.POINT, D.TOP)

    def test_negative_occurrence(self):
        assert D.occurs_negatively(D.FNot(D.FVar("X")), "X")
        assert D.occurs_negatively(D.implies(D.FVar("X"), D.TOP), "X")
        assert not D.occurs_negatively(D.Chop(D.Ae(R), D.FVar("X")), "X")
        assert not D.occurs_negatively(D.FNot(D.FNot(D.FVar("X"))), "X")

    def test_rename_state_variable_everywhere(self):
        f = D.f_and(D.Ae0(D.st_and(N, D.StNot(R))), D.Atom("=", D.Dur(R), D.ZERO), D.EvolvesBy("x", "x_dot", "R"))
        g = D.rename_state_var(f, "R", "R1")
        assert "R" not in D.state_symbols(g)
        assert {"R1", "N"} <= D.state_symbols(g)

    def test_symbols(self):
        f = D.f_and(D.Atom("<", D.TVar("x", True), D.Const("1")), D.PropVar("on"), D.Ae(R))
        assert D.temporal_symbols(f) == {"x", "on"}
        assert D.state_symbols(f) == {"R"}


class TestFormat:
    """The s-expression text format."""

    @pytest.mark.parametrize("text", [
        "(chop (ae R) (ae0 (not R)))",
        "(implies (< len 3) (dlc (= (var' x) (+ (var x) 1))))",
        "(mu X (or (= len 0) (chop (ae R) (fvar X))))",
        "(forall v (implies (box (<= (var x) (rigid v))) (<= (rigid v) 5)))",
        "(boxpoint (>= (var x) (neg 2)))",
        "(evolves x x_dot N)",
        "(iff (prop' on) (prop on))",
        "(= (dur (and R (not N))) 0)",
        "(< len inf)",
        "(star (boxprefix (ae R)))",
        "(esplit R R1 R2 (vars (real x) (bool)) (vars (real x) (bool)) (vars (real) (bool)) (ae0 R1))",
    ])
    def test_show_parses_back(self, text):
        f = parse_formula(text)
        assert parse_formula(D.show_formula(f)) == f

    def test_fin_keyword(self):
        assert parse_formula("fin") == D.FIN

    def test_nary_conjunction_is_right_nested(self):
        assert parse_formula("(and true false (ae R))") == D.FBin("and", D.TOP, D.FBin("and", D.BOT, D.Ae(R)))

    def test_terms(self):
        assert parse_term("(* 2 len)") == D.Arith("*", D.Const("2"), D.LEN)

    def test_varset(self):
        v = to_varset(read_sexp("(vars (real x y) (bool on))"))
        assert v == S.VarSet(frozenset({"x", "y"}), frozenset({"on"}))
        assert D.show_varset(v) == "(vars (real x y) (bool on))"

    def test_unbalanced_text(self):
        with pytest.raises(FormatError):
            parse_formula("(ae R")

    def test_unknown_head(self):
        with pytest.raises(UnknownSymbol):
            parse_formula("(sometimes (ae R))")

    def test_pretty_output_parses_back(self):
        f = D.chop(*[D.f_and(D.Ae(R), D.Atom("<", D.LEN, D.const(i))) for i in range(1, 8)])
        text = D.pretty(f, width=40)
        assert "\n" in text
        assert parse_formula(text) == f


# ── Property: printing then reading gives the formula back ───────────────────

_states = st.recursive(st.sampled_from([R, N, D.S_TRUE, D.S_FALSE]), lambda inner: st.one_of(
    inner.map(D.StNot),
    st.tuples(st.sampled_from(["and", "or", "implies"]), inner, inner).map(lambda t: D.StBin(*t)),
), max_leaves=3)
_terms = st.one_of(
    st.just(D.LEN),
    st.integers(0, 5).map(D.const),
    _states.map(D.Dur),
    st.sampled_from(["x", "y"]).flatmap(lambda n: st.booleans().map(lambda p: D.TVar(n, p))),
)
_atoms = st.one_of(
    st.tuples(st.sampled_from(["=", "<", ">="]), _terms, _terms).map(lambda t: D.Atom(*t)),
    _states.map(D.Ae),
    _states.map(D.Ae0),
    st.just(D.TOP),
)
_formulas = st.recursive(_atoms, lambda inner: st.one_of(
    inner.map(D.FNot),
    inner.map(D.Dlc),
    inner.map(D.Box),
    st.tuples(st.sampled_from(["and", "or", "implies", "iff"]), inner, inner).map(lambda t: D.FBin(*t)),
    st.tuples(inner, inner).map(lambda t: D.Chop(*t)),
), max_leaves=6)


class TestFormatRoundTrip:
    @settings(max_examples=200, deadline=None)
    @given(_formulas)
    def test_show_then_parse_is_identity(self, f):
        assert parse_formula(D.show_formula(f)) == f
