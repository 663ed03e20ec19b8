# test/test_parser.py

import pytest
from hypothesis import given, settings, strategies as st

from hcspdc import syntax as S
from hcspdc.errors import ArityError, HcspSyntaxError
from hcspdc.parser import parse_expr, parse_process

from conftest import corpus_paths
from hcspdc.utils import read_program


class TestParseProcess:
    """Concrete syntax to terms."""

    def test_assignment(self):
        assert parse_process("x := x + 1") == S.Assign(("x",), (S.BinOp("+", S.VarRef("x"), S.Num("1")),))

    def test_simultaneous_assignment(self):
        p = parse_process("x, y := y, x")
        assert p.targets == ("x", "y") and p.exprs == (S.VarRef("y"), S.VarRef("x"))

    def test_arity_mismatch_is_an_error(self):
        with pytest.raises(ArityError):
            parse_process("x, y := 1")

    def test_evolution_with_two_equations(self):
        p = parse_process("<x_dot = v, v_dot = -1 & x >= 0>")
        assert isinstance(p, S.Evolve)
        assert [o.explicit()[0] for o in p.odes] == ["x", "v"]
        assert p.b == parse_expr("x >= 0")

    def test_io_and_choice(self):
        p = parse_process("[ a?x -> skip [] b!1 -> y := 2 ]")
        assert isinstance(p, S.ExtChoice)
        assert p.branches[0][0] == S.Input("a", "x")
        assert p.branches[1][0] == S.Output("b", S.Num("1"))

    def test_timeout_and_interrupt(self):
        t = parse_process("<x_dot = 1 & true> |> (2) { y := x }")
        assert isinstance(t, S.EvolveTimeout) and t.d == S.Num("2")
        i = parse_process("<x_dot = 1 & x < 10> |> [ stop?y -> skip ]")
        assert isinstance(i, S.EvolveInterrupt)

    def test_precedence_seq_binds_tighter_than_par(self):
        p = parse_process("x := 1; y := 1 || z := 1")
        assert isinstance(p, S.Par) and isinstance(p.left, S.Seq)

    def test_precedence_choice_between_seq_and_par(self):
        p = parse_process("x := 1; skip |~| y := 1")
        assert isinstance(p, S.IntChoice) and isinstance(p.left, S.Seq)

    def test_comments_are_ignored(self):
        assert parse_process("-- a comment\nskip -- trailing\n") == S.SKIP

    def test_output_of_parenthesised_expression(self):
        p = parse_process("actuator!(0 - s)")
        assert p == S.Output("actuator", S.BinOp("-", S.Num("0"), S.VarRef("s")))

    @pytest.mark.parametrize("text", ["x :=", "skip;", "<x_dot = 1 & >", "if x then { skip }", "(skip"])
    def test_syntax_errors(self, text):
        with pytest.raises(HcspSyntaxError):
            parse_process(text)

    def test_syntax_error_carries_a_position(self):
        with pytest.raises(HcspSyntaxError) as exc:
            parse_process("x := 1;\n y := := 2")
        assert exc.value.line == 2

    @pytest.mark.parametrize("path", corpus_paths())
    def test_corpus_parses_and_prints_back(self, path):
        p, _ = read_program(path)
        assert parse_process(S.show(p)) == p


class TestParseExpr:
    def test_boolean_structure(self):
        e = parse_expr("not a and b or c")
        assert e == S.BoolOp("or", S.BoolOp("and", S.Not(S.VarRef("a")), S.VarRef("b")), S.VarRef("c"))

    def test_arithmetic_precedence(self):
        assert parse_expr("1 + 2 * x") == S.BinOp("+", S.Num("1"), S.BinOp("*", S.Num("2"), S.VarRef("x")))


# ── Property: printing then parsing gives the term back ──────────────────────

_names = st.sampled_from(["x", "y", "z"])
_atoms = st.one_of(
    st.integers(0, 9).map(lambda n: S.Num(str(n))),
    _names.map(S.VarRef),
)
_arith = st.recursive(_atoms, lambda inner: st.one_of(
    st.tuples(st.sampled_from("+-*"), inner, inner).map(lambda t: S.BinOp(*t)),
    inner.map(S.Neg),
), max_leaves=4)
_bools = st.tuples(st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), _arith, _arith).map(lambda t: S.Cmp(*t))

_prims = st.one_of(
    st.just(S.SKIP),
    st.tuples(_names, _arith).map(lambda t: S.Assign((t[0],), (t[1],))),
    _bools.map(S.Await),
    st.tuples(_names, _arith, _bools).map(lambda t: S.Evolve((S.ode(t[0], t[1]),), t[2])),
)
_procs = st.recursive(_prims, lambda inner: st.one_of(
    st.tuples(inner, inner).map(lambda t: S.Seq(*t)),
    st.tuples(inner, inner).map(lambda t: S.IntChoice(*t)),
    st.tuples(inner, inner).map(lambda t: S.Par(*t)),
    st.tuples(_bools, inner, inner).map(lambda t: S.If(*t)),
    st.tuples(_bools, inner).map(lambda t: S.While(*t)),
), max_leaves=6)


class TestRoundTrip:
    @settings(max_examples=100, deadline=None)
    @given(_procs)
    def test_show_then_parse_is_identity(self, p):
        assert parse_process(S.show(p)) == p
