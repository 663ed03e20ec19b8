"""
dc.py — Duration Calculus syntax: state expressions, interval terms, formulas.

Nodes are frozen dataclasses. `show_formula` prints the s-expression text
format read back by dc_format.parse_formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterator, Tuple, Union

from . import syntax as S

# ── State expressions ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class StVar:
    name: str


@dataclass(frozen=True)
class StConst:
    value: bool


@dataclass(frozen=True)
class StNot:
    arg: "StateExpr"


@dataclass(frozen=True)
class StBin:
    op: str      # and | or | implies | iff
    left: "StateExpr"
    right: "StateExpr"


StateExpr = Union[StVar, StConst, StNot, StBin]

S_TRUE = StConst(True)
S_FALSE = StConst(False)


def st_and(a: StateExpr, b: StateExpr) -> StateExpr:
    return StBin("and", a, b)


def st_or(a: StateExpr, b: StateExpr) -> StateExpr:
    return StBin("or", a, b)


def st_not(a: StateExpr) -> StateExpr:
    return a.arg if isinstance(a, StNot) else StNot(a)


def eval_state(s: StateExpr, sig) -> bool:
    """sig: name -> 0/1 mapping for one segment interior."""
    if isinstance(s, StVar):
        return bool(sig.get(s.name, 0))
    if isinstance(s, StConst):
        return s.value
    if isinstance(s, StNot):
        return not eval_state(s.arg, sig)
    l, r = eval_state(s.left, sig), eval_state(s.right, sig)
    if s.op == "and":
        return l and r
    if s.op == "or":
        return l or r
    if s.op == "implies":
        return (not l) or r
    return l == r


def state_vars(s: StateExpr) -> FrozenSet[str]:
    if isinstance(s, StVar):
        return frozenset({s.name})
    if isinstance(s, StConst):
        return frozenset()
    if isinstance(s, StNot):
        return state_vars(s.arg)
    return state_vars(s.left) | state_vars(s.right)


def rename_state(s: StateExpr, old: str, new: str) -> StateExpr:
    if isinstance(s, StVar):
        return StVar(new) if s.name == old else s
    if isinstance(s, StConst):
        return s
    if isinstance(s, StNot):
        return StNot(rename_state(s.arg, old, new))
    return StBin(s.op, rename_state(s.left, old, new), rename_state(s.right, old, new))


# ── Terms ────────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Len:
    pass


@dataclass(frozen=True)
class Inf:
    pass


@dataclass(frozen=True)
class Const:
    text: str

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class Dur:
    s: StateExpr


@dataclass(frozen=True)
class TVar:
    """Process variable read at min (x) or max (x') of the reference interval."""
    name: str
    primed: bool = False


@dataclass(frozen=True)
class Rigid:
    name: str


@dataclass(frozen=True)
class Arith:
    op: str      # + - * /
    left: "DcTerm"
    right: "DcTerm"


@dataclass(frozen=True)
class TNeg:
    arg: "DcTerm"


DcTerm = Union[Len, Inf, Const, Dur, TVar, Rigid, Arith, TNeg]

LEN = Len()
INF = Inf()


def const(value) -> DcTerm:
    text = S.canonical_number(str(value))
    if text.startswith("-"):
        return TNeg(Const(text[1:]))
    return Const(text)


ZERO = Const("0")

# ── Formulas ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Atom:
    op: str      # = != < <= > >=
    left: DcTerm
    right: DcTerm


@dataclass(frozen=True)
class PropVar:
    """Boolean process variable as a temporal letter, at min (p) or max (p')."""
    name: str
    primed: bool = False


@dataclass(frozen=True)
class FNot:
    arg: "DcFormula"


@dataclass(frozen=True)
class FBin:
    op: str      # and | or | implies | iff
    left: "DcFormula"
    right: "DcFormula"


@dataclass(frozen=True)
class Chop:
    left: "DcFormula"
    right: "DcFormula"


@dataclass(frozen=True)
class Box:
    arg: "DcFormula"


@dataclass(frozen=True)
class BoxPrefix:
    """Every proper prefix [min, t], t < max."""
    arg: "DcFormula"


@dataclass(frozen=True)
class BoxPoint:
    """arg (a point condition) at every t in [min, max)."""
    arg: "DcFormula"


@dataclass(frozen=True)
class Dlc:
    """Converse left neighbourhood: arg at some [min, t], t >= min, t possibly infinite."""
    arg: "DcFormula"


@dataclass(frozen=True)
class StarF:
    arg: "DcFormula"


@dataclass(frozen=True)
class MuF:
    name: str
    body: "DcFormula"


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class Forall:
    var: str
    body: "DcFormula"


@dataclass(frozen=True)
class Ae:
    """⌈S⌉: S almost everywhere on a non-point interval."""
    s: StateExpr


@dataclass(frozen=True)
class Ae0:
    """⌈S⌉⁰: S almost everywhere, point intervals allowed."""
    s: StateExpr


@dataclass(frozen=True)
class EvolvesBy:
    """x(t2) - x(t1) = integral of x_dot over the not-N part, for every subinterval."""
    x: str
    xdot: str
    n: str


@dataclass(frozen=True)
class Split:
    """Esplit (exists=True) / Asplit (exists=False) of marker r into r1, r2."""
    exists: bool
    r: str
    r1: str
    r2: str
    v: S.VarSet
    v1: S.VarSet
    v2: S.VarSet
    body: "DcFormula"


DcFormula = Union[TrueF, FalseF, Atom, PropVar, FNot, FBin, Chop, Box, BoxPrefix, BoxPoint,
                  Dlc, StarF, MuF, FVar, Forall, Ae, Ae0, EvolvesBy, Split]

TOP = TrueF()
BOT = FalseF()


# ── Constructors / idioms ────────────────────────────────────────────────────

def f_and(*fs: DcFormula) -> DcFormula:
    parts = [f for f in fs if f != TOP]
    if not parts:
        return TOP
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = FBin("and", f, out)
    return out


def f_or(*fs: DcFormula) -> DcFormula:
    parts = [f for f in fs if f != BOT]
    if not parts:
        return BOT
    out = parts[-1]
    for f in reversed(parts[:-1]):
        out = FBin("or", f, out)
    return out


def f_not(f: DcFormula) -> DcFormula:
    return FNot(f)


def implies(a: DcFormula, b: DcFormula) -> DcFormula:
    return FBin("implies", a, b)


def iff(a: DcFormula, b: DcFormula) -> DcFormula:
    return FBin("iff", a, b)


def chop(*fs: DcFormula) -> DcFormula:
    """Right-nested chop chain."""
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Chop(f, out)
    return out


def eq(a: DcTerm, b: DcTerm) -> DcFormula:
    return Atom("=", a, b)


def len_eq(c) -> DcFormula:
    return Atom("=", LEN, const(c))


POINT = Atom("=", LEN, ZERO)
FIN = Atom("<", LEN, INF)
INFINITE = Atom("=", LEN, INF)


def fin(f: DcFormula) -> DcFormula:
    return f_and(f, FIN)


def diamond(f: DcFormula) -> DcFormula:
    return chop(TOP, f, TOP)


def esplit(r, r1, r2, v, v1, v2, body) -> Split:
    return Split(True, r, r1, r2, v, v1, v2, body)


def asplit(r, r1, r2, v, v1, v2, body) -> Split:
    return Split(False, r, r1, r2, v, v1, v2, body)


# ── HCSP expressions as DC ───────────────────────────────────────────────────

def expr_term(e: S.Expr, primed: bool = False) -> DcTerm:
    if isinstance(e, S.Num):
        return Const(e.text)
    if isinstance(e, S.VarRef):
        return TVar(e.name, primed)
    if isinstance(e, S.Neg):
        return TNeg(expr_term(e.arg, primed))
    if isinstance(e, S.BinOp):
        return Arith(e.op, expr_term(e.left, primed), expr_term(e.right, primed))
    if isinstance(e, S.BoolConst):
        return Const("1" if e.value else "0")
    raise TypeError(f"not an arithmetic expression: {S.show_expr(e)}")


_CMP_OPS = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "=", "!=": "!="}


def expr_formula(b: S.Expr, primed: bool = False, bools=frozenset()) -> DcFormula:
    """HCSP boolean expression read at min (or max, when primed) of the interval."""
    if isinstance(b, S.BoolConst):
        return TOP if b.value else BOT
    if isinstance(b, S.VarRef):
        if S.is_flag(b.name) or b.name in bools:
            return PropVar(b.name, primed)
        return Atom("!=", TVar(b.name, primed), ZERO)
    if isinstance(b, S.Not):
        return FNot(expr_formula(b.arg, primed, bools))
    if isinstance(b, S.BoolOp):
        return FBin(b.op, expr_formula(b.left, primed, bools), expr_formula(b.right, primed, bools))
    if isinstance(b, S.Cmp):
        return Atom(_CMP_OPS[b.op], expr_term(b.left, primed), expr_term(b.right, primed))
    raise TypeError(f"not a boolean expression: {S.show_expr(b)}")


# ── Traversal ────────────────────────────────────────────────────────────────

def subformulas(f: DcFormula) -> Tuple[DcFormula, ...]:
    if isinstance(f, (FNot, Box, BoxPrefix, BoxPoint, Dlc, StarF)):
        return (f.arg,)
    if isinstance(f, (FBin, Chop)):
        return (f.left, f.right)
    if isinstance(f, (MuF, Forall, Split)):
        return (f.body,)
    return ()


def map_formula(f: DcFormula, fn: Callable[[DcFormula], DcFormula]) -> DcFormula:
    if isinstance(f, (FNot, Box, BoxPrefix, BoxPoint, Dlc, StarF)):
        return type(f)(fn(f.arg))
    if isinstance(f, FBin):
        return FBin(f.op, fn(f.left), fn(f.right))
    if isinstance(f, Chop):
        return Chop(fn(f.left), fn(f.right))
    if isinstance(f, MuF):
        return MuF(f.name, fn(f.body))
    if isinstance(f, Forall):
        return Forall(f.var, fn(f.body))
    if isinstance(f, Split):
        return Split(f.exists, f.r, f.r1, f.r2, f.v, f.v1, f.v2, fn(f.body))
    return f


def walk_formula(f: DcFormula) -> Iterator[DcFormula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(subformulas(g))


def term_children(t: DcTerm) -> Tuple[DcTerm, ...]:
    if isinstance(t, Arith):
        return (t.left, t.right)
    if isinstance(t, TNeg):
        return (t.arg,)
    return ()


def terms_of(f: DcFormula) -> Iterator[DcTerm]:
    for g in walk_formula(f):
        if isinstance(g, Atom):
            stack = [g.left, g.right]
            while stack:
                t = stack.pop()
                yield t
                stack.extend(term_children(t))


def free_fvars(f: DcFormula, bound: FrozenSet[str] = frozenset()) -> FrozenSet[str]:
    if isinstance(f, FVar):
        return frozenset() if f.name in bound else frozenset({f.name})
    if isinstance(f, MuF):
        return free_fvars(f.body, bound | {f.name})
    out: FrozenSet[str] = frozenset()
    for g in subformulas(f):
        out |= free_fvars(g, bound)
    return out


def subst_fvar(f: DcFormula, name: str, by: DcFormula) -> DcFormula:
    if isinstance(f, FVar):
        return by if f.name == name else f
    if isinstance(f, MuF) and f.name == name:
        return f
    return map_formula(f, lambda g: subst_fvar(g, name, by))


def occurs_negatively(f: DcFormula, name: str, positive: bool = True) -> bool:
    if isinstance(f, FVar):
        return f.name == name and not positive
    if isinstance(f, MuF) and f.name == name:
        return False
    if isinstance(f, FNot):
        return occurs_negatively(f.arg, name, not positive)
    if isinstance(f, FBin) and f.op == "implies":
        return occurs_negatively(f.left, name, not positive) or occurs_negatively(f.right, name, positive)
    if isinstance(f, FBin) and f.op == "iff":
        return name in free_fvars(f)
    if isinstance(f, Split) and not f.exists:
        return occurs_negatively(f.body, name, positive)
    return any(occurs_negatively(g, name, positive) for g in subformulas(f))


def rename_state_var(f: DcFormula, old: str, new: str) -> DcFormula:
    """[new/old] over every state expression in f (used for [Ri/R]A)."""
    def term(t: DcTerm) -> DcTerm:
        if isinstance(t, Dur):
            return Dur(rename_state(t.s, old, new))
        if isinstance(t, Arith):
            return Arith(t.op, term(t.left), term(t.right))
        if isinstance(t, TNeg):
            return TNeg(term(t.arg))
        return t

    def go(g: DcFormula) -> DcFormula:
        if isinstance(g, Atom):
            return Atom(g.op, term(g.left), term(g.right))
        if isinstance(g, Ae):
            return Ae(rename_state(g.s, old, new))
        if isinstance(g, Ae0):
            return Ae0(rename_state(g.s, old, new))
        if isinstance(g, EvolvesBy) and g.n == old:
            return EvolvesBy(g.x, g.xdot, new)
        if isinstance(g, Split):
            sub = lambda n: new if n == old else n  # noqa: E731
            return Split(g.exists, sub(g.r), sub(g.r1), sub(g.r2), g.v, g.v1, g.v2, go(g.body))
        return map_formula(g, go)

    return go(f)


def state_symbols(f: DcFormula) -> FrozenSet[str]:
    out = set()
    for g in walk_formula(f):
        if isinstance(g, (Ae, Ae0)):
            out |= state_vars(g.s)
        if isinstance(g, EvolvesBy):
            out.add(g.n)
        if isinstance(g, Split):
            out |= {g.r, g.r1, g.r2}
    for t in terms_of(f):
        if isinstance(t, Dur):
            out |= state_vars(t.s)
    return frozenset(out)


def temporal_symbols(f: DcFormula) -> FrozenSet[str]:
    out = set()
    for g in walk_formula(f):
        if isinstance(g, PropVar):
            out.add(g.name)
        if isinstance(g, EvolvesBy):
            out |= {g.x, g.xdot}
    for t in terms_of(f):
        if isinstance(t, TVar):
            out.add(t.name)
    return frozenset(out)


# ── Printing ─────────────────────────────────────────────────────────────────

def show_state(s: StateExpr) -> str:
    if isinstance(s, StVar):
        return s.name
    if isinstance(s, StConst):
        return "1" if s.value else "0"
    if isinstance(s, StNot):
        return f"(not {show_state(s.arg)})"
    return f"({s.op} {show_state(s.left)} {show_state(s.right)})"


def show_term(t: DcTerm) -> str:
    if isinstance(t, Len):
        return "len"
    if isinstance(t, Inf):
        return "inf"
    if isinstance(t, Const):
        return t.text
    if isinstance(t, Dur):
        return f"(dur {show_state(t.s)})"
    if isinstance(t, TVar):
        return f"(var' {t.name})" if t.primed else f"(var {t.name})"
    if isinstance(t, Rigid):
        return f"(rigid {t.name})"
    if isinstance(t, TNeg):
        return f"(neg {show_term(t.arg)})"
    return f"({t.op} {show_term(t.left)} {show_term(t.right)})"


def show_varset(v: S.VarSet) -> str:
    reals = " ".join(sorted(v.reals))
    bools = " ".join(sorted(v.bools))
    return f"(vars (real{' ' + reals if reals else ''}) (bool{' ' + bools if bools else ''}))"


_UNARY_HEADS = {FNot: "not", Box: "box", BoxPrefix: "boxprefix", BoxPoint: "boxpoint",
                Dlc: "dlc", StarF: "star"}


def show_formula(f: DcFormula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return f"({f.op} {show_term(f.left)} {show_term(f.right)})"
    if isinstance(f, PropVar):
        return f"(prop' {f.name})" if f.primed else f"(prop {f.name})"
    if type(f) in _UNARY_HEADS:
        return f"({_UNARY_HEADS[type(f)]} {show_formula(f.arg)})"
    if isinstance(f, FBin):
        return f"({f.op} {show_formula(f.left)} {show_formula(f.right)})"
    if isinstance(f, Chop):
        return f"(chop {show_formula(f.left)} {show_formula(f.right)})"
    if isinstance(f, MuF):
        return f"(mu {f.name} {show_formula(f.body)})"
    if isinstance(f, FVar):
        return f"(fvar {f.name})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {show_formula(f.body)})"
    if isinstance(f, Ae):
        return f"(ae {show_state(f.s)})"
    if isinstance(f, Ae0):
        return f"(ae0 {show_state(f.s)})"
    if isinstance(f, EvolvesBy):
        return f"(evolves {f.x} {f.xdot} {f.n})"
    if isinstance(f, Split):
        head = "esplit" if f.exists else "asplit"
        return (f"({head} {f.r} {f.r1} {f.r2} {show_varset(f.v)} {show_varset(f.v1)} "
                f"{show_varset(f.v2)} {show_formula(f.body)})")
    raise TypeError(f"not a formula: {f!r}")


def pretty(f: DcFormula, width: int = 100) -> str:
    """Indented s-expression for files meant to be read by people."""
    text = show_formula(f)
    if len(text) <= width:
        return text
    out, depth, i = [], 0, 0
    while i < len(text):
        c = text[i]
        if c == "(" and i > 0:
            out.append("\n" + "  " * depth)
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        out.append(c)
        i += 1
    return "".join(out).replace(" \n", "\n")


