"""
syntax.py — HCSP abstract syntax: expressions, process terms, variable sets.

All nodes are frozen dataclasses, so terms are immutable values that compare
structurally and can be shared across threads. Time derivatives are ordinary
variables whose name ends in `_dot`; channel readiness flags are boolean
variables named `ch?` / `ch!`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from decimal import Decimal, InvalidOperation
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple, Union

from .errors import ClosureError

DOT_SUFFIX = "_dot"


def is_dotted(name: str) -> bool:
    return name.endswith(DOT_SUFFIX)


def dot(name: str) -> str:
    return name + DOT_SUFFIX


def undot(name: str) -> str:
    return name[: -len(DOT_SUFFIX)] if is_dotted(name) else name


def is_flag(name: str) -> bool:
    return name.endswith("?") or name.endswith("!")


# ── Expressions ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Num:
    """Non-negative decimal constant kept as canonical text (bit-exact printing)."""
    text: str

    @property
    def value(self) -> float:
        return float(self.text)


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str          # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Cmp:
    op: str          # < <= > >= == !=
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class BoolOp:
    op: str          # and | or
    left: "Expr"
    right: "Expr"


Expr = Union[Num, BoolConst, VarRef, BinOp, Neg, Cmp, Not, BoolOp]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


def canonical_number(text: str) -> str:
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise ValueError(f"not a decimal: {text!r}")
    out = format(d.normalize(), "f")
    return "0" if out in ("-0", "") else out


def num(value) -> Expr:
    """Constant expression; negative values become Neg(Num)."""
    text = canonical_number(str(value))
    if text.startswith("-"):
        return Neg(Num(text[1:]))
    return Num(text)


def var(name: str) -> VarRef:
    return VarRef(name)


def conj(*bs: Expr) -> Expr:
    parts = [b for b in bs if b != TRUE]
    if not parts:
        return TRUE
    out = parts[0]
    for b in parts[1:]:
        out = BoolOp("and", out, b)
    return out


def disj(*bs: Expr) -> Expr:
    parts = [b for b in bs if b != FALSE]
    if not parts:
        return FALSE
    out = parts[0]
    for b in parts[1:]:
        out = BoolOp("or", out, b)
    return out


def neg(b: Expr) -> Expr:
    return b.arg if isinstance(b, Not) else Not(b)


def is_boolean_expr(e: Expr, bool_vars: Iterable[str] = ()) -> bool:
    if isinstance(e, (BoolConst, Cmp, Not, BoolOp)):
        return True
    if isinstance(e, VarRef):
        return is_flag(e.name) or e.name in set(bool_vars)
    return False


def expr_vars(e: Expr) -> FrozenSet[str]:
    if isinstance(e, VarRef):
        return frozenset({e.name})
    if isinstance(e, (Num, BoolConst)):
        return frozenset()
    if isinstance(e, (Neg, Not)):
        return expr_vars(e.arg)
    return expr_vars(e.left) | expr_vars(e.right)


def subst_expr(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, VarRef):
        return mapping.get(e.name, e)
    if isinstance(e, (Num, BoolConst)):
        return e
    if isinstance(e, (Neg, Not)):
        return type(e)(subst_expr(e.arg, mapping))
    return type(e)(e.op, subst_expr(e.left, mapping), subst_expr(e.right, mapping))


_NEGATED_CMP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def push_negations(b: Expr) -> Expr:
    """Negation normal form: ¬ only directly above boolean variables."""
    if isinstance(b, BoolOp):
        return BoolOp(b.op, push_negations(b.left), push_negations(b.right))
    if not isinstance(b, Not):
        return b
    a = b.arg
    if isinstance(a, Not):
        return push_negations(a.arg)
    if isinstance(a, BoolConst):
        return BoolConst(not a.value)
    if isinstance(a, Cmp):
        return Cmp(_NEGATED_CMP[a.op], a.left, a.right)
    if isinstance(a, BoolOp):
        dual = "or" if a.op == "and" else "and"
        return BoolOp(dual, push_negations(Not(a.left)), push_negations(Not(a.right)))
    return b


_CLOSED_CMP = {"<": "<=", ">": ">=", "<=": "<=", ">=": ">=", "==": "=="}


def closure(b: Expr) -> Expr:
    """Syntactic topological closure of the set defined by b."""
    b = push_negations(b)
    if isinstance(b, BoolConst):
        return b
    if isinstance(b, BoolOp):
        return BoolOp(b.op, closure(b.left), closure(b.right))
    if isinstance(b, VarRef) or (isinstance(b, Not) and isinstance(b.arg, VarRef)):
        return b
    if isinstance(b, Cmp):
        if b.op == "!=":
            return TRUE
        return Cmp(_CLOSED_CMP[b.op], b.left, b.right)
    raise ClosureError(f"cannot close atom {show_expr(b)}")


# ── Expression evaluation ────────────────────────────────────────────────────

def eval_arith(e: Expr, env: Mapping[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, BoolConst):
        return 1.0 if e.value else 0.0
    if isinstance(e, VarRef):
        return float(env[e.name])
    if isinstance(e, Neg):
        return -eval_arith(e.arg, env)
    if isinstance(e, BinOp):
        l, r = eval_arith(e.left, env), eval_arith(e.right, env)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r
        if e.op == "*":
            return l * r
        return l / r
    return 1.0 if eval_bool(e, env) else 0.0


def eval_bool(e: Expr, env: Mapping[str, float], tol: float = 0.0) -> bool:
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, VarRef):
        return float(env[e.name]) != 0.0
    if isinstance(e, Not):
        return not eval_bool(e.arg, env, tol)
    if isinstance(e, BoolOp):
        if e.op == "and":
            return eval_bool(e.left, env, tol) and eval_bool(e.right, env, tol)
        return eval_bool(e.left, env, tol) or eval_bool(e.right, env, tol)
    if isinstance(e, Cmp):
        l, r = eval_arith(e.left, env), eval_arith(e.right, env)
        if e.op == "<":
            return l < r - tol
        if e.op == "<=":
            return l <= r + tol
        if e.op == ">":
            return l > r + tol
        if e.op == ">=":
            return l >= r - tol
        if e.op == "==":
            return abs(l - r) <= tol
        return abs(l - r) > tol
    return eval_arith(e, env) != 0.0


def margin(e: Expr, env: Mapping[str, float]) -> float:
    """Signed distance-like value: positive where e holds, negative where it fails.

    Used by event detection; sign changes bracket the boundary of e.
    """
    e = push_negations(e)
    if isinstance(e, BoolConst):
        return 1.0 if e.value else -1.0
    if isinstance(e, (VarRef, Not)):
        return 1.0 if eval_bool(e, env) else -1.0
    if isinstance(e, BoolOp):
        l, r = margin(e.left, env), margin(e.right, env)
        return min(l, r) if e.op == "and" else max(l, r)
    if isinstance(e, Cmp):
        l, r = eval_arith(e.left, env), eval_arith(e.right, env)
        if e.op in ("<", "<="):
            return r - l
        if e.op in (">", ">="):
            return l - r
        if e.op == "==":
            return -abs(l - r)
        return abs(l - r)
    return 1.0 if eval_bool(e, env) else -1.0


# ── Process terms ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Ode:
    """One equation lhs = rhs of an evolution; explicit when lhs is a dotted variable."""
    lhs: Expr
    rhs: Expr

    def explicit(self) -> Optional[Tuple[str, Expr]]:
        if isinstance(self.lhs, VarRef) and is_dotted(self.lhs.name):
            return undot(self.lhs.name), self.rhs
        if isinstance(self.rhs, VarRef) and is_dotted(self.rhs.name):
            return undot(self.rhs.name), self.lhs
        l = self.lhs
        if (isinstance(l, BinOp) and l.op == "-" and isinstance(l.left, VarRef)
                and is_dotted(l.left.name) and self.rhs == Num("0")):
            return undot(l.left.name), l.right
        return None


def ode(x: str, rhs: Expr) -> Ode:
    return Ode(VarRef(dot(x)), rhs)


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Terminated:
    pass


@dataclass(frozen=True)
class Assign:
    targets: Tuple[str, ...]
    exprs: Tuple[Expr, ...]


@dataclass(frozen=True)
class Wait:
    d: Expr


@dataclass(frozen=True)
class Await:
    b: Expr


@dataclass(frozen=True)
class Input:
    ch: str
    x: str


@dataclass(frozen=True)
class Output:
    ch: str
    e: Expr


IoAction = Union[Input, Output]


@dataclass(frozen=True)
class ExtChoice:
    branches: Tuple[Tuple[IoAction, "Process"], ...]


@dataclass(frozen=True)
class Evolve:
    odes: Tuple[Ode, ...]
    b: Expr


@dataclass(frozen=True)
class EvolveTimeout:
    odes: Tuple[Ode, ...]
    b: Expr
    d: Expr
    handler: "Process"


@dataclass(frozen=True)
class EvolveInterrupt:
    odes: Tuple[Ode, ...]
    b: Expr
    io: ExtChoice


@dataclass(frozen=True)
class Seq:
    first: "Process"
    second: "Process"


@dataclass(frozen=True)
class Par:
    left: "Process"
    right: "Process"
    # index shared by the simulator and the compiler to name R#k.1 / R#k.2
    tag: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    b: Expr
    then: "Process"
    orelse: "Process"


@dataclass(frozen=True)
class IntChoice:
    left: "Process"
    right: "Process"


@dataclass(frozen=True)
class While:
    b: Expr
    body: "Process"


@dataclass(frozen=True)
class Star:
    body: "Process"


@dataclass(frozen=True)
class Mu:
    name: str
    body: "Process"


@dataclass(frozen=True)
class RecVar:
    name: str


Process = Union[Skip, Terminated, Assign, Wait, Await, Input, Output, ExtChoice, Evolve,
                EvolveTimeout, EvolveInterrupt, Seq, Par, If, IntChoice, While, Star, Mu, RecVar]

SKIP = Skip()
EPS = Terminated()

CORE_TYPES = (Skip, Terminated, Assign, Await, Evolve, Seq, Par, If, IntChoice, Mu, RecVar)


def seq(*ps: Process) -> Process:
    """Right-nested sequence; a single operand is returned as is."""
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = Seq(p, out)
    return out


def children(p: Process) -> Tuple[Process, ...]:
    if isinstance(p, ExtChoice):
        return tuple(q for _, q in p.branches)
    if isinstance(p, EvolveTimeout):
        return (p.handler,)
    if isinstance(p, EvolveInterrupt):
        return children(p.io)
    out = []
    for f in fields(p):
        v = getattr(p, f.name)
        if isinstance(v, CORE_TYPES + (Wait, Input, Output, ExtChoice, EvolveTimeout,
                                       EvolveInterrupt, While, Star)):
            out.append(v)
    return tuple(out)


def map_children(p: Process, fn) -> Process:
    """Rebuild p with fn applied to each direct sub-process."""
    if isinstance(p, ExtChoice):
        return ExtChoice(tuple((io, fn(q)) for io, q in p.branches))
    if isinstance(p, EvolveTimeout):
        return replace(p, handler=fn(p.handler))
    if isinstance(p, EvolveInterrupt):
        return replace(p, io=map_children(p.io, fn))
    if isinstance(p, (Seq,)):
        return Seq(fn(p.first), fn(p.second))
    if isinstance(p, Par):
        return Par(fn(p.left), fn(p.right), p.tag)
    if isinstance(p, IntChoice):
        return IntChoice(fn(p.left), fn(p.right))
    if isinstance(p, If):
        return If(p.b, fn(p.then), fn(p.orelse))
    if isinstance(p, (While,)):
        return While(p.b, fn(p.body))
    if isinstance(p, Star):
        return Star(fn(p.body))
    if isinstance(p, Mu):
        return Mu(p.name, fn(p.body))
    return p


def walk(p: Process) -> Iterator[Process]:
    stack = [p]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def subst_recvar(p: Process, name: str, q: Process) -> Process:
    """[q/X]p, respecting rebinding of X by an inner mu."""
    if isinstance(p, RecVar):
        return q if p.name == name else p
    if isinstance(p, Mu) and p.name == name:
        return p
    return map_children(p, lambda c: subst_recvar(c, name, q))


def unfold(p: Mu) -> Process:
    return subst_recvar(p.body, p.name, p)


def free_recvars(p: Process, bound: FrozenSet[str] = frozenset()) -> FrozenSet[str]:
    if isinstance(p, RecVar):
        return frozenset() if p.name in bound else frozenset({p.name})
    if isinstance(p, Mu):
        return free_recvars(p.body, bound | {p.name})
    out: FrozenSet[str] = frozenset()
    for c in children(p):
        out |= free_recvars(c, bound)
    return out


def label_parallel(p: Process, start: int = 1) -> Process:
    """Give every untagged Par node a preorder index; tagged nodes keep theirs."""
    counter = [start]
    used = {q.tag for q in walk(p) if isinstance(q, Par) and q.tag is not None}
    while counter[0] in used:
        counter[0] += 1

    def go(q: Process) -> Process:
        if isinstance(q, Par) and q.tag is None:
            tag = counter[0]
            counter[0] += 1
            while counter[0] in used:
                counter[0] += 1
            return Par(go(q.left), go(q.right), tag)
        return map_children(q, go)

    return go(p)


def thread_markers(parent: str, tag: int) -> Tuple[str, str]:
    return f"R#{tag}.1", f"R#{tag}.2"


# ── Variables ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class VarSet:
    """Set of process variable names, each tagged real or boolean."""
    reals: FrozenSet[str] = frozenset()
    bools: FrozenSet[str] = frozenset()

    @staticmethod
    def of(names: Iterable[str], booleans: Iterable[str] = ()) -> "VarSet":
        names = set(names)
        bset = {n for n in names if is_flag(n) or n in set(booleans)}
        return VarSet(frozenset(names - bset), frozenset(bset))

    @property
    def names(self) -> FrozenSet[str]:
        return self.reals | self.bools

    def __contains__(self, name: str) -> bool:
        return name in self.reals or name in self.bools

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.names))

    def __len__(self) -> int:
        return len(self.reals) + len(self.bools)

    def __or__(self, other: "VarSet") -> "VarSet":
        return VarSet(self.reals | other.reals, self.bools | other.bools)

    def __sub__(self, other) -> "VarSet":
        drop = other.names if isinstance(other, VarSet) else frozenset(other)
        return VarSet(self.reals - drop, self.bools - drop)

    def __and__(self, other: "VarSet") -> "VarSet":
        return VarSet(self.reals & other.names, self.bools & other.names)

    def issubset(self, other: "VarSet") -> bool:
        return self.names <= other.names

    def is_bool(self, name: str) -> bool:
        return name in self.bools

    def undotted(self) -> "VarSet":
        return VarSet(frozenset(n for n in self.reals if not is_dotted(n)), self.bools)

    def __str__(self) -> str:
        return "{" + ", ".join(sorted(self.names)) + "}"


def boolean_vars(p: Process) -> FrozenSet[str]:
    """Flags plus assignment targets that receive boolean-shaped values."""
    out = set()
    changed = True
    while changed:
        changed = False
        for q in walk(p):
            if isinstance(q, Assign):
                for x, e in zip(q.targets, q.exprs):
                    if x not in out and (is_flag(x) or is_boolean_expr(e, out)):
                        out.add(x)
                        changed = True
    for q in walk(p):
        for name in _term_names(q):
            if is_flag(name):
                out.add(name)
    return frozenset(out)


def _term_names(q: Process) -> FrozenSet[str]:
    """Names occurring at the node itself (not in sub-processes)."""
    names = set()
    if isinstance(q, Assign):
        names.update(q.targets)
        for e in q.exprs:
            names |= expr_vars(e)
    elif isinstance(q, (Wait,)):
        names |= expr_vars(q.d)
    elif isinstance(q, (Await,)):
        names |= expr_vars(q.b)
    elif isinstance(q, Input):
        names.update({q.x, q.ch, q.ch + "?", q.ch + "!"})
    elif isinstance(q, Output):
        names.update({q.ch, q.ch + "?", q.ch + "!"})
        names |= expr_vars(q.e)
    elif isinstance(q, ExtChoice):
        for io, _ in q.branches:
            names |= _term_names(io)
    elif isinstance(q, (Evolve, EvolveTimeout, EvolveInterrupt)):
        for o in q.odes:
            names |= expr_vars(o.lhs) | expr_vars(o.rhs)
            x = o.explicit()
            if x:
                names.add(x[0])
        names |= expr_vars(q.b)
        if isinstance(q, EvolveTimeout):
            names |= expr_vars(q.d)
        if isinstance(q, EvolveInterrupt):
            names |= _term_names(q.io)
    elif isinstance(q, (If, While)):
        names |= expr_vars(q.b)
    return frozenset(names)


def _controlled_at(q: Process) -> FrozenSet[str]:
    if isinstance(q, Assign):
        return frozenset(q.targets)
    if isinstance(q, Input):
        return frozenset({q.x, q.ch + "?"})
    if isinstance(q, Output):
        return frozenset({q.ch, q.ch + "!"})
    if isinstance(q, ExtChoice):
        out = frozenset()
        for io, _ in q.branches:
            out |= _controlled_at(io)
        return out
    if isinstance(q, (Evolve, EvolveTimeout, EvolveInterrupt)):
        out = set()
        for o in q.odes:
            x = o.explicit()
            if x:
                out.update({x[0], dot(x[0])})
            else:
                out.update(n for n in expr_vars(o.lhs) | expr_vars(o.rhs) if is_dotted(n))
                out.update(undot(n) for n in list(out) if is_dotted(n))
        if isinstance(q, EvolveInterrupt):
            out |= _controlled_at(q.io)
        return frozenset(out)
    return frozenset()


def all_vars(p: Process) -> VarSet:
    """Var(P)."""
    names = set()
    for q in walk(p):
        names |= _term_names(q)
    return VarSet.of(names, boolean_vars(p))


def controlled_vars(p: Process) -> VarSet:
    """VarA(P): assignment targets, input targets, evolved variables and their dots."""
    names = set()
    for q in walk(p):
        names |= _controlled_at(q)
    return VarSet.of(names, boolean_vars(p))


# ── Printing ─────────────────────────────────────────────────────────────────

_EXPR_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "/": 6, "neg": 7}


def _expr_prec(e: Expr) -> int:
    if isinstance(e, BoolOp):
        return _EXPR_PREC[e.op]
    if isinstance(e, Not):
        return 3
    if isinstance(e, Cmp):
        return 4
    if isinstance(e, BinOp):
        return _EXPR_PREC[e.op]
    if isinstance(e, Neg):
        return 7
    return 8


def show_expr(e: Expr) -> str:
    def wrap(sub: Expr, need: int) -> str:
        s = show_expr(sub)
        return f"({s})" if _expr_prec(sub) < need else s

    if isinstance(e, Num):
        return e.text
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, Neg):
        return "-" + wrap(e.arg, 8)
    if isinstance(e, Not):
        return "not " + wrap(e.arg, 4)
    p = _expr_prec(e)
    if isinstance(e, Cmp):
        return f"{wrap(e.left, 5)} {e.op} {wrap(e.right, 5)}"
    return f"{wrap(e.left, p)} {e.op} {wrap(e.right, p + 1)}"


def _proc_prec(p: Process) -> int:
    if isinstance(p, Par):
        return 0
    if isinstance(p, IntChoice):
        return 1
    if isinstance(p, Seq):
        return 2
    if isinstance(p, Star):
        return 3
    return 4


def _show_odes(odes: Tuple[Ode, ...], b: Expr) -> str:
    eqs = ", ".join(f"{show_expr(o.lhs)} = {show_expr(o.rhs)}" for o in odes)
    return f"< {eqs} & {show_expr(b)} >" if eqs else f"< & {show_expr(b)} >"


def _show_io(io: IoAction) -> str:
    if isinstance(io, Input):
        return f"{io.ch}?{io.x}"
    return f"{io.ch}!{show_expr(io.e)}"


def _show_branches(c: ExtChoice) -> str:
    return "[ " + " [] ".join(f"{_show_io(io)} -> {show(q)}" for io, q in c.branches) + " ]"


def show(p: Process) -> str:
    """Concrete syntax; parse(show(p)) == p."""
    def wrap(sub: Process, need: int) -> str:
        s = show(sub)
        return f"({s})" if _proc_prec(sub) < need else s

    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Terminated):
        return "eps"
    if isinstance(p, Assign):
        return f"{', '.join(p.targets)} := {', '.join(show_expr(e) for e in p.exprs)}"
    if isinstance(p, Wait):
        return f"wait {show_expr(p.d)}"
    if isinstance(p, Await):
        return f"await {show_expr(p.b)}"
    if isinstance(p, (Input, Output)):
        return _show_io(p)
    if isinstance(p, ExtChoice):
        return _show_branches(p)
    if isinstance(p, Evolve):
        return _show_odes(p.odes, p.b)
    if isinstance(p, EvolveTimeout):
        return f"{_show_odes(p.odes, p.b)} |>({show_expr(p.d)}) {{ {show(p.handler)} }}"
    if isinstance(p, EvolveInterrupt):
        return f"{_show_odes(p.odes, p.b)} |> {_show_branches(p.io)}"
    if isinstance(p, Seq):
        return f"{wrap(p.first, 3)} ; {wrap(p.second, 2)}"
    if isinstance(p, Par):
        return f"{wrap(p.left, 1)} || {wrap(p.right, 0)}"
    if isinstance(p, IntChoice):
        return f"{wrap(p.left, 2)} |~| {wrap(p.right, 1)}"
    if isinstance(p, If):
        return f"if {show_expr(p.b)} then {{ {show(p.then)} }} else {{ {show(p.orelse)} }}"
    if isinstance(p, While):
        return f"while {show_expr(p.b)} do {{ {show(p.body)} }}"
    if isinstance(p, Star):
        return f"({show(p.body)})*"
    if isinstance(p, Mu):
        return f"mu {p.name} . {{ {show(p.body)} }}"
    if isinstance(p, RecVar):
        return p.name
    raise TypeError(f"not a process term: {p!r}")


def valuation_str(env: Mapping[str, float]) -> str:
    return ", ".join(f"{k}={v:g}" for k, v in sorted(env.items()))


Valuation = Dict[str, float]
