"""
semantics.py — DC semantics [[P]]_{R,N,V} of core HCSP terms.

R marks the reference process's computation stretches, N those of everything
running in parallel (R implies N). V is the set of variables controlled by the
enclosing parallel operand. Dotted (derivative) variables belong to V but are
never required to be stable: they are pinned down by the evolution law instead.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

from . import dc as D
from . import syntax as S
from .errors import CompileError, NameClash
from .ode import explicit_odes

# ── Config ───────────────────────────────────────────────────────────────────

DEFAULT_R = "R"
DEFAULT_N = "N"


@dataclass(frozen=True)
class SemContext:
    R: str = DEFAULT_R
    N: str = DEFAULT_N
    V: S.VarSet = S.VarSet()
    # evolution law as the forall-ub / forall-lb pair instead of EvolvesBy
    bounds_encoding: bool = False

    def child(self, R: str, V: S.VarSet) -> "SemContext":
        return SemContext(R, self.N, V, self.bounds_encoding)


# ── Auxiliary formulas ───────────────────────────────────────────────────────

def _stable(v: S.VarSet):
    return sorted(n for n in v.reals if not S.is_dotted(n)), sorted(v.bools)


def _same_real(x: str) -> D.DcFormula:
    return D.Atom("=", D.TVar(x, True), D.TVar(x))


def _same_bool(p: str) -> D.DcFormula:
    return D.FBin("iff", D.PropVar(p, True), D.PropVar(p))


def loc_formula(V: S.VarSet) -> D.DcFormula:
    """Each variable has a single value at every point."""
    reals, bools = _stable(V)
    parts = []
    for x in reals:
        parts.append(D.Box(D.Forall("z", D.FNot(D.Chop(
            D.Atom("=", D.TVar(x, True), D.Rigid("z")),
            D.Atom("!=", D.TVar(x), D.Rigid("z")))))))
    for p in bools:
        parts.append(D.Box(D.FNot(D.FBin(
            "or",
            D.Chop(D.PropVar(p, True), D.FNot(D.PropVar(p))),
            D.Chop(D.FNot(D.PropVar(p, True)), D.PropVar(p))))))
    return D.f_and(*parts)


def const_formula(V: S.VarSet, X: Iterable[str] = ()) -> D.DcFormula:
    """V without X stays constant; X may change at the right end only."""
    X = frozenset(X)
    if not X <= V.names:
        raise CompileError(f"const: {sorted(X - V.names)} not in {V}")
    reals, bools = _stable(V)
    parts = []
    parts += [D.Box(_same_real(x)) for x in reals if x not in X]
    parts += [D.Box(_same_bool(p)) for p in bools if p not in X]
    parts += [D.BoxPrefix(_same_real(x)) for x in reals if x in X]
    parts += [D.BoxPrefix(_same_bool(p)) for p in bools if p in X]
    return D.f_and(*parts)


def negligible_duration(R: str = DEFAULT_R) -> D.DcTerm:
    """Time spent on computation steps, for requirements that discount it from l."""
    return D.Dur(D.StVar(R))


def evolves_bounds(x: str, xdot: str, N: str) -> D.DcFormula:
    """x' - x bounded by the extremes of x_dot times the not-N duration."""
    free = D.Dur(D.StNot(D.StVar(N)))

    def bound(v: str, op: str) -> D.DcFormula:
        return D.Forall(v, D.FBin(
            "implies",
            D.Box(D.Atom(op, D.TVar(xdot), D.Rigid(v))),
            D.Atom(op, D.TVar(x, True), D.Arith("+", D.TVar(x), D.Arith("*", D.Rigid(v), free)))))

    return D.f_and(bound("ub", "<="), bound("lb", ">="))


def split_frame(s: D.Split) -> D.DcFormula:
    """The side conditions of Esplit/Asplit: R partitioned, each part stable outside its own VarA."""
    r, r1, r2 = D.StVar(s.r), D.StVar(s.r1), D.StVar(s.r2)
    partition = D.Ae0(D.st_and(D.StBin("iff", D.st_or(r1, r2), r), D.StNot(D.st_and(r1, r2))))
    parts = [partition]
    for ri, vi in ((s.r1, s.v1), (s.r2, s.v2)):
        keep = const_formula(s.v - vi)
        if keep != D.TOP:
            parts.append(D.Box(D.FBin("implies", D.Ae(D.StVar(ri)), keep)))
    return D.f_and(*parts)


def esplit(R: str, R1: str, R2: str, V: S.VarSet, P1: S.Process, P2: S.Process,
           phi: D.DcFormula) -> D.Split:
    _check_fresh(R, R1, R2, phi)
    return D.esplit(R, R1, R2, V, S.controlled_vars(P1), S.controlled_vars(P2), phi)


def asplit(R: str, R1: str, R2: str, V: S.VarSet, P1: S.Process, P2: S.Process,
           phi: D.DcFormula) -> D.Split:
    _check_fresh(R, R1, R2, phi)
    return D.asplit(R, R1, R2, V, S.controlled_vars(P1), S.controlled_vars(P2), phi)


def _check_fresh(R: str, R1: str, R2: str, phi: D.DcFormula) -> None:
    if len({R, R1, R2}) != 3:
        raise NameClash(f"split markers must differ: {R}, {R1}, {R2}")
    taken = {g.r for g in D.walk_formula(phi) if isinstance(g, D.Split)}
    if R1 in taken or R2 in taken:
        raise NameClash(f"{R1} / {R2} already split inside the body")


# ── Compiler ─────────────────────────────────────────────────────────────────

def _glue(*states: D.StateExpr) -> D.DcFormula:
    s = states[0]
    for t in states[1:]:
        s = D.st_and(s, t)
    return D.f_and(D.Ae0(s), D.FIN)


def seq_glue(R: str = DEFAULT_R, N: str = DEFAULT_N) -> D.DcFormula:
    """Finite stretch of other threads' computation between two sequential steps."""
    return _glue(D.StVar(N), D.StNot(D.StVar(R)))


def condition(b: S.Expr, V: S.VarSet) -> D.DcFormula:
    """An HCSP boolean expression read at the start of the interval."""
    return D.expr_formula(b, False, V.bools)


def _cond(b: S.Expr, V: S.VarSet, primed: bool = False) -> D.DcFormula:
    return D.expr_formula(b, primed, V.bools)


def _assign(q: S.Assign, ctx: SemContext) -> D.DcFormula:
    R = D.StVar(ctx.R)
    parts = [D.Ae(R), D.FIN, const_formula(ctx.V, q.targets)]
    for x, e in zip(q.targets, q.exprs):
        if ctx.V.is_bool(x):
            parts.append(D.FBin("iff", D.PropVar(x, True), _cond(e, ctx.V)))
        else:
            parts.append(D.Atom("=", D.TVar(x, True), D.expr_term(e)))
    return D.f_and(*parts)


def _await(q: S.Await, ctx: SemContext) -> D.DcFormula:
    b_closed = _cond(S.closure(q.b), ctx.V, primed=True)
    return D.f_and(
        const_formula(ctx.V),
        D.f_or(D.Ae(D.StNot(D.StVar(ctx.R))), D.POINT),
        D.BoxPrefix(D.FNot(b_closed)),
        D.f_or(b_closed, D.INFINITE),
    )


def _evolve(q: S.Evolve, ctx: SemContext) -> D.DcFormula:
    try:
        laws = explicit_odes(q.odes)
    except ValueError as e:
        raise CompileError(str(e)) from None
    xs = [x for x, _ in laws]
    moving = set(xs) | {S.dot(x) for x in xs}
    N = ctx.N
    frozen = D.Box(D.FBin("implies", D.Ae(D.StVar(N)), const_formula(S.VarSet(frozenset(xs)))))
    if ctx.bounds_encoding:
        law = [D.Box(evolves_bounds(x, S.dot(x), N)) for x in xs]
    else:
        law = [D.EvolvesBy(x, S.dot(x), N) for x in xs]
    rates = D.BoxPoint(D.f_and(*[D.Atom("=", D.TVar(S.dot(x)), D.expr_term(f)) for x, f in laws]))
    b = _cond(q.b, ctx.V)
    body = D.f_and(
        const_formula(ctx.V - moving),
        D.f_or(D.Ae(D.StNot(D.StVar(ctx.R))), D.POINT),
        frozen,
        *law,
        rates,
        D.BoxPoint(b),
    )
    return D.Chop(body, D.f_and(D.FNot(b), D.POINT))


def par_cases(G1: D.DcFormula, G2: D.DcFormula, R1: str, R2: str, N: str) -> D.DcFormula:
    """Either operand may finish first; the other starts at once or after a stretch of N-only time."""
    sem = {1: G1, 2: G2}
    mark = {1: D.StVar(R1), 2: D.StVar(R2)}
    n = D.StVar(N)
    cases = []
    for i, j in ((1, 2), (2, 1)):
        late_j = D.chop(_glue(n, D.StNot(mark[j])), sem[j], D.Ae0(D.StNot(mark[j])))
        cases.append(D.f_and(sem[i], late_j))
        late_i = D.Chop(_glue(n, D.StNot(mark[i])), sem[i])
        cases.append(D.f_and(late_i, D.Chop(sem[j], D.Ae0(D.StNot(mark[j])))))
    return D.f_or(*cases)


def _par(q: S.Par, ctx: SemContext) -> D.DcFormula:
    if q.tag is None:
        raise CompileError("parallel composition without a tag; run label_parallel first")
    R1, R2 = S.thread_markers(ctx.R, q.tag)
    V1, V2 = S.controlled_vars(q.left), S.controlled_vars(q.right)
    body = par_cases(_go(q.left, ctx.child(R1, V1)), _go(q.right, ctx.child(R2, V2)), R1, R2, ctx.N)
    return D.esplit(ctx.R, R1, R2, ctx.V, V1, V2, body)


def _go(p: S.Process, ctx: SemContext) -> D.DcFormula:
    if isinstance(p, S.Skip):
        return D.POINT
    if isinstance(p, S.Terminated):
        return D.f_and(const_formula(ctx.V), D.Ae0(D.StNot(D.StVar(ctx.R))))
    if isinstance(p, S.Assign):
        return _assign(p, ctx)
    if isinstance(p, S.Await):
        return _await(p, ctx)
    if isinstance(p, S.Evolve):
        return _evolve(p, ctx)
    if isinstance(p, S.Seq):
        glue = _glue(D.StVar(ctx.N), D.StNot(D.StVar(ctx.R)))
        return D.chop(_go(p.first, ctx), glue, _go(p.second, ctx))
    if isinstance(p, S.IntChoice):
        return D.f_or(_go(p.left, ctx), _go(p.right, ctx))
    if isinstance(p, S.If):
        b = _cond(p.b, ctx.V)
        return D.f_or(D.f_and(b, _go(p.then, ctx)), D.f_and(D.f_not(b), _go(p.orelse, ctx)))
    if isinstance(p, S.While):
        b = _cond(p.b, ctx.V)
        rounds = D.StarF(D.Chop(D.f_and(b, _go(p.body, ctx)), D.Ae0(D.StNot(D.StVar(ctx.R)))))
        return D.Chop(rounds, D.f_and(D.f_not(b), D.POINT))
    if isinstance(p, S.Star):
        glue = _glue(D.StVar(ctx.N), D.StNot(D.StVar(ctx.R)))
        return D.StarF(D.Chop(_go(p.body, ctx), glue))
    if isinstance(p, S.Par):
        return _par(p, ctx)
    if isinstance(p, S.Mu):
        return D.MuF(p.name, _go(p.body, ctx))
    if isinstance(p, S.RecVar):
        return D.FVar(p.name)
    raise CompileError(f"not a core construct: {S.show(p)}")


def compile_process(p: S.Process, ctx: Optional[SemContext] = None) -> D.DcFormula:
    """[[p]]_{R,N,V}. Untagged parallel nodes are labelled first."""
    p = S.label_parallel(p)
    varA = S.controlled_vars(p)
    ctx = ctx or SemContext(V=varA)
    if ctx.R == ctx.N:
        raise CompileError(f"R and N must differ (both {ctx.R})")
    if not varA.issubset(ctx.V):
        raise CompileError(f"V misses controlled variables {sorted(varA.names - ctx.V.names)}")
    return _go(p, ctx)


compile = compile_process  # noqa: A001


def program_context(p: S.Process, R: str = DEFAULT_R, N: str = DEFAULT_N,
                    bounds_encoding: bool = False) -> SemContext:
    return SemContext(R, N, S.controlled_vars(p), bounds_encoding)
