"""
evaluator.py — Three-valued DC satisfaction over finite-variability trajectories.

Chop and box quantify over a finite candidate set of split points (breakpoints,
interval ends, points at the lengths named in l-atoms, an optional grid). Runs
produced by the simulator change phase only at breakpoints, so on them the
search is exact.

mu is a least fixpoint: a recursive call on an interval already being evaluated
is assumed false and re-evaluated until the assumption is stable. Exceeding the
unfolding depth gives UNKNOWN.

An interval ending at an "open" horizon is read as a prefix of a longer run:
formulas there say what is still possible (chop may split beyond the horizon,
l-atoms are satisfiable if some longer length satisfies them, primed values and
durations are unconstrained).
"""

import bisect
import enum
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from . import dc as D
from .debug_timing import trace
from .errors import (EvalError, IndeterminateArithmetic, NegativeOccurrence, UnknownSymbol,
                     UnsupportedQuantifier)
from .trajectory import Interval, Trajectory

# ── Config ───────────────────────────────────────────────────────────────────

DEFAULT_MU_DEPTH     = 64
DEFAULT_GRID         = 0
DEFAULT_TOL          = 1e-9
DEFAULT_EVOLVE_TOL   = 1e-4
DEFAULT_SPLIT_BUDGET = 4096
_MERGE_EPS           = 1e-12
_STAR_VAR            = "X*"


@dataclass(frozen=True)
class EvalConfig:
    mu_depth: int = DEFAULT_MU_DEPTH
    grid: int = DEFAULT_GRID
    tol: float = DEFAULT_TOL
    evolve_tol: float = DEFAULT_EVOLVE_TOL
    split_budget: int = DEFAULT_SPLIT_BUDGET
    strict: bool = False


class Truth(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @staticmethod
    def of(b: bool) -> "Truth":
        return Truth.TRUE if b else Truth.FALSE

    def __invert__(self) -> "Truth":
        if self is Truth.TRUE:
            return Truth.FALSE
        if self is Truth.FALSE:
            return Truth.TRUE
        return self

    def __and__(self, other: "Truth") -> "Truth":
        if self is Truth.FALSE or other is Truth.FALSE:
            return Truth.FALSE
        if self is Truth.TRUE and other is Truth.TRUE:
            return Truth.TRUE
        return Truth.UNKNOWN

    def __or__(self, other: "Truth") -> "Truth":
        return ~(~self & ~other)

    @property
    def rank(self) -> int:
        return {Truth.FALSE: 0, Truth.UNKNOWN: 1, Truth.TRUE: 2}[self]

    def __str__(self) -> str:
        return self.value


T, F, U = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN

Rig = Tuple[Tuple[str, float], ...]


# ── Helpers on formulas ──────────────────────────────────────────────────────

def star_as_mu(f: D.StarF) -> D.MuF:
    """phi* as muX.(l=0 or phi ^ X)."""
    name = _STAR_VAR
    while name in D.free_fvars(f.arg):
        name += "'"
    return D.MuF(name, D.FBin("or", D.POINT, D.Chop(f.arg, D.FVar(name))))


def unfold_mu(phi: D.DcFormula, k: int) -> D.DcFormula:
    """k-fold unfolding of a mu (or star) formula, false at the base."""
    if isinstance(phi, D.StarF):
        phi = star_as_mu(phi)
    if not isinstance(phi, D.MuF):
        raise EvalError("unfold_mu expects a mu formula")
    if D.occurs_negatively(phi.body, phi.name):
        raise NegativeOccurrence(f"{phi.name} occurs negatively in its body")
    out: D.DcFormula = D.BOT
    for _ in range(k):
        out = D.subst_fvar(phi.body, phi.name, out)
    return out


def _const_value(t: D.DcTerm) -> Optional[float]:
    if isinstance(t, D.Const):
        return t.value
    if isinstance(t, D.Inf):
        return math.inf
    if isinstance(t, D.TNeg):
        v = _const_value(t.arg)
        return None if v is None else -v
    if isinstance(t, D.Arith):
        a, b = _const_value(t.left), _const_value(t.right)
        if a is None or b is None:
            return None
        try:
            return _arith(t.op, a, b)
        except IndeterminateArithmetic:
            return None
    return None


def _arith(op: str, a: float, b: float) -> float:
    if op == "+":
        if math.isinf(a) and math.isinf(b) and a != b:
            raise IndeterminateArithmetic("inf - inf")
        return a + b
    if op == "-":
        if math.isinf(a) and math.isinf(b) and a == b:
            raise IndeterminateArithmetic("inf - inf")
        return a - b
    if op == "*":
        if (a == 0 and math.isinf(b)) or (b == 0 and math.isinf(a)):
            raise IndeterminateArithmetic("0 * inf")
        return a * b
    if op == "/":
        if b == 0 or (math.isinf(a) and math.isinf(b)):
            raise IndeterminateArithmetic(f"{a} / {b}")
        return a / b
    raise EvalError(f"unknown operator {op!r}")


def _compare(op: str, a: float, b: float, tol: float) -> bool:
    if math.isinf(a) or math.isinf(b):
        return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
    d = a - b
    tol = tol * max(1.0, abs(a), abs(b))
    return {"=": abs(d) <= tol, "!=": abs(d) > tol, "<": d < -tol, "<=": d <= tol,
            ">": d > tol, ">=": d >= -tol}[op]


def _term_has(t: D.DcTerm, pred) -> bool:
    return pred(t) or any(_term_has(c, pred) for c in D.term_children(t))


def _const_var(f: D.DcFormula) -> Optional[str]:
    """x' = x  or  p' <=> p: the variable kept constant, else None."""
    if isinstance(f, D.Atom) and f.op == "=":
        l, r = f.left, f.right
        if isinstance(l, D.TVar) and isinstance(r, D.TVar) and l.name == r.name and l.primed != r.primed:
            return l.name
    if isinstance(f, D.FBin) and f.op == "iff":
        l, r = f.left, f.right
        if isinstance(l, D.PropVar) and isinstance(r, D.PropVar) and l.name == r.name and l.primed != r.primed:
            return l.name
    return None


def _loc_var(f: D.DcFormula) -> Optional[str]:
    """Body of a loc conjunct (under the box): the variable, else None."""
    if isinstance(f, D.Forall) and isinstance(f.body, D.FNot) and isinstance(f.body.arg, D.Chop):
        c = f.body.arg
        if (isinstance(c.left, D.Atom) and c.left.op == "=" and isinstance(c.left.left, D.TVar)
                and c.left.left.primed and c.left.right == D.Rigid(f.var)
                and isinstance(c.right, D.Atom) and c.right.op == "!="
                and c.right.left == D.TVar(c.left.left.name) and c.right.right == D.Rigid(f.var)):
            return c.left.left.name
    if isinstance(f, D.FNot) and isinstance(f.arg, D.FBin) and f.arg.op == "or":
        a, b = f.arg.left, f.arg.right
        if (isinstance(a, D.Chop) and isinstance(a.left, D.PropVar) and a.left.primed
                and a.right == D.FNot(D.PropVar(a.left.name))
                and b == D.Chop(D.FNot(D.PropVar(a.left.name, True)), D.PropVar(a.left.name))):
            return a.left.name
    return None


def _hereditary(f: D.DcFormula) -> bool:
    """True on an interval implies true on all its subintervals."""
    if isinstance(f, (D.TrueF, D.Box, D.EvolvesBy, D.BoxPoint)):
        return True
    if isinstance(f, D.FBin) and f.op == "and":
        return _hereditary(f.left) and _hereditary(f.right)
    return False


def _bound_pattern(v: str, body: D.DcFormula):
    """forall v (box(e <= v) => psi): (e, upper, psi) for the monotone-bound shape."""
    if not (isinstance(body, D.FBin) and body.op == "implies" and isinstance(body.left, D.Box)
            and isinstance(body.left.arg, D.Atom)):
        return None
    a = body.left.arg
    rv = D.Rigid(v)
    mentions = lambda t: _term_has(t, lambda s: s == rv)  # noqa: E731
    if a.right == rv and not mentions(a.left) and a.op in ("<=", ">="):
        return a.left, a.op == "<=", body.right
    if a.left == rv and not mentions(a.right) and a.op in ("<=", ">="):
        return a.right, a.op == ">=", body.right
    return None


def _equality_terms(v: str, body: D.DcFormula) -> Optional[List[D.DcTerm]]:
    """Terms v is compared with when every use of v is in an = / != atom, else None."""
    rv = D.Rigid(v)
    out: List[D.DcTerm] = []
    for g in D.walk_formula(body):
        if isinstance(g, D.Forall) and g.var == v:
            return None
        if not isinstance(g, D.Atom):
            continue
        l_has = _term_has(g.left, lambda s: s == rv)
        r_has = _term_has(g.right, lambda s: s == rv)
        if not (l_has or r_has):
            continue
        if g.op not in ("=", "!="):
            return None
        if l_has and g.left == rv and not r_has:
            out.append(g.right)
        elif r_has and g.right == rv and not l_has:
            out.append(g.left)
        else:
            return None
    return out


# ── Evaluator ────────────────────────────────────────────────────────────────

class Evaluator:
    """Evaluates many formulas over one trajectory, sharing memo tables."""

    def __init__(self, tr: Trajectory, cfg: Optional[EvalConfig] = None):
        self.tr = tr
        self.cfg = cfg or EvalConfig()
        self.exhausted = False
        self._bps = tr.breakpoints()
        self._bp_set = set(self._bps)
        self._memo: Dict[tuple, Truth] = {}
        self._mu_memo: Dict[tuple, Truth] = {}
        self._in_progress: Dict[tuple, Truth] = {}
        self._hit_log: List[tuple] = []
        self._depth = 0
        self._node_info: Dict[int, tuple] = {}     # id -> (node, free fvars, lengths, hi-sensitive)
        self._derived: Dict[Tuple[int, str], tuple] = {}

    # ── public ──

    def evaluate(self, phi: D.DcFormula, sigma: Optional[Interval] = None,
                 rigid: Optional[Mapping[str, float]] = None) -> Truth:
        sigma = sigma or self.tr.full_interval()
        self._check_symbols(phi)
        if sigma.hi > self.tr.end and not (self.tr.tail == "open" and sigma.hi <= self.tr.T):
            raise EvalError(f"interval {sigma} beyond the end of the run")
        op = self.tr.tail == "open" and sigma.hi >= self.tr.T
        rig = tuple(sorted((rigid or {}).items()))
        r = self.ev(phi, sigma.lo, sigma.hi, op, {}, rig)
        if r is U:
            trace("evaluator", f"unknown on {sigma} (depth exhausted={self.exhausted})")
        return r

    def term(self, e: D.DcTerm, sigma: Interval, rigid: Optional[Mapping[str, float]] = None) -> float:
        return self._term(e, sigma.lo, sigma.hi, tuple(sorted((rigid or {}).items())))

    def candidates(self, f: D.DcFormula, lo: float, hi: float) -> List[float]:
        T_ = self.tr.T
        pts = {lo}
        if not math.isinf(hi):
            pts.add(hi)
        top = min(hi, T_)
        i0 = bisect.bisect_left(self._bps, lo)
        i1 = bisect.bisect_right(self._bps, top)
        pts.update(self._bps[i0:i1])
        lens = self._info(f)[2]
        sums = set(lens) | {a + b for a in lens for b in lens}
        for c in sums:
            pts.add(lo + c)
            if not math.isinf(hi):
                pts.add(hi - c)
            elif T_ > lo:
                pts.add(T_ + c)
        if self.cfg.grid > 0 and top > lo:
            pts.update(float(t) for t in np.linspace(lo, top, self.cfg.grid))
        out: List[float] = []
        for t in sorted(p for p in pts if lo <= p <= hi and not math.isinf(p)):
            if out and t - out[-1] <= _MERGE_EPS * (1.0 + abs(t)):
                if t in self._bp_set and out[-1] not in self._bp_set:
                    out[-1] = t
                continue
            out.append(t)
        return out

    # ── bookkeeping ──

    def _check_symbols(self, phi: D.DcFormula) -> None:
        bound = set()
        for g in D.walk_formula(phi):
            if isinstance(g, D.Split):
                bound |= {g.r1, g.r2}
        missing = D.state_symbols(phi) - set(self.tr.signal_names()) - set(self.tr.tail_signals) - bound
        if missing:
            raise UnknownSymbol(f"state variables not in the trajectory: {', '.join(sorted(missing))}")
        missing = D.temporal_symbols(phi) - set(self.tr.final)
        if missing:
            raise UnknownSymbol(f"process variables not in the trajectory: {', '.join(sorted(missing))}")

    def _info(self, f: D.DcFormula) -> tuple:
        key = id(f)
        info = self._node_info.get(key)
        if info is not None:
            return info
        subs = [self._info(g) for g in D.subformulas(f)]
        fv = frozenset().union(*(s[1] for s in subs)) if subs else frozenset()
        lens = frozenset().union(*(s[2] for s in subs)) if subs else frozenset()
        sensitive = any(s[3] for s in subs)
        if isinstance(f, D.FVar):
            fv = frozenset({f.name})
        elif isinstance(f, D.MuF):
            fv = fv - {f.name}
        if isinstance(f, D.Atom):
            for a, b in ((f.left, f.right), (f.right, f.left)):
                if isinstance(a, D.Len):
                    c = _const_value(b)
                    if c is not None and 0 <= c < math.inf:
                        lens = lens | {c}
            sensitive = any(_term_has(t, lambda s: isinstance(s, (D.Len, D.Dur))
                                      or (isinstance(s, D.TVar) and s.primed))
                            for t in (f.left, f.right))
        elif isinstance(f, D.PropVar):
            sensitive = f.primed
        elif not isinstance(f, (D.TrueF, D.FalseF, D.FNot, D.FBin)):
            sensitive = True
        info = (f, fv, lens, sensitive)
        self._node_info[key] = info
        return info

    def _derive(self, f: D.DcFormula, kind: str, build) -> D.DcFormula:
        """Formulas built on the fly from f, kept alive for the memo tables."""
        key = (id(f), kind)
        hit = self._derived.get(key)
        if hit is None:
            hit = (f, build())
            self._derived[key] = hit
        return hit[1]

    def _open(self, op: bool, t: float, hi: float) -> bool:
        return op and t == hi

    def _strict_false(self, r: Truth, lo: float, hi: float) -> Truth:
        if r is F and self.cfg.strict:
            for p in self.tr.pieces(lo, hi):
                if p.seg is not None and any(fn.kind == "samples" for fn in p.seg.reals.values()):
                    return U
        return r

    # ── formulas ──

    def ev(self, f: D.DcFormula, lo: float, hi: float, op: bool, env: Mapping, rig: Rig) -> Truth:
        if self._info(f)[1]:
            return self._dispatch(f, lo, hi, op, env, rig)
        key = (id(f), lo, hi, op, rig)
        r = self._memo.get(key)
        if r is not None:
            return r
        h0 = len(self._hit_log)
        r = self._dispatch(f, lo, hi, op, env, rig)
        if all(k not in self._in_progress for k in self._hit_log[h0:]):
            self._memo[key] = r
        return r

    def _dispatch(self, f, lo, hi, op, env, rig) -> Truth:
        if isinstance(f, D.TrueF):
            return T
        if isinstance(f, D.FalseF):
            return F
        if isinstance(f, D.Atom):
            return self._atom(f, lo, hi, op, rig, self.cfg.tol)
        if isinstance(f, D.PropVar):
            if f.primed and op:
                return T
            return Truth.of(self._value(f.name, hi if f.primed else lo) != 0.0)
        if isinstance(f, D.FNot):
            return self._neg(f.arg, lo, hi, op, env, rig)
        if isinstance(f, D.FBin):
            return self._fbin(f, lo, hi, op, env, rig)
        if isinstance(f, D.Chop):
            return self._chop(f, lo, hi, op, env, rig)
        if isinstance(f, D.Box):
            return self._box(f.arg, lo, hi, op, env, rig)
        if isinstance(f, D.BoxPrefix):
            return self._box_prefix(f.arg, lo, hi, env, rig)
        if isinstance(f, D.BoxPoint):
            return self._box_point(f.arg, lo, hi, env, rig)
        if isinstance(f, D.Dlc):
            return self._dlc(f.arg, lo, env, rig)
        if isinstance(f, D.StarF):
            mu = self._derive(f, "star", lambda: star_as_mu(f))
            return self._mu(mu, env, lo, hi, op, rig)
        if isinstance(f, D.MuF):
            if D.occurs_negatively(f.body, f.name):
                raise NegativeOccurrence(f"{f.name} occurs negatively in its body")
            return self._mu(f, env, lo, hi, op, rig)
        if isinstance(f, D.FVar):
            if f.name not in env:
                raise UnknownSymbol(f"unbound formula variable {f.name}")
            mu, defenv = env[f.name]
            return self._mu(mu, defenv, lo, hi, op, rig)
        if isinstance(f, D.Forall):
            return self._forall(f, lo, hi, op, env, rig)
        if isinstance(f, D.Ae):
            if op and lo == hi:
                return T
            return Truth.of(lo < hi and self.tr.holds_ae(f.s, lo, hi))
        if isinstance(f, D.Ae0):
            return Truth.of(self.tr.holds_ae(f.s, lo, hi))
        if isinstance(f, D.EvolvesBy):
            return self._evolves(f, lo, hi)
        if isinstance(f, D.Split):
            return self._split(f, lo, hi, op, env, rig)
        raise UnknownSymbol(f"formula node {type(f).__name__}")

    def _neg(self, g, lo, hi, op, env, rig) -> Truth:
        r = self.ev(g, lo, hi, op, env, rig)
        if op and self._info(g)[3]:
            # open end: g impossible means its negation is certain, nothing more
            return T if r is F else U
        return ~r

    def _fbin(self, f: D.FBin, lo, hi, op, env, rig) -> Truth:
        if f.op == "and":
            a = self.ev(f.left, lo, hi, op, env, rig)
            return a if a is F else a & self.ev(f.right, lo, hi, op, env, rig)
        if f.op == "or":
            a = self.ev(f.left, lo, hi, op, env, rig)
            return a if a is T else a | self.ev(f.right, lo, hi, op, env, rig)
        if f.op == "implies":
            a = self._neg(f.left, lo, hi, op, env, rig)
            return a if a is T else a | self.ev(f.right, lo, hi, op, env, rig)
        if f.op == "iff":
            if op and (self._info(f.left)[3] or self._info(f.right)[3]):
                na = self._neg(f.left, lo, hi, op, env, rig)
                nb = self._neg(f.right, lo, hi, op, env, rig)
                a = self.ev(f.left, lo, hi, op, env, rig)
                b = self.ev(f.right, lo, hi, op, env, rig)
                return (na | b) & (a | nb)
            a = self.ev(f.left, lo, hi, op, env, rig)
            b = self.ev(f.right, lo, hi, op, env, rig)
            if U in (a, b):
                return U
            return Truth.of(a is b)
        raise UnknownSymbol(f"connective {f.op!r}")

    def _atom(self, f: D.Atom, lo, hi, op, rig, tol) -> Truth:
        if op and self._info(f)[3]:
            if any(_term_has(t, lambda s: isinstance(s, D.Dur) or (isinstance(s, D.TVar) and s.primed))
                   for t in (f.left, f.right)):
                return T
            base = hi - lo
            tries = {base, math.inf} | {c for c in self._info(f)[2] if c >= base}
            for L in sorted(tries):
                try:
                    a = self._term(f.left, lo, hi, rig, L)
                    b = self._term(f.right, lo, hi, rig, L)
                except IndeterminateArithmetic:
                    continue
                if _compare(f.op, a, b, tol):
                    return T
            return F
        a = self._term(f.left, lo, hi, rig)
        b = self._term(f.right, lo, hi, rig)
        return Truth.of(_compare(f.op, a, b, tol))

    def _chop(self, f: D.Chop, lo, hi, op, env, rig) -> Truth:
        best = F
        for t in self.candidates(f, lo, hi):
            a = self.ev(f.left, lo, t, self._open(op, t, hi), env, rig)
            if a is F:
                continue
            r = a & self.ev(f.right, t, hi, op, env, rig)
            if r is T:
                return T
            best = best | r
        if math.isinf(hi) or op:
            # the right part may start at infinity (or beyond the observed horizon)
            best = best | self.ev(f.left, lo, hi, op, env, rig)
        return self._strict_false(best, lo, hi)

    def _box(self, g, lo, hi, op, env, rig) -> Truth:
        if isinstance(g, D.TrueF):
            return T
        if isinstance(g, D.FBin) and g.op == "and":
            a = self._box(g.left, lo, hi, op, env, rig)
            return a if a is F else a & self._box(g.right, lo, hi, op, env, rig)
        if isinstance(g, D.Box):
            return self._box(g.arg, lo, hi, op, env, rig)
        if isinstance(g, (D.EvolvesBy, D.BoxPoint)):
            return self.ev(g, lo, hi, op, env, rig)
        x = _const_var(g)
        if x is not None:
            return Truth.of(self._constant_on(x, lo, hi, include_hi=True))
        x = _loc_var(g)
        if x is not None:
            return Truth.of(self._local_on(x, lo, hi))
        if (isinstance(g, D.FBin) and g.op == "implies" and isinstance(g.left, D.Ae)
                and _hereditary(g.right)):
            r = T
            for a, b in self.tr.runs(g.left.s, lo, hi):
                r = r & self.ev(g.right, a, b, self._open(op, b, hi), env, rig)
                if r is F:
                    return F
            return r
        pts = self.candidates(g, lo, hi)
        lens = self._info(g)[2]
        r = T
        for i, a in enumerate(pts):
            ends = set(pts[i:]) | {a + c for c in lens if a + c <= hi}
            if math.isinf(hi):
                ends.add(math.inf)
            for b in sorted(ends):
                r = r & self.ev(g, a, b, self._open(op, b, hi), env, rig)
                if r is F:
                    return self._strict_false(F, lo, hi)
        return r

    def _box_prefix(self, g, lo, hi, env, rig) -> Truth:
        x = _const_var(g)
        if x is not None:
            return Truth.of(self._constant_on(x, lo, hi, include_hi=False))
        r = T
        ends = set(self.candidates(g, lo, hi)) | set(self.tr.sample_times(lo, min(hi, self.tr.end)))
        for t in sorted(ends):
            if t >= hi:
                break
            r = r & self.ev(g, lo, t, False, env, rig)
            if r is F:
                return self._strict_false(F, lo, hi)
        return r

    def _box_point(self, b, lo, hi, env, rig) -> Truth:
        r = T
        if lo >= hi:
            return r
        for t in self.tr.sample_times(lo, hi):
            r = r & self._point(b, t, env, rig)
            if r is F:
                return F
        return r

    def _point(self, b, t, env, rig) -> Truth:
        if isinstance(b, D.Atom):
            tol = self.cfg.evolve_tol if b.op == "=" else self.cfg.tol
            return self._atom(b, t, t, False, rig, tol)
        if isinstance(b, D.FNot):
            return ~self._point(b.arg, t, env, rig)
        if isinstance(b, D.FBin):
            a, c = self._point(b.left, t, env, rig), self._point(b.right, t, env, rig)
            if b.op == "and":
                return a & c
            if b.op == "or":
                return a | c
            if b.op == "implies":
                return ~a | c
            return U if U in (a, c) else Truth.of(a is c)
        return self.ev(b, t, t, False, env, rig)

    def _dlc(self, g, lo, env, rig) -> Truth:
        end = self.tr.end
        op_end = self.tr.tail == "open"
        r = F
        for t in self.candidates(g, lo, end):
            r = r | self.ev(g, lo, t, op_end and t == self.tr.T, env, rig)
            if r is T:
                return T
        if math.isinf(end):
            r = r | self.ev(g, lo, math.inf, False, env, rig)
        return self._strict_false(r, lo, end)

    def _mu(self, mu: D.MuF, defenv: Mapping, lo, hi, op, rig) -> Truth:
        env_key = tuple((n, id(defenv[n][0])) for n in sorted(self._info(mu)[1]) if n in defenv)
        key = (id(mu), lo, hi, op, rig, env_key)
        r = self._mu_memo.get(key)
        if r is not None:
            return r
        if key in self._in_progress:
            self._hit_log.append(key)
            return self._in_progress[key]
        if self._depth >= self.cfg.mu_depth:
            self.exhausted = True
            return U
        env = dict(defenv)
        env[mu.name] = (mu, defenv)
        self._depth += 1
        h_start = len(self._hit_log)
        assumed = F
        try:
            while True:
                self._in_progress[key] = assumed
                h0 = len(self._hit_log)
                r = self.ev(mu.body, lo, hi, op, env, rig)
                if key not in self._hit_log[h0:] or r is assumed or r.rank < assumed.rank:
                    break
                assumed = r
        finally:
            del self._in_progress[key]
            self._depth -= 1
        if all(k not in self._in_progress for k in self._hit_log[h_start:]):
            self._mu_memo[key] = r
        return r

    def _forall(self, f: D.Forall, lo, hi, op, env, rig) -> Truth:
        pattern = _bound_pattern(f.var, f.body)
        if pattern is not None:
            e, upper, psi = pattern
            v = self._extreme(e, lo, hi, upper, rig)
            return self.ev(psi, lo, hi, op, env, _bind(rig, f.var, v))
        terms = _equality_terms(f.var, f.body)
        if terms is None:
            raise UnsupportedQuantifier(f"forall {f.var}: {D.show_formula(f.body)}")
        values = set()
        times = set(self.candidates(f.body, lo, hi)) | set(self.tr.sample_times(lo, hi))
        for e in terms:
            for t in times:
                try:
                    values.add(self._term(e, t, t, rig))
                except (IndeterminateArithmetic, EvalError):
                    continue
        finite = [v for v in values if not math.isinf(v)]
        values.add(max((abs(v) for v in finite), default=0.0) + 1.0)
        r = T
        for v in sorted(values):
            r = r & self.ev(f.body, lo, hi, op, env, _bind(rig, f.var, v))
            if r is F:
                return F
        return r

    def _split(self, f: D.Split, lo, hi, op, env, rig) -> Truth:
        from .semantics import split_frame
        frame = self._derive(f, "frame", lambda: split_frame(f))
        if f.exists:
            full = self._derive(f, "esplit", lambda: D.FBin("and", frame, f.body))
            signals = set(self.tr.signal_names())
            if f.r1 in signals and f.r2 in signals:
                r = self.ev(full, lo, hi, op, env, rig)
                if r is T:
                    return T
            return self._enumerate_splits(f, full, lo, hi, op, env, rig, want=T)
        full = self._derive(f, "asplit", lambda: D.FBin("implies", frame, f.body))
        return self._enumerate_splits(f, full, lo, hi, op, env, rig, want=F)

    def _enumerate_splits(self, f: D.Split, full, lo, hi, op, env, rig, want: Truth) -> Truth:
        """Try every assignment of the R-segments inside [lo, hi] to R1 or R2.

        want=T: some assignment satisfies `full` (Esplit); want=F: none falsifies it (Asplit).
        """
        segs = self.tr.segments
        idx = [i for i, s in enumerate(segs) if s.bools.get(f.r, 0) and s.t1 > lo and s.t0 < hi]
        tail_on = hi > self.tr.T and self.tr.tail_signals.get(f.r, 0)
        n = len(idx) + (1 if tail_on else 0)
        if 2 ** n > self.cfg.split_budget:
            trace("evaluator", f"split of {f.r} over {n} segments exceeds the budget")
            return U
        seen_unknown = False
        for mask in range(2 ** n):
            one = [0] * len(segs)
            two = [0] * len(segs)
            for bit, i in enumerate(idx):
                if mask >> bit & 1:
                    one[i] = 1
                else:
                    two[i] = 1
            tail = {f.r1: 0, f.r2: 0}
            if tail_on:
                first = bool(mask >> len(idx) & 1)
                tail = {f.r1: int(first), f.r2: int(not first)}
            sub = Evaluator(self.tr.with_signals({f.r1: one, f.r2: two}, tail), self.cfg)
            r = sub.ev(full, lo, hi, op, env, rig)
            self.exhausted |= sub.exhausted
            if r is want:
                return want
            seen_unknown |= r is U
        return U if seen_unknown else ~want

    def _evolves(self, f: D.EvolvesBy, lo, hi) -> Truth:
        for name in (f.x, f.xdot):
            if not self.tr.has_variable(name):
                raise UnknownSymbol(f"process variable {name}")
        x0 = self._value(f.x, lo)
        acc = 0.0
        scale = 1.0 + abs(x0)
        worst = 0.0
        for p in self.tr.pieces(lo, hi):
            frozen = p.bools.get(f.n, 0)
            if p.seg is None:
                if not frozen and self.tr.final[f.xdot] != 0.0:
                    return F
                continue
            fx, fd = p.seg.reals[f.x], p.seg.reals[f.xdot]
            ts = [p.lo] + fx.knots(p.lo, p.hi) + fd.knots(p.lo, p.hi) + [p.hi]
            ts = sorted(set(ts))
            prev = ts[0]
            for t in ts:
                if not frozen:
                    acc += fd.integral(prev, t)
                prev = t
                xt = fx(t)
                scale = max(scale, 1.0 + abs(xt))
                worst = max(worst, abs(xt - x0 - acc))
        if not math.isinf(hi) and hi <= self.tr.T:
            worst = max(worst, abs(self._value(f.x, hi) - x0 - acc))
        return Truth.of(worst <= self.cfg.evolve_tol * scale)

    # ── terms and values ──

    def _value(self, name: str, t: float) -> float:
        if not self.tr.has_variable(name):
            raise UnknownSymbol(f"process variable {name}")
        return self.tr.value_at(name, t)

    def _term(self, e: D.DcTerm, lo: float, hi: float, rig: Rig, length: Optional[float] = None) -> float:
        if isinstance(e, D.Len):
            return hi - lo if length is None else length
        if isinstance(e, D.Inf):
            return math.inf
        if isinstance(e, D.Const):
            return e.value
        if isinstance(e, D.Dur):
            return self.tr.duration(e.s, lo, hi)
        if isinstance(e, D.TVar):
            return self._value(e.name, hi if e.primed else lo)
        if isinstance(e, D.Rigid):
            for name, v in rig:
                if name == e.name:
                    return v
            raise UnknownSymbol(f"rigid variable {e.name}")
        if isinstance(e, D.TNeg):
            return -self._term(e.arg, lo, hi, rig, length)
        if isinstance(e, D.Arith):
            return _arith(e.op, self._term(e.left, lo, hi, rig, length), self._term(e.right, lo, hi, rig, length))
        raise UnknownSymbol(f"term node {type(e).__name__}")

    def _constant_on(self, x: str, lo: float, hi: float, include_hi: bool) -> bool:
        v0 = self._value(x, lo)
        tol = self.cfg.tol * max(1.0, abs(v0))
        for t in self.tr.sample_times(lo, hi):
            if abs(self._value(x, t) - v0) > tol:
                return False
        for p in self.tr.pieces(lo, hi):
            if p.seg is not None and p.hi < hi and abs(p.seg.reals[x](p.hi) - v0) > tol:
                return False
        if include_hi and not math.isinf(hi) and hi <= self.tr.T:
            return abs(self._value(x, hi) - v0) <= tol
        return True

    def _local_on(self, x: str, lo: float, hi: float) -> bool:
        segs = self.tr.segments
        for i, s in enumerate(segs):
            if not (lo < s.t1 <= hi):
                continue
            if x not in s.end:
                return False
            right = segs[i + 1].start_value(x) if i + 1 < len(segs) else self.tr.final.get(x)
            if right is None or abs(s.end[x] - right) > self.cfg.tol * max(1.0, abs(right)):
                return False
        return True

    def _extreme(self, e: D.DcTerm, lo: float, hi: float, upper: bool, rig: Rig) -> float:
        if isinstance(e, D.TVar):
            return self.tr.extreme(e.name, lo, hi, upper)
        vals = [self._term(e, t, t, rig) for t in self.tr.sample_times(lo, hi)]
        if not math.isinf(hi):
            vals.append(self._term(e, hi, hi, rig))
        return max(vals) if upper else min(vals)


def _bind(rig: Rig, name: str, value: float) -> Rig:
    return tuple(sorted([(k, v) for k, v in rig if k != name] + [(name, value)]))


# ── Module-level operations ──────────────────────────────────────────────────

def eval_formula(phi: D.DcFormula, tr: Trajectory, sigma: Optional[Interval] = None,
                 cfg: Optional[EvalConfig] = None, rigid: Optional[Mapping[str, float]] = None) -> Truth:
    return Evaluator(tr, cfg).evaluate(phi, sigma, rigid)


def eval_term(e: D.DcTerm, tr: Trajectory, sigma: Optional[Interval] = None,
              rigid: Optional[Mapping[str, float]] = None) -> float:
    return Evaluator(tr).term(e, sigma or tr.full_interval(), rigid)


def chop_candidates(phi: D.DcFormula, tr: Trajectory, sigma: Interval,
                    cfg: Optional[EvalConfig] = None) -> List[float]:
    return Evaluator(tr, cfg).candidates(phi, sigma.lo, sigma.hi)
