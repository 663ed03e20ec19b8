"""
ode.py — Numeric continuous evolution with boundary detection.

An evolution segment ends at the first time one of its exit conditions becomes
true (the domain b turning false, or a watched await condition turning true), or
at maxdur. The exit time is refined with brentq to within ode_tol and then moved
to the side where the exit condition holds, so the next step sees it.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
import sympy
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import syntax as S
from .errors import OdeError
from .trajectory import RealFn

_NUDGES = 32


@dataclass(frozen=True)
class OdeResult:
    fns: Dict[str, RealFn]       # evolved variables and their dots, absolute time
    exit: str                    # boundary | horizon
    t_exit: float                # duration of the segment
    end: Dict[str, float]        # valuation of fns' variables at the exit


# ── Explicit form ────────────────────────────────────────────────────────────

def _to_sympy(e: S.Expr, syms: Dict[str, sympy.Symbol]):
    if isinstance(e, S.Num):
        return sympy.Rational(e.text)
    if isinstance(e, S.VarRef):
        return syms.setdefault(e.name, sympy.Symbol(e.name))
    if isinstance(e, S.Neg):
        return -_to_sympy(e.arg, syms)
    if isinstance(e, S.BinOp):
        l, r = _to_sympy(e.left, syms), _to_sympy(e.right, syms)
        return {"+": l + r, "-": l - r, "*": l * r, "/": l / r}[e.op]
    raise ValueError(f"not an arithmetic expression: {S.show_expr(e)}")


def _from_sympy(x) -> S.Expr:
    if x.is_Integer:
        return S.num(int(x))
    if x.is_Rational:
        return S.BinOp("/", S.num(int(x.p)), S.num(int(x.q)))
    if x.is_Float:
        return S.num(float(x))
    if x.is_Symbol:
        return S.VarRef(x.name)
    if x.is_Add:
        terms = list(x.as_ordered_terms())
        out = _from_sympy(terms[0])
        for t in terms[1:]:
            if t.could_extract_minus_sign():
                out = S.BinOp("-", out, _from_sympy(-t))
            else:
                out = S.BinOp("+", out, _from_sympy(t))
        return out
    if x.is_Mul:
        if x.could_extract_minus_sign():
            return S.Neg(_from_sympy(-x))
        num, den = x.as_numer_denom()
        if den != 1:
            return S.BinOp("/", _from_sympy(num), _from_sympy(den))
        factors = x.as_ordered_factors()
        out = _from_sympy(factors[0])
        for f in factors[1:]:
            out = S.BinOp("*", out, _from_sympy(f))
        return out
    if x.is_Pow and x.exp.is_Integer:
        k = int(x.exp)
        if k < 0:
            return S.BinOp("/", S.num(1), _from_sympy(x.base ** -k))
        out = _from_sympy(x.base)
        for _ in range(k - 1):
            out = S.BinOp("*", out, _from_sympy(x.base))
        return out
    raise ValueError(f"cannot express {x} in HCSP arithmetic")


def solve_ode(o: S.Ode) -> Tuple[str, S.Expr]:
    """(x, f) with x_dot = f, solving an implicit equation when needed."""
    hit = o.explicit()
    if hit is not None:
        return hit
    syms: Dict[str, sympy.Symbol] = {}
    eq = _to_sympy(o.lhs, syms) - _to_sympy(o.rhs, syms)
    dotted = [n for n in syms if S.is_dotted(n)]
    if len(dotted) != 1:
        raise ValueError(f"equation {S.show_expr(o.lhs)} = {S.show_expr(o.rhs)} "
                         f"must mention exactly one derivative")
    sols = sympy.solve(eq, syms[dotted[0]])
    if len(sols) != 1:
        raise ValueError(f"equation {S.show_expr(o.lhs)} = {S.show_expr(o.rhs)} "
                         f"has no unique solution for {dotted[0]}")
    return S.undot(dotted[0]), _from_sympy(sympy.simplify(sols[0]))


def explicit_odes(odes: Sequence[S.Ode]) -> List[Tuple[str, S.Expr]]:
    laws = [solve_ode(o) for o in odes]
    names = [x for x, _ in laws]
    if len(set(names)) != len(names):
        raise ValueError(f"variable evolved twice in one system: {names}")
    return laws


# ── Integration ──────────────────────────────────────────────────────────────

def integrate_ode(odes: Sequence[S.Ode], x0: Mapping[str, float], b: S.Expr, maxdur: float, cfg,
                  watch: Sequence[S.Expr] = (), t0: float = 0.0) -> OdeResult:
    """Evolve `odes` from x0 while b holds and no watched condition holds, for at most maxdur.

    cfg supplies ode_step and ode_tol. Returned functions are in absolute time (offset t0).
    """
    try:
        laws = explicit_odes(odes)
    except ValueError as e:
        raise OdeError(str(e)) from None
    names = [x for x, _ in laws]
    base = dict(x0)
    y0 = np.array([float(base[x]) for x in names], dtype=float)

    def env_of(y) -> Dict[str, float]:
        env = dict(base)
        env.update(zip(names, (float(v) for v in y)))
        return env

    def rates(y) -> np.ndarray:
        env = env_of(y)
        return np.array([S.eval_arith(f, env) for _, f in laws], dtype=float)

    exits = [S.Not(b)] + list(watch)

    def exit_margin(y) -> float:
        env = env_of(y)
        return max(S.margin(c, env) for c in exits)

    def exit_holds(y) -> bool:
        env = env_of(y)
        return any(S.eval_bool(c, env) for c in exits)

    affine = not any(S.expr_vars(f) & set(names) for _, f in laws)
    if affine:
        slope = rates(y0)
        path = lambda t: y0 + slope * t  # noqa: E731
        knots = np.arange(0.0, maxdur, cfg.ode_step) if maxdur > 0 else np.array([0.0])
        knots = np.append(knots, maxdur)
    else:
        def event(t, y):
            return exit_margin(y)
        event.terminal = True
        event.direction = 1
        sol = solve_ivp(lambda t, y: rates(y), (0.0, maxdur), y0, method="RK45", max_step=cfg.ode_step,
                        rtol=1e-10, atol=1e-12, dense_output=True, events=event)
        if sol.status == -1:
            raise OdeError(f"integration failed: {sol.message}")
        if not np.all(np.isfinite(sol.y)):
            raise OdeError("state became non-finite")
        path = sol.sol
        knots = sol.t

    g = lambda t: exit_margin(path(t))  # noqa: E731
    t_exit, exit = float(knots[-1]), "horizon"
    if exit_holds(path(0.0)):
        t_exit, exit = 0.0, "boundary"
    elif not affine and sol.t_events[0].size:
        t_exit, exit = float(sol.t_events[0][0]), "boundary"
    else:
        prev = 0.0
        for t in knots:
            t = float(t)
            if exit_holds(path(t)):
                t_exit, exit = t, "boundary"
                if t > prev and g(prev) < 0 < g(t):
                    t_exit = brentq(g, prev, t, xtol=cfg.ode_tol)
                break
            prev = t
    if exit == "boundary":
        k = 0
        while not exit_holds(path(t_exit)) and k < _NUDGES and t_exit < maxdur:
            t_exit = min(maxdur, t_exit + cfg.ode_tol * 2 ** k)
            k += 1
        if t_exit >= maxdur and not exit_holds(path(t_exit)):
            exit = "horizon"

    y_end = np.asarray(path(t_exit), dtype=float)
    if not np.all(np.isfinite(y_end)):
        raise OdeError("state became non-finite")
    d_end = rates(y_end)
    fns: Dict[str, RealFn] = {}
    if affine:
        for i, x in enumerate(names):
            fns[x] = RealFn.affine(t0, y0[i], slope[i])
            fns[S.dot(x)] = RealFn.const(slope[i])
    else:
        ts = [float(t) for t in knots if t < t_exit] + [t_exit]
        ys = np.array([np.asarray(path(t), dtype=float) for t in ts])
        ds = np.array([rates(y) for y in ys])
        for i, x in enumerate(names):
            fns[x] = RealFn.samples([t + t0 for t in ts], ys[:, i])
            fns[S.dot(x)] = RealFn.samples([t + t0 for t in ts], ds[:, i])
    end = {x: float(y_end[i]) for i, x in enumerate(names)}
    end.update({S.dot(x): float(d_end[i]) for i, x in enumerate(names)})
    return OdeResult(fns, exit, t_exit, end)
