"""
discharge.py — Side conditions of proofs and how they get discharged.

Three strategies:
  assumed     recorded as a trust assumption, never checked
  tautology   sound DC simplification, then validity of the propositional
              skeleton (DC atoms are opaque letters; top-level l-vs-constant
              atoms are case-split over the length)
  falsify     tautology first, then `budget` seeded random trajectories and
              intervals; a FALSE evaluation is a definitive counterexample

Sampling is spread over `jobs` threads with one seed per sample (seed + i), so
the outcome does not depend on the degree of parallelism.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Symbol
from sympy.logic.boolalg import And, Equivalent, Implies, Not, Or, false, true
from sympy.logic.inference import satisfiable

from . import dc as D
from . import syntax as S
from .debug_timing import log, trace
from .errors import HcspError
from .evaluator import EvalConfig, Truth, eval_formula
from .trajectory import Interval, RealFn, Segment, Trajectory

# ── Config ───────────────────────────────────────────────────────────────────

STRATEGIES       = ("assumed", "tautology", "falsify")
STATUSES         = ("pending", "discharged", "discharged-empirically", "assumed", "unproven", "failed")
DEFAULT_BUDGET   = 1000
MAX_SEGMENTS     = 8
VALUE_RANGE      = 10.0
MAX_HORIZON      = 20.0
CHUNK            = 64


@dataclass(frozen=True)
class DischargeConfig:
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    jobs: int = 1
    max_segments: int = MAX_SEGMENTS
    value_range: float = VALUE_RANGE
    max_horizon: float = MAX_HORIZON
    eval: EvalConfig = field(default_factory=EvalConfig)
    strategy: str = "falsify"          # for side conditions a proof leaves unspecified

    def __post_init__(self):
        if self.budget < 0 or self.jobs < 1 or self.max_segments < 1:
            raise ValueError("budget >= 0, jobs >= 1 and max_segments >= 1 required")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class Counterexample:
    trajectory: Trajectory
    interval: Interval
    path: Optional[str] = None         # set once written to disk


@dataclass
class Obligation:
    """A DC validity claim attached to a proof step (formula None: proof script left it to the rule)."""
    formula: Optional[D.DcFormula]
    strategy: str = "falsify"
    budget: Optional[int] = None
    status: str = "pending"
    counterexample: Optional[Counterexample] = None
    note: str = ""
    R: str = "R"
    N: str = "N"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    @property
    def settled(self) -> bool:
        return self.status in ("discharged", "discharged-empirically")


# ── Simplification ───────────────────────────────────────────────────────────

def _start_term(t: D.DcTerm) -> bool:
    if isinstance(t, (D.Len, D.Dur)):
        return False
    if isinstance(t, D.TVar):
        return not t.primed
    return all(_start_term(c) for c in D.term_children(t))


def start_determined(f: D.DcFormula) -> bool:
    """Truth depends only on the values at the left end of the interval."""
    if isinstance(f, (D.TrueF, D.FalseF)):
        return True
    if isinstance(f, D.PropVar):
        return not f.primed
    if isinstance(f, D.Atom):
        return _start_term(f.left) and _start_term(f.right)
    if isinstance(f, (D.FNot, D.FBin)):
        return all(start_determined(g) for g in D.subformulas(f))
    return False


def point_true(f: D.DcFormula) -> bool:
    """Holds on every point interval."""
    if isinstance(f, (D.TrueF, D.Ae0, D.BoxPrefix, D.BoxPoint, D.StarF, D.EvolvesBy)):
        return True
    if f in (D.POINT, D.FIN):
        return True
    if isinstance(f, D.Atom) and f.op in ("=", "<=", ">="):
        l, r = f.left, f.right
        if isinstance(l, D.TVar) and isinstance(r, D.TVar) and l.name == r.name:
            return True
    if isinstance(f, D.FBin) and f.op == "iff":
        l, r = f.left, f.right
        if isinstance(l, D.PropVar) and isinstance(r, D.PropVar) and l.name == r.name:
            return True
    if isinstance(f, D.FBin) and f.op == "and":
        return point_true(f.left) and point_true(f.right)
    if isinstance(f, D.FBin) and f.op == "or":
        return point_true(f.left) or point_true(f.right)
    if isinstance(f, (D.Box, D.Forall)):
        return point_true(f.arg if isinstance(f, D.Box) else f.body)
    if isinstance(f, D.Chop):
        return point_true(f.left) and point_true(f.right)
    return False


def _flat(f: D.DcFormula, op: str) -> List[D.DcFormula]:
    if isinstance(f, D.FBin) and f.op == op:
        return _flat(f.left, op) + _flat(f.right, op)
    return [f]


def normalize(f: D.DcFormula) -> D.DcFormula:
    """Flattened and/or without unit operands; everything else kept as written."""
    if isinstance(f, D.FBin) and f.op in ("and", "or"):
        parts = [normalize(g) for g in _flat(f, f.op)]
        return D.f_and(*parts) if f.op == "and" else D.f_or(*parts)
    return D.map_formula(f, normalize)


def simplify(f: D.DcFormula) -> D.DcFormula:
    """Rewrites that are valid in DC over finite and infinite intervals."""
    f = D.map_formula(f, simplify)
    TOP, BOT = D.TOP, D.BOT
    if isinstance(f, D.FNot):
        if f.arg == TOP:
            return BOT
        if f.arg == BOT:
            return TOP
        if isinstance(f.arg, D.FNot):
            return f.arg.arg
        return f
    if isinstance(f, D.FBin):
        if f.op in ("and", "or"):
            parts = [simplify(g) for g in _flat(f, f.op)]
            zero, unit = (BOT, TOP) if f.op == "and" else (TOP, BOT)
            if zero in parts:
                return zero
            out: List[D.DcFormula] = []
            for g in parts:
                if g != unit and g not in out:
                    out.append(g)
            return D.f_and(*out) if f.op == "and" else D.f_or(*out)
        a, b = f.left, f.right
        if f.op == "implies":
            if a == BOT or b == TOP or a == b:
                return TOP
            if a == TOP:
                return b
            if b == BOT:
                return simplify(D.FNot(a))
            return f
        if a == b:
            return TOP
        return f
    if isinstance(f, D.Chop):
        if BOT in (f.left, f.right):
            return BOT
        if f.left == D.POINT:
            return f.right
        if f.right == TOP:
            if point_true(f.left):
                return TOP
            if start_determined(f.left):
                return f.left
        return f
    if isinstance(f, D.Dlc):
        if f.arg in (TOP, BOT):
            return f.arg
        if point_true(f.arg):
            return TOP
        if start_determined(f.arg):
            return f.arg
        return f
    if isinstance(f, (D.Box, D.BoxPrefix, D.BoxPoint)) and f.arg == TOP:
        return TOP
    if isinstance(f, D.Forall) and f.body in (TOP, BOT):
        return f.body
    if isinstance(f, D.Ae0) and f.s == D.S_TRUE:
        return TOP
    if isinstance(f, D.Split):
        if not f.exists and f.body == TOP:
            return TOP
        if f.exists and f.body == BOT:
            return BOT
    return f


# ── Tautology ────────────────────────────────────────────────────────────────

def _length_atom(f: D.DcFormula) -> Optional[Tuple[str, float, bool]]:
    """(op, c, flipped) for l op c / c op l with a constant c."""
    if not isinstance(f, D.Atom):
        return None

    def cval(t):
        if isinstance(t, D.Const):
            return t.value
        if isinstance(t, D.Inf):
            return math.inf
        if isinstance(t, D.TNeg) and isinstance(t.arg, D.Const):
            return -t.arg.value
        return None

    if isinstance(f.left, D.Len) and cval(f.right) is not None:
        return f.op, cval(f.right), False
    if isinstance(f.right, D.Len) and cval(f.left) is not None:
        return f.op, cval(f.left), True
    return None


def _holds(op: str, a: float, b: float) -> bool:
    return {"=": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


class _Skeleton:
    def __init__(self):
        self.letters: Dict[D.DcFormula, Symbol] = {}
        self.lengths: Dict[Symbol, Tuple[str, float, bool]] = {}

    def letter(self, f: D.DcFormula) -> Symbol:
        sym = self.letters.get(f)
        if sym is None:
            sym = Symbol(f"a{len(self.letters)}")
            self.letters[f] = sym
            la = _length_atom(f)
            if la is not None:
                self.lengths[sym] = la
        return sym

    def build(self, f: D.DcFormula):
        if f == D.TOP:
            return true
        if f == D.BOT:
            return false
        if isinstance(f, D.FNot):
            return Not(self.build(f.arg))
        if isinstance(f, D.FBin):
            a, b = self.build(f.left), self.build(f.right)
            return {"and": And, "or": Or, "implies": Implies, "iff": Equivalent}[f.op](a, b)
        return self.letter(f)

    def length_cases(self) -> List[Dict[Symbol, bool]]:
        if not self.lengths:
            return [{}]
        cs = sorted({c for _, c, _ in self.lengths.values() if c >= 0 and not math.isinf(c)} | {0.0})
        trial_lengths = set(cs) | {cs[-1] + 1.0, math.inf}
        trial_lengths |= {(a + b) / 2 for a, b in zip(cs, cs[1:])}
        out = []
        for L in sorted(trial_lengths):
            case = {}
            for sym, (op, c, flipped) in self.lengths.items():
                case[sym] = _holds(op, c, L) if flipped else _holds(op, L, c)
            out.append(case)
        return out


def tautology(f: D.DcFormula) -> bool:
    """Sound, incomplete validity check."""
    f = simplify(normalize(f))
    if f == D.TOP:
        return True
    sk = _Skeleton()
    expr = sk.build(f)
    for case in sk.length_cases():
        if satisfiable(Not(expr.subs({k: true if v else false for k, v in case.items()}))) is not False:
            return False
    return True


# ── Random trajectories ──────────────────────────────────────────────────────

def _split_names(f: D.DcFormula) -> set:
    out = set()
    for g in D.walk_formula(f):
        if isinstance(g, D.Split):
            out |= {g.r1, g.r2}
    return out


def _bool_names(f: D.DcFormula) -> set:
    return {g.name for g in D.walk_formula(f) if isinstance(g, D.PropVar)}


def random_trajectory(rng: np.random.Generator, reals: Sequence[str], bools: Sequence[str],
                      signals: Sequence[str], cfg: DischargeConfig, R: str = "R", N: str = "N") -> Trajectory:
    """Piecewise-affine trajectory; N covers R on every segment; x_dot is the slope of x.

    Each segment records its end values, so a variable is local across a
    breakpoint unless it was redrawn there (30% of the time).
    """
    n = int(rng.integers(1, cfg.max_segments + 1))
    T = float(rng.uniform(0.5, cfg.max_horizon))
    cuts = np.sort(rng.uniform(0.0, T, n - 1)) if n > 1 else np.array([])
    times = [0.0] + [float(c) for c in cuts] + [T]
    vr = cfg.value_range
    base = sorted({S.undot(x) for x in reals})
    last = {x: float(rng.uniform(-vr, vr)) for x in base}
    last_b = {p: float(rng.integers(0, 2)) for p in bools}

    def marks() -> Dict[str, int]:
        sig = {s: int(rng.integers(0, 2)) for s in signals}
        if R in sig and N in sig and sig[R]:
            sig[N] = 1
        return sig

    segments = []
    for t0, t1 in zip(times, times[1:]):
        if t1 <= t0:
            continue
        fns: Dict[str, RealFn] = {}
        end: Dict[str, float] = {}
        for x in base:
            v0 = last[x] if rng.random() < 0.7 else float(rng.uniform(-vr, vr))
            v1 = v0 if rng.random() < 0.4 else float(rng.uniform(-vr, vr))
            slope = (v1 - v0) / (t1 - t0)
            fns[x] = RealFn.affine(t0, v0, slope)
            fns[S.dot(x)] = RealFn.const(slope)
            end[x], end[S.dot(x)] = v1, slope
            last[x] = v1
        for p in bools:
            b = last_b[p] if rng.random() < 0.7 else float(rng.integers(0, 2))
            fns[p] = RealFn.const(b)
            end[p] = last_b[p] = b
        segments.append(Segment(t0, t1, marks(), fns, end))
    final = {x: last[x] for x in base}
    final.update({S.dot(x): segments[-1].reals[S.dot(x)](T) for x in base})
    final.update({p: segments[-1].reals[p](T) for p in bools})
    if rng.random() < 0.3:
        for x in base:
            final[S.dot(x)] = 0.0
        return Trajectory(segments, final, "constant", marks())
    return Trajectory(segments, final, "none")


def random_interval(rng: np.random.Generator, tr: Trajectory) -> Interval:
    bps = tr.breakpoints()
    lo = float(rng.choice(bps)) if rng.random() < 0.5 else float(rng.uniform(0.0, tr.T))
    u = rng.random()
    if u < 0.2:
        hi = lo
    elif u < 0.5:
        hi = tr.end
    else:
        hi = float(rng.uniform(lo, tr.T)) if tr.T > lo else lo
    return Interval(lo, hi)


def _fvar_choices(rng: np.random.Generator) -> D.DcFormula:
    c = D.const(round(float(rng.uniform(0.0, 5.0)), 3))
    return [D.TOP, D.BOT, D.Atom("<", D.LEN, c), D.Atom(">=", D.LEN, c)][int(rng.integers(0, 4))]


# ── Falsification ────────────────────────────────────────────────────────────

def _sample(f: D.DcFormula, i: int, names: tuple, cfg: DischargeConfig, R: str, N: str):
    reals, bools, signals, fvars = names
    rng = np.random.default_rng(cfg.seed + i)
    tr = random_trajectory(rng, reals, bools, signals, cfg, R, N)
    g = f
    for X in fvars:
        g = D.subst_fvar(g, X, _fvar_choices(rng))
    sigma = random_interval(rng, tr)
    try:
        r = eval_formula(g, tr, sigma, cfg.eval)
    except HcspError as e:
        trace("discharge", f"sample {i} inconclusive: {e}")
        return i, Truth.UNKNOWN, tr, sigma
    return i, r, tr, sigma


def falsify(f: D.DcFormula, cfg: Optional[DischargeConfig] = None, budget: Optional[int] = None,
            R: str = "R", N: str = "N") -> Tuple[str, Optional[Counterexample], int]:
    """(status, counterexample, conclusive samples) for the claim that f is valid."""
    cfg = cfg or DischargeConfig()
    budget = cfg.budget if budget is None else budget
    f = simplify(normalize(f))
    if f == D.TOP:
        return "discharged", None, 0
    temporal = D.temporal_symbols(f)
    bools = sorted(_bool_names(f))
    reals = sorted(n for n in temporal if n not in bools)
    signals = sorted(D.state_symbols(f) - _split_names(f))
    names = (reals, bools, signals, sorted(D.free_fvars(f)))

    conclusive = 0
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        for start in range(0, budget, CHUNK):
            idx = range(start, min(budget, start + CHUNK))
            futures = [pool.submit(_sample, f, i, names, cfg, R, N) for i in idx]
            results, errors = [], []
            for fut in futures:
                try:
                    results.append(fut.result())
                except Exception as e:  # noqa: BLE001
                    log("discharge", f"worker failed: {e}")
                    errors.append(e)
            if errors:
                raise errors[0]
            for i, r, tr, sigma in sorted(results, key=lambda x: x[0]):
                if r is Truth.FALSE:
                    trace("discharge", f"counterexample at sample {i} on {sigma}")
                    return "failed", Counterexample(tr, sigma), conclusive + 1
                if r is Truth.TRUE:
                    conclusive += 1
    if conclusive == 0 and budget > 0:
        return "assumed", None, 0
    return "discharged-empirically", None, conclusive


def discharge(ob: Obligation, cfg: Optional[DischargeConfig] = None) -> Obligation:
    """Settle one obligation according to its strategy; returns an updated copy."""
    cfg = cfg or DischargeConfig()
    if ob.strategy == "assumed":
        return replace(ob, status="assumed", note=ob.note or "trust assumption")
    if tautology(ob.formula):
        return replace(ob, status="discharged", note="tautology")
    if ob.strategy == "tautology":
        return replace(ob, status="unproven", note="not a propositional tautology after simplification")
    status, cex, n = falsify(ob.formula, cfg, ob.budget, ob.R, ob.N)
    budget = cfg.budget if ob.budget is None else ob.budget
    note = {"failed": "counterexample found",
            "assumed": f"no conclusive sample out of {budget}",
            "discharged-empirically": f"{n} of {budget} samples conclusive, no counterexample",
            "discharged": "tautology after simplification"}[status]
    return replace(ob, status=status, counterexample=cex, note=note)
