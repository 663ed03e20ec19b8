"""
simulator.py — Runs of core HCSP terms as trajectories.

Every step first reduces the term by its zero-time rules (skip, if, |~|, mu
unfolding, satisfied awaits, evolutions whose domain is already left). Then:

  some thread is at an assignment   one of them (scheduler's choice) takes a
                                    computation stretch of length negligible_eps
                                    with its markers raised; the others are frozen
  else some thread evolves          all evolving threads integrate jointly until
                                    a domain is left or a waiting await is enabled
  else                              nothing can change any more: constant tail

Markers: N is raised by every computation stretch, R by the root process, and
R#k.1 / R#k.2 by the left / right operand of the parallel node tagged k.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import syntax as S
from .debug_timing import trace
from .desugar import desugar, is_core
from .errors import MissingVariable, OdeError, SimulationError, ZenoError
from .ode import integrate_ode
from .trajectory import RealFn, Segment, Trajectory

# ── Config ───────────────────────────────────────────────────────────────────

ROOT_MARKER     = "R"
ANY_MARKER      = "N"
SCHEDULERS      = ("fair-random", "least-index")
UNFOLD_FUEL     = 200        # zero-time mu unfoldings allowed per step
MAX_STALLS      = 100        # zero-length evolution steps in a row


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    horizon: float = 20.0
    negligible_eps: float = 1e-3
    ode_step: float = 0.01
    ode_tol: float = 1e-9
    max_steps: int = 1_000_000
    scheduler: str = "fair-random"

    def __post_init__(self):
        if self.negligible_eps <= 0:
            raise SimulationError("negligible_eps must be positive")
        if self.ode_tol <= 0 or self.ode_step <= 0:
            raise SimulationError("ode_step and ode_tol must be positive")
        if self.scheduler not in SCHEDULERS:
            raise SimulationError(f"unknown scheduler {self.scheduler!r} (expected one of {SCHEDULERS})")


@dataclass
class Run:
    trajectory: Trajectory
    final_term: S.Process
    events: List[Tuple[float, str]] = field(default_factory=list)
    steps: int = 0

    @property
    def terminated(self) -> bool:
        return self.final_term == S.EPS

    @property
    def final(self) -> Dict[str, float]:
        return self.trajectory.final


@dataclass(frozen=True)
class Thread:
    chain: Tuple[str, ...]       # markers raised while this thread computes
    path: Tuple[int, ...]        # Par sides from the root
    head: S.Process


# ── Variables ────────────────────────────────────────────────────────────────

def marker_names(p: S.Process) -> List[str]:
    names = [ROOT_MARKER, ANY_MARKER]
    for q in S.walk(p):
        if isinstance(q, S.Par) and q.tag is not None:
            names += list(S.thread_markers(ROOT_MARKER, q.tag))
    return names


def _internal(name: str, channels) -> bool:
    return S.is_flag(name) or S.is_dotted(name) or "#" in name or name in channels


def initial_state(p: S.Process, init: Mapping[str, float], all_zero: bool = False) -> Dict[str, float]:
    """Valuation of Var(p): init, with generated variables (flags, channels, clocks, dots) at 0."""
    names = S.all_vars(p).names
    channels = {n[:-1] for n in names if S.is_flag(n)}
    env: Dict[str, float] = {}
    missing = []
    for name in sorted(names):
        if name in init:
            env[name] = float(init[name])
        elif all_zero or _internal(name, channels):
            env[name] = 0.0
        else:
            missing.append(name)
    if missing:
        raise MissingVariable(f"no initial value for {', '.join(missing)}")
    for name, v in init.items():
        env.setdefault(name, float(v))
    return env


# ── Zero-time reduction ──────────────────────────────────────────────────────

Pick = Callable[[int], Sequence[int]]


def _normal_forms(p: S.Process, env: Mapping[str, float], pick: Pick, fuel: List[int]) -> Iterator[S.Process]:
    if isinstance(p, S.Skip):
        yield S.EPS
    elif isinstance(p, (S.Terminated, S.Assign)):
        yield p
    elif isinstance(p, S.Await):
        yield S.EPS if S.eval_bool(S.closure(p.b), env) else p
    elif isinstance(p, S.Evolve):
        yield p if S.eval_bool(p.b, env) else S.EPS
    elif isinstance(p, S.If):
        yield from _normal_forms(p.then if S.eval_bool(p.b, env) else p.orelse, env, pick, fuel)
    elif isinstance(p, S.IntChoice):
        for i in pick(2):
            yield from _normal_forms((p.left, p.right)[i], env, pick, fuel)
    elif isinstance(p, S.Mu):
        fuel[0] -= 1
        if fuel[0] < 0:
            raise ZenoError(f"zero-time recursion does not reach an action: {S.show(p)}")
        yield from _normal_forms(S.unfold(p), env, pick, fuel)
    elif isinstance(p, S.Seq):
        for h in _normal_forms(p.first, env, pick, fuel):
            if h == S.EPS:
                yield from _normal_forms(p.second, env, pick, fuel)
            else:
                yield S.Seq(h, p.second)
    elif isinstance(p, S.Par):
        for left in _normal_forms(p.left, env, pick, fuel):
            for right in _normal_forms(p.right, env, pick, fuel):
                yield S.EPS if left == S.EPS and right == S.EPS else S.Par(left, right, p.tag)
    elif isinstance(p, S.RecVar):
        raise SimulationError(f"unbound recursion variable {p.name}")
    else:
        raise SimulationError(f"not a core construct: {S.show(p)}")


def threads(p: S.Process, chain: Tuple[str, ...] = (ROOT_MARKER,), path: Tuple[int, ...] = ()) -> Iterator[Thread]:
    if isinstance(p, S.Par):
        m1, m2 = S.thread_markers(chain[-1], p.tag)
        yield from threads(p.left, chain + (m1,), path + (1,))
        yield from threads(p.right, chain + (m2,), path + (2,))
    elif isinstance(p, S.Seq):
        yield from threads(p.first, chain, path)
    else:
        yield Thread(chain, path, p)


def _replace_head(p: S.Process, path: Tuple[int, ...], new: S.Process) -> S.Process:
    if isinstance(p, S.Seq):
        return S.Seq(_replace_head(p.first, path, new), p.second)
    if isinstance(p, S.Par):
        if path[0] == 1:
            return S.Par(_replace_head(p.left, path[1:], new), p.right, p.tag)
        return S.Par(p.left, _replace_head(p.right, path[1:], new), p.tag)
    return new


# ── Fragments ────────────────────────────────────────────────────────────────

def _constant_segment(t0: float, t1: float, env: Mapping[str, float], signals: Mapping[str, int],
                      end: Optional[Mapping[str, float]] = None) -> Segment:
    return Segment(t0, t1, dict(signals), {k: RealFn.const(v) for k, v in env.items()}, dict(end or env))


def _assign_values(q: S.Assign, env: Mapping[str, float]) -> Dict[str, float]:
    new = dict(env)
    for x, e in zip(q.targets, q.exprs):
        new[x] = S.eval_arith(e, env)
    return new


def _signals(markers: Sequence[str], raised: Sequence[str] = ()) -> Dict[str, int]:
    return {m: int(m in raised) for m in markers}


class _Stepper:
    """One run's mutable state: time, valuation, the growing segment list."""

    def __init__(self, p: S.Process, env: Dict[str, float], cfg: SimConfig, t0: float = 0.0):
        self.p = p
        self.env = env
        self.cfg = cfg
        self.t = t0
        self.markers = marker_names(p)
        self.segments: List[Segment] = []
        self.events: List[Tuple[float, str]] = []

    def assign(self, th: Thread) -> None:
        q = th.head
        new = _assign_values(q, self.env)
        t1 = self.t + self.cfg.negligible_eps
        raised = (ANY_MARKER,) + th.chain
        self.segments.append(_constant_segment(self.t, t1, self.env, _signals(self.markers, raised), new))
        self.events.append((self.t, f"{th.chain[-1]}: {S.show(q)}"))
        self.env = new
        self.t = t1
        self.p = _replace_head(self.p, th.path, S.EPS)

    def evolve(self, evolving: List[Thread], waiting: List[Thread]) -> float:
        odes = tuple(o for th in evolving for o in th.head.odes)
        b = S.conj(*[th.head.b for th in evolving])
        watch = [S.closure(th.head.b) for th in waiting]
        maxdur = self.cfg.horizon - self.t
        res = integrate_ode(odes, self.env, b, maxdur, self.cfg, watch=watch, t0=self.t)
        t1 = self.t + res.t_exit
        end = dict(self.env)
        end.update(res.end)
        if t1 > self.t:
            reals = {k: RealFn.const(v) for k, v in self.env.items()}
            reals.update(res.fns)
            self.segments.append(Segment(self.t, t1, _signals(self.markers), reals, end))
        self.events.append((self.t, f"evolve {res.exit} after {res.t_exit:.6g}"))
        self.env = end
        self.t = t1
        return res.t_exit

    def quiesce(self, until: float) -> None:
        if until > self.t:
            self.segments.append(_constant_segment(self.t, until, self.env, _signals(self.markers)))
            self.t = until

    def trajectory(self, tail: str) -> Trajectory:
        return Trajectory(self.segments, self.env, tail, _signals(self.markers), self.t)


# ── Scheduling ───────────────────────────────────────────────────────────────

def _picker(cfg: SimConfig, rng: np.random.Generator) -> Pick:
    if cfg.scheduler == "least-index":
        return lambda n: [0]
    return lambda n: [int(rng.integers(n))]


def _choose(threads_: List[Thread], cfg: SimConfig, rng: np.random.Generator) -> Thread:
    if cfg.scheduler == "least-index" or len(threads_) == 1:
        return threads_[0]
    return threads_[int(rng.integers(len(threads_)))]


def _prepare(p: S.Process) -> S.Process:
    if not is_core(p):
        p = desugar(p)
    return S.label_parallel(p)


# ── Operations ───────────────────────────────────────────────────────────────

def step(p: S.Process, state: Mapping[str, float], cfg: Optional[SimConfig] = None,
         t0: float = 0.0) -> List[Tuple[Trajectory, S.Process]]:
    """Every way p can take its next timed step from `state`.

    A fragment of zero length means p reduced to eps by zero-time rules only.
    """
    cfg = cfg or SimConfig()
    p = S.label_parallel(p)
    out: List[Tuple[Trajectory, S.Process]] = []
    for q in _normal_forms(p, state, lambda n: range(n), [UNFOLD_FUEL]):
        if q == S.EPS:
            out.append((Trajectory([], state, "none", None, t0), S.EPS))
            continue
        ths = [th for th in threads(q) if th.head != S.EPS]
        assigns = [th for th in ths if isinstance(th.head, S.Assign)]
        if assigns:
            for th in assigns:
                st = _Stepper(q, dict(state), cfg, t0)
                st.assign(th)
                out.append((st.trajectory("none"), st.p))
            continue
        st = _Stepper(q, dict(state), cfg, t0)
        evolving = [th for th in ths if isinstance(th.head, S.Evolve)]
        if evolving:
            st.evolve(evolving, [th for th in ths if isinstance(th.head, S.Await)])
            out.append((st.trajectory("open" if st.t >= cfg.horizon else "none"), st.p))
        else:
            st.quiesce(max(cfg.horizon, t0))
            out.append((st.trajectory("constant"), q))
    return out


def simulate(p: S.Process, init: Mapping[str, float], cfg: Optional[SimConfig] = None,
             all_zero: bool = False) -> Run:
    """One run of p from init, resolving nondeterminism with the configured scheduler."""
    cfg = cfg or SimConfig()
    p = _prepare(p)
    rng = np.random.default_rng(cfg.seed)
    pick = _picker(cfg, rng)
    st = _Stepper(p, initial_state(p, init, all_zero), cfg)
    steps = stalls = 0
    tail = "none"
    while True:
        steps += 1
        if steps > cfg.max_steps:
            raise ZenoError(f"more than {cfg.max_steps} steps before t={st.t:.6g}")
        st.p = next(_normal_forms(st.p, st.env, pick, [UNFOLD_FUEL]))
        if st.p == S.EPS:
            break
        ths = [th for th in threads(st.p) if th.head != S.EPS]
        assigns = [th for th in ths if isinstance(th.head, S.Assign)]
        evolving = [th for th in ths if isinstance(th.head, S.Evolve)]
        if not assigns and not evolving:
            st.quiesce(cfg.horizon)
            tail = "constant"
            break
        if st.t >= cfg.horizon:
            tail = "open"
            break
        if assigns:
            st.assign(_choose(assigns, cfg, rng))
            stalls = 0
            continue
        dur = st.evolve(evolving, [th for th in ths if isinstance(th.head, S.Await)])
        stalls = stalls + 1 if dur == 0.0 else 0
        if stalls > MAX_STALLS:
            raise OdeError(f"evolution makes no progress at t={st.t:.6g}")
    trace("simulator", f"{steps} steps, t={st.t:.6g}, tail={tail}")
    return Run(st.trajectory(tail), st.p, st.events, steps)


def simulate_text(text: str, init: Mapping[str, float], cfg: Optional[SimConfig] = None,
                  all_zero: bool = False) -> Run:
    from .parser import parse_process
    return simulate(parse_process(text), init, cfg, all_zero)


def soundness_holds(p: S.Process, run: Run, eval_cfg=None):
    """Evaluate [[p]] over the run on [0, end]; the run must come from simulate(p)."""
    from .evaluator import eval_formula
    from .semantics import compile_process, program_context

    q = _prepare(p)
    return eval_formula(compile_process(q, program_context(q)), run.trajectory, None, eval_cfg)
