"""
gnf.py — Guarded normal form and elimination of parallel composition.

GNF:   P ::= skip | A ; R | if b then P else Q | P |~| Q
       A ::= x := e | await b | <F & b>
with R unrestricted. Parallel composition is driven inwards by one rule per
pair of operand shapes; continuations are rewritten in turn, and a
configuration met again on the same path becomes a recursion variable, and
a closed result is shared by every branch that reaches the same configuration.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import syntax as S
from .debug_timing import trace
from .desugar import FreshNames, desugar, is_core
from .errors import FuelExhausted, NoRepetition, RewriteError

DEFAULT_FUEL   = 1000
ELIM_FUEL      = 256
GUARDS         = (S.Assign, S.Await, S.Evolve)


# ── Shape helpers ────────────────────────────────────────────────────────────

def _flatten(p: S.Process) -> List[S.Process]:
    if isinstance(p, S.Seq):
        return _flatten(p.first) + _flatten(p.second)
    return [p]


def normalize(p: S.Process) -> S.Process:
    """Right-nested sequences, no skip/eps inside sequences, no trivial parallels."""
    if isinstance(p, S.Seq):
        parts = [normalize(q) for q in _flatten(p)]
        parts = [q for q in parts if not isinstance(q, (S.Skip, S.Terminated))]
        return S.seq(*parts) if parts else S.SKIP
    if isinstance(p, S.Par):
        return _par(normalize(p.left), normalize(p.right), p.tag)
    if isinstance(p, S.Terminated):
        return S.SKIP
    return S.map_children(p, normalize)


def _par(a: S.Process, b: S.Process, tag: Optional[int] = None) -> S.Process:
    if isinstance(a, (S.Skip, S.Terminated)):
        return b
    if isinstance(b, (S.Skip, S.Terminated)):
        return a
    return S.Par(a, b, tag)


def _then(a: S.Process, r: S.Process) -> S.Process:
    return a if isinstance(r, (S.Skip, S.Terminated)) else S.Seq(a, r)


def _split(g: S.Process) -> Tuple[S.Process, S.Process]:
    """Guarded GNF term as (guard, continuation)."""
    if isinstance(g, S.Seq):
        return g.first, g.second
    return g, S.SKIP


def is_guard(p: S.Process) -> bool:
    return isinstance(p, GUARDS)


def is_gnf(p: S.Process) -> bool:
    if isinstance(p, (S.Skip, S.Terminated)) or is_guard(p):
        return True
    if isinstance(p, S.Seq):
        return is_guard(p.first)
    if isinstance(p, S.If):
        return is_gnf(p.then) and is_gnf(p.orelse)
    if isinstance(p, S.IntChoice):
        return is_gnf(p.left) and is_gnf(p.right)
    return False


# ── GNF ──────────────────────────────────────────────────────────────────────

class _Gnf:
    def __init__(self, fuel: int):
        self.fuel = fuel

    def spend(self, what: S.Process) -> None:
        self.fuel -= 1
        if self.fuel < 0:
            raise FuelExhausted(f"unfolding budget exhausted at {S.show(what)}")

    def gnf(self, p: S.Process) -> S.Process:
        if isinstance(p, (S.Skip, S.Terminated)):
            return S.SKIP
        if is_guard(p):
            return p
        if isinstance(p, S.Seq):
            return self.seq(self.gnf(p.first), p.second)
        if isinstance(p, S.If):
            return S.If(p.b, self.gnf(p.then), self.gnf(p.orelse))
        if isinstance(p, S.IntChoice):
            return S.IntChoice(self.gnf(p.left), self.gnf(p.right))
        if isinstance(p, S.While):
            self.spend(p)
            return S.If(p.b, self.seq(self.gnf(p.body), p), S.SKIP)
        if isinstance(p, S.Star):
            self.spend(p)
            return S.IntChoice(S.SKIP, self.seq(self.gnf(p.body), p))
        if isinstance(p, S.Mu):
            self.spend(p)
            return self.gnf(S.unfold(p))
        if isinstance(p, S.Par):
            return self.par(self.gnf(p.left), self.gnf(p.right))
        if isinstance(p, S.RecVar):
            raise RewriteError(f"unbound recursion variable {p.name}")
        raise RewriteError(f"not a core construct: {S.show(p)}")

    def seq(self, g: S.Process, q: S.Process) -> S.Process:
        """GNF of g ; q for g already in GNF."""
        if isinstance(g, (S.Skip, S.Terminated)):
            return self.gnf(q)
        if isinstance(g, S.If):
            return S.If(g.b, self.seq(g.then, q), self.seq(g.orelse, q))
        if isinstance(g, S.IntChoice):
            return S.IntChoice(self.seq(g.left, q), self.seq(g.right, q))
        a, r = _split(g)
        return S.Seq(a, normalize(S.Seq(r, q)))

    def par(self, g1: S.Process, g2: S.Process) -> S.Process:
        """GNF of g1 || g2 for g1, g2 in GNF."""
        if isinstance(g1, (S.Skip, S.Terminated)):
            return g2
        if isinstance(g2, (S.Skip, S.Terminated)):
            return g1
        for mine, other, left in ((g1, g2, True), (g2, g1, False)):
            order = (lambda x, y: (x, y)) if left else (lambda x, y: (y, x))
            if isinstance(mine, S.If):
                return S.If(mine.b, self.par(*order(mine.then, other)), self.par(*order(mine.orelse, other)))
            if isinstance(mine, S.IntChoice):
                return S.IntChoice(self.par(*order(mine.left, other)), self.par(*order(mine.right, other)))
        return self.guards(g1, g2)

    def guards(self, g1: S.Process, g2: S.Process) -> S.Process:
        a1, r1 = _split(g1)
        a2, r2 = _split(g2)
        k1, k2 = type(a1), type(a2)

        def rest(i: int) -> S.Process:
            """GNF of the parallel once operand i's guard is done."""
            self.spend(g1 if i == 1 else g2)
            return self.par(self.gnf(r1), g2) if i == 1 else self.par(g1, self.gnf(r2))

        def first(i: int) -> S.Process:
            """Operand i's assignment happens first."""
            return (S.Seq(a1, _par(r1, g2)) if i == 1 else S.Seq(a2, _par(g1, r2)))

        if k1 is S.Assign and k2 is S.Assign:
            return S.IntChoice(first(1), first(2))
        if S.Assign in (k1, k2):
            i, (ao, io) = (1, (a2, 2)) if k1 is S.Assign else (2, (a1, 1))
            if isinstance(ao, S.Await):
                return S.If(S.closure(ao.b), rest(io), first(i))
            return S.If(ao.b, first(i), rest(io))
        if k1 is S.Await and k2 is S.Await:
            b1, b2 = S.closure(a1.b), S.closure(a2.b)
            return S.If(b1, rest(1), S.If(b2, rest(2), S.Seq(S.Await(S.disj(a1.b, a2.b)), S.Par(g1, g2))))
        if S.Await in (k1, k2):
            (aw, iw), (ev, ie) = ((a1, 1), (a2, 2)) if k1 is S.Await else ((a2, 2), (a1, 1))
            joint = S.Evolve(ev.odes, S.conj(ev.b, S.push_negations(S.Not(S.closure(aw.b)))))
            return S.If(S.closure(aw.b), rest(iw),
                        S.If(ev.b, S.Seq(joint, S.Par(g1, g2)), rest(ie)))
        # both evolve: joint evolution, then whichever still holds carries on
        joint = S.Evolve(a1.odes + a2.odes, S.conj(a1.b, a2.b))
        after = S.If(a1.b, _par(g1, r2), S.If(a2.b, _par(r1, g2), _par(r1, r2)))
        return S.If(a1.b, S.If(a2.b, S.Seq(joint, after), rest(2)), rest(1))


def _core(p: S.Process) -> S.Process:
    """Derived constructs other than loops are rewritten to their core protocols."""
    return p if is_core(p, allow_loops=True) else desugar(p, keep_loops=True)


def to_gnf(p: S.Process, fuel: int = DEFAULT_FUEL) -> S.Process:
    """One layer of guards exposed; loops unfolded once, parallels pushed inwards."""
    return _Gnf(fuel).gnf(normalize(_core(p)))


# ── Parallel elimination ─────────────────────────────────────────────────────

@dataclass
class Elimination:
    term: S.Process
    complete: bool
    residue: List[str] = field(default_factory=list)
    unfoldings: int = 0


def _has_par(p: S.Process) -> bool:
    return any(isinstance(q, S.Par) for q in S.walk(p))


class _Eliminator:
    def __init__(self, fuel: int, fresh: FreshNames):
        self.fuel = fuel
        self.fresh = fresh
        self.residue: List[str] = []
        self.unfoldings = 0
        self.done: Dict[S.Process, S.Process] = {}   # closed, parallel-free results

    def elim(self, p: S.Process, seen: Dict[S.Process, str]) -> S.Process:
        p = normalize(p)
        if not _has_par(p):
            return p
        if p in seen:
            self.used.add(seen[p])
            return S.RecVar(seen[p])
        if p in self.done:
            return self.done[p]
        if self.fuel <= 0:
            self.residue.append(S.show(p))
            return p
        self.fuel -= 1
        self.unfoldings += 1
        name = self.fresh.next("X")
        inner = dict(seen)
        inner[p] = name
        try:
            layer = _Gnf(DEFAULT_FUEL).gnf(p)
        except FuelExhausted:
            self.residue.append(S.show(p))
            return p
        body = self.layer(layer, inner)
        out = S.Mu(name, body) if name in self.used else body
        if not S.free_recvars(out) and not _has_par(out):
            self.done[p] = out
        return out

    def layer(self, g: S.Process, seen: Dict[S.Process, str]) -> S.Process:
        if isinstance(g, S.If):
            return S.If(g.b, self.layer(g.then, seen), self.layer(g.orelse, seen))
        if isinstance(g, S.IntChoice):
            return S.IntChoice(self.layer(g.left, seen), self.layer(g.right, seen))
        if isinstance(g, (S.Skip, S.Terminated)):
            return S.SKIP
        a, r = _split(g)
        return _then(a, self.elim(r, seen))

    def run(self, p: S.Process) -> S.Process:
        self.used = set()
        return self.elim(p, {})


def eliminate_parallel(p: S.Process, fuel: int = ELIM_FUEL) -> Elimination:
    """Rewrite p into a term without parallel composition, as far as fuel allows."""
    p = _core(p)
    taken = list(S.all_vars(p).names) + [q.name for q in S.walk(p) if isinstance(q, (S.Mu, S.RecVar))]
    e = _Eliminator(fuel, FreshNames(taken))
    term = e.run(p)
    complete = not _has_par(term)
    trace("gnf", f"eliminate_parallel: {e.unfoldings} configurations, complete={complete}")
    return Elimination(term, complete, e.residue, e.unfoldings)


# ── Loop refolding ───────────────────────────────────────────────────────────

def _unfolds_to(loop: S.Process) -> S.Process:
    if isinstance(loop, S.While):
        return normalize(S.If(loop.b, S.Seq(loop.body, loop), S.SKIP))
    if isinstance(loop, S.Star):
        return normalize(S.IntChoice(S.SKIP, S.Seq(loop.body, loop)))
    return normalize(S.unfold(loop))


def _loops_in(p: S.Process) -> List[S.Process]:
    return [q for q in S.walk(p) if isinstance(q, (S.While, S.Star, S.Mu))]


def _while_shape(m: S.Mu) -> Optional[S.While]:
    """mu X. if b then (P; X) else skip  as  while b do P."""
    body = m.body
    if isinstance(body, S.If) and isinstance(body.orelse, (S.Skip, S.Terminated)):
        parts = _flatten(body.then)
        if len(parts) > 1 and parts[-1] == S.RecVar(m.name) and m.name not in S.free_recvars(S.seq(*parts[:-1])):
            return S.While(body.b, S.seq(*parts[:-1]))
    return None


def refold_loops(p: S.Process, bound: int = 8) -> S.Process:
    """Fold unfolded copies of loops back into the loop, up to `bound` nested copies."""
    folds = [0]

    def go(q: S.Process) -> S.Process:
        q = normalize(S.map_children(q, go))
        for loop in _loops_in(q):
            if loop is not q and _unfolds_to(loop) == q:
                folds[0] += 1
                return loop
        if isinstance(q, S.Mu):
            w = _while_shape(q)
            if w is not None:
                folds[0] += 1
                return w
        return q

    out = p
    for _ in range(bound):
        before = folds[0]
        out = go(out)
        if folds[0] == before:
            break
    if folds[0] == 0:
        raise NoRepetition(f"no repeated configuration within {bound} unfoldings")
    return out
