"""
desugar.py — Reduce sugared HCSP to the core constructs.

Core: skip, :=, await, <F & b>, ;, ||, if, |~|, mu, X (and eps).
Channels become the handshake over shared variables ch, ch?, ch!; timeouts
get a fresh clock t#k; loops become mu terms over a fresh W#k.
"""

import re
from typing import Iterable, List, Optional

from . import syntax as S

_FRESH = re.compile(r"^(t|W)#(\d+)$")


class FreshNames:
    """Deterministic supply of t#k clocks and W#k recursion variables."""

    def __init__(self, taken: Iterable[str] = ()):
        self.k = 1 + max((int(m.group(2)) for n in taken if (m := _FRESH.match(n))), default=0)

    def next(self, prefix: str) -> str:
        name = f"{prefix}#{self.k}"
        self.k += 1
        return name


def _taken_names(p: S.Process) -> List[str]:
    names = list(S.all_vars(p).names)
    names += [q.name for q in S.walk(p) if isinstance(q, (S.Mu, S.RecVar))]
    return names


# ── Channel protocol ─────────────────────────────────────────────────────────

def _ready(ch: str, kind: str) -> S.VarRef:
    return S.VarRef(f"{ch}{kind}")


def output_protocol(ch: str, e: S.Expr) -> S.Process:
    """ch:=e; ch!:=T; await ch?; await not ch?; ch!:=F"""
    return S.seq(
        S.Assign((ch,), (e,)),
        S.Assign((f"{ch}!",), (S.TRUE,)),
        S.Await(_ready(ch, "?")),
        S.Await(S.Not(_ready(ch, "?"))),
        S.Assign((f"{ch}!",), (S.FALSE,)),
    )


def input_protocol(ch: str, x: str) -> S.Process:
    """ch?:=T; await ch!; x:=ch; ch?:=F; await not ch!"""
    return S.seq(
        S.Assign((f"{ch}?",), (S.TRUE,)),
        S.Await(_ready(ch, "!")),
        S.Assign((x,), (S.VarRef(ch),)),
        S.Assign((f"{ch}?",), (S.FALSE,)),
        S.Await(S.Not(_ready(ch, "!"))),
    )


def partner_flag(io: S.IoAction) -> S.VarRef:
    """Flag raised by the other side when it is ready for this action."""
    return _ready(io.ch, "!") if isinstance(io, S.Input) else _ready(io.ch, "?")


def _choice(c: S.ExtChoice, go) -> S.Process:
    in_flags = tuple(f"{io.ch}?" for io, _ in c.branches if isinstance(io, S.Input))
    partners = [partner_flag(io) for io, _ in c.branches]

    def commit(io: S.IoAction, cont: S.Process) -> S.Process:
        if isinstance(io, S.Input):
            return S.seq(
                S.Assign((io.x,), (S.VarRef(io.ch),)),
                S.Assign(in_flags, (S.FALSE,) * len(in_flags)),
                S.Await(S.Not(_ready(io.ch, "!"))),
                go(cont),
            )
        return S.seq(
            S.Assign((io.ch,) + in_flags, (io.e,) + (S.FALSE,) * len(in_flags)),
            S.Assign((f"{io.ch}!",), (S.TRUE,)),
            S.Await(_ready(io.ch, "?")),
            S.Await(S.Not(_ready(io.ch, "?"))),
            S.Assign((f"{io.ch}!",), (S.FALSE,)),
            go(cont),
        )

    # least index wins when several partners are ready at once
    pick: S.Process = S.SKIP
    for (io, cont), flag in reversed(list(zip(c.branches, partners))):
        pick = S.If(flag, commit(io, cont), pick)
    steps = []
    if in_flags:
        steps.append(S.Assign(in_flags, (S.TRUE,) * len(in_flags)))
    steps += [S.Await(S.disj(*partners)), pick]
    return S.seq(*steps)


# ── Entry point ──────────────────────────────────────────────────────────────

def desugar(p: S.Process, keep_loops: bool = False, fresh: Optional[FreshNames] = None) -> S.Process:
    """Rewrite every derived construct into core HCSP.

    keep_loops: leave while / star in place (their bodies are still desugared).
    """
    fresh = fresh or FreshNames(_taken_names(p))

    def go(q: S.Process) -> S.Process:
        if isinstance(q, S.Output):
            return output_protocol(q.ch, q.e)
        if isinstance(q, S.Input):
            return input_protocol(q.ch, q.x)
        if isinstance(q, S.ExtChoice):
            return _choice(q, go)
        if isinstance(q, S.Wait):
            return go(S.EvolveTimeout((), S.TRUE, q.d, S.SKIP))
        if isinstance(q, S.EvolveTimeout):
            t = fresh.next("t")
            odes = q.odes + (S.ode(t, S.Num("1")),)
            b = S.conj(q.b, S.Cmp("<=", S.VarRef(t), q.d))
            still_inside = S.push_negations(S.Not(S.closure(S.Not(q.b))))
            return S.seq(
                S.Assign((t,), (S.Num("0"),)),
                S.Evolve(odes, b),
                S.If(still_inside, go(q.handler), S.SKIP),
            )
        if isinstance(q, S.EvolveInterrupt):
            quiet = S.conj(*[S.Not(partner_flag(io)) for io, _ in q.io.branches])
            return S.seq(
                S.Evolve(q.odes, S.conj(q.b, quiet)),
                S.If(quiet, S.SKIP, go(q.io)),
            )
        if isinstance(q, S.While):
            if keep_loops:
                return S.While(q.b, go(q.body))
            x = fresh.next("W")
            return S.Mu(x, S.If(q.b, S.Seq(go(q.body), S.RecVar(x)), S.SKIP))
        if isinstance(q, S.Star):
            if keep_loops:
                return S.Star(go(q.body))
            x = fresh.next("W")
            return S.Mu(x, S.IntChoice(S.SKIP, S.Seq(go(q.body), S.RecVar(x))))
        return S.map_children(q, go)

    return go(p)


def is_core(p: S.Process, allow_loops: bool = False) -> bool:
    extra = (S.While, S.Star) if allow_loops else ()
    return all(isinstance(q, S.CORE_TYPES + extra) for q in S.walk(p))
