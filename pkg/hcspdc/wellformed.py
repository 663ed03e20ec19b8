"""
wellformed.py — Static checks on HCSP terms.

Violations are collected into a report rather than raised.
"""

from dataclasses import dataclass, field
from typing import List

from . import syntax as S


@dataclass(frozen=True)
class Violation:
    kind: str       # unguarded | recvar-under-par | vara-overlap | dot-misuse | unbound-recvar | division | duplicate-channel
    detail: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class WellFormednessReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return [v.kind for v in self.violations]

    def add(self, kind: str, detail: str) -> None:
        v = Violation(kind, detail)
        if v not in self.violations:
            self.violations.append(v)


def _head_occurs(x: str, p: S.Process) -> bool:
    """Does X occur where the guarded grammar forbids it (no guard before it)?"""
    if isinstance(p, S.RecVar):
        return p.name == x
    if isinstance(p, S.If):
        return _head_occurs(x, p.then) or _head_occurs(x, p.orelse)
    if isinstance(p, S.IntChoice):
        return _head_occurs(x, p.left) or _head_occurs(x, p.right)
    if isinstance(p, S.Seq):
        return _head_occurs(x, p.first)
    if isinstance(p, S.Mu):
        return p.name != x and _head_occurs(x, p.body)
    if isinstance(p, (S.While, S.Star)):
        return _head_occurs(x, p.body)
    return False


def _exprs_of(q: S.Process):
    """General expressions at a node (ODE equations excluded)."""
    if isinstance(q, S.Assign):
        return list(q.exprs)
    if isinstance(q, (S.Await,)):
        return [q.b]
    if isinstance(q, (S.If, S.While)):
        return [q.b]
    if isinstance(q, S.Wait):
        return [q.d]
    if isinstance(q, S.Output):
        return [q.e]
    if isinstance(q, S.ExtChoice):
        return [io.e for io, _ in q.branches if isinstance(io, S.Output)]
    if isinstance(q, (S.Evolve, S.EvolveInterrupt)):
        return [q.b]
    if isinstance(q, S.EvolveTimeout):
        return [q.b, q.d]
    return []


def _divisions(e: S.Expr):
    if isinstance(e, S.BinOp):
        if e.op == "/":
            yield e.right
        yield from _divisions(e.left)
        yield from _divisions(e.right)
    elif isinstance(e, (S.Neg, S.Not)):
        yield from _divisions(e.arg)
    elif isinstance(e, (S.Cmp, S.BoolOp)):
        yield from _divisions(e.left)
        yield from _divisions(e.right)


def _nonzero_constant(e: S.Expr) -> bool:
    if isinstance(e, S.Neg):
        return _nonzero_constant(e.arg)
    return isinstance(e, S.Num) and e.value != 0.0


def check_wellformed(p: S.Process) -> WellFormednessReport:
    report = WellFormednessReport()

    for x in sorted(S.free_recvars(p)):
        report.add("unbound-recvar", x)

    for q in S.walk(p):
        if isinstance(q, S.Mu):
            if _head_occurs(q.name, q.body):
                report.add("unguarded", f"{q.name} in {S.show(q)}")
            for r in S.walk(q.body):
                if isinstance(r, S.Par) and q.name in S.free_recvars(r):
                    report.add("recvar-under-par", q.name)
        if isinstance(q, S.Par):
            shared = S.controlled_vars(q.left).names & S.controlled_vars(q.right).names
            if shared:
                report.add("vara-overlap", "{" + ", ".join(sorted(shared)) + "}")
        if isinstance(q, S.Assign):
            for t in q.targets:
                if S.is_dotted(t):
                    report.add("dot-misuse", f"{t} assigned")
        if isinstance(q, S.Input) and S.is_dotted(q.x):
            report.add("dot-misuse", f"{q.x} read from {q.ch}")
        for e in _exprs_of(q):
            for name in S.expr_vars(e):
                if S.is_dotted(name):
                    report.add("dot-misuse", f"{name} in {S.show_expr(e)}")
            for d in _divisions(e):
                if not _nonzero_constant(d):
                    report.add("division", f"by {S.show_expr(d)}")
        if isinstance(q, (S.Evolve, S.EvolveTimeout, S.EvolveInterrupt)):
            for o in q.odes:
                for d in list(_divisions(o.lhs)) + list(_divisions(o.rhs)):
                    if not _nonzero_constant(d):
                        report.add("division", f"by {S.show_expr(d)}")
        if isinstance(q, S.ExtChoice):
            chans = [io.ch for io, _ in q.branches]
            if len(set(chans)) != len(chans):
                report.add("duplicate-channel", ", ".join(chans))
    return report


def controlled_vars(p: S.Process) -> S.VarSet:
    """VarA(P)."""
    return S.controlled_vars(p)
