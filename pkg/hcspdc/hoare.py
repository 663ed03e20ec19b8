"""
hoare.py — DC Hoare triples {A} P {G}_V, proof trees and their checking.

A triple is read in one of two modes:
  classic   loc(V) & [R => N]^0 & (A ^ true)  =>  not((sem(P) & not G) ^ true)
  diamond   loc(V) & [R => N]^0 & dlc(A) & sem(P)  =>  G
and one proof tree never mixes them. Each rule is a schema over its premises
and conclusion; apply_rule checks the instance and hands back the DC side
conditions, which check_proof discharges through discharge.py.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import dc as D
from . import syntax as S
from .debug_timing import trace
from .discharge import Counterexample, DischargeConfig, Obligation, discharge, normalize
from .errors import HcspError, ModeMixing, ProofError, UnknownRule
from .gnf import normalize as normalize_process
from .semantics import (DEFAULT_N, DEFAULT_R, SemContext, compile_process, condition, loc_formula,
                        par_cases, seq_glue)

# ── Config ───────────────────────────────────────────────────────────────────

CLASSIC = "classic"
DIAMOND = "diamond"
MODES   = (CLASSIC, DIAMOND)

RULES = ("AXIOM-PRIM", "SEQ", "CHOICE", "IF", "WHILE", "PAR", "N", "K", "MU", "PAR-EVOLVE")
ARITY = {"AXIOM-PRIM": 0, "SEQ": 2, "CHOICE": 2, "IF": 2, "WHILE": 1, "PAR": 2,
         "N": 0, "K": 2, "MU": 1, "PAR-EVOLVE": 4}
PRIMITIVES = (S.Skip, S.Terminated, S.Assign, S.Await, S.Evolve)


# ── Types ────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Triple:
    pre: D.DcFormula
    proc: S.Process
    post: D.DcFormula
    vars: S.VarSet
    mode: str = CLASSIC
    marker: str = DEFAULT_R
    N: str = DEFAULT_N

    def __post_init__(self):
        if self.mode not in MODES:
            raise ProofError(f"unknown mode {self.mode!r}")
        varA = S.controlled_vars(self.proc)
        if not varA.issubset(self.vars):
            raise ProofError(f"variables {sorted(varA.names - self.vars.names)} of "
                             f"{S.show(self.proc)} missing from V")

    def show(self) -> str:
        return (f"{{{D.show_formula(self.pre)}}} {S.show(self.proc)} "
                f"{{{D.show_formula(self.post)}}}_{D.show_varset(self.vars)} [{self.mode}]")


@dataclass
class ProofNode:
    rule: str
    conclusion: Triple
    premises: List["ProofNode"] = field(default_factory=list)
    side_conditions: List[Obligation] = field(default_factory=list)


@dataclass(frozen=True)
class Mismatch:
    where: str
    expected: str
    found: str

    def __str__(self) -> str:
        return f"{self.where}: expected {self.expected}, found {self.found}"


@dataclass
class RuleCheck:
    obligations: List[Obligation]
    mismatches: List[Mismatch]

    @property
    def ok(self) -> bool:
        return not self.mismatches


@dataclass
class ProofReport:
    verdict: str                                   # valid | valid-modulo-assumptions | invalid
    obligations: List[Tuple[str, Obligation]] = field(default_factory=list)
    failed_at: Optional[str] = None
    reason: str = ""
    counterexample: Optional[Counterexample] = None

    @property
    def assumptions(self) -> List[Tuple[str, Obligation]]:
        return [(p, ob) for p, ob in self.obligations if ob.status == "assumed"]

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "obligations": [{"node": p, "formula": D.show_formula(ob.formula), "strategy": ob.strategy,
                             "status": ob.status, "note": ob.note,
                             "counterexample": ob.counterexample.path if ob.counterexample else None}
                            for p, ob in self.obligations],
        }
        if self.failed_at is not None:
            out["failed_at"] = self.failed_at
            out["reason"] = self.reason
        return out


# ── Readings ─────────────────────────────────────────────────────────────────

def frame(V: S.VarSet, R: str = DEFAULT_R, N: str = DEFAULT_N) -> D.DcFormula:
    """loc(V) & [R => N]^0, the standing hypothesis of every validity claim."""
    return D.f_and(loc_formula(V), D.Ae0(D.StBin("implies", D.StVar(R), D.StVar(N))))


def semantics_of(t: Triple, bounds_encoding: bool = False) -> D.DcFormula:
    return compile_process(t.proc, SemContext(t.marker, t.N, t.vars, bounds_encoding))


def validity_formula(t: Triple) -> D.DcFormula:
    """The DC formula whose validity is the validity of t."""
    hyp = frame(t.vars, t.marker, t.N)
    sem = semantics_of(t)
    if t.mode == CLASSIC:
        return D.implies(D.f_and(hyp, D.Chop(t.pre, D.TOP)),
                         D.FNot(D.Chop(D.f_and(sem, D.FNot(t.post)), D.TOP)))
    return D.implies(D.f_and(hyp, D.Dlc(t.pre), sem), t.post)


def _ob(t: Triple, formula: D.DcFormula, note: str) -> Obligation:
    return Obligation(formula, note=note, R=t.marker, N=t.N)


# ── Schema checking ──────────────────────────────────────────────────────────

class _Diff:
    def __init__(self):
        self.out: List[Mismatch] = []

    def formula(self, where: str, expected: D.DcFormula, found: D.DcFormula) -> None:
        if normalize(expected) != normalize(found):
            self.out.append(Mismatch(where, D.show_formula(expected), D.show_formula(found)))

    def process(self, where: str, expected: S.Process, found: S.Process, loose: bool = False) -> None:
        if loose:
            expected, found = normalize_process(expected), normalize_process(found)
        if expected != found:
            self.out.append(Mismatch(where, S.show(expected), S.show(found)))

    def shape(self, where: str, proc: S.Process, kinds) -> bool:
        if not isinstance(proc, kinds):
            names = "/".join(k.__name__ for k in (kinds if isinstance(kinds, tuple) else (kinds,)))
            self.out.append(Mismatch(where, names, S.show(proc)))
            return False
        return True

    def same(self, where: str, expected, found) -> None:
        if expected != found:
            self.out.append(Mismatch(where, str(expected), str(found)))


def _same_frame(d: _Diff, premises: Sequence[Triple], c: Triple) -> None:
    for i, p in enumerate(premises):
        d.same(f"premise {i} V", D.show_varset(c.vars), D.show_varset(p.vars))
        d.same(f"premise {i} marker", c.marker, p.marker)
        d.same(f"premise {i} N", c.N, p.N)


def _axiom(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if not d.shape("conclusion process", c.proc, PRIMITIVES + (S.RecVar,)):
        return []
    d.formula("precondition", D.TOP, c.pre)
    if isinstance(c.proc, S.RecVar):
        d.formula("postcondition", D.FVar(c.proc.name), c.post)
        return []
    expected = semantics_of(c)
    if normalize(expected) != normalize(c.post):
        alt = semantics_of(c, bounds_encoding=True)
        d.formula("postcondition", expected if normalize(alt) != normalize(c.post) else alt, c.post)
    return []


def _seq(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if not d.shape("conclusion process", c.proc, S.Seq):
        return []
    (P, Q), (A, B), (G, H) = (ps[0].proc, ps[1].proc), (ps[0].pre, ps[1].pre), (ps[0].post, ps[1].post)
    d.process("first premise process", c.proc.first, P)
    d.process("second premise process", c.proc.second, Q)
    d.formula("precondition", A, c.pre)
    d.formula("postcondition", D.chop(G, seq_glue(c.marker, c.N), H), c.post)
    other = D.Ae0(D.st_and(D.StVar(c.N), D.StNot(D.StVar(c.marker))))
    hyp = frame(c.vars, c.marker, c.N)
    if c.mode == CLASSIC:
        ob = D.implies(D.f_and(hyp, D.Chop(A, D.TOP)),
                       D.FNot(D.Chop(G, D.FNot(D.chop(other, B, D.TOP)))))
    else:
        ob = D.implies(D.f_and(hyp, D.Dlc(A)),
                       D.FNot(D.Chop(D.f_and(G, D.FIN), D.FNot(D.Dlc(D.Chop(other, B))))))
    return [_ob(c, ob, "second precondition holds after the first step")]


def _choice(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if not d.shape("conclusion process", c.proc, S.IntChoice):
        return []
    d.process("first premise process", c.proc.left, ps[0].proc)
    d.process("second premise process", c.proc.right, ps[1].proc)
    d.formula("precondition", D.f_and(ps[0].pre, ps[1].pre), c.pre)
    d.formula("postcondition", D.f_or(ps[0].post, ps[1].post), c.post)
    return []


def _if(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if not d.shape("conclusion process", c.proc, S.If):
        return []
    b = condition(c.proc.b, c.vars)
    d.process("then premise process", c.proc.then, ps[0].proc)
    d.process("else premise process", c.proc.orelse, ps[1].proc)
    d.formula("then premise precondition", D.f_and(c.pre, b), ps[0].pre)
    d.formula("else premise precondition", D.f_and(c.pre, D.f_not(b)), ps[1].pre)
    d.formula("then premise postcondition", c.post, ps[0].post)
    d.formula("else premise postcondition", c.post, ps[1].post)
    return []


def _while(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if c.mode != CLASSIC:
        raise ModeMixing("the while rule belongs to classic-mode proofs")
    if not d.shape("conclusion process", c.proc, S.While):
        return []
    A, G = ps[0].pre, ps[0].post
    b = condition(c.proc.b, c.vars)
    not_r = D.Ae0(D.StNot(D.StVar(c.marker)))
    d.process("premise process", c.proc.body, ps[0].proc)
    d.formula("precondition", A, c.pre)
    d.formula("postcondition",
              D.Chop(D.StarF(D.Chop(D.f_and(b, G), not_r)), D.f_and(D.f_not(b), D.POINT)), c.post)
    ob = D.implies(D.f_and(frame(c.vars, c.marker, c.N), D.Chop(A, D.TOP)),
                   D.FNot(D.Chop(D.f_and(G, D.FIN), D.FNot(D.Dlc(D.Chop(not_r, A))))))
    return [_ob(c, ob, "precondition re-established after each round")]


def par_pre(A1: D.DcFormula, A2: D.DcFormula, R: str, R1: str, R2: str, N: str, V: S.VarSet,
            V1: S.VarSet, V2: S.VarSet) -> D.DcFormula:
    A = {1: D.rename_state_var(A1, R, R1), 2: D.rename_state_var(A2, R, R2)}
    mark = {1: R1, 2: R2}
    cases = []
    for i, j in ((1, 2), (2, 1)):
        glue = D.f_and(D.Ae0(D.st_and(D.StVar(N), D.StNot(D.StVar(mark[i])))), D.FIN)
        cases.append(D.f_and(D.FNot(D.chop(glue, D.FNot(A[i]), D.TOP)), D.Chop(A[j], D.TOP)))
    return D.asplit(R, R1, R2, V, V1, V2, D.f_or(*cases))


def par_post(G1: D.DcFormula, G2: D.DcFormula, R: str, R1: str, R2: str, N: str, V: S.VarSet,
             V1: S.VarSet, V2: S.VarSet) -> D.DcFormula:
    return D.esplit(R, R1, R2, V, V1, V2, par_cases(G1, G2, R1, R2, N))


def _par(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if not d.shape("conclusion process", c.proc, S.Par):
        return []
    P1, P2 = c.proc.left, c.proc.right
    V1, V2 = S.controlled_vars(P1), S.controlled_vars(P2)
    R1, R2 = ps[0].marker, ps[1].marker
    d.process("first premise process", P1, ps[0].proc)
    d.process("second premise process", P2, ps[1].proc)
    d.same("first premise V", D.show_varset(V1), D.show_varset(ps[0].vars))
    d.same("second premise V", D.show_varset(V2), D.show_varset(ps[1].vars))
    for i, p in enumerate(ps):
        d.same(f"premise {i} N", c.N, p.N)
    if len({c.marker, R1, R2}) != 3:
        d.out.append(Mismatch("thread markers", "three distinct names", f"{c.marker}, {R1}, {R2}"))
        return []
    args = (c.marker, R1, R2, c.N, c.vars, V1, V2)
    d.formula("precondition", par_pre(ps[0].pre, ps[1].pre, *args), c.pre)
    d.formula("postcondition", par_post(ps[0].post, ps[1].post, *args), c.post)
    return []


def _n(ps, c: Triple, d: _Diff) -> List[Obligation]:
    ob = D.implies(D.f_and(frame(c.vars, c.marker, c.N), D.Dlc(c.pre)), c.post)
    return [_ob(c, ob, "postcondition follows from the precondition alone")]


def _k(ps, c: Triple, d: _Diff) -> List[Obligation]:
    imp, base = ps
    d.process("first premise process", c.proc, imp.proc)
    d.process("second premise process", c.proc, base.proc)
    d.formula("first premise precondition", c.pre, imp.pre)
    post = imp.post
    if not (isinstance(post, D.FBin) and post.op == "implies"):
        d.out.append(Mismatch("first premise postcondition", "G => H", D.show_formula(post)))
        return []
    d.formula("second premise postcondition", post.left, base.post)
    d.formula("postcondition", post.right, c.post)
    ob = D.implies(D.f_and(frame(c.vars, c.marker, c.N), D.Dlc(c.pre)), D.Dlc(base.pre))
    return [_ob(c, ob, "first precondition entails the second")]


def _mu(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if c.mode != DIAMOND:
        raise ModeMixing("the mu rule belongs to diamond-mode proofs")
    if not d.shape("conclusion process", c.proc, S.Mu):
        return []
    X = c.proc.name
    A, G = ps[0].pre, ps[0].post
    d.process("premise process", c.proc.body, ps[0].proc)
    d.formula("precondition", A, c.pre)
    if X in D.free_fvars(A):
        d.out.append(Mismatch("precondition", f"no occurrence of {X}", D.show_formula(A)))
    d.formula("postcondition", D.MuF(X, G), c.post)
    ob = D.implies(D.f_and(frame(c.vars, c.marker, c.N), D.Dlc(A), G),
                   D.subst_fvar(G, X, D.f_and(D.Dlc(A), D.FVar(X))))
    return [_ob(c, ob, "unfolding keeps the precondition available")]


def _guarded(p: S.Process) -> Tuple[S.Process, S.Process]:
    if isinstance(p, S.Seq):
        return p.first, p.second
    return p, S.SKIP


def _par_evolve(ps, c: Triple, d: _Diff) -> List[Obligation]:
    if not d.shape("conclusion process", c.proc, S.Par):
        return []
    (E1, P1), (E2, P2) = _guarded(c.proc.left), _guarded(c.proc.right)
    if not (d.shape("first operand guard", E1, S.Evolve) and d.shape("second operand guard", E2, S.Evolve)):
        return []
    b1, b2 = condition(E1.b, c.vars), condition(E2.b, c.vars)
    joint, after = ps[0], ps[0].post
    d.process("joint premise process", S.Evolve(E1.odes + E2.odes, S.conj(E1.b, E2.b)), joint.proc, loose=True)
    d.formula("joint premise precondition", c.pre, joint.pre)
    rest = [
        (S.Par(c.proc.left, P2), D.f_and(after, b1, D.f_not(b2))),
        (S.Par(P1, c.proc.right), D.f_and(after, b2, D.f_not(b1))),
        (S.Par(P1, P2), D.f_and(after, D.f_not(b1), D.f_not(b2))),
    ]
    for k, (proc, pre) in enumerate(rest, start=1):
        d.process(f"premise {k} process", proc, ps[k].proc, loose=True)
        d.formula(f"premise {k} precondition", pre, ps[k].pre)
        d.formula(f"premise {k} postcondition", c.post, ps[k].post)
    return []


_SCHEMAS: Dict[str, Callable] = {
    "AXIOM-PRIM": _axiom, "SEQ": _seq, "CHOICE": _choice, "IF": _if, "WHILE": _while,
    "PAR": _par, "N": _n, "K": _k, "MU": _mu, "PAR-EVOLVE": _par_evolve,
}


def apply_rule(rule: str, premises: Sequence[Triple], conclusion: Triple) -> RuleCheck:
    """Check one rule instance; on a match the result carries the rule's side conditions."""
    if rule not in _SCHEMAS:
        raise UnknownRule(f"unknown rule {rule!r}; known: {', '.join(RULES)}")
    for i, p in enumerate(premises):
        if p.mode != conclusion.mode:
            raise ModeMixing(f"premise {i} is {p.mode}, conclusion is {conclusion.mode}")
    d = _Diff()
    if len(premises) != ARITY[rule]:
        d.same("number of premises", ARITY[rule], len(premises))
        return RuleCheck([], d.out)
    if rule not in ("PAR",):
        _same_frame(d, premises, conclusion)
    obligations = _SCHEMAS[rule](list(premises), conclusion, d)
    return RuleCheck(obligations if not d.out else [], d.out)


# ── Proof checking ───────────────────────────────────────────────────────────

def _merge(generated: List[Obligation], given: List[Obligation], default: str) -> Tuple[List[Obligation], List[str]]:
    """Generated side conditions take the strategy the proof gave for them.

    A given side condition matches by formula, or by position when it names no formula.
    """
    out, free = [], set(range(len(given)))
    for k, ob in enumerate(generated):
        want = normalize(ob.formula)
        hit = next((i for i in sorted(free) if given[i].formula is not None
                    and normalize(given[i].formula) == want), None)
        if hit is None and k in free and given[k].formula is None:
            hit = k
        if hit is None:
            out.append(replace(ob, strategy=default))
            continue
        free.discard(hit)
        out.append(replace(ob, strategy=given[hit].strategy, budget=given[hit].budget))
    extra = [D.show_formula(given[i].formula) if given[i].formula is not None else f"#{i}" for i in sorted(free)]
    return out, extra


def check_proof(root: ProofNode, cfg: Optional[DischargeConfig] = None) -> ProofReport:
    """Check every node against its rule and discharge every side condition."""
    cfg = cfg or DischargeConfig()
    report = ProofReport("valid")

    def fail(path: str, reason: str, cex: Optional[Counterexample] = None) -> ProofReport:
        report.verdict, report.failed_at, report.reason, report.counterexample = "invalid", path, reason, cex
        return report

    stack: List[Tuple[ProofNode, str, frozenset]] = [(root, "root", frozenset())]
    while stack:
        node, path, bound = stack.pop()
        premises = [p.conclusion for p in node.premises]
        try:
            rc = apply_rule(node.rule, premises, node.conclusion)
        except HcspError as e:
            return fail(path, str(e))
        if not rc.ok:
            return fail(path, f"{node.rule}: schema mismatch: " + "; ".join(str(m) for m in rc.mismatches))
        proc = node.conclusion.proc
        if node.rule == "AXIOM-PRIM" and isinstance(proc, S.RecVar) and proc.name not in bound:
            return fail(path, f"recursion variable {proc.name} not bound by an enclosing mu step")
        obs, extra = _merge(rc.obligations, node.side_conditions, cfg.strategy)
        if extra:
            return fail(path, f"{node.rule}: side conditions not produced by the rule: {'; '.join(extra)}")
        for ob in obs:
            done = discharge(ob, cfg)
            report.obligations.append((path, done))
            trace("hoare", f"{path} {node.rule}: {done.status} ({done.note})")
            if done.status == "failed":
                return fail(path, f"{node.rule}: side condition refuted", done.counterexample)
            if done.status == "unproven":
                return fail(path, f"{node.rule}: side condition not discharged ({done.note})")
        inner = bound | {proc.name} if node.rule == "MU" else bound
        for i, p in reversed(list(enumerate(node.premises))):
            stack.append((p, f"{path}/{i}", inner))
    if report.assumptions:
        report.verdict = "valid-modulo-assumptions"
    return report


# ── Derivations ──────────────────────────────────────────────────────────────

def _pick_mode(p: S.Process, mode: Optional[str]) -> str:
    kinds = {type(q) for q in S.walk(p)}
    if S.Star in kinds:
        raise ProofError("no rule for star; rewrite it as a mu term first")
    needs = {CLASSIC} if S.While in kinds else set()
    if S.Mu in kinds:
        needs.add(DIAMOND)
    if len(needs) > 1:
        raise ModeMixing("while loops and mu terms in one proof")
    if mode is not None:
        if needs and mode not in needs:
            raise ModeMixing(f"{S.show(p)} cannot be proved in {mode} mode")
        return mode
    return needs.pop() if needs else CLASSIC


def _weaken(pre: D.DcFormula, sub: ProofNode, post: D.DcFormula, strategy: str) -> ProofNode:
    """{pre} P {post} from {T} P {G} by (N) then (K)."""
    t = sub.conclusion
    imp = replace(t, pre=pre, post=D.implies(t.post, post))
    n_node = ProofNode("N", imp, [], [replace(ob, strategy=strategy) for ob in _n([], imp, _Diff())])
    target = replace(t, pre=pre, post=post)
    k_obs = _k([imp, t], target, _Diff())
    return ProofNode("K", target, [n_node, sub], [replace(ob, strategy=strategy) for ob in k_obs])


def derive_semantics_triple(p: S.Process, V: Optional[S.VarSet] = None, mode: Optional[str] = None,
                            R: str = DEFAULT_R, N: str = DEFAULT_N, strategy: str = "falsify") -> ProofNode:
    """A proof of {T} p {[[p]]}_V, one rule application per construct."""
    p = S.label_parallel(p)
    V = V if V is not None else S.controlled_vars(p)
    mode = _pick_mode(p, mode)

    def go(q: S.Process, R: str, V: S.VarSet) -> ProofNode:
        t = Triple(D.TOP, q, compile_process(q, SemContext(R, N, V)), V, mode, R, N)

        def node(rule: str, premises: List[ProofNode]) -> ProofNode:
            rc = apply_rule(rule, [x.conclusion for x in premises], t)
            return ProofNode(rule, t, premises, [replace(ob, strategy=strategy) for ob in rc.obligations])

        if isinstance(q, PRIMITIVES + (S.RecVar,)):
            return node("AXIOM-PRIM", [])
        if isinstance(q, S.Seq):
            return node("SEQ", [go(q.first, R, V), go(q.second, R, V)])
        if isinstance(q, S.IntChoice):
            return node("CHOICE", [go(q.left, R, V), go(q.right, R, V)])
        if isinstance(q, S.If):
            b = condition(q.b, V)
            return node("IF", [_weaken(b, go(q.then, R, V), t.post, strategy),
                               _weaken(D.f_not(b), go(q.orelse, R, V), t.post, strategy)])
        if isinstance(q, S.While):
            return node("WHILE", [go(q.body, R, V)])
        if isinstance(q, S.Mu):
            return node("MU", [go(q.body, R, V)])
        if isinstance(q, S.Par):
            R1, R2 = S.thread_markers(R, q.tag)
            V1, V2 = S.controlled_vars(q.left), S.controlled_vars(q.right)
            subs = [go(q.left, R1, V1), go(q.right, R2, V2)]
            pre = par_pre(D.TOP, D.TOP, R, R1, R2, N, V, V1, V2)
            par_t = replace(t, pre=pre)
            rc = apply_rule("PAR", [x.conclusion for x in subs], par_t)
            par_node = ProofNode("PAR", par_t, subs, [replace(ob, strategy=strategy) for ob in rc.obligations])
            # strengthen the split-shaped precondition back to T
            imp = replace(t, post=D.implies(t.post, t.post))
            n_node = ProofNode("N", imp, [], [replace(ob, strategy=strategy) for ob in _n([], imp, _Diff())])
            k_obs = _k([imp, par_t], t, _Diff())
            return ProofNode("K", t, [n_node, par_node], [replace(ob, strategy=strategy) for ob in k_obs])
        raise ProofError(f"no rule for {S.show(q)}")

    root = go(p, R, V)
    trace("hoare", f"derived semantics triple for {S.show(p)} in {mode} mode")
    return root


def derive_any(t: Triple, strategy: str = "falsify", budget: Optional[int] = None) -> ProofNode:
    """A proof of a valid triple: (N) for {A} P {[[P]] => G}, the semantics triple, then (K)."""
    sem_tree = derive_semantics_triple(t.proc, t.vars, t.mode, t.marker, t.N)
    sem = sem_tree.conclusion.post
    imp = replace(t, post=D.implies(sem, t.post))
    n_node = ProofNode("N", imp, [], [replace(ob, strategy=strategy, budget=budget)
                                      for ob in _n([], imp, _Diff())])
    k_obs = _k([imp, sem_tree.conclusion], t, _Diff())
    return ProofNode("K", t, [n_node, sem_tree], [replace(ob, strategy="falsify") for ob in k_obs])


# ── Derived reasoning aids ───────────────────────────────────────────────────

def assume_guarantee_triple(A: D.DcFormula, P1: S.Process, B: D.DcFormula, P2: S.Process,
                            C: D.DcFormula, V: S.VarSet, mode: str = CLASSIC,
                            R: str = DEFAULT_R, N: str = DEFAULT_N) -> Tuple[Triple, Obligation]:
    """{A} P1 || P2 {((B ^ true) & C) | (B & (C ^ true))} with its validity left to falsification."""
    post = D.f_or(D.f_and(D.Chop(B, D.TOP), C), D.f_and(B, D.Chop(C, D.TOP)))
    t = Triple(A, S.label_parallel(S.Par(P1, P2)), post, V, mode, R, N)
    return t, _ob(t, validity_formula(t), "assume-guarantee conclusion")


def invariant_obligation(A: D.DcFormula, P: S.Process, V: S.VarSet,
                         R: str = DEFAULT_R, N: str = DEFAULT_N) -> Obligation:
    """(A ^ true) => not([[P]] & not(A ^ true)): A holds from the start of every run of P."""
    sem = compile_process(P, SemContext(R, N, V))
    start = D.Chop(A, D.TOP)
    return Obligation(D.implies(start, D.FNot(D.f_and(sem, D.FNot(start)))),
                      note="invariant", R=R, N=N)


def semantics_axiom(p: S.Process, V: Optional[S.VarSet] = None, mode: str = CLASSIC,
                    R: str = DEFAULT_R, N: str = DEFAULT_N) -> Triple:
    """{T} p {[[p]]}_V for a primitive p."""
    if not isinstance(p, PRIMITIVES):
        raise ProofError(f"{S.show(p)} is not a primitive construct")
    V = V if V is not None else S.controlled_vars(p)
    return Triple(D.TOP, p, compile_process(p, SemContext(R, N, V)), V, mode, R, N)
