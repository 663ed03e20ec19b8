"""
proof_script.py — Proof trees as JSON.

    {"rule": "SEQ",
     "triple": {"pre": "<dc>", "proc": "<hcsp>", "post": "<dc>",
                "vars": "(vars (real x) (bool))", "mode": "classic", "marker": "R", "N": "N"},
     "premises": [ ... ],
     "side_conditions": [{"formula": "<dc>" | null, "strategy": "falsify", "budget": 1000}]}

Formulas use the DC s-expression syntax, processes the HCSP concrete syntax.
"""

import json
from typing import Any, Dict

from . import dc as D
from . import syntax as S
from .dc_format import parse_formula, read_sexp, to_varset
from .discharge import Obligation
from .errors import FormatError, HcspError
from .hoare import CLASSIC, ProofNode, Triple
from .parser import parse_process
from .semantics import DEFAULT_N, DEFAULT_R


def triple_to_json(t: Triple) -> Dict[str, Any]:
    return {
        "pre": D.show_formula(t.pre),
        "proc": S.show(t.proc),
        "post": D.show_formula(t.post),
        "vars": D.show_varset(t.vars),
        "mode": t.mode,
        "marker": t.marker,
        "N": t.N,
    }


def triple_from_json(obj: Dict[str, Any]) -> Triple:
    try:
        return Triple(
            pre=parse_formula(obj.get("pre", "true")),
            proc=S.label_parallel(parse_process(obj["proc"])),
            post=parse_formula(obj["post"]),
            vars=to_varset(read_sexp(obj["vars"])),
            mode=obj.get("mode", CLASSIC),
            marker=obj.get("marker", DEFAULT_R),
            N=obj.get("N", DEFAULT_N),
        )
    except KeyError as e:
        raise FormatError(f"triple misses field {e}") from None


def _obligation_to_json(ob: Obligation) -> Dict[str, Any]:
    out: Dict[str, Any] = {"formula": D.show_formula(ob.formula) if ob.formula is not None else None,
                           "strategy": ob.strategy}
    if ob.budget is not None:
        out["budget"] = ob.budget
    return out


def _obligation_from_json(obj: Dict[str, Any]) -> Obligation:
    text = obj.get("formula")
    try:
        return Obligation(parse_formula(text) if text else None, obj.get("strategy", "falsify"), obj.get("budget"))
    except (ValueError, HcspError) as e:
        raise FormatError(str(e)) from None


def node_to_json(n: ProofNode) -> Dict[str, Any]:
    return {
        "rule": n.rule,
        "triple": triple_to_json(n.conclusion),
        "premises": [node_to_json(p) for p in n.premises],
        "side_conditions": [_obligation_to_json(ob) for ob in n.side_conditions],
    }


def node_from_json(obj: Dict[str, Any], path: str = "root") -> ProofNode:
    if not isinstance(obj, dict) or "rule" not in obj or "triple" not in obj:
        raise FormatError(f"{path}: a proof node needs 'rule' and 'triple'")
    try:
        conclusion = triple_from_json(obj["triple"])
    except HcspError as e:
        raise FormatError(f"{path}: {e}") from None
    premises = [node_from_json(p, f"{path}/{i}") for i, p in enumerate(obj.get("premises", []))]
    side = [_obligation_from_json(o) for o in obj.get("side_conditions", [])]
    return ProofNode(obj["rule"], conclusion, premises, side)


def dumps(n: ProofNode) -> str:
    return json.dumps(node_to_json(n), indent=2)


def loads(text: str) -> ProofNode:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"proof script is not JSON: {e}") from None
    return node_from_json(obj)


def dump_proof(n: ProofNode, path: str) -> None:
    with open(path, "w") as f:
        f.write(dumps(n))


def load_proof(path: str) -> ProofNode:
    with open(path) as f:
        return loads(f.read())
