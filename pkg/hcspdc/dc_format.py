"""
dc_format.py — Reader for the DC s-expression text format.

The grammar only knows lists and symbols; heads are interpreted here so the
printer in dc.py and this reader stay the single source of the format.
"""

from typing import List, Union

import lark

from . import dc as D
from . import syntax as S
from .errors import FormatError, UnknownSymbol
from .registry import get_parser

GRAMMAR = r"""
    start: sexp
    ?sexp: SYMBOL -> symbol
         | "(" sexp* ")" -> slist
    SYMBOL: /[^\s();]+/
    COMMENT: /;[^\n]*/
    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

SExp = Union[str, List["SExp"]]


class _ToLists(lark.Transformer):
    def start(self, items):
        return items[0]

    def symbol(self, items):
        return str(items[0])

    def slist(self, items):
        return list(items)


def read_sexp(text: str) -> SExp:
    try:
        tree = get_parser("sexp", GRAMMAR, start="start", parser="lalr").parse(text)
    except lark.exceptions.UnexpectedInput as e:
        raise FormatError(f"bad s-expression at line {getattr(e, 'line', '?')}: {str(e).splitlines()[0]}") from None
    return _ToLists().transform(tree)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def to_state(x: SExp) -> D.StateExpr:
    if isinstance(x, str):
        if x == "1":
            return D.S_TRUE
        if x == "0":
            return D.S_FALSE
        return D.StVar(x)
    head, *args = x
    if head == "not" and len(args) == 1:
        return D.StNot(to_state(args[0]))
    if head in ("and", "or", "implies", "iff") and len(args) == 2:
        return D.StBin(head, to_state(args[0]), to_state(args[1]))
    raise UnknownSymbol(f"state expression head {head!r}")


def to_term(x: SExp) -> D.DcTerm:
    if isinstance(x, str):
        if x == "len":
            return D.LEN
        if x == "inf":
            return D.INF
        if _is_number(x):
            return D.const(x)
        raise UnknownSymbol(f"term {x!r}")
    head, *args = x
    if head == "dur":
        return D.Dur(to_state(args[0]))
    if head == "var":
        return D.TVar(args[0], False)
    if head == "var'":
        return D.TVar(args[0], True)
    if head == "rigid":
        return D.Rigid(args[0])
    if head == "neg":
        return D.TNeg(to_term(args[0]))
    if head in ("+", "-", "*", "/") and len(args) == 2:
        return D.Arith(head, to_term(args[0]), to_term(args[1]))
    raise UnknownSymbol(f"term head {head!r}")


def to_varset(x: SExp) -> S.VarSet:
    if not (isinstance(x, list) and x and x[0] == "vars"):
        raise FormatError(f"expected (vars ...), got {x!r}")
    reals, bools = frozenset(), frozenset()
    for part in x[1:]:
        if part[0] == "real":
            reals = frozenset(part[1:])
        elif part[0] == "bool":
            bools = frozenset(part[1:])
    return S.VarSet(reals, bools)


_UNARY = {"not": D.FNot, "box": D.Box, "boxprefix": D.BoxPrefix, "boxpoint": D.BoxPoint,
          "dlc": D.Dlc, "star": D.StarF}


def to_formula(x: SExp) -> D.DcFormula:
    if isinstance(x, str):
        if x == "true":
            return D.TOP
        if x == "false":
            return D.BOT
        if x == "fin":
            return D.FIN
        raise UnknownSymbol(f"formula {x!r}")
    if not x:
        raise FormatError("empty list")
    head, *args = x
    if head in ("=", "!=", "<", "<=", ">", ">="):
        return D.Atom(head, to_term(args[0]), to_term(args[1]))
    if head in _UNARY:
        return _UNARY[head](to_formula(args[0]))
    if head in ("and", "or"):
        # n-ary accepted on input, stored right-nested
        parts = [to_formula(a) for a in args]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = D.FBin(head, p, out)
        return out
    if head in ("implies", "iff"):
        return D.FBin(head, to_formula(args[0]), to_formula(args[1]))
    if head == "chop":
        return D.chop(*[to_formula(a) for a in args])
    if head == "mu":
        return D.MuF(args[0], to_formula(args[1]))
    if head == "fvar":
        return D.FVar(args[0])
    if head == "forall":
        return D.Forall(args[0], to_formula(args[1]))
    if head == "ae":
        return D.Ae(to_state(args[0]))
    if head == "ae0":
        return D.Ae0(to_state(args[0]))
    if head == "fin":
        return D.FIN
    if head == "evolves":
        return D.EvolvesBy(args[0], args[1], args[2])
    if head == "prop":
        return D.PropVar(args[0], False)
    if head == "prop'":
        return D.PropVar(args[0], True)
    if head in ("esplit", "asplit"):
        r, r1, r2, v, v1, v2, body = args
        return D.Split(head == "esplit", r, r1, r2, to_varset(v), to_varset(v1), to_varset(v2),
                       to_formula(body))
    raise UnknownSymbol(f"formula head {head!r}")


def parse_formula(text: str) -> D.DcFormula:
    return to_formula(read_sexp(text))


def parse_term(text: str) -> D.DcTerm:
    return to_term(read_sexp(text))
