"""
parser.py — Concrete HCSP grammar and its transformer to syntax.py terms.

Precedence, loosest first: `||`, `|~|`, `;`, postfix `*`. All three binary
operators associate to the right. `if`/`while`/`mu` bodies are braced.
"""

import lark

from . import syntax as S
from .errors import ArityError, HcspSyntaxError
from .registry import get_parser

KEYWORDS = ("skip", "eps", "wait", "await", "if", "then", "else", "while", "do", "mu",
            "true", "false", "not", "and", "or")

GRAMMAR = r"""
    ?start: proc

    ?proc: choice
         | choice "||" proc                  -> par
    ?choice: seqp
           | seqp "|~|" choice                -> intchoice
    ?seqp: post
         | post ";" seqp                      -> seq
    ?post: atom
         | post "*"                           -> star

    ?atom: "skip"                             -> skip
         | "eps"                              -> eps
         | targets ":=" exprs                 -> assign
         | "wait" expr                        -> wait
         | "await" expr                       -> await_
         | io
         | choice_block
         | evolution
         | evolution "|>" "(" expr ")" "{" proc "}"   -> timeout
         | evolution "|>" choice_block        -> interrupt
         | "if" expr "then" "{" proc "}" "else" "{" proc "}"  -> if_
         | "while" expr "do" "{" proc "}"     -> while_
         | "mu" NAME "." "{" proc "}"         -> mu
         | NAME                               -> recvar
         | "(" proc ")"

    io: IN_FLAG NAME                          -> input
      | OUT_FLAG expr                         -> output

    choice_block: "[" branch ("[]" branch)* "]"
    branch: io "->" proc

    evolution: "<" [odes] "&" expr ">"
    odes: ode_eq ("," ode_eq)*
    ode_eq: sum "=" sum

    targets: target ("," target)*
    ?target: NAME | IN_FLAG | OUT_FLAG
    exprs: expr ("," expr)*

    ?expr: disj
    ?disj: conj
         | disj "or" conj                     -> or_
    ?conj: negation
         | conj "and" negation                -> and_
    ?negation: comparison
             | "not" negation                 -> not_
    ?comparison: sum
               | sum CMP sum                  -> cmp
    ?sum: product
        | sum ADD product                     -> binop
    ?product: unary
            | product MUL unary               -> binop
    ?unary: primary
          | "-" unary                         -> neg
    ?primary: NUMBER                          -> number
            | "true"                          -> true
            | "false"                         -> false
            | NAME                            -> ref
            | IN_FLAG                         -> ref
            | OUT_FLAG                        -> ref
            | "(" expr ")"

    CMP: "<=" | ">=" | "==" | "!=" | "<" | ">"
    ADD: "+" | "-"
    MUL: "*" | "/"
    NAME: /(?!(skip|eps|wait|await|if|then|else|while|do|mu|true|false|not|and|or)\b)[A-Za-z_][A-Za-z0-9_#]*/
    IN_FLAG: /[A-Za-z_][A-Za-z0-9_#]*\?/
    OUT_FLAG: /[A-Za-z_][A-Za-z0-9_#]*!(?!=)/
    NUMBER: /\d+(\.\d+)?/
    COMMENT: /--[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""


def _parser() -> lark.Lark:
    return get_parser("hcsp", GRAMMAR, start="start", parser="earley", ambiguity="resolve",
                      propagate_positions=True)


class ToTerm(lark.Transformer):
    """lark tree -> syntax.py nodes."""

    # expressions
    def number(self, items):
        return S.Num(S.canonical_number(str(items[0])))

    def true(self, _):
        return S.TRUE

    def false(self, _):
        return S.FALSE

    def ref(self, items):
        return S.VarRef(str(items[0]))

    def neg(self, items):
        return S.Neg(items[0])

    def binop(self, items):
        return S.BinOp(str(items[1]), items[0], items[2])

    def cmp(self, items):
        return S.Cmp(str(items[1]), items[0], items[2])

    def not_(self, items):
        return S.Not(items[0])

    def and_(self, items):
        return S.BoolOp("and", items[0], items[1])

    def or_(self, items):
        return S.BoolOp("or", items[0], items[1])

    def exprs(self, items):
        return tuple(items)

    def targets(self, items):
        return tuple(str(t) for t in items)

    # process atoms
    def skip(self, _):
        return S.SKIP

    def eps(self, _):
        return S.EPS

    def assign(self, items):
        targets, exprs = items
        if len(targets) != len(exprs):
            raise ArityError(f"{len(targets)} targets but {len(exprs)} expressions")
        return S.Assign(targets, exprs)

    def wait(self, items):
        return S.Wait(items[0])

    def await_(self, items):
        return S.Await(items[0])

    def input(self, items):
        return S.Input(str(items[0])[:-1], str(items[1]))

    def output(self, items):
        return S.Output(str(items[0])[:-1], items[1])

    def branch(self, items):
        return (items[0], items[1])

    def choice_block(self, items):
        return S.ExtChoice(tuple(items))

    def ode_eq(self, items):
        return S.Ode(items[0], items[1])

    def odes(self, items):
        return tuple(items)

    def evolution(self, items):
        odes, b = items
        return S.Evolve(odes or (), b)

    def timeout(self, items):
        ev, d, handler = items
        return S.EvolveTimeout(ev.odes, ev.b, d, handler)

    def interrupt(self, items):
        ev, io = items
        return S.EvolveInterrupt(ev.odes, ev.b, io)

    def if_(self, items):
        return S.If(items[0], items[1], items[2])

    def while_(self, items):
        return S.While(items[0], items[1])

    def mu(self, items):
        return S.Mu(str(items[0]), items[1])

    def recvar(self, items):
        return S.RecVar(str(items[0]))

    # operators
    def seq(self, items):
        return S.Seq(items[0], items[1])

    def par(self, items):
        return S.Par(items[0], items[1])

    def intchoice(self, items):
        return S.IntChoice(items[0], items[1])

    def star(self, items):
        return S.Star(items[0])


def parse_process(text: str) -> S.Process:
    """Parse HCSP concrete syntax into a process term."""
    try:
        tree = _parser().parse(text)
        return ToTerm().transform(tree)
    except lark.exceptions.UnexpectedInput as e:
        first = str(e).strip().splitlines()[0] if str(e).strip() else "unexpected input"
        raise HcspSyntaxError(first, getattr(e, "line", 0) or 0,
                              getattr(e, "column", 0) or 0) from None
    except lark.exceptions.VisitError as e:
        if isinstance(e.orig_exc, HcspSyntaxError):
            raise e.orig_exc from None
        raise


def parse_expr(text: str) -> S.Expr:
    """Parse a standalone boolean or arithmetic expression."""
    p = parse_process(f"await {text}")
    return p.b
