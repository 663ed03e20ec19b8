"""
cli.py — Command-line front end.

    hcspdc parse       prog.hcsp                 print the term (and well-formedness problems)
    hcspdc desugar     prog.hcsp                 print the core term
    hcspdc gnf         prog.hcsp                 print the guarded normal form
    hcspdc elim-par    prog.hcsp                 print the parallel-free term
    hcspdc simulate    prog.hcsp -o run.traj     write one run as a trajectory file
    hcspdc compile     prog.hcsp -o sem.dc       write [[P]] as an s-expression
    hcspdc check-trace sem.dc run.traj           evaluate a formula over a run
    hcspdc check-proof bad.proof                 check a proof script
    hcspdc derive      prog.hcsp -o p.proof      emit a proof script

Exit codes: 0 success / valid, 1 invalid / counterexample, 2 usage or input error.
Results go to stdout (or -o); diagnostics go to stderr.
"""

import argparse
import json
import math
import sys
from typing import List, Optional

from . import dc as D
from . import syntax as S
from .debug_timing import log, mark_stage, start_stage
from .desugar import desugar, is_core
from .dc_format import parse_formula, read_sexp, to_varset
from .errors import HcspError, HcspSyntaxError
from .evaluator import Truth, eval_formula
from .gnf import DEFAULT_FUEL, ELIM_FUEL, eliminate_parallel, to_gnf
from .hoare import MODES, Triple, check_proof, derive_any, derive_semantics_triple
from .proof_script import dumps as dump_proof_text, load_proof
from .semantics import DEFAULT_N, DEFAULT_R, SemContext, compile_process
from .simulator import SCHEDULERS, simulate
from .trajectory import Interval, Trajectory
from .utils import (build_discharge_config, build_eval_config, build_sim_config, parse_init,
                    read_program)
from .wellformed import check_wellformed

# ── Config ───────────────────────────────────────────────────────────────────

EXIT_OK      = 0
EXIT_INVALID = 1
EXIT_ERROR   = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so run() owns the exit code."""

    def error(self, message):
        raise _UsageError(message)


def _write(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(out, "w") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _core(p: S.Process) -> S.Process:
    return S.label_parallel(p if is_core(p) else desugar(p))


# ── Commands ─────────────────────────────────────────────────────────────────

def _cmd_parse(args) -> int:
    p, _ = read_program(args.program)
    report = check_wellformed(p)
    if args.format == "json":
        _write(json.dumps({"term": S.show(p), "wellformed": report.ok,
                           "violations": [str(v) for v in report.violations]}, indent=2), args.output)
    else:
        _write(S.show(p), args.output)
        for v in report.violations:
            log("parse", f"not well-formed: {v}")
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_desugar(args) -> int:
    p, _ = read_program(args.program)
    _write(S.show(desugar(p, keep_loops=args.keep_loops)), args.output)
    return EXIT_OK


def _cmd_gnf(args) -> int:
    p, _ = read_program(args.program)
    q = to_gnf(p, args.fuel)
    if args.format == "json":
        _write(json.dumps({"before": S.show(p), "after": S.show(q)}, indent=2), args.output)
    else:
        _write(f"{S.show(p)}\n  =>\n{S.show(q)}", args.output)
    return EXIT_OK


def _cmd_elim_par(args) -> int:
    p, _ = read_program(args.program)
    e = eliminate_parallel(p, args.fuel)
    if args.format == "json":
        _write(json.dumps({"before": S.show(p), "after": S.show(e.term), "complete": e.complete,
                           "residue": e.residue, "configurations": e.unfoldings}, indent=2), args.output)
    else:
        _write(f"{S.show(p)}\n  =>\n{S.show(e.term)}", args.output)
        for r in e.residue:
            log("elim-par", f"fuel ran out on: {r}")
    return EXIT_OK if e.complete else EXIT_INVALID


def _cmd_simulate(args) -> int:
    p, init = read_program(args.program)
    for pairs in args.init or []:
        init.update(parse_init(pairs))
    cfg = build_sim_config(seed=args.seed, horizon=args.horizon, negligible_eps=args.eps,
                           ode_step=args.ode_step, ode_tol=args.ode_tol, scheduler=args.scheduler)
    label = f"simulate[{args.program}]"
    start_stage(label)
    run = simulate(p, init, cfg, all_zero=args.all_zero)
    mark_stage("done", label, pop=True)
    _write(json.dumps(run.trajectory.to_json(), indent=1), args.output)
    log("simulate", f"{run.steps} steps, end={run.trajectory.end:g}, "
                    f"{'terminated' if run.terminated else 'tail=' + run.trajectory.tail}, "
                    f"final {S.valuation_str(run.final)}")
    return EXIT_OK


def _cmd_compile(args) -> int:
    p, _ = read_program(args.program)
    q = _core(p)
    V = S.controlled_vars(q)
    phi = compile_process(q, SemContext(args.R, args.N, V, args.bounds))
    _write(D.pretty(phi) if args.pretty else D.show_formula(phi), args.output)
    return EXIT_OK


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _cmd_check_trace(args) -> int:
    phi = parse_formula(_read_text(args.formula))
    tr = Trajectory.load(args.trajectory)
    hi = tr.end if args.to == "end" else (math.inf if args.to == "inf" else float(args.to))
    sigma = Interval(float(args.frm), hi)
    cfg = build_eval_config(grid=args.grid, strict=args.strict or None)
    verdict = eval_formula(phi, tr, sigma, cfg)
    if args.format == "json":
        _write(json.dumps({"interval": [sigma.lo, None if math.isinf(sigma.hi) else sigma.hi],
                           "verdict": verdict.value}), args.output)
    else:
        _write(f"{sigma}: {verdict.value}", args.output)
    return EXIT_OK if verdict is Truth.TRUE else EXIT_INVALID


def _cmd_check_proof(args) -> int:
    root = load_proof(args.proof)
    cfg = build_discharge_config(build_eval_config(), budget=args.budget, seed=args.seed, jobs=args.jobs)
    label = f"check-proof[{args.proof}]"
    start_stage(label)
    report = check_proof(root, cfg)
    mark_stage("done", label, pop=True)
    if args.format == "json":
        _write(json.dumps(report.to_json(), indent=2), args.output)
    else:
        lines = [report.verdict]
        if report.failed_at is not None:
            lines.append(f"at {report.failed_at}: {report.reason}")
        for path, ob in report.assumptions:
            lines.append(f"assumed at {path}: {ob.note or D.show_formula(ob.formula)}")
        _write("\n".join(lines), args.output)
    if report.counterexample is not None and args.counterexample:
        report.counterexample.trajectory.dump(args.counterexample)
        log("check-proof", f"counterexample trajectory written to {args.counterexample}")
    if report.verdict == "invalid":
        return EXIT_INVALID
    if report.assumptions and args.no_assumptions:
        return EXIT_INVALID
    return EXIT_OK


def _cmd_derive(args) -> int:
    p, _ = read_program(args.program)
    q = _core(p)
    if args.post is None:
        root = derive_semantics_triple(q, mode=args.mode, R=args.R, N=args.N, strategy=args.strategy)
    else:
        V = to_varset(read_sexp(args.vars)) if args.vars else S.controlled_vars(q)
        t = Triple(parse_formula(args.pre), q, parse_formula(args.post), V,
                   args.mode or MODES[0], args.R, args.N)
        root = derive_any(t, args.strategy)
    _write(dump_proof_text(root), args.output)
    return EXIT_OK


# ── Argument parsing ─────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hcspdc", description="HCSP / Duration Calculus verification workbench")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def command(name: str, fn, help_: str, program: bool = True) -> argparse.ArgumentParser:
        c = sub.add_parser(name, help=help_)
        if program:
            c.add_argument("program", help="HCSP source file, '-' for stdin")
        c.add_argument("-o", "--output", default=None, help="output file (default stdout)")
        c.add_argument("--format", choices=("text", "json"), default="text")
        c.set_defaults(fn=fn)
        return c

    command("parse", _cmd_parse, "parse and print a term")

    c = command("desugar", _cmd_desugar, "rewrite derived constructs into core HCSP")
    c.add_argument("--keep-loops", action="store_true", help="leave while and star in place")

    c = command("gnf", _cmd_gnf, "rewrite to guarded normal form")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL)

    c = command("elim-par", _cmd_elim_par, "eliminate parallel composition")
    c.add_argument("--fuel", type=int, default=ELIM_FUEL)

    c = command("simulate", _cmd_simulate, "simulate one run")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--horizon", type=float, default=None)
    c.add_argument("--eps", type=float, default=None, help="negligible duration of a computation step")
    c.add_argument("--ode-step", type=float, default=None)
    c.add_argument("--ode-tol", type=float, default=None)
    c.add_argument("--scheduler", choices=SCHEDULERS, default=None)
    c.add_argument("--init", action="append", help="initial values, e.g. 'x=1,u=0' (repeatable)")
    c.add_argument("--all-zero", action="store_true", help="start unset variables at 0")

    c = command("compile", _cmd_compile, "compile a term to its DC semantics")
    c.add_argument("--R", default=DEFAULT_R, help="computation marker of the program")
    c.add_argument("--N", default=DEFAULT_N, help="marker of computation anywhere")
    c.add_argument("--bounds", action="store_true", help="encode evolutions with integral bounds")
    c.add_argument("--pretty", action="store_true")

    c = command("check-trace", _cmd_check_trace, "evaluate a formula over a trajectory", program=False)
    c.add_argument("formula", help="formula file (s-expression)")
    c.add_argument("trajectory", help="trajectory file")
    c.add_argument("--from", dest="frm", default="0")
    c.add_argument("--to", default="end", help="number, 'end' or 'inf'")
    c.add_argument("--grid", type=int, default=None)
    c.add_argument("--strict", action="store_true")

    c = command("check-proof", _cmd_check_proof, "check a proof script", program=False)
    c.add_argument("proof", help="proof script (JSON)")
    c.add_argument("--budget", type=int, default=None, help="falsification samples per side condition")
    c.add_argument("--seed", type=int, default=None)
    c.add_argument("--jobs", type=int, default=None)
    c.add_argument("--counterexample", default=None, help="write a refuting trajectory here")
    c.add_argument("--no-assumptions", action="store_true", help="treat assumed side conditions as invalid")

    c = command("derive", _cmd_derive, "emit a proof script")
    c.add_argument("--mode", choices=MODES, default=None)
    c.add_argument("--pre", default="true", help="precondition (s-expression), with --post")
    c.add_argument("--post", default=None, help="postcondition; omit for the semantics triple")
    c.add_argument("--vars", default=None, help="variable set, e.g. '(vars (real x) (bool))'")
    c.add_argument("--R", default=DEFAULT_R)
    c.add_argument("--N", default=DEFAULT_N)
    c.add_argument("--strategy", choices=("falsify", "tautology", "assumed"), default="falsify")
    return ap


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as e:
        log("hcspdc", f"usage: {e}")
        return EXIT_ERROR
    try:
        return args.fn(args)
    except HcspSyntaxError as e:
        log(args.command, f"syntax error: {e}")
        return EXIT_ERROR
    except (HcspError, OSError, ValueError) as e:
        log(args.command, f"{type(e).__name__}: {e}")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
