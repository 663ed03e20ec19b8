# hcspdc/__init__.py

from .parser import parse_process, parse_expr
from .desugar import desugar
from .wellformed import check_wellformed, controlled_vars
from .dc_format import parse_formula
from .trajectory import Interval, Trajectory, check_locality
from .evaluator import EvalConfig, Truth, eval_formula, eval_term, chop_candidates, unfold_mu
from .semantics import SemContext, compile_process, loc_formula, const_formula, esplit, asplit
from .simulator import SimConfig, Run, simulate, step
from .ode import integrate_ode
from .gnf import to_gnf, eliminate_parallel, refold_loops, is_gnf
from .discharge import DischargeConfig, Obligation, discharge, falsify, tautology
from .hoare import (Triple, ProofNode, ProofReport, apply_rule, check_proof,
                    derive_semantics_triple, derive_any)
from .proof_script import load_proof, dump_proof
from .utils import build_sim_config, build_eval_config, build_discharge_config

__all__ = [
    "parse_process",
    "parse_expr",
    "desugar",
    "check_wellformed",
    "controlled_vars",
    "parse_formula",
    "Interval",
    "Trajectory",
    "check_locality",
    "EvalConfig",
    "Truth",
    "eval_formula",
    "eval_term",
    "chop_candidates",
    "unfold_mu",
    "SemContext",
    "compile_process",
    "loc_formula",
    "const_formula",
    "esplit",
    "asplit",
    "SimConfig",
    "Run",
    "simulate",
    "step",
    "integrate_ode",
    "to_gnf",
    "eliminate_parallel",
    "refold_loops",
    "is_gnf",
    "DischargeConfig",
    "Obligation",
    "discharge",
    "falsify",
    "tautology",
    "Triple",
    "ProofNode",
    "ProofReport",
    "apply_rule",
    "check_proof",
    "derive_semantics_triple",
    "derive_any",
    "load_proof",
    "dump_proof",
    "build_sim_config",
    "build_eval_config",
    "build_discharge_config",
]
