import os
import re
from typing import Dict, Tuple

from dotenv import load_dotenv, find_dotenv

from . import syntax as S
from .discharge import DischargeConfig
from .errors import FormatError
from .evaluator import EvalConfig
from .simulator import SimConfig

load_dotenv(find_dotenv())

_INIT_LINE = re.compile(r"^\s*--\s*init:\s*(.*)$", re.MULTILINE)


def _env(name: str, default, cast):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise FormatError(f"{name}={raw!r} is not a valid {cast.__name__}") from None


def _flag(raw: str) -> bool:
    return raw.strip().lower() in ("1", "true", "yes", "on")


def build_sim_config(**overrides) -> SimConfig:
    """
    Simulator settings from HCSP_* environment variables.
    Keyword overrides (e.g. from CLI flags) win over the environment.
    """
    values = {
        "seed": _env("HCSP_SEED", 0, int),
        "horizon": _env("HCSP_HORIZON", 20.0, float),
        "negligible_eps": _env("HCSP_EPS", 1e-3, float),
        "ode_step": _env("HCSP_ODE_STEP", 0.01, float),
        "ode_tol": _env("HCSP_ODE_TOL", 1e-9, float),
        "max_steps": _env("HCSP_MAX_STEPS", 1_000_000, int),
        "scheduler": _env("HCSP_SCHEDULER", "fair-random", str),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SimConfig(**values)


def build_eval_config(**overrides) -> EvalConfig:
    """Evaluator settings; HCSP_GRID=0 means breakpoints only (exact mode)."""
    values = {
        "mu_depth": _env("HCSP_MU_DEPTH", 64, int),
        "grid": _env("HCSP_GRID", 0, int),
        "tol": _env("HCSP_TOL", 1e-9, float),
        "evolve_tol": _env("HCSP_EVOLVE_TOL", 1e-4, float),
        "split_budget": _env("HCSP_SPLIT_BUDGET", 4096, int),
        "strict": _env("HCSP_STRICT", False, _flag),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return EvalConfig(**values)


def build_discharge_config(eval_cfg: EvalConfig = None, **overrides) -> DischargeConfig:
    values = {
        "budget": _env("HCSP_FALSIFY_BUDGET", 1000, int),
        "seed": _env("HCSP_FALSIFY_SEED", 0, int),
        "jobs": _env("HCSP_JOBS", 1, int),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return DischargeConfig(eval=eval_cfg or build_eval_config(), **values)


def parse_init(text: str) -> Dict[str, float]:
    """
    Parse "x=1, u=-0.5" (commas or spaces between pairs) into a valuation.
    Boolean values may be given as true/false.
    """
    env: Dict[str, float] = {}
    for pair in re.split(r"[,\s]+", text.strip()):
        if not pair:
            continue
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise FormatError(f"bad initial value {pair!r} (expected NAME=VALUE)")
        if value in ("true", "false"):
            env[name] = 1.0 if value == "true" else 0.0
            continue
        try:
            env[name] = float(value)
        except ValueError:
            raise FormatError(f"bad initial value {pair!r}") from None
    return env


def read_program(path: str) -> Tuple[S.Process, Dict[str, float]]:
    """
    Read an .hcsp file ("-" for stdin) and its "-- init: ..." header lines.
    Example header: "-- init: x=1, u=0"
    """
    from .parser import parse_process

    if path == "-":
        import sys
        text = sys.stdin.read()
    else:
        with open(path) as fh:
            text = fh.read()
    init: Dict[str, float] = {}
    for m in _INIT_LINE.finditer(text):
        init.update(parse_init(m.group(1)))
    return parse_process(text), init
