"""
errors.py — Exception hierarchy for the workbench.

Every failure the library raises on purpose derives from HcspError, so the
CLI can map the whole family to exit code 2 with one except clause.
"""


class HcspError(Exception):
    """Base class for all workbench errors."""


# ── Syntax ────────────────────────────────────────────────────────────────────

class HcspSyntaxError(HcspError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message}")


class ArityError(HcspSyntaxError):
    """Simultaneous assignment with different numbers of targets and values."""


class ClosureError(HcspError):
    """closure() met an atom it cannot close syntactically."""


class WellFormednessError(HcspError):
    """Raised by operations whose precondition is a well-formed term."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(str(v) for v in report.violations))


class DesugarError(HcspError):
    pass


# ── Duration Calculus ────────────────────────────────────────────────────────

class CompileError(HcspError):
    """Non-core construct or implicit ODE handed to the compiler."""


class EvalError(HcspError):
    pass


class UnsupportedQuantifier(EvalError):
    pass


class UnknownSymbol(EvalError):
    pass


class IndeterminateArithmetic(EvalError):
    pass


class NegativeOccurrence(EvalError):
    pass


class NameClash(HcspError):
    pass


# ── Simulation ───────────────────────────────────────────────────────────────

class SimulationError(HcspError):
    pass


class ZenoError(SimulationError):
    pass


class OdeError(SimulationError):
    pass


class MissingVariable(SimulationError):
    pass


# ── Rewriting / proofs / files ───────────────────────────────────────────────

class RewriteError(HcspError):
    pass


class FuelExhausted(RewriteError):
    pass


class NoRepetition(RewriteError):
    pass


class ProofError(HcspError):
    pass


class UnknownRule(ProofError):
    pass


class ModeMixing(ProofError):
    pass


class FormatError(HcspError):
    """Malformed trajectory, formula or proof-script file."""
