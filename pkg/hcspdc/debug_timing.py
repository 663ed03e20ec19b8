import os
import sys
import time
import threading

"""Opt-in stage timing and trace output for the workbench.

Usage:
- Enable by setting environment variable HCSP_DEBUG=1
- start_stage(label) records a start time; mark_stage(stage, label) prints
  the elapsed time since then. trace(tag, msg) prints a tagged line.

Everything goes to stderr so CLI stdout stays machine-readable. When the
flag is off each call is a single boolean check.
"""

ENABLE_DEBUG = os.getenv("HCSP_DEBUG", "0") == "1"

_lock = threading.Lock()
# Map: label -> t_start
_stage_times = {}


def log(tag: str, msg: str) -> None:
    """Always-on tagged line on stderr."""
    print(f"[{tag}] {msg}", file=sys.stderr)


def trace(tag: str, msg: str) -> None:
    if not ENABLE_DEBUG:
        return
    print(f"[{tag}] {msg}", file=sys.stderr)


def start_stage(label: str) -> None:
    """Register the start time of a stage.

    label: something meaningful like "simulate[plant.hcsp]".
    """
    if not ENABLE_DEBUG:
        return
    with _lock:
        _stage_times[label] = time.perf_counter()


def mark_stage(stage: str, label: str, pop: bool = False) -> None:
    """Print elapsed time for `label` at logical point `stage`.

    pop: if True, forget the label (final stage).
    """
    if not ENABLE_DEBUG:
        return

    now = time.perf_counter()
    with _lock:
        t_start = _stage_times.get(label)
        if pop:
            _stage_times.pop(label, None)

    if t_start is None:
        print(f"[TIMING] {stage} {label}: start_unknown", file=sys.stderr)
    else:
        print(f"[TIMING] {stage} {label}: {(now - t_start) * 1000.0:.1f}ms", file=sys.stderr)
