"""
trajectory.py — Finite-variability interpretations of process variables and markers.

A Trajectory tiles [0, T] with segments. Each segment carries:
  bools  state signals (R, N, R#k.i) constant on the open segment
  reals  process variables as functions on [t0, t1)   const | affine | samples
  end    every process variable's value at t1
At a breakpoint the right segment's value prevails; `end` must agree with it
(check_locality). After T the run is either over ("none"), constant forever
("constant"), or was cut at the horizon while still going ("open").
"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from . import dc as D
from .errors import EvalError, FormatError

TAILS = ("none", "constant", "open")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isinf(self.lo) or self.lo > self.hi:
            raise EvalError(f"bad interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{self.lo:g}, {'inf' if math.isinf(self.hi) else format(self.hi, 'g')}]"


@dataclass(frozen=True)
class RealFn:
    kind: str                      # const | affine | samples
    data: tuple                    # (v,) | (t0, v0, slope) | (times, values)

    @staticmethod
    def const(v: float) -> "RealFn":
        return RealFn("const", (float(v),))

    @staticmethod
    def affine(t0: float, v0: float, slope: float) -> "RealFn":
        return RealFn("affine", (float(t0), float(v0), float(slope)))

    @staticmethod
    def samples(times: Iterable[float], values: Iterable[float]) -> "RealFn":
        return RealFn("samples", (tuple(float(t) for t in times), tuple(float(v) for v in values)))

    def __call__(self, t: float) -> float:
        if self.kind == "const":
            return self.data[0]
        if self.kind == "affine":
            t0, v0, slope = self.data
            return v0 + slope * (t - t0)
        times, values = self.data
        return float(np.interp(t, times, values))

    def knots(self, a: float, b: float) -> List[float]:
        """Interior points where the function is not affine, within (a, b)."""
        if self.kind != "samples":
            return []
        return [t for t in self.data[0] if a < t < b]

    def integral(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        if self.kind == "const":
            return self.data[0] * (b - a)
        if self.kind == "affine":
            return 0.5 * (self(a) + self(b)) * (b - a)
        ts = [a] + self.knots(a, b) + [b]
        return float(trapezoid([self(t) for t in ts], ts))

    def to_json(self, t0: float) -> dict:
        if self.kind == "const":
            return {"kind": "const", "data": self.data[0]}
        if self.kind == "affine":
            _, v0, slope = self.data
            return {"kind": "affine", "data": [v0, slope]}
        return {"kind": "samples", "data": [list(self.data[0]), list(self.data[1])]}

    @staticmethod
    def from_json(obj: dict, t0: float) -> "RealFn":
        kind, data = obj["kind"], obj["data"]
        if kind == "const":
            return RealFn.const(data)
        if kind == "affine":
            return RealFn.affine(t0, data[0], data[1])
        if kind == "samples":
            return RealFn.samples(data[0], data[1])
        raise FormatError(f"unknown function kind {kind!r}")


@dataclass(frozen=True)
class Segment:
    t0: float
    t1: float
    bools: Mapping[str, int] = field(default_factory=dict)
    reals: Mapping[str, RealFn] = field(default_factory=dict)
    end: Mapping[str, float] = field(default_factory=dict)

    def start_value(self, name: str) -> float:
        return self.reals[name](self.t0)


@dataclass(frozen=True)
class Piece:
    """Part of an interval lying inside one segment (or the tail)."""
    lo: float
    hi: float
    bools: Mapping[str, int]
    seg: Optional[Segment]


class Trajectory:
    def __init__(self, segments: Iterable[Segment], final: Mapping[str, float], tail: str = "none",
                 tail_signals: Optional[Mapping[str, int]] = None, T: Optional[float] = None):
        self.segments: Tuple[Segment, ...] = tuple(segments)
        if tail not in TAILS:
            raise FormatError(f"unknown tail {tail!r}")
        self.tail = tail
        self.final: Dict[str, float] = dict(final)
        self.T = self.segments[-1].t1 if self.segments else float(T or 0.0)
        if tail_signals is None:
            tail_signals = {k: 0 for k in self.signal_names()}
        self.tail_signals: Dict[str, int] = dict(tail_signals)
        self._starts = np.array([s.t0 for s in self.segments], dtype=float)

    # ── structure ──

    def signal_names(self) -> List[str]:
        names = set()
        for s in self.segments:
            names |= set(s.bools)
        return sorted(names)

    def variable_names(self) -> List[str]:
        return sorted(self.final)

    def breakpoints(self) -> List[float]:
        return [s.t0 for s in self.segments] + [self.T]

    @property
    def end(self) -> float:
        """Right end of the whole run: infinite for a constant tail."""
        return math.inf if self.tail == "constant" else self.T

    def full_interval(self) -> Interval:
        return Interval(0.0, self.end)

    def _seg_index(self, t: float) -> Optional[int]:
        if not self.segments or t >= self.T:
            return None
        return int(np.searchsorted(self._starts, t, side="right")) - 1

    # ── point values ──

    def value_at(self, name: str, t: float) -> float:
        if t > self.T and self.tail != "constant":
            raise EvalError(f"time {t} beyond the end {self.T} of the run")
        i = self._seg_index(t)
        if i is None or i < 0:
            if name not in self.final:
                raise EvalError(f"unknown variable {name!r}")
            return self.final[name]
        seg = self.segments[i]
        if name not in seg.reals:
            raise EvalError(f"unknown variable {name!r}")
        return seg.reals[name](t)

    def valuation_at(self, t: float) -> Dict[str, float]:
        return {name: self.value_at(name, t) for name in self.final}

    def signal_at(self, name: str, t: float) -> int:
        i = self._seg_index(t)
        if i is None:
            return int(self.tail_signals.get(name, 0))
        return int(self.segments[i].bools.get(name, 0))

    def has_variable(self, name: str) -> bool:
        return name in self.final

    # ── interval pieces ──

    def pieces(self, a: float, b: float) -> Iterator[Piece]:
        if b > self.T and self.tail == "none":
            raise EvalError(f"interval end {b} beyond the end {self.T} of the run")
        if b > self.T and self.tail == "open":
            b = self.T
        i = self._seg_index(a)
        if i is not None:
            i = max(i, 0)
            while i < len(self.segments):
                seg = self.segments[i]
                if seg.t0 >= b:
                    break
                lo, hi = max(seg.t0, a), min(seg.t1, b)
                if hi > lo:
                    yield Piece(lo, hi, seg.bools, seg)
                i += 1
        if b > self.T:
            yield Piece(max(a, self.T), b, self.tail_signals, None)

    def duration(self, s: D.StateExpr, a: float, b: float) -> float:
        total = 0.0
        for p in self.pieces(a, b):
            if D.eval_state(s, p.bools):
                if math.isinf(p.hi):
                    return math.inf
                total += p.hi - p.lo
        return total

    def holds_ae(self, s: D.StateExpr, a: float, b: float) -> bool:
        return all(D.eval_state(s, p.bools) for p in self.pieces(a, b))

    def run_end(self, s: D.StateExpr, a: float) -> float:
        """Largest t such that s holds almost everywhere on [a, t]."""
        t = a
        for p in self.pieces(a, self.end):
            if not D.eval_state(s, p.bools):
                break
            t = p.hi
        return t

    def runs(self, s: D.StateExpr, a: float, b: float) -> List[Tuple[float, float]]:
        """Maximal intervals within [a, b] on which s holds almost everywhere."""
        out: List[Tuple[float, float]] = []
        for p in self.pieces(a, b):
            if D.eval_state(s, p.bools):
                if out and out[-1][1] == p.lo:
                    out[-1] = (out[-1][0], p.hi)
                else:
                    out.append((p.lo, p.hi))
        return out

    def sample_times(self, a: float, b: float) -> List[float]:
        """Breakpoints, dense sample knots and piece midpoints in [a, b)."""
        ts = {a}
        for p in self.pieces(a, b):
            ts.add(p.lo)
            if not math.isinf(p.hi):
                ts.add(0.5 * (p.lo + p.hi))
            if p.seg is not None:
                for fn in p.seg.reals.values():
                    ts.update(fn.knots(p.lo, p.hi))
        return sorted(t for t in ts if t < b)

    def extreme(self, name: str, a: float, b: float, upper: bool) -> float:
        """sup (upper) or inf of a variable's point values over [a, b]."""
        vals = [self.value_at(name, t) for t in self.sample_times(a, b)]
        if not math.isinf(b):
            vals.append(self.value_at(name, b))
        for p in self.pieces(a, b):
            if p.seg is not None and not math.isinf(p.hi):
                vals.append(p.seg.reals[name](p.hi))
        return max(vals) if upper else min(vals)

    def integral(self, name: str, a: float, b: float, frozen: Optional[str] = None) -> float:
        """Integral of a variable over [a, b], skipping pieces where signal `frozen` holds."""
        total = 0.0
        for p in self.pieces(a, b):
            if frozen is not None and p.bools.get(frozen, 0):
                continue
            if p.seg is None:
                v = self.final[name]
                if v != 0.0 and math.isinf(p.hi):
                    return math.copysign(math.inf, v)
                total += v * (p.hi - p.lo)
            else:
                total += p.seg.reals[name].integral(p.lo, p.hi)
        return total

    # ── derived trajectories ──

    def with_signals(self, extra: Mapping[str, List[int]], tail: Optional[Mapping[str, int]] = None) -> "Trajectory":
        """Copy with additional per-segment state signals."""
        segs = []
        for i, s in enumerate(self.segments):
            bools = dict(s.bools)
            for name, vals in extra.items():
                bools[name] = int(vals[i])
            segs.append(Segment(s.t0, s.t1, bools, s.reals, s.end))
        tail_signals = dict(self.tail_signals)
        tail_signals.update(tail or {k: 0 for k in extra})
        return Trajectory(segs, self.final, self.tail, tail_signals, self.T)

    def restrict(self, T: float) -> "Trajectory":
        """The run observed up to time T only."""
        if T >= self.T:
            return self
        segs = []
        for s in self.segments:
            if s.t0 >= T:
                break
            if s.t1 <= T:
                segs.append(s)
            else:
                segs.append(Segment(s.t0, T, s.bools, s.reals, {k: fn(T) for k, fn in s.reals.items()}))
        final = self.valuation_at(T)
        return Trajectory(segs, final, "open" if self.tail != "none" or T < self.T else "none", None, T)

    def extended(self, T: float, tail: str = "constant") -> "Trajectory":
        """Append a quiescent segment up to T (all signals off, variables constant)."""
        if T <= self.T:
            return Trajectory(self.segments, self.final, tail, self.tail_signals, self.T)
        seg = Segment(self.T, T, {k: 0 for k in self.signal_names()},
                      {k: RealFn.const(v) for k, v in self.final.items()}, dict(self.final))
        return Trajectory(self.segments + (seg,), self.final, tail, self.tail_signals)

    # ── persistence ──

    def to_json(self) -> dict:
        return {
            "horizon": {"T": self.T, "tail": self.tail},
            "segments": [
                {"t0": s.t0, "t1": s.t1, "bools": dict(s.bools),
                 "reals": {k: fn.to_json(s.t0) for k, fn in s.reals.items()},
                 "end": dict(s.end)}
                for s in self.segments
            ],
            "final": self.final,
            "tail_signals": self.tail_signals,
        }

    @staticmethod
    def from_json(obj: dict) -> "Trajectory":
        try:
            segs = [Segment(float(s["t0"]), float(s["t1"]), {k: int(v) for k, v in s.get("bools", {}).items()},
                            {k: RealFn.from_json(fn, float(s["t0"])) for k, fn in s.get("reals", {}).items()},
                            {k: float(v) for k, v in s.get("end", {}).items()})
                    for s in obj["segments"]]
            horizon = obj["horizon"]
            final = obj.get("final") or (dict(segs[-1].end) if segs else {})
            return Trajectory(segs, final, horizon.get("tail", "none"), obj.get("tail_signals"),
                              float(horizon["T"]))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad trajectory file: {e}") from None

    def dump(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @staticmethod
    def load(path: str) -> "Trajectory":
        with open(path) as fh:
            try:
                return Trajectory.from_json(json.load(fh))
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}: {e}") from None


def check_locality(tr: Trajectory, V: Iterable[str], tol: float = 0.0) -> bool:
    """Every variable of V is single-valued at each breakpoint."""
    names = [x for x in V if not x.endswith("_dot")]
    segs = tr.segments
    for i, seg in enumerate(segs):
        for x in names:
            if x not in seg.reals or x not in seg.end:
                return False
            right = segs[i + 1].start_value(x) if i + 1 < len(segs) else tr.final.get(x)
            if right is None or abs(seg.end[x] - right) > tol:
                return False
    return True


def constant_trajectory(valuation: Mapping[str, float], T: float, signals: Mapping[str, int] = None,
                        tail: str = "none") -> Trajectory:
    signals = dict(signals or {})
    if T <= 0:
        return Trajectory([], valuation, tail, signals, 0.0)
    seg = Segment(0.0, float(T), signals, {k: RealFn.const(v) for k, v in valuation.items()}, dict(valuation))
    return Trajectory([seg], valuation, tail, signals if tail == "constant" else None)
