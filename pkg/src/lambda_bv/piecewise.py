"""Step and piecewise-linear functions on [0, 1] with exact rational breakpoints.

Domain points are :class:`fractions.Fraction`; function values are floats.
Every ordering or membership decision is therefore exact, while value
arithmetic carries ordinary binary64 rounding.

Two kinds are supported:

``step``
    one value per piece; pieces are left-closed right-open ``[x_k, x_{k+1})``
    and the last piece also owns ``x = 1``.
``linear``
    one value per breakpoint with affine interpolation. An optional
    ``pieces`` list of ``(start, end)`` one-sided limits allows jumps; then
    ``values`` holds the point values at the breakpoints themselves.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Iterable, Sequence

__all__ = [
    "PiecewiseError",
    "Interval",
    "IntervalFamily",
    "PiecewiseFunction",
    "as_point",
    "step",
    "linear",
    "zero",
    "constant",
    "evaluate",
    "increment",
    "scale_add",
    "total_variation",
    "oscillation",
    "candidate_grid",
    "parse",
    "serialize",
]


class PiecewiseError(ValueError):
    pass


def as_point(x: Any) -> Fraction:
    """Coerce ints, strings like ``"3/8"`` or Fractions to an exact point."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise PiecewiseError(f"domain points must be exact, got float {x!r}")
    try:
        return Fraction(x) if isinstance(x, int) else Fraction(str(x).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise PiecewiseError(f"not an exact rational: {x!r}") from exc


@dataclass(frozen=True, order=True)
class Interval:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = as_point(self.a), as_point(self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if not a < b:
            raise PiecewiseError(f"degenerate or reversed interval [{a}, {b}]")
        if a < 0 or b > 1:
            raise PiecewiseError(f"interval [{a}, {b}] leaves [0, 1]")

    def interior_disjoint(self, other: "Interval") -> bool:
        return self.b <= other.a or other.b <= self.a

    def as_strings(self) -> list[str]:
        return [str(self.a), str(self.b)]


@dataclass(frozen=True)
class IntervalFamily:
    """Finite family of closed intervals with pairwise disjoint interiors."""

    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        ivs = tuple(sorted(self.intervals, key=lambda I: (I.a, I.b)))
        for left, right in zip(ivs, ivs[1:]):
            if right.a < left.b:
                raise PiecewiseError(f"intervals overlap: [{left.a}, {left.b}] and [{right.a}, {right.b}]")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def of(cls, pairs: Iterable[Sequence]) -> "IntervalFamily":
        return cls(tuple(Interval(as_point(a), as_point(b)) for a, b in pairs))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def as_strings(self) -> list[list[str]]:
        return [I.as_strings() for I in self.intervals]


@dataclass(frozen=True)
class PiecewiseFunction:
    kind: str
    breakpoints: tuple[Fraction, ...]
    values: tuple[float, ...]
    pieces: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("step", "linear"):
            raise PiecewiseError(f"unknown kind {self.kind!r}")
        xs = tuple(as_point(x) for x in self.breakpoints)
        vs = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", vs)
        if len(xs) < 2 or xs[0] != 0 or xs[-1] != 1:
            raise PiecewiseError("breakpoints must start at 0 and end at 1")
        for left, right in zip(xs, xs[1:]):
            if not left < right:
                raise PiecewiseError(f"breakpoints not increasing at {left} -> {right}")
        m = len(xs) - 1
        want = m if self.kind == "step" else m + 1
        if len(vs) != want:
            raise PiecewiseError(f"{self.kind} function with {m} pieces needs {want} values, got {len(vs)}")
        if not all(math.isfinite(v) for v in vs):
            raise PiecewiseError("values must be finite")
        if self.pieces is not None:
            if self.kind != "linear":
                raise PiecewiseError("one-sided piece limits only apply to linear functions")
            ps = tuple((float(s), float(e)) for s, e in self.pieces)
            if len(ps) != m:
                raise PiecewiseError(f"need {m} piece limits, got {len(ps)}")
            continuous = all(ps[k] == (vs[k], vs[k + 1]) for k in range(m))
            object.__setattr__(self, "pieces", None if continuous else ps)

    # -- normalized arrays ---------------------------------------------------
    @cached_property
    def point_values(self) -> tuple[float, ...]:
        if self.kind == "step":
            return self.values + (self.values[-1],)
        return self.values

    @cached_property
    def limits(self) -> tuple[tuple[float, float], ...]:
        """Right limit at the piece start and left limit at the piece end."""
        if self.kind == "step":
            return tuple((v, v) for v in self.values)
        if self.pieces is not None:
            return self.pieces
        vs = self.values
        return tuple((vs[k], vs[k + 1]) for k in range(len(vs) - 1))

    @property
    def n_pieces(self) -> int:
        return len(self.breakpoints) - 1

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def locate(self, x: Fraction) -> int:
        """Index k with x in [x_k, x_{k+1}); the last piece also owns 1."""
        k = bisect.bisect_right(self.breakpoints, x) - 1
        return min(k, self.n_pieces - 1)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "kind": self.kind,
            "breakpoints": [str(x) for x in self.breakpoints],
            "values": list(self.values),
        }
        if self.pieces is not None:
            out["pieces"] = [list(p) for p in self.pieces]
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "PiecewiseFunction":
        try:
            kind = doc["kind"]
            xs = doc["breakpoints"]
            vs = doc["values"]
        except (KeyError, TypeError) as exc:
            raise PiecewiseError(f"malformed function document: missing {exc}") from exc
        if not all(isinstance(x, str) for x in xs):
            raise PiecewiseError("breakpoints must be exact rational strings")
        return cls(kind, tuple(as_point(x) for x in xs), tuple(vs), doc.get("pieces"))


# -- constructors ------------------------------------------------------------
def step(breakpoints: Sequence, values: Sequence[float]) -> PiecewiseFunction:
    return PiecewiseFunction("step", tuple(breakpoints), tuple(values))


def linear(breakpoints: Sequence, values: Sequence[float], pieces=None) -> PiecewiseFunction:
    return PiecewiseFunction("linear", tuple(breakpoints), tuple(values), None if pieces is None else tuple(pieces))


def zero() -> PiecewiseFunction:
    return step((Fraction(0), Fraction(1)), (0.0,))


def constant(c: float) -> PiecewiseFunction:
    return step((Fraction(0), Fraction(1)), (float(c),))


# -- evaluation --------------------------------------------------------------
def _interior_value(f: PiecewiseFunction, k: int, x: Fraction) -> float:
    s, e = f.limits[k]
    if s == e:
        return s
    x0, x1 = f.breakpoints[k], f.breakpoints[k + 1]
    return s + (e - s) * float((x - x0) / (x1 - x0))


def evaluate(f: PiecewiseFunction, x) -> float:
    x = as_point(x)
    if x < 0 or x > 1:
        raise PiecewiseError(f"x = {x} outside [0, 1]")
    k = bisect.bisect_right(f.breakpoints, x) - 1
    if f.breakpoints[k] == x:
        return f.point_values[k]
    return _interior_value(f, k, x)


def increment(f: PiecewiseFunction, I) -> float:
    """f(I) = f(b) - f(a)."""
    if not isinstance(I, Interval):
        I = Interval(*I)
    return evaluate(f, I.b) - evaluate(f, I.a)


def _sub_limits(f: PiecewiseFunction, x0: Fraction, x1: Fraction) -> tuple[float, float]:
    """One-sided limits of f on the open subinterval (x0, x1) of one piece."""
    k = f.locate(x0)
    s, e = f.limits[k]
    if s == e:
        return s, s
    a, b = f.breakpoints[k], f.breakpoints[k + 1]
    w = b - a
    return s + (e - s) * float((x0 - a) / w), s + (e - s) * float((x1 - a) / w)


def scale_add(alpha: float, f: PiecewiseFunction, g: PiecewiseFunction) -> PiecewiseFunction:
    """alpha * f + g on the union of both breakpoint sets."""
    alpha = float(alpha)
    xs = sorted(set(f.breakpoints) | set(g.breakpoints))
    if f.kind == "step" and g.kind == "step":
        vals = [alpha * evaluate(f, x) + evaluate(g, x) for x in xs[:-1]]
        return step(xs, vals)
    points = [alpha * evaluate(f, x) + evaluate(g, x) for x in xs]
    pieces = []
    for x0, x1 in zip(xs, xs[1:]):
        fs, fe = _sub_limits(f, x0, x1)
        gs, ge = _sub_limits(g, x0, x1)
        pieces.append((alpha * fs + gs, alpha * fe + ge))
    return linear(xs, points, pieces)


def total_variation(f: PiecewiseFunction) -> float:
    """Classical (Jordan) variation including jumps at breakpoints."""
    at, lim = f.point_values, f.limits
    parts = [abs(lim[0][0] - at[0])]
    for k, (s, e) in enumerate(lim):
        parts.append(abs(e - s))
        parts.append(abs(at[k + 1] - e))
        if k + 1 < len(lim):
            parts.append(abs(lim[k + 1][0] - at[k + 1]))
    return math.fsum(parts)


def oscillation(f: PiecewiseFunction) -> float:
    """sup f - inf f over [0, 1] (one-sided limits included)."""
    vals = list(f.point_values)
    for s, e in f.limits:
        vals += [s, e]
    return max(vals) - min(vals)


def candidate_grid(f: PiecewiseFunction) -> list[Fraction]:
    """Breakpoints plus piece midpoints.

    For step functions and continuous piecewise-linear functions every
    interval family can be moved onto this grid without lowering any
    increment. For linear functions with jumps this holds when each jump
    borders a constant piece on its open side (the tent witnesses do).
    """
    xs = f.breakpoints
    out = []
    for x0, x1 in zip(xs, xs[1:]):
        out.append(x0)
        out.append((x0 + x1) / 2)
    out.append(xs[-1])
    return out


def grid_is_exact(f: PiecewiseFunction) -> bool:
    """Whether :func:`candidate_grid` attains every increment supremum."""
    if f.kind == "step" or f.pieces is None:
        return True
    at = f.point_values
    for k, (s, e) in enumerate(f.limits):
        if s == e:
            continue
        if s != at[k] or e != at[k + 1]:
            return False
    return True


def support_components(f: PiecewiseFunction) -> list[PiecewiseFunction]:
    """Split a step function into parts with disjoint supports that sum to f.

    Parts are separated by maximal runs of zero-valued pieces; each part is
    zero outside its own run of nonzero pieces.
    """
    if f.kind != "step":
        raise PiecewiseError("support components are only defined for step functions here")
    xs, vs = f.breakpoints, f.values
    parts = []
    k = 0
    m = len(vs)
    while k < m:
        if vs[k] == 0.0:
            k += 1
            continue
        start = k
        while k < m and vs[k] != 0.0:
            k += 1
        bps = [Fraction(0)] if start > 0 else []
        bps += list(xs[start : k + 1])
        vals = ([0.0] if start > 0 else []) + list(vs[start:k])
        if bps[-1] != 1:
            bps.append(Fraction(1))
            vals.append(0.0)
        parts.append(step(bps, vals))
    return parts


def parse(text: str) -> PiecewiseFunction:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PiecewiseError(f"malformed function document: {exc}") from exc
    return PiecewiseFunction.from_dict(doc)


def serialize(f: PiecewiseFunction) -> str:
    return json.dumps(f.to_dict())
