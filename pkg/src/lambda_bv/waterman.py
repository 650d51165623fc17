"""Waterman sequences and their reciprocal partial sums."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath

__all__ = [
    "WatermanSequence",
    "SequenceError",
    "make_sequence",
    "parse_sequence",
    "term",
    "partial_sum",
    "partial_sum_exact",
    "validate",
]

FAMILIES = ("ones", "linear", "power", "custom")

# Beyond these sizes the partial sum switches from direct summation to an
# analytic evaluation (harmonic numbers / Hurwitz zeta) at 40 digits.
EXACT_SUM_LIMIT = 4096
DIRECT_SUM_LIMIT = 1 << 20


class SequenceError(ValueError):
    """Raised for malformed or non-Waterman sequence descriptors."""


def _as_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(str(x))


@dataclass(frozen=True, eq=False)
class WatermanSequence:
    """A nondecreasing positive weight sequence lambda_1 <= lambda_2 <= ...

    Instances built directly are not checked; use :func:`make_sequence` for
    validated construction and :func:`validate` to inspect an arbitrary one.
    """

    family: str
    alpha: float | None = None
    prefix: tuple[Fraction, ...] = ()
    tail: str = "constant"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    # -- accessors ---------------------------------------------------------
    def term(self, i: int):
        return term(self, i)

    def partial_sum(self, r: float) -> float:
        return partial_sum(self, r)

    def weights(self, n: int):
        """Reciprocals 1/lambda_1, ..., 1/lambda_n as a float array."""
        import numpy as np

        if n <= 0:
            return np.zeros(0)
        i = np.arange(1, n + 1, dtype=float)
        if self.family == "ones":
            return np.ones(n)
        if self.family == "linear":
            return 1.0 / i
        if self.family == "power":
            return i ** (-self.alpha)
        k = len(self.prefix)
        head = np.array([1.0 / float(v) for v in self.prefix[: min(n, k)]])
        if n <= k:
            return head
        return np.concatenate([head, np.full(n - k, 1.0 / float(self.prefix[-1]))])

    @property
    def exact(self) -> bool:
        return self.family != "power"

    def describe(self) -> dict:
        out: dict[str, Any] = {"family": self.family}
        if self.family == "power":
            out["alpha"] = self.alpha
        if self.family == "custom":
            out["prefix"] = [str(v) for v in self.prefix]
            out["tail"] = self.tail
        return out

    def label(self) -> str:
        if self.family == "power":
            return f"power:{self.alpha:g}"
        if self.family == "custom":
            return "custom:" + ",".join(str(v) for v in self.prefix)
        return self.family

    def __eq__(self, other) -> bool:
        if not isinstance(other, WatermanSequence):
            return NotImplemented
        return self.describe() == other.describe()

    def __hash__(self) -> int:
        return hash(repr(self.describe()))


def make_sequence(kind: Any = "ones", **kwargs) -> WatermanSequence:
    """Build a validated sequence from a family name or descriptor dict.

    >>> make_sequence("linear").term(7)
    7
    >>> make_sequence({"family": "power", "alpha": 0.5}).term(4)
    2.0
    """
    if isinstance(kind, WatermanSequence):
        return kind
    if isinstance(kind, str):
        desc = {"family": kind, **kwargs}
    else:
        desc = {**dict(kind), **kwargs}
    family = desc.get("family")
    if family not in FAMILIES:
        raise SequenceError(f"unknown family {family!r}; expected one of {FAMILIES}")

    if family == "power":
        alpha = desc.get("alpha")
        if alpha is None:
            raise SequenceError("power family needs alpha")
        alpha = float(Fraction(str(alpha)))
        if not 0.0 < alpha <= 1.0:
            raise SequenceError(f"alpha must lie in (0, 1] so that sum 1/lambda_i diverges, got {alpha}")
        return WatermanSequence("power", alpha=alpha)

    if family == "custom":
        raw = desc.get("prefix")
        if not raw:
            raise SequenceError("custom family needs a nonempty prefix")
        tail = desc.get("tail", "constant")
        if tail != "constant":
            raise SequenceError(f"unsupported tail rule {tail!r}; only 'constant' is available")
        seq = WatermanSequence("custom", prefix=tuple(_as_fraction(v) for v in raw), tail=tail)
        problems = validate(seq, len(seq.prefix))
        if problems:
            raise SequenceError("; ".join(problems))
        return seq

    return WatermanSequence(family)


def parse_sequence(text: str) -> WatermanSequence:
    """Parse the CLI notation ``ones | linear | power:A | custom:FILE``."""
    import json
    from pathlib import Path

    name, _, arg = text.partition(":")
    if name == "power":
        return make_sequence("power", alpha=arg)
    if name == "custom":
        path = Path(arg)
        if path.exists():
            return make_sequence(json.loads(path.read_text()))
        return make_sequence("custom", prefix=[s for s in arg.split(",") if s])
    return make_sequence(name)


def term(seq: WatermanSequence, i: int):
    """lambda_i; exact (int/Fraction) except for the power family."""
    if i < 1 or int(i) != i:
        raise SequenceError(f"index must be a positive integer, got {i!r}")
    i = int(i)
    if seq.family == "ones":
        return 1
    if seq.family == "linear":
        return i
    if seq.family == "power":
        return float(i) ** seq.alpha
    if i <= len(seq.prefix):
        v = seq.prefix[i - 1]
    else:
        v = seq.prefix[-1]
    return int(v) if v.denominator == 1 else v


def _harmonic_exact(lo: int, hi: int) -> tuple[int, int]:
    """sum_{i=lo}^{hi} 1/i as an unreduced numerator/denominator pair."""
    if hi - lo < 8:
        num, den = 0, 1
        for i in range(lo, hi + 1):
            num, den = num * i + den, den * i
        return num, den
    mid = (lo + hi) // 2
    a, b = _harmonic_exact(lo, mid)
    c, d = _harmonic_exact(mid + 1, hi)
    return a * d + b * c, b * d


def partial_sum_exact(seq: WatermanSequence, r: float) -> Fraction:
    """Exact Lambda(r) for the rational families. Cost grows with floor(r)."""
    n = _floor_arg(r)
    if seq.family == "power":
        raise SequenceError("power family has no exact partial sums")
    if seq.family == "ones":
        return Fraction(n)
    if seq.family == "linear":
        num, den = _harmonic_exact(1, n)
        return Fraction(num, den)
    k = len(seq.prefix)
    s = sum((1 / v for v in seq.prefix[: min(n, k)]), Fraction(0))
    if n > k:
        s += Fraction(n - k) / seq.prefix[-1]
    return s


def _floor_arg(r) -> int:
    if r < 1:
        raise SequenceError(f"Lambda(r) needs r >= 1, got {r}")
    return int(math.floor(r)) if not isinstance(r, int) else r


def _compute_partial_sum(seq: WatermanSequence, n: int) -> float:
    if seq.family == "ones":
        return float(n)
    if seq.family == "custom":
        return float(partial_sum_exact(seq, n))
    if seq.family == "linear":
        if n <= EXACT_SUM_LIMIT:
            num, den = _harmonic_exact(1, n)
            return num / den  # correctly rounded big-int division
        with mpmath.workdps(40):
            return float(mpmath.harmonic(n))
    # power: compensated summation, or zeta(a) - zeta(a, n+1) for huge n
    a = seq.alpha
    if a == 1.0:
        return _compute_partial_sum(WatermanSequence("linear"), n)
    if n <= DIRECT_SUM_LIMIT:
        import numpy as np

        return math.fsum((np.arange(1, n + 1, dtype=float) ** (-a)).tolist())
    with mpmath.workdps(40):
        return float(mpmath.zeta(a) - mpmath.zeta(a, n + 1))


def partial_sum(seq: WatermanSequence, r: float) -> float:
    """Lambda(r) = sum_{i <= floor(r)} 1/lambda_i as a float.

    The rational families are accumulated exactly and rounded once. Results
    are memoized; recomputation is idempotent so the lock only guards the
    dict write.
    """
    n = _floor_arg(r)
    cached = seq._cache.get(n)
    if cached is not None:
        return cached
    value = _compute_partial_sum(seq, n)
    with seq._lock:
        seq._cache[n] = value
    return value


def validate(seq: WatermanSequence, n_check: int) -> list[str]:
    """Violations of positivity, monotonicity and lambda_1 = 1 among the
    first ``n_check`` terms. Divergence is a construction-time assumption and
    is not checked."""
    if n_check < 1:
        raise SequenceError("n_check must be >= 1")
    out: list[str] = []
    if seq.family in ("ones", "linear", "power"):
        return out
    prev = None
    n = min(n_check, len(seq.prefix)) if seq.prefix else 0
    for i in range(1, n + 1):
        v = seq.prefix[i - 1]
        if v <= 0:
            out.append(f"positivity violation at i={i}: lambda_{i} = {v}")
        if i == 1 and v != 1:
            out.append(f"lambda_1 != 1 (got {v})")
        if prev is not None and v < prev:
            out.append(f"monotonicity violation at i={i}: {v} < {prev}")
        prev = v
    return out


def assumed_divergent(seq: WatermanSequence) -> str:
    """Provenance of the divergence property for reports."""
    if seq.family == "custom":
        return "assumed: constant tail extension makes sum 1/lambda_i diverge"
    return f"by construction ({seq.family} family)"


def sequence_from_terms(values: Sequence) -> WatermanSequence:
    """Unchecked custom sequence, mostly for tests and negative controls."""
    return WatermanSequence("custom", prefix=tuple(_as_fraction(v) for v in values))
