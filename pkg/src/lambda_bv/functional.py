"""The bounded linear functional L_(n_k) and its witness values.

For a step or piecewise-linear f the functional is

    L(f) = f(J') + sum_j p(j) sum_{i=1}^{N_j - N_{j-1}} (-1)^i f(J_m) |h(J_m)| / lambda_m,
    m = N_{j-1} + i,  N_k = 2k,

where p(j) is +1 / -1 / 0 according to whether j is an odd-indexed,
even-indexed or absent member of the subsequence (n_k). Sums are truncated
at j_max and the remainder is bounded via Hoelder and the geometric decay of
the spike heights.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

from .piecewise import PiecewiseFunction, PiecewiseError, increment, scale_add
from .report import Check, bool_check, float_check
from .variation import spike_exact, variation
from .waterman import WatermanSequence, term
from .witness import (
    WitnessConfig,
    WitnessSystem,
    build_f_l,
    build_h,
    h_value,
    height,
    j_interval,
    j_prime,
    level_variation,
)

__all__ = [
    "SubsequenceSelector",
    "Term",
    "FunctionalValue",
    "block_start",
    "sign_pattern",
    "h_increment_closed_form",
    "h_variation_bounds",
    "evaluate_L",
    "hoelder_bound",
    "functional_norm_check",
    "witness_values",
    "breakdown_csv",
]

DEFAULT_J_MAX = 60
TOL = 1e-10


class SelectorError(ValueError):
    pass


@dataclass(frozen=True)
class SubsequenceSelector:
    """A strictly increasing sequence n_1 < n_2 < ... of positive integers."""

    rule: str = "identity"
    explicit: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rule not in ("identity", "evens", "list"):
            raise SelectorError(f"unknown selector rule {self.rule!r}")
        if self.rule == "list":
            xs = tuple(int(x) for x in self.explicit)
            if not xs or xs[0] < 1 or any(b <= a for a, b in zip(xs, xs[1:])):
                raise SelectorError(f"explicit selector must be strictly increasing positive integers: {xs}")
            object.__setattr__(self, "explicit", xs)

    @classmethod
    def parse(cls, text: str) -> "SubsequenceSelector":
        name, _, arg = text.partition(":")
        if name == "list":
            return cls("list", tuple(int(x) for x in arg.split(",") if x.strip()))
        return cls(name)

    @property
    def length(self) -> int | None:
        return len(self.explicit) if self.rule == "list" else None

    def n(self, k: int) -> int:
        if k < 1:
            raise SelectorError("subsequence index k starts at 1")
        if self.rule == "identity":
            return k
        if self.rule == "evens":
            return 2 * k
        if k > len(self.explicit):
            raise SelectorError(f"explicit selector has only {len(self.explicit)} terms")
        return self.explicit[k - 1]

    def index_of(self, j: int) -> int | None:
        if self.rule == "identity":
            return j
        if self.rule == "evens":
            return j // 2 if j % 2 == 0 else None
        try:
            return self.explicit.index(j) + 1
        except ValueError:
            return None

    def sign(self, j: int) -> int:
        return sign_pattern(self, j)

    def label(self) -> str:
        if self.rule == "list":
            return "list:" + ",".join(map(str, self.explicit))
        return self.rule


def sign_pattern(sel: SubsequenceSelector, j: int) -> int:
    """0 off the subsequence, +1 at n_k with k odd, -1 at n_k with k even."""
    if j < 1:
        raise SelectorError("j starts at 1")
    k = sel.index_of(j)
    if k is None:
        return 0
    return 1 if k % 2 == 1 else -1


def block_start(k: int) -> int:
    """N_k = 2k."""
    return 2 * k


@dataclass(frozen=True)
class Term:
    j: int
    i: int
    lam_index: int
    f_increment: float
    h_increment: float
    lam: float
    sign: int
    value: float


@dataclass
class FunctionalValue:
    value: float
    tail_radius: float
    terms_used: int
    f_J_prime: float
    breakdown: list[Term] = field(default_factory=list)

    @property
    def abs_term_sum(self) -> float:
        return math.fsum(abs(t.value) for t in self.breakdown)


def h_increment_closed_form(i: int, config: WitnessConfig) -> float:
    """|h(J_i)| = height at level ceil(i/2) + 1.

    Odd i: J_i runs from a level-(k+2) spike start to its end (k = (i-1)/2).
    Even i: J_i runs from the end of the last level-(k+2) spike to the start
    of the last level-(k+1) spike (k = i/2).
    """
    if i < 1:
        raise SelectorError("J indices start at 1")
    return height((i + 1) // 2 + 1, config.seq, config.q, config.height_scale)


def h_variation_bounds(config: WitnessConfig, h: PiecewiseFunction | None = None) -> dict:
    """Upper bounds for V_{Lambda,q}(h truncated at n_max) and the tail.

    ``exact`` is the spike formula on the materialized h; ``per_level`` is
    the triangle-inequality sum of the exact level variations.
    """
    if h is None:
        h, _ = build_h(config)
    exact = spike_exact(h, config.seq, config.q, witness=False).upper
    per_level = math.fsum(level_variation(n, config.seq, config.q, config.height_scale)
                          for n in range(2, config.n_max + 1))
    return {"exact": exact, "per_level": per_level, "upper": min(exact, per_level),
            "tail": math.ldexp(1.0, -config.n_max)}


def _tail_majorant(j_max: int, q: float, scale: float = 1.0) -> float:
    """(sum_{k > K} 2 * 2^{-kq})^{1/q} with K = j_max + 1, scaled heights."""
    K = j_max + 1
    s = 2.0 * 2.0 ** (-(K + 1) * q) / (1.0 - 2.0 ** (-q))
    return scale * s ** (1.0 / q)


def evaluate_L(sel: SubsequenceSelector, f: PiecewiseFunction, system: WitnessSystem | WitnessConfig,
               j_max: int = DEFAULT_J_MAX, v_f_upper: float | None = None,
               order: str = "forward") -> FunctionalValue:
    """Truncated L_(n_k)(f) with a certified bound on the omitted tail."""
    config = system.config if isinstance(system, WitnessSystem) else system
    if j_max < 1:
        raise SelectorError("j_max must be >= 1")
    seq = config.seq
    try:
        fJp = increment(f, j_prime())
    except PiecewiseError as exc:
        raise SelectorError(f"f cannot be evaluated on J': {exc}") from exc

    terms: list[Term] = []
    for j in range(1, j_max + 1):
        sgn = sign_pattern(sel, j)
        if sgn == 0:
            continue
        width = block_start(j) - block_start(j - 1)
        assert width == 2
        for i in range(1, width + 1):
            m = block_start(j - 1) + i
            J = j_interval(m)
            f_inc = increment(f, J)
            h_inc = _h_abs_increment(config, m)
            lam = float(term(seq, m))
            val = sgn * (-1) ** i * f_inc * h_inc / lam
            terms.append(Term(j, i, m, f_inc, h_inc, lam, sgn, val))

    seq_terms = terms if order == "forward" else list(reversed(terms))
    total = fJp
    for t in seq_terms:
        total += t.value

    if v_f_upper is None:
        v_f_upper = variation(f, seq, config.p).upper
    tail = v_f_upper * _tail_majorant(j_max, config.q, config.height_scale)
    return FunctionalValue(total, tail, len(terms), fJp, terms)


def _h_abs_increment(config: WitnessConfig, m: int) -> float:
    J = j_interval(m)
    c = config
    return abs(h_value(J.b, c.seq, c.q, scale=c.height_scale) - h_value(J.a, c.seq, c.q, scale=c.height_scale))


def hoelder_bound(f: PiecewiseFunction, system: WitnessSystem | WitnessConfig, seq: WatermanSequence | None = None,
                  p: float | None = None, v_f_upper: float | None = None, h_bounds: dict | None = None) -> float:
    """upper V_{Lambda,p}(f) * min(1, upper V_{Lambda,q}(h) + tail)."""
    config = system.config if isinstance(system, WitnessSystem) else system
    seq = seq or config.seq
    p = p or config.p
    if v_f_upper is None:
        v_f_upper = variation(f, seq, p).upper
    hb = h_bounds or h_variation_bounds(config, system.h if isinstance(system, WitnessSystem) else None)
    return v_f_upper * min(1.0, hb["upper"] + hb["tail"])


def functional_norm_check(sel: SubsequenceSelector, f: PiecewiseFunction, system: WitnessSystem | WitnessConfig,
                          j_max: int = DEFAULT_J_MAX, h_bounds: dict | None = None, name: str = "") -> list[Check]:
    """|L(f)| + tail <= ||f|| (1 + ||h||), plus Hoelder domination of the
    absolute term sum."""
    config = system.config if isinstance(system, WitnessSystem) else system
    v = variation(f, config.seq, config.p)
    f_norm = abs(f(0)) + v.upper
    hb = h_bounds or h_variation_bounds(config, system.h if isinstance(system, WitnessSystem) else None)
    h_norm = hb["upper"] + hb["tail"]
    L = evaluate_L(sel, f, config, j_max, v_f_upper=v.upper)
    label = name or "f"
    checks = [
        float_check(f"|L({label})| + tail <= ||f||(1 + ||h||)", abs(L.value) + L.tail_radius,
                    f_norm * (1.0 + h_norm), "<="),
        float_check(f"sum |terms of L({label})| <= V_p(f) V_q(h)", L.abs_term_sum,
                    hoelder_bound(f, config, v_f_upper=v.upper, h_bounds=hb), "<="),
    ]
    if h_norm > 1:
        checks.append(float_check("||h|| upper estimate <= 1 (bound-2 premise)", h_norm, 1.0, "<="))
    return checks


def closed_form_witness(l: int, sign: int, config: WitnessConfig) -> float:
    """p(l) (1 + sum_{i=1,2} |h(J_{N_{l-1}+i})| / lambda_{N_{l-1}+i})."""
    s = 0.0
    for i in (1, 2):
        m = block_start(l - 1) + i
        s += h_increment_closed_form(m, config) / float(term(config.seq, m))
    return sign * (1.0 + s)


def witness_values(sel: SubsequenceSelector, system: WitnessSystem | WitnessConfig, s_max: int,
                   j_max: int | None = None) -> list[tuple[FunctionalValue, list[Check]]]:
    """L(f_{n_s}) for s = 1..s_max with the sign, margin and closed-form checks."""
    config = system.config if isinstance(system, WitnessSystem) else system
    if sel.length is not None and s_max > sel.length:
        raise SelectorError(f"selector has {sel.length} terms, s_max = {s_max}")
    out = []
    for s in range(1, s_max + 1):
        l = sel.n(s)
        expected = 1 if s % 2 == 1 else -1
        f = build_f_l(l, sel)
        jm = max(j_max or DEFAULT_J_MAX, l + 1)
        L = evaluate_L(sel, f, config, jm)
        closed = closed_form_witness(l, sel.sign(l), config)
        # the excess over 1, summed directly rather than as (1 + x) - 1
        excess = math.fsum(t.value for t in L.breakdown) * expected
        checks = [
            bool_check(f"sign p(n_{s}) = (-1)^(s+1), s={s}", sel.sign(l) == expected, lhs=sel.sign(l), rhs=expected),
            float_check(f"(-1)^(s+1) L(f_{l}) > 1, s={s}", expected * L.value, 1.0, ">", radius=L.tail_radius,
                        note=f"excess over 1 = {excess:.6e}; tail radius {L.tail_radius:.2e}"),
            float_check(f"L(f_{l}) matches closed form, s={s}", L.value, closed, "==", tol=TOL),
            bool_check(f"f_{l}(J_m) = 0 off block {l}, s={s}",
                       all(t.f_increment == 0.0 for t in L.breakdown if t.j != l),
                       lhs=sum(1 for t in L.breakdown if t.j != l and t.f_increment != 0.0), rhs=0),
        ]
        out.append((L, checks))
    return out


def breakdown_csv(L: FunctionalValue) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["j", "i", "lambda_index", "f_increment", "h_abs_increment", "signed_term"])
    for t in L.breakdown:
        w.writerow([t.j, t.i, t.lam_index, repr(t.f_increment), repr(t.h_increment), repr(t.value)])
    return buf.getvalue()
