"""The non-reflexivity witness: spike function h, points r_i, intervals J_i,
the interval J' and the tent functions f_l, all on an exact rational grid.

Level n >= 2 of h carries (M_n - 2)/2 spikes of width 2^{-4n}, where
M_n = 2^{3n-1}, starting at 2^{-n}; spike j occupies [b_{n,j}, c_{n,j}) and
has height 2^{-n} Lambda(M_n)^{-1/q}. Levels live in [2^{-n}, 1.5 * 2^{-n})
so they never meet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .piecewise import Interval, PiecewiseFunction, evaluate, linear, step
from .report import Check, bool_check, exact_check
from .waterman import WatermanSequence, make_sequence, partial_sum

__all__ = [
    "WitnessError",
    "WitnessConfig",
    "WitnessSystem",
    "level_capacity",
    "spikes_per_level",
    "grid_points",
    "height",
    "level_variation",
    "h_value",
    "build_h",
    "r_point",
    "r_sequence",
    "j_interval",
    "j_intervals",
    "j_prime",
    "bridging_values",
    "build_f_l",
    "build_system",
    "check_geometry",
]

J_PRIME_LEFT = Fraction(3, 8)
J_PRIME_RIGHT = Fraction(3, 8) + Fraction(1, 2**8)


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessConfig:
    n_max: int = 6
    p: float = 2.0
    seq: WatermanSequence = field(default_factory=lambda: make_sequence("ones"))
    depth_r: int | None = None
    # negative controls only: multiplies every spike height
    height_scale: float = 1.0

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise WitnessError(f"n_max must be an integer >= 2 (h_1 is zero), got {self.n_max}")
        if not self.p > 1:
            raise WitnessError(f"p must exceed 1, got {self.p}")
        if self.depth_r is not None and self.depth_r < 2:
            raise WitnessError("depth_r must be >= 2")
        if abs(1 / self.p + 1 / self.q - 1) > 1e-14:
            raise WitnessError("conjugate exponent drifted")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1)

    @property
    def r_depth(self) -> int:
        return self.depth_r if self.depth_r is not None else 2 * (self.n_max - 1)

    def describe(self) -> dict:
        return {"n_max": self.n_max, "p": self.p, "q": self.q, "sequence": self.seq.describe(),
                "depth_r": self.r_depth, "height_scale": self.height_scale}


# -- grid ----------------------------------------------------------------------
def level_capacity(n: int) -> int:
    """M_n = 2^{3n-1}."""
    if n < 2:
        raise WitnessError(f"levels start at 2, got {n}")
    return 2 ** (3 * n - 1)


def spikes_per_level(n: int) -> int:
    return (level_capacity(n) - 2) // 2


def grid_points(n: int, j: int) -> tuple[Fraction, Fraction]:
    """(b_{n,j}, c_{n,j}) = 2^{-n} + ((2j-2), (2j-1)) / 2^{4n}."""
    last = spikes_per_level(n)
    if not 1 <= j <= last:
        raise WitnessError(f"j = {j} outside 1..{last} for level {n}")
    base = Fraction(1, 2**n)
    den = 2 ** (4 * n)
    return base + Fraction(2 * j - 2, den), base + Fraction(2 * j - 1, den)


@lru_cache(maxsize=None)
def height(n: int, seq: WatermanSequence, q: float, scale: float = 1.0) -> float:
    """Spike height at level n: 2^{-n} Lambda(M_n)^{-1/q} (0 for n = 1)."""
    if n == 1:
        return 0.0
    lam = partial_sum(seq, level_capacity(n))
    return scale * math.ldexp(1.0, -n) * lam ** (-1.0 / q)


@lru_cache(maxsize=None)
def level_variation(n: int, seq: WatermanSequence, q: float, scale: float = 1.0) -> float:
    """Exact V_{Lambda,q}(h_n): M_n - 2 equal edges paired with lambda_1..."""
    if n == 1:
        return 0.0
    return height(n, seq, q, scale) * partial_sum(seq, level_capacity(n) - 2) ** (1.0 / q)


def _level_of(x: Fraction) -> int:
    """n with 2^{-n} <= x < 2^{-n+1} for 0 < x <= 1."""
    n = 0
    while Fraction(1, 2**n) > x:
        n += 1
    return max(n, 1) if x < 1 else 1


def h_value(x, seq: WatermanSequence, q: float, n_max: int | None = None, scale: float = 1.0) -> float:
    """Pointwise value of h (untruncated unless ``n_max`` is given)."""
    x = Fraction(x)
    if x <= 0:
        return 0.0
    n = _level_of(x)
    if n < 2 or (n_max is not None and n > n_max):
        return 0.0
    off = (x - Fraction(1, 2**n)) * 2 ** (4 * n)
    k = math.floor(off)
    if k % 2 == 1 or k // 2 + 1 > spikes_per_level(n):
        return 0.0
    return height(n, seq, q, scale)


@lru_cache(maxsize=8)
def _h_geometry(n_max: int) -> tuple[tuple[Fraction, ...], tuple[int, ...]]:
    """Breakpoints of h truncated at n_max and the level of each piece (0 = gap)."""
    xs = [Fraction(0)]
    levels = [0]
    for n in range(n_max, 1, -1):
        den = 2 ** (4 * n)
        start = 2 ** (3 * n)  # 2^{-n} in units of 2^{-4n}
        for j in range(1, spikes_per_level(n) + 1):
            xs.append(Fraction(start + 2 * j - 2, den))
            levels.append(n)
            xs.append(Fraction(start + 2 * j - 1, den))
            levels.append(0)
    xs.append(Fraction(1))
    return tuple(xs), tuple(levels)


def build_h(config: WitnessConfig) -> tuple[PiecewiseFunction, dict[int, float]]:
    """h truncated at n_max as a step function, plus the per-level heights."""
    xs, levels = _h_geometry(config.n_max)
    heights = {n: height(n, config.seq, config.q, config.height_scale) for n in range(2, config.n_max + 1)}
    heights_by_level = {0: 0.0, **heights}
    vals = tuple(heights_by_level[lv] for lv in levels)
    return PiecewiseFunction("step", xs, vals), heights


def h_levels(config: WitnessConfig) -> list[PiecewiseFunction]:
    """h_2, ..., h_{n_max} as separate step functions (they sum to h)."""
    out = []
    for n in range(2, config.n_max + 1):
        xs = [Fraction(0)]
        vals = [0.0]
        hn = height(n, config.seq, config.q, config.height_scale)
        for j in range(1, spikes_per_level(n) + 1):
            b, c = grid_points(n, j)
            xs += [b, c]
            vals += [hn, 0.0]
        xs.append(Fraction(1))
        out.append(step(xs, vals))
    return out


# -- r, J, J' ----------------------------------------------------------------------
def r_point(i: int) -> Fraction:
    """r_{2k} = c_{k+2, last}, r_{2k+1} = b_{k+2, last}."""
    if i < 0:
        raise WitnessError("r index must be >= 0")
    k, odd = divmod(i, 2)
    n = k + 2
    b, c = grid_points(n, spikes_per_level(n))
    return b if odd else c


def r_sequence(count: int) -> list[Fraction]:
    return [r_point(i) for i in range(count)]


def j_interval(i: int) -> Interval:
    """J_i = [r_i, r_{i-1}] for i >= 1."""
    if i < 1:
        raise WitnessError("J indices start at 1")
    return Interval(r_point(i), r_point(i - 1))


def j_intervals(count: int) -> list[Interval]:
    return [j_interval(i) for i in range(1, count + 1)]


def j_prime() -> Interval:
    """J' taken closed, [3/8, 3/8 + 2^{-8}]."""
    return Interval(J_PRIME_LEFT, J_PRIME_RIGHT)


def bridging_values(n: int) -> tuple[Fraction, Fraction, Fraction]:
    """(c_{n+1, last} from the grid, the closed form, and 2^{-n})."""
    c_grid = grid_points(n + 1, spikes_per_level(n + 1))[1]
    closed = Fraction(2 ** (3 * n + 3) + 2 ** (3 * n + 2) - 3, 2 ** (4 * n + 4))
    return c_grid, closed, Fraction(1, 2**n)


def _sign_of(signs, l: int) -> int:
    if isinstance(signs, int):
        return signs
    return signs.sign(l)


def build_f_l(l: int, signs, depth: int | None = None) -> PiecewiseFunction:
    """Tent on [r_{2l}, r_{2l-2}] peaking at r_{2l-1} with value 1, plus a
    plateau of value p(l) on (3/8, 3/8 + 2^{-8}].

    ``signs`` is a selector with ``.sign(j)`` or a plain int in {-1, 0, 1}.
    ``depth`` (number of built r points) guards against running past the
    materialized sequence.
    """
    if l < 1:
        raise WitnessError("tent index starts at 1")
    if depth is not None and 2 * l >= depth:
        raise WitnessError(f"f_{l} needs r_{2 * l} but only {depth} r points are built")
    s = float(_sign_of(signs, l))
    r_lo, r_peak, r_hi = r_point(2 * l), r_point(2 * l - 1), r_point(2 * l - 2)
    xs = [Fraction(0), r_lo, r_peak, r_hi, J_PRIME_LEFT, J_PRIME_RIGHT, Fraction(1)]
    at = [0.0, 0.0, 1.0, 0.0, 0.0, s, 0.0]
    pieces = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (0.0, 0.0), (s, s), (0.0, 0.0)]
    return linear(xs, at, pieces)


# -- bundle ------------------------------------------------------------------------
@dataclass(frozen=True)
class WitnessSystem:
    config: WitnessConfig
    h: PiecewiseFunction
    heights: dict
    r: tuple[Fraction, ...]
    J: tuple[Interval, ...]
    J_prime: Interval
    h_tail_bound: float

    def f(self, l: int, signs) -> PiecewiseFunction:
        return build_f_l(l, signs)

    def height(self, n: int) -> float:
        c = self.config
        return height(n, c.seq, c.q, c.height_scale)

    def h_abs_increment(self, i: int) -> float:
        """|h(J_i)| by direct pointwise evaluation of the untruncated h."""
        c = self.config
        I = j_interval(i)
        return abs(h_value(I.b, c.seq, c.q, scale=c.height_scale) - h_value(I.a, c.seq, c.q, scale=c.height_scale))

    def to_dict(self) -> dict:
        return {
            "config": self.config.describe(),
            "h": self.h.to_dict(),
            "heights": {str(n): v for n, v in self.heights.items()},
            "r": [str(x) for x in self.r],
            "J": [I.as_strings() for I in self.J],
            "J_prime": self.J_prime.as_strings(),
            "J_prime_convention": "closed [3/8, 3/8+2^-8] for increments; tent plateau on (3/8, 3/8+2^-8]",
            "h_tail_bound": self.h_tail_bound,
        }


def build_system(config: WitnessConfig) -> WitnessSystem:
    h, heights = build_h(config)
    depth = config.r_depth
    r = tuple(r_sequence(depth))
    J = tuple(Interval(r[i], r[i - 1]) for i in range(1, depth))
    return WitnessSystem(config, h, heights, r, J, j_prime(), math.ldexp(1.0, -config.n_max))


def check_geometry(config: WitnessConfig, r: list[Fraction] | None = None, signs=1,
                   bridge_levels: range | None = None) -> list[Check]:
    """Exact geometric facts the proof relies on.

    ``r`` overrides the generated points (negative controls feed shuffled
    lists here).
    """
    checks: list[Check] = []
    pts = list(r) if r is not None else r_sequence(config.r_depth)

    bad = [i for i in range(1, len(pts)) if not pts[i] < pts[i - 1]]
    checks.append(bool_check(f"r strictly decreasing ({len(pts)} terms)", not bad,
                             f"violations at i={bad[:5]}" if bad else "exact", lhs=len(bad), rhs=0))
    checks.append(exact_check("r_0 < 3/8 (J' clear of every J_i)", pts[0], J_PRIME_LEFT, "<"))
    checks.append(exact_check("r_0 = c_{2,15} = 93/256", pts[0], Fraction(93, 256), "=="))

    ok = all(pts[2 * k] <= Fraction(1, 2 ** (k + 1)) for k in range((len(pts) + 1) // 2))
    checks.append(bool_check("r_{2k} <= 2^{-(k+1)} (convergence to 0)", ok))

    for n in bridge_levels or range(2, max(config.n_max, 3)):
        c_grid, closed, bound = bridging_values(n)
        checks.append(exact_check(f"bridging closed form n={n}", c_grid, closed, "=="))
        checks.append(exact_check(f"bridging c_(n+1,last) <= 2^-n, n={n}", closed, bound, "<="))

    for n in range(3, config.n_max + 1):
        last_c = grid_points(n, spikes_per_level(n))[1]
        checks.append(exact_check(f"level {n} support ends before level {n - 1}", last_c, Fraction(1, 2 ** (n - 1)), "<"))

    # J_i adjacent and interior-disjoint; J' disjoint from their union
    J = [(pts[i], pts[i - 1]) for i in range(1, len(pts))]
    overlap = [i + 1 for i in range(len(J) - 1) if J[i + 1][1] > J[i][0]]
    checks.append(bool_check("J_i pairwise interior-disjoint", not overlap, f"overlaps at {overlap[:5]}"))
    touching = [i + 1 for i, (a, b) in enumerate(J) if not (b <= J_PRIME_LEFT or a >= J_PRIME_RIGHT)]
    checks.append(bool_check("J' interior-disjoint from every J_i", not touching, f"hits {touching[:5]}"))

    # f_l(J_{2j}) = 0 for j != l
    n_tent = max(1, (len(pts) - 1) // 2)
    vanish_ok = True
    for l in range(1, n_tent + 1):
        f = build_f_l(l, signs)
        for j in range(1, n_tent + 1):
            if j == l:
                continue
            I = j_interval(2 * j)
            if evaluate(f, I.b) - evaluate(f, I.a) != 0.0:
                vanish_ok = False
    checks.append(bool_check(f"f_l(J_(2j)) = 0 for j != l (l, j <= {n_tent})", vanish_ok))
    return checks
