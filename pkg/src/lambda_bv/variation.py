"""p-Lambda-variation of piecewise functions.

Three routes are available and cross-checked against each other:

* :func:`brute_force_variation` enumerates every interval family on the
  candidate grid (the testing oracle);
* :func:`spike_exact` is exact for step functions whose excursions away from
  a common baseline are single constant pieces all on one side of it;
* :func:`variation_enclosure` works for anything and returns certified
  ``[lower, upper]`` bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .piecewise import (
    Interval,
    IntervalFamily,
    PiecewiseFunction,
    candidate_grid,
    evaluate,
    grid_is_exact,
    increment,
    oscillation,
    support_components,
    total_variation,
)
from .waterman import WatermanSequence, partial_sum

__all__ = [
    "VariationError",
    "NotSpikeClass",
    "VariationResult",
    "Enclosure",
    "pair_value",
    "family_value",
    "count_families",
    "brute_force_variation",
    "spike_structure",
    "spike_exact",
    "upper_bound",
    "variation_enclosure",
    "variation",
    "norm",
]

TOL = 1e-10
MAX_FAMILIES = 3_000_000
PAIRINGS = ("sorted", "given", "ascending")


class VariationError(ValueError):
    pass


class NotSpikeClass(VariationError):
    """The function is not a one-sided spike function; use the enclosure."""


@dataclass(frozen=True)
class VariationResult:
    lower: float
    upper: float
    family: IntervalFamily = field(default_factory=IntervalFamily, repr=False)
    method: str = "enclosure"
    note: str = ""

    @property
    def exact(self) -> bool:
        return self.upper - self.lower <= TOL

    def scaled(self, c: float) -> "VariationResult":
        c = abs(c)
        return VariationResult(c * self.lower, c * self.upper, self.family, self.method, self.note)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method,
            "family": self.family.as_strings(),
            "note": self.note,
        }


@dataclass(frozen=True)
class Enclosure:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise VariationError(f"empty enclosure [{self.lower}, {self.upper}]")

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lower + other.lower, self.upper + other.upper)

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


# -- pairing -----------------------------------------------------------------
def pair_value(magnitudes, seq: WatermanSequence, p: float, pairing: str = "sorted") -> float:
    """(sum_i t_i^p / lambda_i)^(1/p) for the magnitudes t paired with lambda.

    ``sorted`` pairs the largest magnitude with lambda_1 and so on, which is
    the optimal ordering because lambda is nondecreasing. ``given`` keeps the
    input order; ``ascending`` is the worst ordering and exists only for
    negative controls.
    """
    if p < 1:
        raise VariationError(f"p must be >= 1, got {p}")
    t = np.abs(np.asarray(magnitudes, dtype=float))
    if t.size == 0:
        return 0.0
    if pairing == "sorted":
        t = -np.sort(-t)
    elif pairing == "ascending":
        t = np.sort(t)
    elif pairing != "given":
        raise VariationError(f"unknown pairing {pairing!r}")
    w = seq.weights(t.size)
    return float(math.fsum((t**p * w).tolist()) ** (1.0 / p))


def family_value(f: PiecewiseFunction, fam: IntervalFamily, seq: WatermanSequence, p: float,
                 pairing: str = "sorted") -> float:
    return pair_value([increment(f, I) for I in fam], seq, p, pairing)


# -- exhaustive oracle ---------------------------------------------------------
@lru_cache(maxsize=None)
def count_families(n_points: int, max_intervals: int) -> int:
    """Number of families (empty one included) with endpoints on ``n_points``
    ordered grid points, pairwise disjoint interiors, at most ``max_intervals``
    members."""

    @lru_cache(maxsize=None)
    def rec(start: int, k: int) -> int:
        if k == 0:
            return 1
        total = 1
        for a in range(start, n_points):
            for b in range(a + 1, n_points):
                total += rec(b, k - 1)
        return total

    return rec(0, max_intervals)


@lru_cache(maxsize=16)
def _family_table(n_points: int, max_intervals: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays (starts, ends) of shape (n_families, max_intervals) in
    lexicographic order; unused slots hold -1 in both."""
    n = count_families(n_points, max_intervals)
    starts = np.full((n, max_intervals), -1, dtype=np.int32)
    ends = np.full((n, max_intervals), -1, dtype=np.int32)
    row = 0
    prefix: list[tuple[int, int]] = []

    def rec(start: int):
        nonlocal row
        for slot, (a, b) in enumerate(prefix):
            starts[row, slot] = a
            ends[row, slot] = b
        row += 1
        if len(prefix) == max_intervals:
            return
        for a in range(start, n_points):
            for b in range(a + 1, n_points):
                prefix.append((a, b))
                rec(b)
                prefix.pop()

    rec(0)
    assert row == n
    return starts, ends


def brute_force_variation(f: PiecewiseFunction, seq: WatermanSequence, p: float,
                          max_intervals: int | None = None, grid: Sequence | None = None,
                          max_families: int = MAX_FAMILIES) -> VariationResult:
    """Maximize over every interval family with endpoints on the grid.

    ``max_intervals=None`` allows ``len(grid) - 1`` members, which is every
    family the grid admits; the result is then exact whenever the candidate
    grid is (see :func:`lambda_bv.piecewise.grid_is_exact`).
    """
    if p < 1:
        raise VariationError(f"p must be >= 1, got {p}")
    pts = list(candidate_grid(f) if grid is None else [Fraction(x) for x in grid])
    G = len(pts)
    full = G - 1
    K = full if max_intervals is None else min(max_intervals, full)
    if K < 1:
        return VariationResult(0.0, 0.0, IntervalFamily(), "oracle", "single-point grid")
    n_fam = count_families(G, K)
    if n_fam > max_families:
        raise VariationError(
            f"grid of {G} points with up to {K} intervals has {n_fam} families "
            f"(limit {max_families}); refusing to enumerate"
        )
    starts, ends = _family_table(G, K)
    v = np.array([evaluate(f, x) for x in pts] + [0.0])  # index -1 -> padding
    mags = np.abs(v[ends] - v[starts]) ** p
    mags[starts < 0] = 0.0
    mags = -np.sort(-mags, axis=1)
    w = seq.weights(K)
    sums = mags @ w
    best = int(np.argmax(sums))
    fam = IntervalFamily(tuple(
        Interval(pts[a], pts[b]) for a, b in zip(starts[best], ends[best]) if a >= 0 and v[a] != v[b]
    ))  # zero increments add nothing and only clutter the witness
    value = family_value(f, fam, seq, p)
    exhaustive = K == full and (grid is not None or grid_is_exact(f))
    if exhaustive:
        return VariationResult(value, value, fam, "oracle",
                               f"exhaustive over {n_fam} families on a {G}-point grid")
    upper = _oscillation_bound(f, seq, p)
    return VariationResult(value, max(value, upper), fam, "oracle",
                           f"partial enumeration (<= {K} intervals); upper from oscillation bound")


# -- spike functions -------------------------------------------------------------
def _merged_pieces(f: PiecewiseFunction) -> tuple[Sequence[Fraction], np.ndarray]:
    xs, vs = f.breakpoints, np.asarray(f.values, dtype=float)
    keep = np.ones(len(vs), dtype=bool)
    keep[1:] = vs[1:] != vs[:-1]
    if keep.all():
        return xs, vs
    idx = np.flatnonzero(keep)
    return [xs[i] for i in idx] + [xs[-1]], vs[idx]


def spike_structure(f: PiecewiseFunction) -> tuple[float, np.ndarray, list[Fraction], np.ndarray]:
    """Baseline, excursion mask, merged breakpoints and merged values.

    Raises :class:`NotSpikeClass` unless f is a step function in which every
    excursion from the baseline is one constant piece and all excursions lie
    on the same side of the baseline.
    """
    if f.kind != "step":
        raise NotSpikeClass("spike methods need a step function")
    xs, vs = _merged_pieces(f)
    uniq, counts = np.unique(vs, return_counts=True)
    for beta in uniq[np.argsort(-counts, kind="stable")]:
        off = vs != beta
        if np.any(off[1:] & off[:-1]):
            continue
        d = vs[off] - beta
        if d.size and not (np.all(d > 0) or np.all(d < 0)):
            continue
        return float(beta), off, xs, vs
    raise NotSpikeClass("no baseline with single-piece, one-sided excursions")


def _spike_edges(f: PiecewiseFunction, with_pairs: bool = True):
    beta, off, xs, vs = spike_structure(f)
    m = len(vs)
    ks = np.flatnonzero(off)
    h = np.abs(vs[ks] - beta)
    has_rise = ks > 0
    has_fall = ks < m - 1
    mags = np.concatenate([h[has_rise], h[has_fall]])
    if not with_pairs:
        return mags, []

    def mid(k):
        return (xs[k] + xs[k + 1]) / 2

    pairs = [(mid(k - 1), mid(k)) for k in ks[has_rise]] + [(mid(k), mid(k + 1)) for k in ks[has_fall]]
    return mags, pairs


def spike_exact(f: PiecewiseFunction, seq: WatermanSequence, p: float, pairing: str = "sorted",
                witness: bool = True) -> VariationResult:
    """Exact variation of a one-sided spike function.

    Every edge (a jump into or out of an excursion) becomes its own interval.
    For one-sided excursions no interval can beat the largest edge it covers,
    and distinct intervals cover distinct edges, so this family is optimal.
    ``witness=False`` skips materializing that family for large inputs.
    """
    mags, pairs = _spike_edges(f, witness)
    value = pair_value(mags, seq, p, pairing)
    fam = IntervalFamily(tuple(Interval(a, b) for a, b in pairs)) if witness else IntervalFamily()
    return VariationResult(value, value, fam, "spike_exact", f"{len(mags)} edges")


def is_spike_class(f: PiecewiseFunction) -> bool:
    try:
        spike_structure(f)
    except NotSpikeClass:
        return False
    return True


# -- enclosure ---------------------------------------------------------------------
def _oscillation_bound(f: PiecewiseFunction, seq: WatermanSequence, p: float) -> float:
    """Omega * Lambda(ceil(TV / Omega))^(1/p).

    Any family has increments t_i <= Omega with sum t_i <= TV, and
    t^p <= Omega^(p-1) t on [0, Omega].
    """
    omega = oscillation(f)
    if omega == 0:
        return 0.0
    tv = total_variation(f)
    # ratio is an integer in exact arithmetic for equal-height spikes
    k = max(1, math.ceil(tv / omega * (1 - 1e-12)))
    return omega * partial_sum(seq, k) ** (1.0 / p)


def _grid_objective(vals: np.ndarray, state: list[tuple[int, int]], w: np.ndarray, p: float) -> float:
    if not state:
        return 0.0
    t = sorted((abs(vals[b] - vals[a]) ** p for a, b in state), reverse=True)
    return math.fsum(ti * wi for ti, wi in zip(t, w))


def _neighbours(state: list[tuple[int, int]], G: int, vals: np.ndarray):
    n = len(state)
    for i, (a, b) in enumerate(state):
        lo = state[i - 1][1] if i > 0 else 0
        hi = state[i + 1][0] if i + 1 < n else G - 1
        rest = state[:i] + state[i + 1 :]
        yield rest
        for a2 in range(lo, b):
            if a2 != a:
                yield state[:i] + [(a2, b)] + state[i + 1 :]
        for b2 in range(a + 1, hi + 1):
            if b2 != b:
                yield state[:i] + [(a, b2)] + state[i + 1 :]
        for c in range(a + 1, b):
            yield state[:i] + [(a, c), (c, b)] + state[i + 1 :]
        for j in range(i + 1, n):
            # collapse the run i..j into one interval
            yield state[:i] + [(a, state[j][1])] + state[j + 1 :]
    # a new interval in each gap: the largest increment that fits
    bounds = [0] + [x for ab in state for x in ab] + [G - 1]
    for g in range(0, len(bounds), 2):
        lo, hi = bounds[g], bounds[g + 1]
        if hi - lo < 1:
            continue
        seg = vals[lo : hi + 1]
        i_min, i_max = int(np.argmin(seg)), int(np.argmax(seg))
        if i_min == i_max:
            continue
        a, b = sorted((lo + i_min, lo + i_max))
        yield sorted(state + [(a, b)])


def _seeds(vals: np.ndarray) -> list[list[tuple[int, int]]]:
    G = len(vals)
    edges = [(i, i + 1) for i in range(G - 1) if vals[i + 1] != vals[i]]
    seeds = [edges]
    # maximal monotone runs
    runs: list[tuple[int, int]] = []
    start, direction = 0, 0
    for i in range(1, G):
        d = np.sign(vals[i] - vals[i - 1])
        if d == 0:
            continue
        if direction == 0:
            direction = d
        elif d != direction:
            runs.append((start, i - 1))
            start, direction = i - 1, d
    if direction != 0:
        runs.append((start, G - 1))
    seeds.append([r for r in runs if vals[r[1]] != vals[r[0]]])
    # greedy: repeatedly take the largest increment that still fits
    chosen: list[tuple[int, int]] = []
    cand = sorted(((abs(vals[b] - vals[a]), a, b) for a in range(G) for b in range(a + 1, G)),
                  key=lambda t: (-t[0], t[1], t[2]))
    for mag, a, b in cand:
        if mag == 0:
            break
        if all(b <= c or d <= a for c, d in chosen):
            chosen.append((a, b))
    seeds.append(sorted(chosen))
    return seeds


def _local_search(vals: np.ndarray, w: np.ndarray, p: float, effort: int) -> tuple[float, list[tuple[int, int]]]:
    G = len(vals)
    best_val, best_state = -1.0, []
    for seed in _seeds(vals):
        state = sorted(seed)
        cur = _grid_objective(vals, state, w, p)
        for _ in range(effort):
            improved = False
            for cand in _neighbours(state, G, vals):
                v = _grid_objective(vals, cand, w, p)
                if v > cur * (1 + 1e-15) + 1e-300:
                    cur, state, improved = v, cand, True
            if not improved:
                break
        if cur > best_val:
            best_val, best_state = cur, state
    return best_val, best_state


MAX_SUPPORT_PARTS = 64


def upper_bound(f: PiecewiseFunction, seq: WatermanSequence, p: float,
                components: Sequence[PiecewiseFunction] | None = None) -> tuple[float, str]:
    """Smallest available certified upper bound and the route that gave it.

    Routes: the oscillation bound; the exact spike value; and the triangle
    inequality over ``components`` (explicit parts summing to f, or the
    support components of a non-spike step function when there are few).
    """
    if oscillation(f) == 0:
        return 0.0, "constant"
    uppers = {"oscillation": _oscillation_bound(f, seq, p)}
    spike = f.kind == "step" and is_spike_class(f)
    if spike:
        uppers["spike_exact"] = spike_exact(f, seq, p, witness=False).upper
    if components is None and f.kind == "step" and not spike:
        parts = support_components(f)
        if 1 < len(parts) <= MAX_SUPPORT_PARTS:
            components = parts
    if components:
        uppers["components"] = math.fsum(upper_bound(part, seq, p)[0] for part in components)
    key = min(uppers, key=uppers.get)
    return uppers[key], key


def variation_enclosure(f: PiecewiseFunction, seq: WatermanSequence, p: float, effort: int = 25,
                        components: Sequence[PiecewiseFunction] | None = None,
                        pairing: str = "sorted", witness: bool = True) -> VariationResult:
    """Certified ``[lower, upper]`` for V_{Lambda,p}(f).

    The lower bound is an explicit family: the spike family when it applies,
    otherwise greedy seeds refined by local search on the candidate grid
    (``effort`` caps the improvement rounds per seed). The upper bound comes
    from :func:`upper_bound`.
    """
    if p < 1:
        raise VariationError(f"p must be >= 1, got {p}")
    if oscillation(f) == 0:
        return VariationResult(0.0, 0.0, IntervalFamily(), "enclosure", "constant function")

    if f.kind == "step" and is_spike_class(f):
        spike = spike_exact(f, seq, p, pairing=pairing, witness=witness)
        lower, fam = spike.lower, spike.family
        note = "spike family"
    else:
        pts = candidate_grid(f)
        vals = np.array([evaluate(f, x) for x in pts])
        _, state = _local_search(vals, seq.weights(len(pts)), p, effort)
        fam = IntervalFamily(tuple(Interval(pts[a], pts[b]) for a, b in state))
        lower = family_value(f, fam, seq, p, pairing=pairing)
        note = f"local search on {len(pts)}-point grid"

    upper, route = upper_bound(f, seq, p, components)
    return VariationResult(lower, max(upper, lower), fam, "enclosure", f"{note}; upper via {route}")


def variation(f: PiecewiseFunction, seq: WatermanSequence, p: float, method: str = "auto",
              max_intervals: int | None = None, **kwargs) -> VariationResult:
    """Dispatch: ``brute``, ``spike``, ``enclosure`` or ``auto``.

    ``auto`` uses the spike formula when it applies, the exhaustive oracle
    when the candidate grid is exact and small, and the enclosure otherwise.
    """
    if method == "brute":
        return brute_force_variation(f, seq, p, max_intervals=max_intervals)
    if method == "spike":
        return spike_exact(f, seq, p, witness=kwargs.get("witness", True))
    if method == "enclosure":
        return variation_enclosure(f, seq, p, **kwargs)
    if method != "auto":
        raise VariationError(f"unknown method {method!r}")
    if oscillation(f) == 0:
        return VariationResult(0.0, 0.0, IntervalFamily(), "enclosure", "constant function")
    if f.kind == "step" and is_spike_class(f):
        return spike_exact(f, seq, p, witness=kwargs.get("witness", True))
    G = len(candidate_grid(f))
    if grid_is_exact(f) and G <= 15:
        return brute_force_variation(f, seq, p)
    return variation_enclosure(f, seq, p, **kwargs)


def norm(f: PiecewiseFunction, seq: WatermanSequence, p: float, method: str = "auto", **kwargs) -> Enclosure:
    """||f||_{Lambda,p} = |f(0)| + V_{Lambda,p}(f) as an enclosure."""
    v = variation(f, seq, p, method=method, **kwargs)
    f0 = abs(evaluate(f, 0))
    return Enclosure(f0 + v.lower, f0 + v.upper)
