"""Independent reference values, written without the library's search code.

Step functions are right-continuous with f(1) equal to the last piece, so
every interval family is described by a nondecreasing chain of piece
indices. Linear functions are enumerated over breakpoints and piece
midpoints by plain recursion.
"""
from fractions import Fraction
from itertools import combinations_with_replacement


def sorted_value(incs, lam, p):
    mags = sorted((abs(d) ** p for d in incs), reverse=True)
    return sum(m / lam(i + 1) for i, m in enumerate(mags)) ** (1.0 / p)


def step_oracle(values, lam, p):
    """max over chains k_1 <= k'_1 <= k_2 <= ... of the sorted sum."""
    m = len(values)
    best = 0.0
    for t in range(1, m + 1):
        for chain in combinations_with_replacement(range(m), 2 * t):
            incs = [values[chain[2 * i + 1]] - values[chain[2 * i]] for i in range(t)]
            best = max(best, sorted_value(incs, lam, p))
    return best


def grid(breakpoints):
    xs = [Fraction(x) for x in breakpoints]
    out = []
    for a, b in zip(xs, xs[1:]):
        out += [a, (a + b) / 2]
    return out + [xs[-1]]


def families(n):
    """Every family of disjoint index pairs (a < b, b <= next a) on 0..n-1."""
    def rec(start):
        yield []
        for a in range(start, n):
            for b in range(a + 1, n):
                for rest in rec(b):
                    yield [(a, b)] + rest
    return rec(0)


def point_oracle(vals, lam, p):
    best = 0.0
    for fam in families(len(vals)):
        if fam:
            best = max(best, sorted_value([vals[b] - vals[a] for a, b in fam], lam, p))
    return best


def linear_at(breakpoints, values, x):
    xs = [Fraction(b) for b in breakpoints]
    for k in range(len(xs) - 1):
        if xs[k] <= x <= xs[k + 1]:
            t = float((x - xs[k]) / (xs[k + 1] - xs[k]))
            return values[k] + t * (values[k + 1] - values[k])
    raise ValueError(x)


def linear_oracle(breakpoints, values, lam, p):
    g = grid(breakpoints)
    return point_oracle([linear_at(breakpoints, values, x) for x in g], lam, p)
