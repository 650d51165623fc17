"""End-to-end proof verification, parameter sweeps and oracle fuzzing."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import functional as fn
from . import piecewise as pw
from . import variation as var
from . import waterman as wm
from . import witness as wt
from .report import Check, VerificationReport, bool_check, float_check

__all__ = [
    "ConfigError",
    "FuzzViolation",
    "FuzzStats",
    "default_config",
    "thread_count",
    "random_step",
    "random_linear",
    "random_spike",
    "verify_proof",
    "sweep",
    "fuzz_oracle",
]

TOL = 1e-10


class ConfigError(ValueError):
    pass


def thread_count() -> int:
    raw = os.environ.get("LAMBDA_BV_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"LAMBDA_BV_THREADS must be an integer, got {raw!r}") from None
    return min(8, os.cpu_count() or 1)


def _pmap(func: Callable, items: Sequence, threads: int | None = None) -> list:
    """Order-preserving map; results never depend on the thread count."""
    threads = threads or thread_count()
    if threads <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(func, items))


def default_config() -> tuple[wt.WitnessConfig, fn.SubsequenceSelector, int]:
    return wt.WitnessConfig(n_max=6, p=2.0, seq=wm.make_sequence("ones")), fn.SubsequenceSelector("identity"), 8


# -- random functions ----------------------------------------------------------
def _random_breakpoints(rng: random.Random, pieces: int, pool: Sequence[Fraction] = ()) -> list[Fraction]:
    cand: set[Fraction] = set()
    while len(cand) < pieces - 1:
        if pool and rng.random() < 0.5:
            cand.add(rng.choice(pool))
        else:
            cand.add(Fraction(rng.randint(1, 1023), 1024))
    return [Fraction(0)] + sorted(cand) + [Fraction(1)]


def _random_value(rng: random.Random) -> float:
    return round(rng.uniform(-2.0, 2.0), 3)


def random_step(rng: random.Random, max_pieces: int = 6, pool: Sequence[Fraction] = ()) -> pw.PiecewiseFunction:
    m = rng.randint(1, max_pieces)
    xs = _random_breakpoints(rng, m, pool)
    return pw.step(xs, [_random_value(rng) for _ in range(m)])


def random_linear(rng: random.Random, max_pieces: int = 6, pool: Sequence[Fraction] = ()) -> pw.PiecewiseFunction:
    m = rng.randint(1, max_pieces)
    xs = _random_breakpoints(rng, m, pool)
    return pw.linear(xs, [_random_value(rng) for _ in range(m + 1)])


def random_spike(rng: random.Random, max_pieces: int = 6) -> pw.PiecewiseFunction:
    """Baseline with single-piece excursions all on one side of it."""
    m = rng.randint(1, max_pieces)
    xs = _random_breakpoints(rng, m)
    beta = _random_value(rng)
    side = rng.choice((-1, 1))
    vals, prev_off = [], False
    for _ in range(m):
        if not prev_off and rng.random() < 0.6:
            vals.append(beta + side * round(rng.uniform(0.05, 2.0), 3))
            prev_off = True
        else:
            vals.append(beta)
            prev_off = False
    return pw.step(xs, vals)


def random_sequence(rng: random.Random) -> wm.WatermanSequence:
    kind = rng.choice(["ones", "linear", "power", "custom"])
    if kind == "power":
        return wm.make_sequence("power", alpha=rng.choice([0.25, 0.5, 0.75]))
    if kind == "custom":
        prefix = [1]
        for _ in range(rng.randint(0, 5)):
            prefix.append(prefix[-1] + rng.choice([0, 0.5, 1, 2]))
        return wm.make_sequence("custom", prefix=[str(Fraction(x)) for x in prefix])
    return wm.make_sequence(kind)


# -- verify ------------------------------------------------------------------------
def _required_depth(sel: fn.SubsequenceSelector, s_max: int) -> int:
    return 2 * max(sel.n(s) for s in range(1, s_max + 1)) + 1


def verify_proof(config: wt.WitnessConfig | None = None, sel: fn.SubsequenceSelector | None = None,
                 s_max: int | None = None, seed: int = 0, n_random: int = 20, n_linearity: int = 10,
                 r_override: Sequence[Fraction] | None = None) -> VerificationReport:
    """Run every checkable step of the non-reflexivity argument for one config."""
    d_config, d_sel, d_s = default_config()
    config = config or d_config
    sel = sel or d_sel
    s_max = d_s if s_max is None else s_max
    if s_max < 1:
        raise ConfigError("s_max must be >= 1")
    if sel.length is not None and s_max > sel.length:
        raise ConfigError(f"selector {sel.label()} has {sel.length} terms but s_max = {s_max}")
    need = _required_depth(sel, s_max)
    if config.depth_r is not None and config.depth_r < need:
        raise ConfigError(f"depth_r = {config.depth_r} but f_(n_{s_max}) needs {need} r points")
    depth = max(config.r_depth, need)

    t0 = time.perf_counter()
    report = VerificationReport(config={**config.describe(), "selector": sel.label(), "s_max": s_max,
                                        "seed": seed, "r_points_checked": depth})
    seq, p, q = config.seq, config.p, config.q

    # 1. sequence
    problems = wm.validate(seq, 1000)
    report.add(bool_check("Waterman sequence valid on first 1000 terms", not problems, "; ".join(problems[:3]),
                          lhs=len(problems), rhs=0))
    report.add(bool_check("divergence of sum 1/lambda_i", True, wm.assumed_divergent(seq)))

    # 2. geometry
    pts = list(r_override) if r_override is not None else wt.r_sequence(depth)
    report.extend(wt.check_geometry(config, r=pts, signs=sel))

    # 3. V_q(h) <= 1
    h, _ = wt.build_h(config)
    hb = fn.h_variation_bounds(config, h)
    report.add(float_check("V_q(h truncated) exact <= sum of level variations", hb["exact"], hb["per_level"], "<=",
                           tol=1e-12))
    report.add(float_check(f"V_q(h) <= V_q(h_<= {config.n_max}) + 2^-{config.n_max} <= 1",
                           hb["upper"] + hb["tail"], 1.0, "<=",
                           note=f"truncated upper {hb['upper']:.12g}, tail {hb['tail']:.3g}"))
    for i in range(1, min(2 * config.n_max - 2, depth - 1) + 1):
        direct = abs(pw.increment(h, wt.j_interval(i)))
        report.add(float_check(f"|h(J_{i})| closed form = direct", fn.h_increment_closed_form(i, config), direct,
                               "==", tol=1e-12))

    # 4. tent norms
    bound6 = 6.0 ** (1.0 / p)
    tents = {}
    for s in range(1, s_max + 1):
        l = sel.n(s)
        f = wt.build_f_l(l, sel)
        tents[l] = f
        nrm = var.norm(f, seq, p)
        report.add(float_check(f"||f_{l}||_(Lambda,p) <= 6^(1/p)", nrm.upper, bound6, "<=",
                               note=f"attained {nrm.lower:.12g}; plateau sign {sel.sign(l)}"))

    # 5. functional bounds on tents and random functions
    rng = random.Random(seed)
    pool = pts[: min(len(pts), 12)] + [wt.J_PRIME_LEFT, wt.J_PRIME_RIGHT]
    samples = [(f"f_{l}", f) for l, f in tents.items()]
    for k in range(n_random):
        maker = random_step if k % 2 == 0 else random_linear
        samples.append((f"random#{k}", maker(rng, 6, pool)))
    for name, f in samples:
        report.extend(fn.functional_norm_check(sel, f, config, h_bounds=hb, name=name))

    # 6. linearity
    for k in range(n_linearity):
        f, g = random_step(rng, 6, pool), random_linear(rng, 6, pool)
        alpha = round(rng.uniform(-3, 3), 3)
        Lf = fn.evaluate_L(sel, f, config)
        Lg = fn.evaluate_L(sel, g, config)
        Lc = fn.evaluate_L(sel, pw.scale_add(alpha, f, g), config)
        radius = Lc.tail_radius + abs(alpha) * Lf.tail_radius + Lg.tail_radius
        report.add(float_check(f"linearity #{k}: L(af+g) = aL(f) + L(g)", Lc.value, alpha * Lf.value + Lg.value,
                               "==", radius=radius))

    # 7. alternation
    for L, checks in fn.witness_values(sel, config, s_max):
        report.extend(checks)

    report.wall_time = time.perf_counter() - t0
    return report


# -- sweep -------------------------------------------------------------------------
SWEEP_COLUMNS = ["sequence", "p", "levels", "selector", "V_h_upper", "V_h_tail", "f1_norm_upper", "bound_6",
                 "status", "error"]


def _sweep_row(combo, s_max: int) -> dict:
    seq_text, p, levels, sel_text = combo
    row = {"sequence": seq_text, "p": p, "levels": levels, "selector": sel_text}
    try:
        seq = wm.parse_sequence(seq_text)
        sel = fn.SubsequenceSelector.parse(sel_text)
        config = wt.WitnessConfig(n_max=int(levels), p=float(p), seq=seq)
        hb = fn.h_variation_bounds(config)
        row["V_h_upper"] = hb["upper"]
        row["V_h_tail"] = hb["tail"]
        row["f1_norm_upper"] = var.norm(wt.build_f_l(sel.n(1), sel), seq, config.p).upper
        row["bound_6"] = 6.0 ** (1.0 / config.p)
        n_s = s_max if sel.length is None else min(s_max, sel.length)
        ok = hb["upper"] + hb["tail"] <= 1.0 + TOL
        for s, (L, checks) in enumerate(fn.witness_values(sel, config, n_s), start=1):
            row[f"L_f{s}"] = L.value
            row[f"margin_f{s}"] = (1 if s % 2 else -1) * L.value - 1.0
            ok = ok and all(c.passed for c in checks)
        row["status"] = "pass" if ok else "fail"
        row["error"] = ""
    except Exception as exc:  # recorded per row; the sweep continues
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(sequences: Sequence[str], ps: Sequence[float], levels: Sequence[int],
          selectors: Sequence[str] = ("identity",), s_max: int = 4, threads: int | None = None) -> list[dict]:
    combos = [(s, p, n, sel) for s in sequences for p in ps for n in levels for sel in selectors]
    if not combos:
        raise ConfigError("sweep grid is empty")
    return _pmap(lambda c: _sweep_row(c, s_max), combos, threads)


def sweep_from_grid(grid: dict, threads: int | None = None) -> list[dict]:
    return sweep(grid.get("sequences", ["ones"]), grid.get("p", [2.0]), grid.get("levels", [6]),
                 grid.get("selectors", ["identity"]), int(grid.get("s_max", 4)), threads)


def rows_to_csv(rows: list[dict]) -> str:
    extra = sorted({k for r in rows for k in r} - set(SWEEP_COLUMNS),
                   key=lambda k: (k.split("_f")[0], int(k.rsplit("f", 1)[1])))
    cols = SWEEP_COLUMNS[:4] + SWEEP_COLUMNS[4:-2] + extra + SWEEP_COLUMNS[-2:]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", restval="")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# -- fuzz --------------------------------------------------------------------------
class FuzzViolation(AssertionError):
    def __init__(self, reproducer: dict):
        self.reproducer = reproducer
        super().__init__(f"property {reproducer['property']!r} violated: {json.dumps(reproducer)}")


@dataclass
class FuzzStats:
    seed: int
    cases: int
    violations: int = 0
    max_deviation: float = 0.0
    spike_cases: int = 0
    property_checks: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {"seed": self.seed, "cases": self.cases, "violations": self.violations,
                "max_deviation": self.max_deviation, "spike_cases": self.spike_cases,
                "property_checks": self.property_checks, "wall_time": self.wall_time}


def _case(seed: int, index: int, max_pieces: int, fault: str | None) -> dict:
    """One fuzz case; returns deviations per property or a reproducer."""
    rng = random.Random(f"{seed}:{index}")
    kind = rng.choice(["step", "linear", "spike"])
    f = {"step": random_step, "linear": random_linear, "spike": random_spike}[kind](rng, max_pieces)
    seq = random_sequence(rng)
    p = rng.choice([1.0, 1.5, 2.0, 3.0])
    pairing = "ascending" if fault == "unsorted_pairing" else "sorted"
    base = {"case": index, "function": f.to_dict(), "sequence": seq.describe(), "p": p}
    out: dict = {"dev": {}, "spike": False}

    def record(prop: str, deviation: float, ok: bool, **extra):
        out["dev"][prop] = max(out["dev"].get(prop, 0.0), deviation)
        if not ok and "violation" not in out:
            out["violation"] = {**base, "property": prop, "deviation": deviation, **extra}

    oracle = var.brute_force_variation(f, seq, p).lower
    enc = var.variation_enclosure(f, seq, p, pairing=pairing)
    d = abs(enc.lower - oracle)
    record("enclosure lower = oracle", d, d <= TOL, oracle=oracle, got=enc.lower)
    record("enclosure upper >= oracle", max(0.0, oracle - enc.upper), enc.upper >= oracle - TOL,
           oracle=oracle, got=enc.upper)
    record("witness family reproduces lower", abs(var.family_value(f, enc.family, seq, p, pairing) - enc.lower),
           abs(var.family_value(f, enc.family, seq, p, pairing) - enc.lower) <= 1e-12)
    if var.is_spike_class(f):
        out["spike"] = True
        sp = var.spike_exact(f, seq, p, pairing=pairing).lower
        record("spike_exact = oracle", abs(sp - oracle), abs(sp - oracle) <= TOL, oracle=oracle, got=sp)

    # homogeneity
    alpha = rng.choice([-2.5, -1.0, 0.5, 3.0])
    scaled = pw.scale_add(alpha, f, pw.zero())
    o2 = var.brute_force_variation(scaled, seq, p).lower
    d = abs(o2 - abs(alpha) * oracle)
    record("homogeneity V(af) = |a|V(f)", d, d <= TOL * (1 + abs(alpha) * oracle))

    # rearrangement: sorted pairing beats random orderings of one family
    pts = pw.candidate_grid(f)
    idx = sorted(rng.sample(range(len(pts)), min(len(pts), 2 * rng.randint(1, 3))))
    fam = pw.IntervalFamily(tuple(pw.Interval(pts[a], pts[b]) for a, b in zip(idx[::2], idx[1::2])))
    mags = [pw.increment(f, I) for I in fam]
    best = var.pair_value(mags, seq, p, pairing)
    worst_gap = 0.0
    for _ in range(100):
        perm = mags[:]
        rng.shuffle(perm)
        worst_gap = max(worst_gap, var.pair_value(perm, seq, p, "given") - best)
    record("rearrangement optimality", worst_gap, worst_gap <= 1e-12)

    # monotonicity in lambda
    n = max(len(fam), 1)
    bigger = wm.sequence_from_terms([Fraction(float(seq.term(i))) + Fraction(i, 3) for i in range(1, n + 1)])
    gap = var.family_value(f, fam, bigger, p) - var.family_value(f, fam, seq, p)
    record("monotonicity in lambda", max(gap, 0.0), gap <= 1e-12)

    # triangle inequality for the component bound
    g = random_step(rng, max_pieces)
    fg = pw.scale_add(1.0, f, g)
    ub_sum = var.upper_bound(fg, seq, p, components=[f, g])[0]
    rhs = var.variation_enclosure(f, seq, p).upper + var.variation_enclosure(g, seq, p).upper
    record("triangle inequality (component bound)", max(0.0, ub_sum - rhs), ub_sum <= rhs + 1e-12)
    return out


def fuzz_oracle(seed: int = 42, cases: int = 200, max_pieces: int = 6, fault: str | None = None,
                threads: int | None = None) -> FuzzStats:
    """Random functions and sequences checked against the exhaustive oracle.

    ``fault="unsorted_pairing"`` makes the methods under test pair increments
    with lambda in ascending order; the oracle itself stays correct.
    """
    if cases < 1:
        raise ConfigError("cases must be >= 1")
    if fault not in (None, "unsorted_pairing"):
        raise ConfigError(f"unknown fault {fault!r}")
    t0 = time.perf_counter()
    results = _pmap(lambda i: _case(seed, i, max_pieces, fault), list(range(cases)), threads)
    stats = FuzzStats(seed, cases)
    for res in results:
        if "violation" in res:
            stats.violations += 1
            raise FuzzViolation(res["violation"])
        stats.spike_cases += res["spike"]
        for prop, dev in res["dev"].items():
            stats.property_checks[prop] = stats.property_checks.get(prop, 0) + 1
            if prop in ("enclosure lower = oracle", "spike_exact = oracle", "enclosure upper >= oracle"):
                stats.max_deviation = max(stats.max_deviation, dev)
    stats.wall_time = time.perf_counter() - t0
    return stats
