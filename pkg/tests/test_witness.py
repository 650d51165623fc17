import math
import random
from fractions import Fraction as F

import pytest

from lambda_bv import piecewise as pw
from lambda_bv import variation as var
from lambda_bv import waterman as wm
from lambda_bv import witness as wt

ONES = wm.make_sequence("ones")


def cfg(**kw):
    base = dict(n_max=4, p=2.0, seq=ONES)
    base.update(kw)
    return wt.WitnessConfig(**base)


def test_grid_constants():
    assert wt.level_capacity(2) == 32
    assert wt.spikes_per_level(2) == 15
    assert wt.grid_points(2, 1) == (F(1, 4), F(1, 4) + F(1, 256))
    assert wt.grid_points(2, 15) == (F(1, 4) + F(28, 256), F(1, 4) + F(29, 256))
    with pytest.raises(wt.WitnessError):
        wt.grid_points(2, 16)


def test_r0_below_three_eighths():
    # 3/8 = 1/4 + 2^5/2^8 while r_0 = 1/4 + 29/2^8
    assert wt.r_point(0) == F(93, 256) < F(3, 8) == F(1, 4) + F(2 ** 5, 2 ** 8)


def test_r_decreasing_and_j_adjacent():
    r = wt.r_sequence(40)
    assert all(b < a for a, b in zip(r, r[1:]))
    J = wt.j_intervals(39)
    assert all(J[i].a == J[i + 1].b for i in range(38))


@pytest.mark.parametrize("n", range(2, 21))
def test_bridging(n):
    grid, closed, bound = wt.bridging_values(n)
    assert grid == closed <= bound


def test_heights_closed_form():
    assert wt.height(2, ONES, 2.0) == pytest.approx(0.25 / math.sqrt(32), abs=1e-15)
    assert wt.height(3, ONES, 2.0) == 1 / 128
    lin = wm.make_sequence("linear")
    h32 = float(sum(F(1, i) for i in range(1, 33)))
    assert wt.height(2, lin, 2.0) == pytest.approx(0.25 / math.sqrt(h32), rel=1e-15)


def _h_by_scan(x, c):
    """Definition-level evaluation: look through every spike of every level."""
    for n in range(2, c.n_max + 1):
        for j in range(1, wt.spikes_per_level(n) + 1):
            b, e = wt.grid_points(n, j)
            if b <= x < e:
                return wt.height(n, c.seq, c.q)
    return 0.0


def test_h_pointwise_agrees_with_scan_and_build():
    c = cfg(n_max=3)
    h, heights = wt.build_h(c)
    assert set(heights) == {2, 3}
    rng = random.Random(1)
    pts = wt.r_sequence(4) + [F(rng.randint(0, 2 ** 14), 2 ** 14) for _ in range(200)]
    for x in pts:
        ref = _h_by_scan(x, c)
        assert h(x) == ref
        assert wt.h_value(x, c.seq, c.q, n_max=3) == ref


def test_h_levels_sum_to_h():
    c = cfg(n_max=3)
    h, _ = wt.build_h(c)
    parts = wt.h_levels(c)
    total = pw.scale_add(1.0, parts[0], parts[1])
    for x in (F(1, 4), F(1, 4) + F(1, 512), F(1, 8), F(93, 256), F(1, 2)):
        assert total(x) == h(x)


def test_level_variation_matches_spike_formula():
    c = cfg(n_max=3)
    for n, part in zip((2, 3), wt.h_levels(c)):
        v = var.spike_exact(part, c.seq, c.q, witness=False).lower
        assert v == pytest.approx(wt.level_variation(n, c.seq, c.q), rel=1e-12)


def test_tent_shape():
    f = wt.build_f_l(2, -1)
    assert f(wt.r_point(3)) == 1.0
    assert f(wt.r_point(4)) == 0.0 and f(wt.r_point(2)) == 0.0
    assert f(F(3, 8)) == 0.0 and f(F(3, 8) + F(1, 512)) == -1.0 and f(wt.J_PRIME_RIGHT) == -1.0
    assert pw.increment(f, wt.j_prime()) == -1.0
    for j in (1, 3, 4, 5):
        assert pw.increment(f, wt.j_interval(2 * j)) == 0.0
    with pytest.raises(wt.WitnessError):
        wt.build_f_l(5, 1, depth=8)


def test_tent_norm_ones_p2():
    f = wt.build_f_l(2, -1)
    assert var.brute_force_variation(f, ONES, 2).lower == pytest.approx(math.sqrt(6), abs=1e-12)


def test_check_geometry_default_passes():
    checks = wt.check_geometry(cfg(), r=wt.r_sequence(20))
    assert checks and all(c.passed for c in checks)


def test_check_geometry_shuffled_fails():
    r = wt.r_sequence(20)
    random.Random(0).shuffle(r)
    checks = wt.check_geometry(cfg(), r=r)
    assert any(c.status == "fail" for c in checks)


def test_config_validation():
    with pytest.raises(wt.WitnessError):
        wt.WitnessConfig(n_max=1)
    with pytest.raises(wt.WitnessError):
        wt.WitnessConfig(p=1.0)
    assert cfg(p=3.0).q == pytest.approx(1.5)


def test_system_serializes():
    sys_ = wt.build_system(cfg(n_max=3))
    doc = sys_.to_dict()
    assert doc["r"][0] == "93/256"
    assert doc["J_prime"] == ["3/8", "97/256"]
    assert doc["h_tail_bound"] == 0.125
    assert sys_.h_abs_increment(1) == wt.height(2, ONES, 2.0)
