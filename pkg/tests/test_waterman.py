import json
import math
from fractions import Fraction

import mpmath
import pytest

from lambda_bv import waterman as wm


def test_families_terms():
    assert [wm.make_sequence("ones").term(i) for i in (1, 5)] == [1, 1]
    assert wm.make_sequence("linear").term(7) == 7
    assert wm.make_sequence("power", alpha=0.5).term(4) == pytest.approx(2.0)


def test_custom_constant_tail():
    seq = wm.make_sequence("custom", prefix=["1", "3/2", "2"])
    assert seq.term(2) == Fraction(3, 2)
    assert seq.term(10) == 2
    assert wm.partial_sum_exact(seq, 5) == 1 + Fraction(2, 3) + Fraction(3, 2)


@pytest.mark.parametrize("bad", [["1", "0.5"], ["2", "3"], ["1", "-1"]])
def test_custom_validation_rejects(bad):
    with pytest.raises(wm.SequenceError):
        wm.make_sequence("custom", prefix=bad)


def test_bad_power_and_family():
    with pytest.raises(wm.SequenceError):
        wm.make_sequence("power", alpha=1.5)
    with pytest.raises(wm.SequenceError):
        wm.make_sequence("power")
    with pytest.raises(wm.SequenceError):
        wm.make_sequence("cubic")


def test_validate_reports_violations():
    probs = wm.validate(wm.sequence_from_terms([1, 2, 1]), 10)
    assert any("monotonicity" in s for s in probs)
    assert wm.validate(wm.make_sequence("linear"), 1000) == []


def test_h32_exact():
    # direct Fraction summation as the independent reference
    ref = sum(Fraction(1, i) for i in range(1, 33))
    assert wm.partial_sum_exact(wm.make_sequence("linear"), 32) == ref
    assert wm.partial_sum(wm.make_sequence("linear"), 32) == pytest.approx(4.05849519543652, abs=1e-13)


def test_partial_sum_floor_and_domain():
    seq = wm.make_sequence("ones")
    assert wm.partial_sum(seq, 7.9) == 7.0
    with pytest.raises(wm.SequenceError):
        wm.partial_sum(seq, 0.5)


@pytest.mark.parametrize("n", [4096, 4097, 2 ** 17, 2 ** 29])
def test_linear_large_n_matches_mpmath(n):
    with mpmath.workdps(50):
        ref = float(mpmath.harmonic(n))
    assert wm.partial_sum(wm.make_sequence("linear"), n) == pytest.approx(ref, rel=1e-15)


def test_power_direct_vs_zeta():
    seq = wm.make_sequence("power", alpha=0.5)
    n = 1000
    assert wm.partial_sum(seq, n) == pytest.approx(math.fsum(i ** -0.5 for i in range(1, n + 1)), rel=1e-14)
    big = 2 ** 23
    with mpmath.workdps(40):
        ref = float(mpmath.zeta(0.5) - mpmath.zeta(0.5, big + 1))
    assert wm.partial_sum(seq, big) == pytest.approx(ref, rel=1e-13)
    assert ref == pytest.approx(2 * math.sqrt(big) + float(mpmath.zeta(0.5)), rel=1e-6)


def test_parse_sequence(tmp_path):
    assert wm.parse_sequence("power:1/2").alpha == 0.5
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"family": "custom", "prefix": ["1", "2"], "tail": "constant"}))
    assert wm.parse_sequence(f"custom:{path}").term(9) == 2
    assert wm.parse_sequence("custom:1,1,3").term(3) == 3


def test_weights_and_equality():
    seq = wm.make_sequence("linear")
    assert list(seq.weights(3)) == pytest.approx([1, 0.5, 1 / 3])
    assert seq == wm.make_sequence({"family": "linear"})
    assert hash(seq) == hash(wm.make_sequence("linear"))
