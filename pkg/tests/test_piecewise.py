from fractions import Fraction as F

import pytest

from lambda_bv import piecewise as pw


def test_interval_validation():
    with pytest.raises(pw.PiecewiseError):
        pw.Interval(F(1, 2), F(1, 2))
    with pytest.raises(pw.PiecewiseError):
        pw.Interval(F(0), F(3, 2))
    assert pw.Interval(0, F(1, 2)).interior_disjoint(pw.Interval(F(1, 2), 1))


def test_family_overlap_rejected():
    with pytest.raises(pw.PiecewiseError):
        pw.IntervalFamily.of([("0", "1/2"), ("1/4", "1")])
    assert len(pw.IntervalFamily.of([("0", "1/2"), ("1/2", "1")])) == 2


def test_floats_rejected_as_points():
    with pytest.raises(pw.PiecewiseError):
        pw.as_point(0.25)


def test_step_right_continuous():
    f = pw.step([0, F(1, 2), 1], [1.0, 3.0])
    assert f(0) == 1.0 and f(F(1, 2)) == 3.0 and f(1) == 3.0
    assert pw.increment(f, (0, F(1, 2))) == 2.0


def test_linear_with_jump_limits():
    f = pw.linear([0, F(1, 2), 1], [0.0, 0.0, 1.0], [(0.0, 1.0), (0.0, 1.0)])
    assert f(F(1, 4)) == 0.5
    assert f(F(1, 2)) == 0.0
    assert pw.total_variation(f) == 3.0  # up 1, down 1 at the jump, up 1
    assert not pw.grid_is_exact(f)


def test_continuous_limits_normalize():
    f = pw.linear([0, 1], [0.0, 2.0], [(0.0, 2.0)])
    assert f.pieces is None


def test_roundtrip():
    f = pw.linear([0, F(1, 3), 1], [0.5, -1.0, 2.0])
    assert pw.parse(pw.serialize(f)) == f
    doc = f.to_dict()
    assert doc["breakpoints"] == ["0", "1/3", "1"]


@pytest.mark.parametrize("text", ['{"kind": "step"}', '{"kind":"step","breakpoints":[0,1],"values":[1]}', "nope",
                                  '{"kind":"step","breakpoints":["0","1/2"],"values":[1]}'])
def test_malformed_documents(text):
    with pytest.raises(pw.PiecewiseError):
        pw.parse(text)


def test_scale_add():
    f = pw.step([0, F(1, 2), 1], [1.0, 2.0])
    g = pw.linear([0, 1], [0.0, 1.0])
    h = pw.scale_add(2.0, f, g)
    for x in (F(0), F(1, 4), F(1, 2), F(3, 4), F(1)):
        assert h(x) == pytest.approx(2 * f(x) + g(x))
    assert pw.scale_add(-1.0, f, f) == pw.step([0, F(1, 2), 1], [0.0, 0.0])


def test_oscillation_and_grid():
    f = pw.step([0, F(1, 4), 1], [0.0, -2.0])
    assert pw.oscillation(f) == 2.0
    assert pw.candidate_grid(f) == [F(0), F(1, 8), F(1, 4), F(5, 8), F(1)]


def test_support_components_sum_to_f():
    f = pw.step([0, F(1, 4), F(1, 2), F(3, 4), 1], [0.0, 1.0, 0.0, 2.0])
    parts = pw.support_components(f)
    assert len(parts) == 2
    total = pw.scale_add(1.0, parts[0], parts[1])
    for x in pw.candidate_grid(f):
        assert total(x) == f(x)
