import json

import pytest

from lambda_bv import functional as fn
from lambda_bv import harness
from lambda_bv import piecewise as pw
from lambda_bv import variation as var
from lambda_bv import waterman as wm
from lambda_bv import witness as wt


def _strip(doc):
    doc = dict(doc)
    doc.pop("wall_time")
    return doc


def test_verify_default_all_pass():
    rep = harness.verify_proof()
    assert rep.ok, [c.line() for c in rep.failures()]
    first = next(c for c in rep.checks if c.name.startswith("(-1)^(s+1) L(f_1)"))
    assert first.lhs == pytest.approx(1.0883883476, abs=1e-9)
    for c in rep.checks:
        assert c.lhs is not None and c.rhs is not None


def test_verify_is_deterministic():
    a = harness.verify_proof(n_random=4, n_linearity=2, s_max=3)
    b = harness.verify_proof(n_random=4, n_linearity=2, s_max=3)
    assert _strip(a.to_dict()) == _strip(b.to_dict())


def test_verify_linear_p3_all_pass():
    config = wt.WitnessConfig(n_max=6, p=3.0, seq=wm.make_sequence("linear"))
    rep = harness.verify_proof(config, fn.SubsequenceSelector(), 6)
    assert rep.ok, [c.line() for c in rep.failures()]


def test_verify_sabotaged_heights_fail():
    config = wt.WitnessConfig(n_max=6, p=2.0, seq=wm.make_sequence("ones"), height_scale=50.0)
    rep = harness.verify_proof(config, s_max=2, n_random=2, n_linearity=1)
    assert not rep.ok
    assert any("<= 1" in c.name and c.status == "fail" for c in rep.checks)


def test_infeasible_config_rejected_before_work():
    config = wt.WitnessConfig(n_max=6, p=2.0, seq=wm.make_sequence("ones"), depth_r=5)
    with pytest.raises(harness.ConfigError, match="depth_r"):
        harness.verify_proof(config, s_max=8)
    with pytest.raises(harness.ConfigError):
        harness.verify_proof(sel=fn.SubsequenceSelector.parse("list:1,3"), s_max=4)


def test_sweep_cardinality_and_values():
    assert len(harness.sweep(["ones"], [2.0], [4], ["identity"])) == 1
    rows = harness.sweep(["ones", "linear"], [1.5, 2.0, 3.0], [4, 6], s_max=2)
    assert len(rows) == 12
    assert [(r["sequence"], r["p"], r["levels"]) for r in rows[:3]] == [("ones", 1.5, 4), ("ones", 1.5, 6), ("ones", 2.0, 4)]
    row = harness.sweep(["ones"], [2.0], [6], s_max=1)[0]
    assert row["L_f1"] == pytest.approx(1.0883883476, abs=1e-9)


def test_sweep_row_errors_do_not_abort():
    rows = harness.sweep(["ones", "bogus"], [2.0], [4], s_max=1)
    assert rows[0]["status"] == "pass"
    assert rows[1]["status"] == "error" and "bogus" in rows[1]["error"]
    text = harness.rows_to_csv(rows)
    assert text.splitlines()[0].startswith("sequence,p,levels,selector")
    with pytest.raises(harness.ConfigError):
        harness.sweep([], [2.0], [4])


def test_sweep_independent_of_threads():
    a = harness.sweep(["ones", "linear"], [2.0, 3.0], [4], s_max=2, threads=1)
    b = harness.sweep(["ones", "linear"], [2.0, 3.0], [4], s_max=2, threads=4)
    assert harness.rows_to_csv(a) == harness.rows_to_csv(b)


def test_fuzz_clean_and_deterministic():
    a = harness.fuzz_oracle(42, 40, threads=1)
    b = harness.fuzz_oracle(42, 40, threads=4)
    assert a.violations == 0 and a.max_deviation <= 1e-10
    assert _strip(a.to_dict()) == _strip(b.to_dict())


def test_fuzz_rejects_zero_cases():
    with pytest.raises(harness.ConfigError):
        harness.fuzz_oracle(1, 0)


def test_fuzz_fault_emits_reproducer():
    with pytest.raises(harness.FuzzViolation) as info:
        harness.fuzz_oracle(42, 50, fault="unsorted_pairing")
    rep = info.value.reproducer
    json.dumps(rep)
    f = pw.PiecewiseFunction.from_dict(rep["function"])
    seq = wm.make_sequence(rep["sequence"])
    assert var.brute_force_variation(f, seq, rep["p"]).lower == pytest.approx(rep["oracle"])


def test_thread_env(monkeypatch):
    monkeypatch.setenv("LAMBDA_BV_THREADS", "3")
    assert harness.thread_count() == 3
    monkeypatch.setenv("LAMBDA_BV_THREADS", "many")
    with pytest.raises(harness.ConfigError):
        harness.thread_count()
