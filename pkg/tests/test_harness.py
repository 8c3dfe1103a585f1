import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubic_weyl import arith, factor_plan, harness
from cubic_weyl.errors import InvalidInputError, ResourceError
from cubic_weyl.quad_field import QuadraticIrrational


def test_gcd_sum_example():
    # gcds for h = 1..12: 1 2 3 4 1 6 1 4 3 2 1 12
    assert harness.gcd_sum(12, 12, 12, 1.0) == 40
    report = harness.SuiteReport("gcd-sum", 1, 0, {}, 1.0, records=[{"ratio": 40 / ((12 + 12) * arith.divisor_count(12))}])
    assert report.max_ratio == pytest.approx(40 / 144) and report.passed


@given(st.integers(1, 300), st.integers(1, 300), st.integers(0, 300), st.floats(0, 1))
def test_gcd_sum_brute_force(v, H1, extra, rho):
    H2 = H1 + extra
    ref = sum(math.gcd(h, v) ** rho for h in range(H2 - H1 + 1, H2 + 1))
    assert harness.gcd_sum(v, H1, H2, rho) == pytest.approx(ref)


@pytest.mark.parametrize("name", sorted(harness.SUITES))
def test_suites_are_reproducible(name):
    a = harness.run_suite(name, 25, 7)
    b = harness.run_suite(name, 25, 7)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert a.passed == (a.max_ratio <= a.threshold)
    assert [r["trial"] for r in a.records] == sorted(r["trial"] for r in a.records)
    assert len(a.records) + a.skipped == 25


def test_different_seeds_differ():
    a = harness.run_suite("lv-envelope", 10, 1)
    b = harness.run_suite("lv-envelope", 10, 2)
    assert a.records != b.records


def test_unknown_suite_and_budget():
    with pytest.raises(InvalidInputError):
        harness.run_suite("nope", 1, 0)
    with pytest.raises(ResourceError):
        harness.run_suite("lv-envelope", 1, 0, {"max_q": 1 << 40})


def test_m4_skips_non_coprime():
    report = harness.run_suite("m4", 60, 3, {"max_vw": 4})
    assert report.skipped > 0
    assert all(math.gcd(r["inputs"]["v"], r["inputs"]["w"]) == 1 for r in report.records)


def test_report_flag_tracks_threshold():
    report = harness.SuiteReport("x", 2, 0, {}, 1.0, records=[{"ratio": 0.5}, {"ratio": 1.0}])
    assert report.passed
    report.records.append({"ratio": 1.5})
    assert not report.passed and report.max_ratio == 1.5
    assert "runtime" not in report.to_dict()


@pytest.mark.parametrize("q,N,a", [(30, 10, 1), (30, 10, 7), (69, 17, 2), (78, 19, 5)])
def test_iteration_trace_small(q, N, a):
    split = factor_plan.split_q(arith.factorint(q), N)
    trace = harness.iteration_trace(split, a)
    assert trace["cs_first_ok"] and trace["cs_second_ok"] and trace["shift_sum_first_ok"] and trace["shift_sum_second_ok"]
    assert trace["identity_max_residual"] < 1e-9
    assert trace["eta3_zero_min_real"] >= 0 and trace["eta3_zero_max_imag"] < 1e-9
    assert trace["checks"]["cs_first"] == q
    assert trace["checks"]["cs_second"] == q * (2 * split.M + 1)


def test_iteration_trace_limits():
    split = factor_plan.split_q(arith.factorint(2310), 200)
    with pytest.raises(ResourceError):
        harness.iteration_trace(split, 1, max_q=1000)
    with pytest.raises(InvalidInputError):
        harness.iteration_trace(split, 11)


def test_exponent_scan_shape():
    recs = harness.exponent_scan(QuadraticIrrational.sqrt(2), 16, 4096)
    assert [r.N for r in recs] == [2**k for k in range(4, 13)]
    assert recs[0].slope is None
    sups = [r.running_sup for r in recs]
    assert sups == sorted(sups)
    assert all(r.running_sup >= r.abs_sum for r in recs)
    again = harness.exponent_scan(QuadraticIrrational.sqrt(2), 16, 4096)
    assert [r.to_dict() for r in recs] == [r.to_dict() for r in again]


def test_exponent_scan_rejects_non_powers():
    with pytest.raises(InvalidInputError):
        harness.exponent_scan(QuadraticIrrational.sqrt(2), 10, 64)


def test_fit_slope():
    assert harness.fit_slope([4], [2]) is None
    assert harness.fit_slope([1, 2, 4, 8], [1, 2**0.5, 2, 8**0.5]) == pytest.approx(0.5)


@pytest.mark.parametrize("n,v,v0", [(1, 2, 1), (3, 70, 1), (6, 13860, 36)])
def test_abc_quality_rows(n, v, v0):
    row = harness.abc_quality(2, 6)[n - 1]
    assert (row["n"], row["v"], row["v0"]) == (n, v, v0)


def test_abc_quality_exponent():
    row = harness.abc_quality(2, 6)[5]
    assert row["exponent"] == pytest.approx(0.3758, abs=1e-4)
    rows = harness.abc_quality(3, 40)
    assert all(r["flag"] == "" and 0 <= r["exponent"] <= 1 for r in rows)
    assert rows[1]["v"] == rows[1]["v0"] == 4  # q_2 = 4 is itself powerful


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_s4_envelope_by_class(p):
    env = harness.s4_prime_envelope(p)
    # the fully generic class sits well inside the constant 4
    assert env["by_class"]["m,u,t nonzero"] <= 4
    assert env["max_ratio"] == max(env["by_class"].values())


def test_composite_bound_corpus_small():
    corpus = harness.composite_bound_corpus(ds=(2, 3), max_q=1 << 16)
    for inst in corpus["instances"]:
        assert inst["ratio"] == pytest.approx(inst["lhs"] / inst["rhs"])
        assert inst["N"] <= inst["q"] and inst["q"] ** 2 <= inst["N"] ** 3
