"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even under
output capture) or directly with ``python3 tests/test_acceptance.py``.
"""

import json
import math
import random
import time

import numpy as np
import pytest

from cubic_weyl import arith, cli, exp_sums, factor_plan, harness, quad_field
from cubic_weyl.exp_sums import ShiftSpec
from cubic_weyl.quad_field import QuadraticIrrational


def _emit(number, title, ok, detail, capsys=None):
    line = f"ACCEPTANCE {number:2d} {'PASS' if ok else 'FAIL'} {title}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def product_formula():
    start = time.perf_counter()
    report = harness.run_suite("product-formula", 1000, 42, {"max_uv": 500, "tol": 1e-6})
    elapsed = time.perf_counter() - start
    ok = report.passed and elapsed < 30
    return ok, f"max residual {report.max_ratio * 1e-6:.3g} <= 1e-6 over {len(report.records)} coprime trials, {elapsed:.1f}s < 30s"


def multiplicativity():
    start = time.perf_counter()
    rng = random.Random(2024)
    worst, count = 0.0, 0
    for v in range(1, 51):
        for w in range(1, 51):
            if math.gcd(v, w) != 1:
                continue
            q = v * w
            for _ in range(5):
                c, m, u, t = (rng.randrange(q) for _ in range(4))
                worst = max(worst, exp_sums.m4_residual(c, ShiftSpec(m, u), t, v, w))
                count += 1
    elapsed = time.perf_counter() - start
    return worst <= 1e-6 and elapsed < 60, f"max residual {worst:.3g} <= 1e-6 over {count} draws, {elapsed:.1f}s < 60s"


def s4_prime_envelope():
    start = time.perf_counter()
    # independent check of the fast path against the quadruple sum for p <= 13
    direct_err = 0.0
    for p in (2, 3, 5, 7, 11, 13):
        for c in sorted({1, p - 1, (p + 1) // 2}):
            fast = exp_sums.s4_grid(c, p, range(p), range(p))
            for m in range(p):
                for u in range(p):
                    direct_err = max(direct_err, float(np.abs(fast[m, u] - exp_sums.s4_direct(c, ShiftSpec(m, u), p)).max()) / p**2)
    worst, where, by_class = 0.0, None, {}
    for p in arith.primes_up_to(97):
        env = harness.s4_prime_envelope(int(p))
        for k, v in env["by_class"].items():
            by_class[k] = max(by_class.get(k, 0.0), v)
        if env["max_ratio"] > worst:
            worst, where = env["max_ratio"], {"p": int(p), **env["argmax"]}
    elapsed = time.perf_counter() - start
    ok = worst <= 4 and direct_err <= 1e-6 and elapsed < 600
    classes = ", ".join(f"{k}: {v:.3f}" for k, v in by_class.items())
    return ok, (
        f"measured C = {worst:.4f} (need <= 4) at {where}; by class [{classes}]; "
        f"fast vs direct for p <= 13: {direct_err:.2g}*p^2; {elapsed:.0f}s"
    )


def complete_sum_envelope():
    report = harness.run_suite("lv-envelope", 10_000, 4, {"max_q": 10_000})
    return report.passed, f"max |S|/(q^1/2 (q,h)^1/4 d(q)) = {report.max_ratio:.4f} <= 10 over 10000 samples"


def decomposition():
    report = harness.run_suite("decompose-identity", 200, 5, {"max_q": 10_000, "tol": 1e-8})
    return report.passed, f"max residual/q = {report.max_ratio * 1e-8:.3g} <= 1e-8 over 200 samples"


def parseval():
    rng = random.Random(6)
    worst_energy = worst_entry = 0.0
    for _ in range(100):
        q = rng.randint(1, 4096)
        a = rng.randrange(q * 1000)
        vals = exp_sums.complete_cubic_spectrum(a, q).values.astype(complex)
        worst_energy = max(worst_energy, abs((np.abs(vals) ** 2).sum() - q * q) / (q * q))
        direct = exp_sums.complete_cubic_sums_direct(a, np.arange(q), q)
        worst_entry = max(worst_entry, float(np.abs(vals - direct).max()) / math.sqrt(q))
    ok = worst_energy <= 1e-4 and worst_entry <= 1e-6
    return ok, f"energy error {worst_energy:.2g}*q^2 <= 1e-4, spectrum vs direct {worst_entry:.2g}*sqrt(q) <= 1e-6"


def pell_exactness():
    bad = []
    for d in (2, 3, 5, 7, 13):
        unit = quad_field.pell_fundamental(d)
        for term in quad_field.pell_sequence(unit, 60):
            if term.p_n**2 - d * term.q_n**2 != 1:
                bad.append((d, term.n, "pell"))
            r = math.prod(quad_field.lucas_ratio(unit, k) for k in arith.divisors(term.n) if k >= 2)
            if unit.b * r != term.q_n:
                bad.append((d, term.n, "product"))
    return not bad, f"{5 * 60} (d, n) pairs checked exactly; failures {bad}"


def smoothness():
    approx = quad_field.smooth_approx(QuadraticIrrational.sqrt(2), 20_000, 1.0)
    ok = (
        approx.m == 6
        and approx.q == 13860
        and approx.factorization == [(2, 2), (3, 2), (5, 1), (7, 1), (11, 1)]
        and approx.max_prime == 11
        and approx.smoothness_exponent <= 0.26
    )
    return ok, f"m={approx.m}, q={approx.q}, factorization {approx.factorization}, smoothness {approx.smoothness_exponent:.5f} <= 0.26"


def cauchy_schwarz_trace():
    start = time.perf_counter()
    split = factor_plan.split_q(arith.factorint(2310), 200)
    trace = harness.iteration_trace(split, 1)
    elapsed = time.perf_counter() - start
    ok = trace["cs_first_ok"] and trace["cs_second_ok"] and elapsed < 300
    return ok, (
        f"q1,q2,q3 = {split.q1},{split.q2},{split.q3}; {trace['checks']['cs_first']} first-step and "
        f"{trace['checks']['cs_second']} second-step inequalities, min slacks {trace['cs_first_min_slack']:.3g} and "
        f"{trace['cs_second_min_slack']:.3g}; {elapsed:.1f}s < 300s"
    )


def exponent_scan():
    start = time.perf_counter()
    recs = harness.exponent_scan(QuadraticIrrational.sqrt(2), 1 << 10, 1 << 17)
    elapsed = time.perf_counter() - start
    slope = recs[-1].slope
    return slope <= 0.77 and elapsed < 300, f"fitted slope {slope:.4f} <= 0.77, {elapsed:.1f}s"


def plug_through():
    corpus = harness.composite_bound_corpus()
    n = len(corpus["instances"])
    ok = n > 0 and corpus["max_over_median"] <= 10
    return ok, (
        f"{n} feasible instances; measured C = {corpus['measured_C']:.4f}, median {corpus['median_ratio']:.4f}, "
        f"max/median = {corpus['max_over_median']:.3f} <= 10"
    )


def determinism():
    mismatched = []
    for name in sorted(harness.SUITES):
        a = cli.render({"json": harness.run_suite(name, 40, 12345).to_dict()}, "json")
        b = cli.render({"json": harness.run_suite(name, 40, 12345).to_dict()}, "json")
        if a != b:
            mismatched.append(name)
    return not mismatched, f"{len(harness.SUITES)} suites repeated with seed 12345; mismatches {mismatched}"


CRITERIA = [
    (1, "product formula", product_formula),
    (2, "multiplicativity of S4", multiplicativity),
    (3, "prime-modulus S4 envelope", s4_prime_envelope),
    (4, "complete-sum envelope", complete_sum_envelope),
    (5, "decomposition identity", decomposition),
    (6, "Parseval and spectrum accuracy", parseval),
    (7, "Pell and cyclotomic exactness", pell_exactness),
    (8, "smoothness certificate", smoothness),
    (9, "Cauchy-Schwarz trace", cauchy_schwarz_trace),
    (10, "exponent scan", exponent_scan),
    (11, "composite bound plug-through", plug_through),
    (12, "determinism", determinism),
]


@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[f"c{n:02d}_{fn.__name__}" for n, _, fn in CRITERIA])
def test_acceptance(number, title, check, capsys):
    ok, detail = check()
    assert _emit(number, title, ok, detail, capsys), detail


if __name__ == "__main__":
    results = [_emit(n, title, *fn()) for n, title, fn in CRITERIA]
    print(json.dumps({"passed": sum(results), "total": len(results)}))
