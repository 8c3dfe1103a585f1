import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cubic_weyl import arith, quad_field
from cubic_weyl.errors import ConsistencyError, InvalidInputError, NoApproximationError
from cubic_weyl.quad_field import PellUnit, QuadraticIrrational

NONSQUARES = [d for d in range(2, 200) if math.isqrt(d) ** 2 != d]


def brute_force_pell(d, b_max=10**5):
    for b in range(1, b_max):
        a2 = d * b * b + 1
        a = math.isqrt(a2)
        if a * a == a2:
            return a, b
    return None


@pytest.mark.parametrize("d,expected", [(2, (3, 2)), (3, (2, 1)), (61, (1766319049, 226153980))])
def test_pell_fundamental_examples(d, expected):
    unit = quad_field.pell_fundamental(d)
    assert (unit.a, unit.b) == expected


@pytest.mark.parametrize("d", [d for d in NONSQUARES if d < 60 and d not in (46, 53)])
def test_pell_fundamental_is_least(d):
    found = brute_force_pell(d)
    unit = quad_field.pell_fundamental(d)
    assert found is not None and (unit.a, unit.b) == found


@pytest.mark.parametrize("d", [0, 1, 4, 9, 144])
def test_pell_rejects_squares(d):
    with pytest.raises(InvalidInputError):
        quad_field.pell_fundamental(d)


def test_pell_unit_checks_equation():
    with pytest.raises(ConsistencyError):
        PellUnit(3, 1, 2)


@pytest.mark.parametrize("n,expected", [(1, (3, 2)), (2, (17, 12)), (3, (99, 70))])
def test_pell_power_examples(n, expected):
    term = quad_field.pell_power(quad_field.pell_fundamental(2), n)
    assert (term.p_n, term.q_n) == expected


@given(st.sampled_from(NONSQUARES), st.integers(1, 80))
def test_pell_identity_and_recurrence(d, n):
    unit = quad_field.pell_fundamental(d)
    t0, t1, t2 = (quad_field.pell_power(unit, k) for k in (n, n + 1, n + 2))
    assert t1.p_n**2 - d * t1.q_n**2 == 1
    assert t2.q_n == 2 * unit.a * t1.q_n - t0.q_n
    assert t2.p_n == 2 * unit.a * t1.p_n - t0.p_n
    seq = quad_field.pell_sequence(unit, n + 2)
    assert (seq[-1].p_n, seq[-1].q_n) == (t2.p_n, t2.q_n)


@pytest.mark.parametrize("k,expected", [(2, 6), (3, 35), (6, 33)])
def test_lucas_ratio_examples(k, expected):
    assert quad_field.lucas_ratio(quad_field.pell_fundamental(2), k) == expected


@pytest.mark.parametrize("d", [2, 3, 5, 7, 13])
def test_lucas_ratio_product_and_size(d):
    unit = quad_field.pell_fundamental(d)
    for term in quad_field.pell_sequence(unit, 60):
        r = [quad_field.lucas_ratio(unit, k) for k in arith.divisors(term.n) if k >= 2]
        assert unit.b * math.prod(r) == term.q_n
    for k in range(2, 61):
        assert quad_field.lucas_ratio(unit, k) <= (2 * unit.a) ** arith.totient(k)


def test_lucas_ratio_rejects_small_k():
    with pytest.raises(InvalidInputError):
        quad_field.lucas_ratio(quad_field.pell_fundamental(2), 1)


SCAN_LIMIT = 40_000
PHI = list(range(SCAN_LIMIT))
for _p in range(2, SCAN_LIMIT):
    if PHI[_p] == _p:
        for _k in range(_p, SCAN_LIMIT, _p):
            PHI[_k] -= PHI[_k] // _p


def totient_scan(threshold):
    for m in range(1, SCAN_LIMIT):
        if Fraction(PHI[m], m) <= threshold:
            return m
    return None


@pytest.mark.parametrize("eps,expected", [(1.0, 6), (2.04, 1), (5.0, 1)])
def test_choose_m_examples(eps, expected):
    assert quad_field.choose_m(quad_field.pell_fundamental(2), eps) == expected


@given(st.sampled_from([2, 3, 5, 6, 7, 10, 13, 19]), st.floats(0.45, 3.0))
def test_choose_m_matches_totient_scan(d, eps):
    unit = quad_field.pell_fundamental(d)
    threshold = eps * unit.log_eta / (2 * math.log(2 * unit.a))
    assert quad_field.choose_m(unit, eps) == totient_scan(threshold)


def test_choose_m_half():
    unit = quad_field.pell_fundamental(2)
    assert quad_field.choose_m(unit, 0.5) == totient_scan(0.5 * unit.log_eta / (2 * math.log(6))) == 210


def test_smooth_approx_m6():
    approx = quad_field.smooth_approx(QuadraticIrrational.sqrt(2), 20000, 1.0)
    assert (approx.a, approx.q, approx.m, approx.n) == (19601, 13860, 6, 6)
    assert approx.factorization == [(2, 2), (3, 2), (5, 1), (7, 1), (11, 1)]
    assert approx.smoothness_exponent == pytest.approx(math.log(11) / math.log(13860))
    assert approx.certified


def test_smooth_approx_small_n():
    approx = quad_field.smooth_approx(QuadraticIrrational.sqrt(2), 2, 1.0)
    assert (approx.a, approx.q) == (3, 2)
    assert approx.err_bound == pytest.approx(1.5 - math.sqrt(2), rel=1e-12)
    assert not approx.certified


def test_smooth_approx_rejects_tiny_n():
    with pytest.raises(NoApproximationError):
        quad_field.smooth_approx(QuadraticIrrational.sqrt(2), 1, 1.0)


def high_precision_error(alpha, a, q):
    with mpmath.workprec(4096):
        x = (alpha.f + alpha.g * mpmath.sqrt(alpha.d)) / alpha.c
        return abs(x - mpmath.mpf(a) / q)


alphas = st.builds(
    QuadraticIrrational,
    f=st.integers(-5, 5),
    g=st.integers(1, 4) | st.integers(-4, -1),
    c=st.integers(1, 5),
    d=st.sampled_from([2, 3, 5, 7, 11, 13]),
)


@given(alphas, st.integers(10, 10**12), st.floats(0.5, 3.0))
def test_smooth_approx_certificate(alpha, N, eps):
    try:
        approx = quad_field.smooth_approx(alpha, N, eps)
    except NoApproximationError:
        assert alpha.c * quad_field.pell_fundamental(alpha.d).b > N
        return
    assert approx.q <= N and math.gcd(approx.a, approx.q) == 1
    assert arith.from_factorization(approx.factorization) == approx.q
    assert approx.factorization == arith.factorint(approx.q)
    assert approx.max_prime <= approx.q ** approx.smoothness_exponent * (1 + 1e-12)
    true_err = high_precision_error(alpha, approx.a, approx.q)
    assert true_err <= approx.err_bound
    assert approx.err_bound <= float(true_err) * (1 + 1e-9) + 1e-300
    if approx.certified:
        assert approx.n % approx.m == 0


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_denominator_growth_ratio(d):
    unit = quad_field.pell_fundamental(d)
    eta = unit.a + unit.b * math.sqrt(d)
    seq = quad_field.pell_sequence(unit, 30)
    for prev, nxt in zip(seq[9:], seq[10:]):
        assert nxt.q_n / prev.q_n == pytest.approx(eta, rel=0.01)


def test_quadratic_irrational_validation():
    for bad in [(0, 0, 1, 2), (0, 1, 0, 2), (0, 1, 1, 4), (0, 1, 1, 1)]:
        with pytest.raises(InvalidInputError):
            QuadraticIrrational(*bad)
    alpha = QuadraticIrrational(1, -3, 2, 5)
    assert float(alpha) == pytest.approx((1 - 3 * math.sqrt(5)) / 2)
    with mpmath.workprec(400):
        exact = int(mpmath.floor(mpmath.mpf(2) ** 100 * (1 - 3 * mpmath.sqrt(5)) / 2))
    assert abs(alpha.scaled_floor(100) - exact) <= 3 // 2 + 1
