import math

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from cubic_weyl import arith
from cubic_weyl.errors import FactorizationError


@given(st.integers(1, 10**12))
def test_factorint_matches_sympy(n):
    assert arith.factorint(n) == sorted(sympy.factorint(n).items())


@pytest.mark.parametrize(
    "n",
    [
        1_000_003 * 1_000_033,  # two primes past the trial limit
        (10**9 + 7) ** 2,
        2**5 * 1_000_003 * 998_244_353 * 1_000_000_007,
        999_999_000_001,  # prime below trial_limit**2
    ],
)
def test_factorint_past_trial_division(n):
    fac = arith.factorint(n)
    assert arith.from_factorization(fac) == n
    assert all(sympy.isprime(p) for p, _ in fac)
    assert fac == sorted(sympy.factorint(n).items())


def test_factorint_deterministic():
    n = 1_000_003 * 1_000_033 * 1_000_037
    assert arith.factorint(n) == arith.factorint(n)


def test_factorint_rejects_nonpositive():
    with pytest.raises(ValueError):
        arith.factorint(0)


def test_factorization_error_carries_cofactor():
    exc = FactorizationError(91)
    assert exc.cofactor == 91


@given(st.integers(1, 5000))
def test_multiplicative_functions_against_brute_force(n):
    divs = [k for k in range(1, n + 1) if n % k == 0]
    assert arith.divisors(n) == divs
    assert arith.divisor_count(n) == len(divs)
    assert arith.totient(n) == sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)
    assert arith.mobius(n) == sympy.mobius(n)
    assert arith.is_squarefree(n) == (arith.mobius(n) != 0)


def test_divisor_count_table():
    table = arith.divisor_count_table(500)
    assert all(table[n] == arith.divisor_count(n) for n in range(1, 501))


def test_primes_up_to():
    assert list(arith.primes_up_to(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(arith.primes_up_to(1)) == 0


@given(st.integers(2, 10**6), st.integers(1, 10**6))
def test_modinv(m, a):
    if math.gcd(a, m) == 1:
        assert a * arith.modinv(a, m) % m == 1
