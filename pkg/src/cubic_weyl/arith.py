"""Integer helpers: sieving, factorization, and the usual multiplicative functions.

Factorization is trial division by every prime up to ``TRIAL_LIMIT`` followed
by Brent's variant of Pollard rho on whatever cofactor remains.  The rho step
draws its parameters from a private ``random.Random`` seeded with a fixed
value, so results never depend on global RNG state.
"""

from __future__ import annotations

import random
from functools import lru_cache
from math import gcd, isqrt, prod

import numpy as np
from sympy import isprime

from .errors import FactorizationError

TRIAL_LIMIT = 10**6
RHO_SEED = 0x5EED
RHO_ATTEMPTS = 8
RHO_MAX_STEPS = 1 << 20

Factorization = list[tuple[int, int]]


@lru_cache(maxsize=8)
def primes_up_to(limit: int) -> np.ndarray:
    """All primes ``p <= limit`` as an int64 array."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    out = np.flatnonzero(sieve).astype(np.int64)
    out.setflags(write=False)
    return out


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def _brent(n: int, rng: random.Random) -> int | None:
    """One Pollard-Brent attempt on odd composite ``n``; a proper factor or None."""
    y = rng.randrange(1, n)
    c = rng.randrange(1, n)
    m = 128
    g = r = q = 1
    x = ys = y
    steps = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += m
        r <<= 1
        steps += r
        if steps > RHO_MAX_STEPS:
            return None
    if g == n:
        # batch overshot; back up one step at a time
        while True:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
            if g > 1:
                break
    return g if g != n else None


def _split_cofactor(n: int, rng: random.Random) -> list[int]:
    if n == 1:
        return []
    if isprime(n):
        return [n]
    r = isqrt(n)
    if r * r == n:
        return _split_cofactor(r, rng) * 2
    for _ in range(RHO_ATTEMPTS):
        f = _brent(n, rng)
        if f is not None:
            return _split_cofactor(f, rng) + _split_cofactor(n // f, rng)
    raise FactorizationError(n)


def factorint(n: int, trial_limit: int = TRIAL_LIMIT) -> Factorization:
    """Prime factorization of ``n >= 1`` as sorted ``[(p, e), ...]``.

    >>> factorint(13860)
    [(2, 2), (3, 2), (5, 1), (7, 1), (11, 1)]
    """
    if n < 1:
        raise ValueError(f"factorint needs n >= 1, got {n}")
    counts: dict[int, int] = {}
    for p in primes_up_to(trial_limit):
        p = int(p)
        if p * p > n:
            break
        while n % p == 0:
            n //= p
            counts[p] = counts.get(p, 0) + 1
    if n > 1:
        # no factor <= trial_limit, so n < trial_limit**2 means n is prime
        if n < trial_limit * trial_limit:
            rest = [n]
        else:
            rest = _split_cofactor(n, random.Random(RHO_SEED))
        for p in rest:
            counts[p] = counts.get(p, 0) + 1
    return sorted(counts.items())


def merge_factorizations(*parts: Factorization) -> Factorization:
    counts: dict[int, int] = {}
    for fac in parts:
        for p, e in fac:
            counts[p] = counts.get(p, 0) + e
    return sorted((p, e) for p, e in counts.items() if e)


def from_factorization(fac: Factorization) -> int:
    return prod(p**e for p, e in fac)


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorint(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def divisor_count(n: int) -> int:
    return prod(e + 1 for _, e in factorint(n))


def totient(n: int) -> int:
    return prod((p - 1) * p ** (e - 1) for p, e in factorint(n))


def mobius(n: int) -> int:
    fac = factorint(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorint(n))


def modinv(a: int, m: int) -> int:
    return pow(a, -1, m) if m > 1 else 0


def divisor_count_table(limit: int) -> np.ndarray:
    """``d(n)`` for ``0 <= n <= limit`` (entry 0 is unused)."""
    d = np.zeros(limit + 1, dtype=np.int64)
    for k in range(1, limit + 1):
        d[k::k] += 1
    return d
