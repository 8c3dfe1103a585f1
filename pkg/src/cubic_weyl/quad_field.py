"""Exact arithmetic in Z[sqrt d] and smooth-denominator approximation.

The fundamental Pell unit ``eta = a + b*sqrt(d)`` generates

    p_n + q_n*sqrt(d) = eta**n,

and ``q_n = (eta**n - eta**-n) / (2 sqrt d)`` splits along the divisors of
``n`` into the cyclotomic values ``r_k = |Phi_k(eta, 1/eta)|``.  Choosing ``n``
as a multiple of an ``m`` with small ``phi(m)/m`` forces every ``r_k`` (and so
every prime factor of ``q_n``) to be tiny compared with ``q_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from . import arith
from .errors import ConsistencyError, InvalidInputError, NoApproximationError, ResourceError

# extra guard bits when certifying |alpha - a/q|
CERT_GUARD_BITS = 128


@dataclass(frozen=True)
class QuadraticIrrational:
    """The real number ``(f + g*sqrt(d)) / c``."""

    f: int
    g: int
    c: int
    d: int

    def __post_init__(self):
        if self.g == 0:
            raise InvalidInputError("g must be nonzero")
        if self.c < 1:
            raise InvalidInputError("c must be positive")
        if self.d < 2 or arith.is_square(self.d):
            raise InvalidInputError(f"d={self.d} must be a positive nonsquare")

    @classmethod
    def sqrt(cls, d: int) -> "QuadraticIrrational":
        return cls(0, 1, 1, d)

    def scaled_floor(self, bits: int) -> int:
        """``floor(alpha * 2**bits)`` up to an error of ``|g|/c + 1`` units."""
        root = isqrt(self.d << (2 * bits))
        return (self.f * (1 << bits) + self.g * root) // self.c

    def __float__(self):
        return (self.f + self.g * math.sqrt(self.d)) / self.c

    def __str__(self):
        if (self.f, self.g, self.c) == (0, 1, 1):
            return f"sqrt({self.d})"
        return f"({self.f} + {self.g}*sqrt({self.d}))/{self.c}"


@dataclass(frozen=True)
class PellUnit:
    a: int
    b: int
    d: int

    def __post_init__(self):
        if self.a * self.a - self.d * self.b * self.b != 1:
            raise ConsistencyError(f"({self.a}, {self.b}) does not solve a^2 - {self.d} b^2 = 1")

    @property
    def log_eta(self) -> float:
        # a + b sqrt(d) overflows a float once a is large; log a + log(1 + b sqrt(d)/a) does not
        return math.log(self.a) + math.log1p(self.b * math.sqrt(self.d) / self.a)


@dataclass(frozen=True)
class PowerTerm:
    n: int
    p_n: int
    q_n: int


@dataclass
class RationalApprox:
    """A reduced fraction ``a/q`` with a certified bound on ``|alpha - a/q|``.

    ``certified`` is False when the approximation came from the small-``N``
    fallback rather than from a Pell index divisible by ``m``; the
    smoothness exponent is then reported but carries no guarantee.
    """

    a: int
    q: int
    err_bound: float
    factorization: list[tuple[int, int]]
    smoothness_exponent: float
    n: int = 0
    m: int = 1
    certified: bool = True

    @property
    def max_prime(self) -> int:
        return max((p for p, _ in self.factorization), default=1)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "q": self.q,
            "err_bound": self.err_bound,
            "factorization": [[p, e] for p, e in self.factorization],
            "smoothness_exponent": self.smoothness_exponent,
            "pell_index": self.n,
            "m": self.m,
            "certified": self.certified,
        }


def _sqrt_continued_fraction(d: int):
    """Yield the partial quotients of sqrt(d) (d nonsquare), forever."""
    a0 = isqrt(d)
    m, den, a = 0, 1, a0
    yield a0
    while True:
        m = den * a - m
        den = (d - m * m) // den
        a = (a0 + m) // den
        yield a


def pell_fundamental(d: int) -> PellUnit:
    """Least positive solution of ``a^2 - d b^2 = 1``.

    Walks the convergents of the periodic continued fraction of sqrt(d); the
    first convergent solving the equation is the fundamental one.

    >>> pell_fundamental(2)
    PellUnit(a=3, b=2, d=2)
    """
    if d < 2 or arith.is_square(d):
        raise InvalidInputError(f"d={d} must be a nonsquare integer >= 2")
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    for q in _sqrt_continued_fraction(d):
        h, h_prev = q * h + h_prev, h
        k, k_prev = q * k + k_prev, k
        if h * h - d * k * k == 1:
            return PellUnit(h, k, d)


def _power(unit: PellUnit, n: int) -> tuple[int, int]:
    # square-and-multiply in Z[sqrt d]
    x, y = 1, 0
    bx, by = unit.a, unit.b
    while n:
        if n & 1:
            x, y = x * bx + unit.d * y * by, x * by + y * bx
        bx, by = bx * bx + unit.d * by * by, 2 * bx * by
        n >>= 1
    return x, y


def pell_power(unit: PellUnit, n: int) -> PowerTerm:
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    p, q = _power(unit, n)
    return PowerTerm(n, p, q)


def pell_sequence(unit: PellUnit, n_max: int) -> list[PowerTerm]:
    """Terms ``n = 1..n_max`` via the recurrences ``x_{n+1} = 2a x_n - x_{n-1}``."""
    out = []
    p_prev, q_prev = 1, 0
    p, q = unit.a, unit.b
    for n in range(1, n_max + 1):
        out.append(PowerTerm(n, p, q))
        p, p_prev = 2 * unit.a * p - p_prev, p
        q, q_prev = 2 * unit.a * q - q_prev, q
    return out


@lru_cache(maxsize=4096)
def _q_cached(unit: PellUnit, n: int) -> int:
    return _power(unit, n)[1]


def lucas_ratio(unit: PellUnit, k: int) -> int:
    """``r_k = |Phi_k(eta, 1/eta)|`` as the Mobius quotient of the ``q_j``, ``j | k``."""
    if k < 2:
        raise InvalidInputError(f"k must be >= 2, got {k}")
    num, den = 1, 1
    for j in arith.divisors(k):
        mu = arith.mobius(k // j)
        if mu == 1:
            num *= _q_cached(unit, j)
        elif mu == -1:
            den *= _q_cached(unit, j)
    r, rem = divmod(num, den)
    if rem or r < 1:
        raise ConsistencyError(f"Mobius quotient for r_{k} (d={unit.d}) is not a positive integer")
    return r


def choose_m(unit: PellUnit, eps: float) -> int:
    """Least ``m`` with ``phi(m)/m <= eps * log(eta) / (2 log(2a))``.

    ``phi(m)/m`` depends only on the primes dividing ``m``, and swapping a
    prime for a smaller unused one lowers both ``m`` and the ratio, so the
    least admissible ``m`` is always a primorial.
    """
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    threshold = eps * unit.log_eta / (2 * math.log(2 * unit.a))
    m, ratio = 1, Fraction(1)
    primes = iter(arith.primes_up_to(10**6))
    while ratio > threshold:
        p = next(primes, None)
        if p is None:
            raise ResourceError(f"eps={eps} needs primes beyond 10**6 in m")
        p = int(p)
        m *= p
        ratio *= Fraction(p - 1, p)
    return m


def certified_error(alpha: QuadraticIrrational, a: int, q: int, bits: int) -> float:
    """Upper bound for ``|alpha - a/q|`` from a fixed-point evaluation at ``bits``.

    The truncated root contributes at most ``|g|*q`` units of ``2**-bits`` to the
    scaled numerator; one more unit covers the final rounding.
    """
    root = isqrt(alpha.d << (2 * bits))
    num = (alpha.f * q - a * alpha.c) * (1 << bits) + alpha.g * q * root
    slack = abs(alpha.g) * q + 1
    bound = Fraction(abs(num) + slack, alpha.c * q << bits)
    return math.nextafter(float(bound), math.inf)


def _reduce(alpha: QuadraticIrrational, u: int, v: int) -> tuple[int, int]:
    a1 = alpha.f * v + alpha.g * u
    q1 = alpha.c * v
    g = gcd(a1, q1)
    return a1 // g, q1 // g


def smooth_approx(alpha: QuadraticIrrational, N: int, eps: float) -> RationalApprox:
    """Rational approximation to ``alpha`` with denominator at most ``N``.

    The approximation to sqrt(d) is ``p_n/q_n`` for the largest multiple ``n``
    of ``choose_m(eps)`` with ``c*q_n <= N``; if no multiple fits, the largest
    ``n >= 1`` that fits is used and the result is marked uncertified.
    """
    if N < 2:
        raise NoApproximationError(f"N={N} admits no approximation")
    unit = pell_fundamental(alpha.d)
    m = choose_m(unit, eps)
    best_any = best_mult = None
    for term in pell_sequence_until(unit, lambda t: alpha.c * t.q_n > N):
        best_any = term
        if term.n % m == 0:
            best_mult = term
    if best_any is None:
        raise NoApproximationError(f"no Pell denominator satisfies c*q_n <= {N}")
    term = best_mult if best_mult is not None else best_any
    a, q = _reduce(alpha, term.p_n, term.q_n)
    bits = 2 * (q * N).bit_length() + CERT_GUARD_BITS
    err = certified_error(alpha, a, q, bits)
    fac = factor_pell_denominator(unit, term.n, alpha.c, divide_by=(alpha.c * term.q_n) // q)
    smooth = math.log(max(p for p, _ in fac)) / math.log(q) if q > 1 else 0.0
    return RationalApprox(
        a=a,
        q=q,
        err_bound=err,
        factorization=fac,
        smoothness_exponent=smooth,
        n=term.n,
        m=m,
        certified=best_mult is not None,
    )


def pell_sequence_until(unit: PellUnit, stop):
    """Yield ``PowerTerm``s for n = 1, 2, ... until ``stop(term)`` is true."""
    p_prev, q_prev = 1, 0
    p, q = unit.a, unit.b
    n = 1
    while True:
        term = PowerTerm(n, p, q)
        if stop(term):
            return
        yield term
        p, p_prev = 2 * unit.a * p - p_prev, p
        q, q_prev = 2 * unit.a * q - q_prev, q
        n += 1


def factor_pell_denominator(unit: PellUnit, n: int, c: int = 1, divide_by: int = 1):
    """Factor ``c * q_n / divide_by`` using ``q_n = b * prod_{k | n, k >= 2} r_k``.

    Each ``r_k`` is factored on its own, which keeps the cofactors handed to
    Pollard rho far smaller than ``q_n`` itself.
    """
    parts = [arith.factorint(c), arith.factorint(unit.b)]
    for k in arith.divisors(n):
        if k >= 2:
            parts.append(arith.factorint(lucas_ratio(unit, k)))
    fac = dict(arith.merge_factorizations(*parts))
    for p, e in arith.factorint(divide_by):
        fac[p] -= e
        if fac[p] < 0:
            raise ConsistencyError(f"{divide_by} does not divide c*q_{n}")
    return sorted((p, e) for p, e in fac.items() if e)
