"""Splitting a smooth denominator ``q = q1*q2*q3`` for the q-analogue of van der Corput.

The split needs ``q1, q2, q3`` pairwise coprime, ``q3`` squarefree,
``N <= min(q1*q3, q2*q3)``, ``N <= q <= N^(3/2)``, and ``q2``, ``q3`` at
least their size targets.  Squarefree primes of ``q / q0`` are handed out
one at a time, largest first, to whichever of ``q3`` (target ``q^(10/21)``)
and ``q2`` (target ``q^(5/21)``) is proportionally furthest from its target;
everything left over, including the powerful part ``q0``, goes to ``q1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import arith
from .errors import InfeasibleSplitError, InvalidInputError

Q3_EXPONENT = 10 / 21
Q2_EXPONENT = 5 / 21


def powerful_part(factorization) -> int:
    """Product of the prime powers ``p^e || q`` with ``e >= 2``.

    >>> powerful_part([(2, 2), (3, 2), (5, 1), (7, 1), (11, 1)])
    36
    """
    return math.prod(p**e for p, e in factorization if e >= 2)


@dataclass(frozen=True)
class FactorSplit:
    q0: int
    q1: int
    q2: int
    q3: int
    N: int
    fac1: tuple
    fac2: tuple
    fac3: tuple

    @property
    def q(self) -> int:
        return self.q1 * self.q2 * self.q3

    @property
    def K(self) -> int:
        return self.q // self.N

    @property
    def M(self) -> int:
        return self.K // self.q1

    @property
    def U(self) -> int:
        return self.K // self.q2

    def violations(self) -> list[str]:
        """Every hypothesis the split fails; empty when the split is valid."""
        q, N = self.q, self.N
        bad = []
        if math.gcd(self.q1, self.q2) != 1 or math.gcd(self.q1, self.q3) != 1 or math.gcd(self.q2, self.q3) != 1:
            bad.append("parts are not pairwise coprime")
        if any(e > 1 for _, e in self.fac3):
            bad.append("q3 is not squarefree")
        if self.q1 % self.q0:
            bad.append("q0 does not divide q1")
        if N > self.q1 * self.q3:
            bad.append(f"N={N} > q1*q3={self.q1 * self.q3}")
        if N > self.q2 * self.q3:
            bad.append(f"N={N} > q2*q3={self.q2 * self.q3}")
        if N > q:
            bad.append(f"N={N} > q={q}")
        if q * q > N**3:
            bad.append(f"q={q} > N^(3/2)")
        log_q = math.log(q) if q > 1 else 0.0
        if math.log(self.q3) < Q3_EXPONENT * log_q - 1e-12:
            bad.append(f"q3={self.q3} below q^(10/21)")
        if math.log(self.q2) < Q2_EXPONENT * log_q - 1e-12:
            bad.append(f"q2={self.q2} below q^(5/21)")
        return bad

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "N": self.N,
            "q0": self.q0,
            "q1": self.q1,
            "q2": self.q2,
            "q3": self.q3,
            "K": self.K,
            "M": self.M,
            "U": self.U,
            "factorizations": {
                "q1": [list(pe) for pe in self.fac1],
                "q2": [list(pe) for pe in self.fac2],
                "q3": [list(pe) for pe in self.fac3],
            },
        }


def split_q(factorization, N: int) -> FactorSplit:
    """Greedy split of the factored ``q`` for length ``N``.

    Raises :class:`InfeasibleSplitError` unless every hypothesis holds.

    >>> s = split_q([(2, 1), (3, 1), (5, 1), (7, 1), (11, 1)], 200)
    >>> (s.q1, s.q2, s.q3)
    (6, 7, 55)
    """
    factorization = sorted((int(p), int(e)) for p, e in factorization)
    q = arith.from_factorization(factorization)
    if N < 1:
        raise InvalidInputError("N must be positive")
    if not (N <= q and q * q <= N**3):
        raise InfeasibleSplitError(f"need N <= q <= N^(3/2); got q={q}, N={N}")
    q0 = powerful_part(factorization)
    free = sorted((p for p, e in factorization if e == 1), reverse=True)

    log_q = math.log(q)
    targets = {3: Q3_EXPONENT * log_q, 2: Q2_EXPONENT * log_q}
    logs = {3: 0.0, 2: 0.0}
    parts: dict[int, list[int]] = {3: [], 2: [], 1: []}
    for p in free:
        open_parts = [k for k in (3, 2) if logs[k] < targets[k]]
        if not open_parts:
            parts[1].append(p)
            continue
        # largest relative shortfall wins; ties go to q3
        k = max(open_parts, key=lambda k: ((targets[k] - logs[k]) / targets[k], k))
        parts[k].append(p)
        logs[k] += math.log(p)

    fac2 = tuple((p, 1) for p in sorted(parts[2]))
    fac3 = tuple((p, 1) for p in sorted(parts[3]))
    fac1 = tuple(sorted([(p, e) for p, e in factorization if e >= 2] + [(p, 1) for p in parts[1]]))
    split = FactorSplit(
        q0=q0,
        q1=arith.from_factorization(fac1),
        q2=arith.from_factorization(fac2),
        q3=arith.from_factorization(fac3),
        N=N,
        fac1=fac1,
        fac2=fac2,
        fac3=fac3,
    )
    bad = split.violations()
    if bad:
        raise InfeasibleSplitError(f"split of q={q} for N={N} fails: " + "; ".join(bad))
    return split


def genthm_rhs(split: FactorSplit, delta: float, eps: float = 0.0, C: float = 1.0) -> float:
    """``C (1 + N^3|delta|) (N^(1/2) q1^(1/2) + N^(1/4) q^(1/4) q2^(1/4) + N^(1/4) q^(1/4) q3^(1/8)) q^eps``."""
    N, q = split.N, split.q
    shape = math.sqrt(N * split.q1) + (N * q * split.q2) ** 0.25 + (N * q) ** 0.25 * split.q3**0.125
    return C * (1 + N**3 * abs(delta)) * shape * q**eps
