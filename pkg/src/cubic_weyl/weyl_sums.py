"""Incomplete cubic Weyl sums and the first reduction to complete sums.

For rational ``alpha = a/q`` the phases come from exact residues ``a n^3 mod q``.
For a quadratic irrational, ``alpha`` is held as a ``P``-bit fixed-point
integer with ``P = 3*ceil(log2 N) + 96`` (plus a few bits for large ``|g|``),
and ``alpha*n^3 mod 1`` is read off the low ``P`` bits of an exact integer
product, so the reduced phase is good to about ``2**-90`` before it is
rounded to a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from . import exp_sums
from .errors import InvalidInputError, ResourceError
from .exp_sums import SumValue
from .quad_field import QuadraticIrrational, RationalApprox

DEFAULT_MAX_N = 1 << 24
GUARD_BITS = 96
CHUNK = 1 << 16


def precision_bits(N: int, alpha: QuadraticIrrational | None = None) -> int:
    bits = 3 * max(1, math.ceil(math.log2(N))) + GUARD_BITS if N > 1 else GUARD_BITS
    if alpha is not None:
        bits += (abs(alpha.g) // alpha.c + 1).bit_length()
    return bits


def as_alpha(alpha):
    """Normalise ``alpha`` to a ``QuadraticIrrational`` or a ``Fraction``."""
    if isinstance(alpha, QuadraticIrrational):
        return alpha
    if isinstance(alpha, (int, Fraction)):
        return Fraction(alpha)
    raise InvalidInputError(f"unsupported alpha {alpha!r}; use a Fraction or QuadraticIrrational")


def _rational_phases(a: int, q: int, n: np.ndarray) -> np.ndarray:
    if q < exp_sums.HARD_MAX_Q:
        r = exp_sums.cubic_residues(a, 0, q, n)
        return r / q
    return np.array([(a * int(k) ** 3 % q) / q for k in n])


def _quadratic_phases(scaled: int, bits: int, n: np.ndarray) -> np.ndarray:
    mask = (1 << bits) - 1
    shift = bits - 64
    top = [((scaled * k * k * k) & mask) >> shift for k in n.tolist()]
    return np.array(top, dtype=np.uint64) * 2.0**-64


def weyl_prefix_sums(alpha, N: int, bits: int | None = None, max_n: int = DEFAULT_MAX_N) -> np.ndarray:
    """Partial sums ``S(alpha, n)`` for ``n = 1..N`` (entry ``n-1``)."""
    if N < 1:
        raise InvalidInputError(f"N must be >= 1, got {N}")
    if N > max_n:
        raise ResourceError(f"N={N} exceeds the precision budget {max_n}")
    alpha = as_alpha(alpha)
    out = np.empty(N, dtype=complex)
    carry = 0j
    if isinstance(alpha, QuadraticIrrational):
        bits = bits or precision_bits(N, alpha)
        scaled = alpha.scaled_floor(bits)
    for start in range(1, N + 1, CHUNK):
        n = np.arange(start, min(N, start + CHUNK - 1) + 1, dtype=np.int64)
        if isinstance(alpha, Fraction):
            phase = _rational_phases(alpha.numerator, alpha.denominator, n)
        else:
            phase = _quadratic_phases(scaled, bits, n)
        block = np.cumsum(np.exp(2j * math.pi * phase)) + carry
        out[start - 1 : start - 1 + len(n)] = block
        carry = block[-1]
    return out


def weyl_sum(alpha, N: int, bits: int | None = None, max_n: int = DEFAULT_MAX_N) -> SumValue:
    """``S(alpha, N) = sum_{n <= N} e(alpha n^3)``."""
    total = weyl_prefix_sums(alpha, N, bits, max_n)[-1]
    return SumValue.of(total, exp_sums.direct_err(N))


@dataclass(frozen=True)
class WeylContext:
    """A reduced fraction ``a/q`` paired with a length ``N <= q``."""

    a: int
    q: int
    N: int
    delta: float | None = None

    def __post_init__(self):
        if self.q < 1 or self.N < 1:
            raise InvalidInputError("q and N must be positive")
        if gcd(self.a, self.q) != 1:
            raise InvalidInputError(f"gcd({self.a}, {self.q}) != 1")
        if self.N > self.q:
            raise InvalidInputError(f"need N <= q, got N={self.N}, q={self.q}")

    @property
    def K(self) -> int:
        return self.q // self.N

    @property
    def in_window(self) -> bool:
        """``N <= q <= N^(3/2)``, checked exactly as ``q^2 <= N^3``."""
        return self.N <= self.q and self.q * self.q <= self.N**3

    def spectrum(self, max_q: int = exp_sums.DEFAULT_MAX_Q) -> exp_sums.Spectrum:
        return exp_sums.complete_cubic_spectrum(self.a, self.q, max_q)


def hq_decompose_check(ctx: WeylContext, t: float) -> float:
    """``|S(a/q, t) - q^-1 sum_{-q/2 < h <= q/2} S(a,h;q) T(h,t;q)|``.

    The left side is a direct prefix sum; the right side uses the FFT
    spectrum and the closed form of ``T``.
    """
    q = ctx.q
    big_t = math.floor(t)
    if big_t < 1:
        lhs = 0j
    else:
        n = np.arange(1, big_t + 1, dtype=np.int64)
        lhs = exp_sums.unit_phases(exp_sums.cubic_residues(ctx.a, 0, q, n), q).sum()
    hs = np.arange(-((q - 1) // 2), q // 2 + 1, dtype=np.int64)
    sp = ctx.spectrum().take(hs)
    rhs = (sp * exp_sums.linear_sums_T(hs, big_t, q)).sum() / q
    return float(abs(lhs - complex(rhs)))


def _block_sums(ctx: WeylContext, side: int, half: bool, r_max: int | None = None) -> np.ndarray:
    """Matrix ``[r-1, L]`` of ``|sum_{(r-1)K < j <= (r-1)K+L} S(a, side*j; q)|``, ``L = 0..K``."""
    K, q = ctx.K, ctx.q
    if half:
        # positive side keeps h <= q/2, negative side keeps h > -q/2
        j_max = q // 2 if side > 0 else (q - 1) // 2
    else:
        j_max = (r_max or q) * K
    rows = -(-j_max // K) if j_max else 0
    if r_max is not None:
        rows = min(rows, r_max)
    vals = np.zeros(rows * K, dtype=np.clongdouble)
    j = np.arange(1, min(j_max, rows * K) + 1, dtype=np.int64)
    vals[: len(j)] = ctx.spectrum().take(side * j)
    cums = np.cumsum(vals.reshape(rows, K), axis=1)
    out = np.zeros((rows, K + 1))
    out[:, 1:] = np.abs(cums.astype(complex))
    return out


def eta_values(ctx: WeylContext, side: int = 1, half: bool = True) -> np.ndarray:
    """``eta(r)`` for ``r = 1, 2, ...`` (entry ``r-1``) up to the last non-empty block.

    ``half=True`` keeps ``h`` inside ``(-q/2, q/2]``, the range of the
    decomposition; ``half=False`` follows the definition literally over
    ``r <= q`` using the periodicity of ``S(a, h; q)`` in ``h``.
    """
    return _block_sums(ctx, side, half).max(axis=1)


def eta_r(ctx: WeylContext, r: int, side: int = 1, half: bool = True) -> float:
    """``max_{0 <= L <= K} |sum_{(r-1)K < h <= (r-1)K+L} S(a, h; q)|``."""
    value, _ = eta_r_argmax(ctx, r, side, half)
    return value


def eta_r_argmax(ctx: WeylContext, r: int, side: int = 1, half: bool = True) -> tuple[float, int]:
    """``eta(r)`` and the smallest maximising ``L``."""
    if r < 1:
        raise InvalidInputError(f"r must be >= 1, got {r}")
    K, q = ctx.K, ctx.q
    lo = (r - 1) * K
    j_max = (q // 2 if side > 0 else (q - 1) // 2) if half else lo + K
    j = np.arange(lo + 1, min(lo + K, j_max) + 1, dtype=np.int64)
    partial = np.zeros(K + 1)
    if len(j):
        cums = np.cumsum(ctx.spectrum().take(side * j))
        partial[1 : len(j) + 1] = np.abs(cums.astype(complex))
        partial[len(j) + 1 :] = partial[len(j)]
    L = int(np.argmax(partial))
    return float(partial[L]), L


def eta_bound_ratio(ctx: WeylContext) -> float:
    """``|S(a/q, N)|`` over ``(N/q) (|S(a,0;q)| + sum_r (eta+(r) + eta-(r)) / r)``.

    Both halves of the ``h`` range are kept and the ``h = 0`` term is added
    explicitly, so no half is assumed to dominate.
    """
    if not ctx.in_window:
        raise InvalidInputError(f"need N <= q <= N^(3/2), got N={ctx.N}, q={ctx.q}")
    lhs = abs(weyl_sum(Fraction(ctx.a, ctx.q), ctx.N))
    total = abs(complex(ctx.spectrum().values[0]))
    for side in (1, -1):
        eta = eta_values(ctx, side)
        total += float((eta / np.arange(1, len(eta) + 1)).sum())
    rhs = ctx.N / ctx.q * total
    return lhs / rhs if rhs else (0.0 if lhs == 0 else math.inf)


def alpha_minus(alpha, a: int, q: int) -> float:
    """``alpha - a/q`` as a float, computed without cancellation."""
    alpha = as_alpha(alpha)
    if isinstance(alpha, Fraction):
        return float(alpha - Fraction(a, q))
    bits = 2 * q.bit_length() + 160
    root = math.isqrt(alpha.d << (2 * bits))
    num = (alpha.f * q - a * alpha.c) * (1 << bits) + alpha.g * q * root
    return float(Fraction(num, alpha.c * q << bits))


def transfer_bound_check(alpha, approx: RationalApprox, N: int) -> float:
    """``|S(alpha, N)| / ((1 + N^3 |delta|) max_{t <= N} |S(a/q, t)|)``."""
    delta = alpha_minus(alpha, approx.a, approx.q)
    lhs = abs(weyl_sum(alpha, N))
    sup = float(np.abs(weyl_prefix_sums(Fraction(approx.a, approx.q), N)).max())
    denom = (1 + N**3 * abs(delta)) * sup
    return lhs / denom if denom else (0.0 if lhs == 0 else math.inf)
