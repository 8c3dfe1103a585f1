"""Complete cubic exponential sums and their van der Corput iterates.

    S(a, h; q)      = sum_{n mod q} e((a n^3 + h n) / q)
    T(h, t; q)      = sum_{1 <= n <= t} e(-h n / q)
    S2(b, m, n; v)  = S(b, n + s1; v) * conj S(b, n; v)
    S3(c, m, u, n)  = S2(c, m, n + s2; v) * conj S2(c, m, n; v)
    S4(c, m, u, t)  = sum_{n mod v} S3(c, m, u, n; v) e(n t / v)

with ``s1 = m*q1`` and ``s2 = u*q2`` carried by :class:`ShiftSpec`.

Every phase is formed from an exact integer residue before it is turned into
a float, so the only floating error is in evaluating ``exp`` and summing.
``S(a, ., q)`` is the inverse DFT of ``n -> e(a n^3 / q)``; the spectrum path
uses numpy's pocketfft, which handles any length (Bluestein for large prime
factors) in O(q log q).

Direct sums run in float64.  Spectra and everything assembled from them
(``S2``, ``S3``, ``S4``) run in x87 extended precision: ``S4`` reaches 1e10 at
moduli near 2500, where float64 rounding alone is already 1e-6.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ResourceError

DEFAULT_MAX_Q = 1 << 24
# int64 residue arithmetic needs q**2 < 2**63
HARD_MAX_Q = 1 << 31
CHUNK = 1 << 20

TWO_PI = 2.0 * math.pi
TWO_PI_EXT = 2 * np.longdouble("3.14159265358979323846264338327950288")
# error of one exp(2 pi i r/q) evaluation, argument rounding included
TERM_EPS = 2.0**-49
ROUND_EPS = 2.0**-53
EXT_EPS = float(np.finfo(np.longdouble).eps)


@dataclass(frozen=True)
class SumValue:
    """A complex sum with an absolute bound ``err`` on its floating error."""

    re: float
    im: float
    err: float = 0.0

    @classmethod
    def of(cls, z: complex, err: float = 0.0) -> "SumValue":
        return cls(float(z.real), float(z.imag), float(err))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __abs__(self):
        return math.hypot(self.re, self.im)

    def conj(self) -> "SumValue":
        return SumValue(self.re, -self.im, self.err)

    def __mul__(self, other: "SumValue") -> "SumValue":
        z = self.value * other.value
        err = abs(self) * other.err + abs(other) * self.err + self.err * other.err
        return SumValue.of(z, err + abs(z) * 4 * ROUND_EPS)

    def to_dict(self) -> dict:
        return {"re": self.re, "im": self.im, "abs": abs(self), "err": self.err}


@dataclass(frozen=True)
class ShiftSpec:
    shift1: int = 0
    shift2: int = 0


def direct_err(terms: int) -> float:
    """Error bound for a direct sum of ``terms`` unit phases."""
    return terms * (TERM_EPS + math.log2(terms + 1) * ROUND_EPS)


def fft_err(q: int) -> float:
    """Per-entry error bound for an extended-precision spectrum of length ``q``."""
    return q * 16 * (1 + math.log2(q + 1)) * EXT_EPS


def _check_modulus(q: int, max_q: int):
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if q > min(max_q, HARD_MAX_Q):
        raise ResourceError(f"modulus {q} exceeds the budget {min(max_q, HARD_MAX_Q)}")


def cubic_residues(a: int, h: int, q: int, n: np.ndarray) -> np.ndarray:
    """``(a n^3 + h n) mod q`` computed exactly in int64 (``q < 2**31``)."""
    n = n % q
    cube = (n * n % q) * n % q
    return ((a % q) * cube + (h % q) * n) % q


def unit_phases(r: np.ndarray, q: int) -> np.ndarray:
    """``e(r/q)`` for integer residues ``0 <= r < q``."""
    return np.exp((TWO_PI / q) * r * 1j) if q > 1 else np.ones(np.shape(r), dtype=complex)


def unit_phases_ext(r: np.ndarray, q: int) -> np.ndarray:
    """Extended-precision ``e(r/q)``."""
    theta = (TWO_PI_EXT / q) * np.asarray(r, dtype=np.longdouble)
    return np.cos(theta) + 1j * np.sin(theta)


def complete_cubic_sum(a: int, h: int, q: int, max_q: int = DEFAULT_MAX_Q) -> SumValue:
    """Direct O(q) evaluation of ``S(a, h; q)``.

    >>> round(abs(complete_cubic_sum(1, 0, 9)), 4)
    7.5963
    """
    _check_modulus(q, max_q)
    total = 0j
    for start in range(0, q, CHUNK):
        n = np.arange(start, min(q, start + CHUNK), dtype=np.int64)
        total += unit_phases(cubic_residues(a, h, q, n), q).sum()
    return SumValue.of(total, direct_err(q))


def complete_cubic_sums_direct(a: int, hs, q: int, max_q: int = DEFAULT_MAX_Q) -> np.ndarray:
    """``S(a, h; q)`` for each ``h`` in ``hs`` by direct summation, never by FFT."""
    _check_modulus(q, max_q)
    hs = np.asarray(hs, dtype=np.int64) % q
    n = np.arange(q, dtype=np.int64)
    base = cubic_residues(a, 0, q, n)
    out = np.empty(len(hs), dtype=complex)
    rows = max(1, CHUNK // q)
    for i in range(0, len(hs), rows):
        block = hs[i : i + rows, None]
        r = (base[None, :] + (block * n[None, :]) % q) % q
        out[i : i + rows] = unit_phases(r, q).sum(axis=1)
    return out


class Spectrum:
    """All of ``S(a, h; q)`` for ``h mod q``; read-only."""

    def __init__(self, a: int, q: int, values: np.ndarray):
        values.setflags(write=False)
        self.a = a
        self.q = q
        self.values = values
        self.err = fft_err(q)

    def __len__(self):
        return self.q

    def __getitem__(self, h: int) -> SumValue:
        return SumValue.of(complex(self.values[h % self.q]), self.err)

    def take(self, hs) -> np.ndarray:
        return self.values[np.asarray(hs, dtype=np.int64) % self.q]


class _LRU:
    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return None

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def resize(self, maxsize: int):
        with self._lock:
            self.maxsize = maxsize
            while len(self._data) > maxsize:
                self._data.popitem(last=False)

    def clear(self):
        with self._lock:
            self._data.clear()


_spectrum_cache = _LRU(256)


def set_spectrum_cache_size(maxsize: int):
    _spectrum_cache.resize(maxsize)


def clear_spectrum_cache():
    _spectrum_cache.clear()


def complete_cubic_spectrum(a: int, q: int, max_q: int = DEFAULT_MAX_Q) -> Spectrum:
    """``S(a, h; q)`` for every ``h`` at once, O(q log q)."""
    _check_modulus(q, max_q)
    key = (a % q, q)
    spec = _spectrum_cache.get(key)
    if spec is None:
        n = np.arange(q, dtype=np.int64)
        x = unit_phases_ext(cubic_residues(a, 0, q, n), q)
        # sum_n x_n e(h n / q) is q times numpy's inverse transform
        spec = Spectrum(a % q, q, np.fft.ifft(x) * q)
        _spectrum_cache.put(key, spec)
    return spec


def linear_sum_T(h: int, t: float, q: int) -> SumValue:
    """``T(h, t; q)`` in closed form.

    >>> linear_sum_T(1, 2, 4).value
    (-1-1j)
    """
    big_t = math.floor(t)
    if big_t <= 0:
        return SumValue(0.0, 0.0, 0.0)
    val = complex(linear_sums_T(np.array([h]), big_t, q)[0])
    if h % q == 0:
        return SumValue.of(val, 0.0)
    # the closed form divides by |1 - e(-h/q)| = 2 sin(pi h/q)
    return SumValue.of(val, 16 * ROUND_EPS * (1 + 1 / abs(math.sin(math.pi * (h % q) / q))))


def linear_sums_T(hs: np.ndarray, t: float, q: int) -> np.ndarray:
    """Vectorised ``T(h, t; q)`` over an integer array ``hs``."""
    big_t = math.floor(t)
    hs = np.asarray(hs, dtype=np.int64) % q
    out = np.full(hs.shape, float(max(big_t, 0)), dtype=complex)
    if big_t <= 0:
        return out
    nz = hs != 0
    h = hs[nz]
    z = np.exp(-(TWO_PI / q) * h * 1j)
    z_t = np.exp(-(TWO_PI / q) * ((h * (big_t % q)) % q) * 1j)
    # 1 - z = -2i sin(pi h/q) e(-h/(2q)) keeps full relative accuracy for small h/q
    one_minus_z = 2j * np.sin(math.pi * h / q) * np.exp(-(math.pi / q) * h * 1j)
    out[nz] = z * (1 - z_t) / one_minus_z
    return out


def s2_table(b: int, shift1: int, v: int, max_q: int = DEFAULT_MAX_Q) -> np.ndarray:
    """``S2(b, m, n; v)`` for all ``n mod v``."""
    sp = complete_cubic_spectrum(b, v, max_q).values
    n = np.arange(v, dtype=np.int64)
    return sp[(n + shift1) % v] * np.conj(sp)


def s3_table(c: int, spec: ShiftSpec, v: int, max_q: int = DEFAULT_MAX_Q) -> np.ndarray:
    """``S3(c, m, u, n; v)`` for all ``n mod v``."""
    s2 = s2_table(c, spec.shift1, v, max_q)
    n = np.arange(v, dtype=np.int64)
    return s2[(n + spec.shift2) % v] * np.conj(s2)


def _product_err(v: int, factors: int) -> float:
    # |S| <= v for each factor, each carrying fft_err(v)
    return factors * v ** (factors - 1) * fft_err(v) * 1.01


def shifted_products(b: int, spec: ShiftSpec, n: int, v: int, level: int, max_q: int = DEFAULT_MAX_Q) -> SumValue:
    """``S2`` (level 2) or ``S3`` (level 3) at a single ``n``."""
    sp = complete_cubic_spectrum(b, v, max_q)
    if level == 2:
        return sp[n + spec.shift1] * sp[n].conj()
    if level == 3:
        first = sp[n + spec.shift2 + spec.shift1] * sp[n + spec.shift2].conj()
        second = sp[n + spec.shift1] * sp[n].conj()
        return first * second.conj()
    raise ValueError(f"level must be 2 or 3, got {level}")


def s4(c: int, spec: ShiftSpec, t: int, v: int, max_q: int = DEFAULT_MAX_Q) -> SumValue:
    """``S4(c, m, u, t; v)`` at one ``t``, assembled from the cached spectrum."""
    return SumValue.of(complex(s4_ext(c, spec, t, v, max_q)), v * _product_err(v, 4) + v**5 * 8 * EXT_EPS)


def s4_ext(c: int, spec: ShiftSpec, t: int, v: int, max_q: int = DEFAULT_MAX_Q) -> np.clongdouble:
    """``S4`` at one ``t`` kept in extended precision."""
    s3 = s3_table(c, spec, v, max_q)
    n = np.arange(v, dtype=np.int64)
    return (s3 * unit_phases_ext((n * (t % v)) % v, v)).sum()


def m4_residual(c: int, spec: ShiftSpec, t: int, v: int, w: int, max_q: int = DEFAULT_MAX_Q) -> float:
    """``|S4(c,.,t; vw) - S4(c w^2,., w' t; v) S4(c v^2,., v' t; w)|`` for coprime ``v, w``.

    ``w'`` inverts ``w`` mod ``v`` and ``v'`` inverts ``v`` mod ``w``.
    """
    if math.gcd(v, w) != 1:
        raise ValueError(f"moduli {v} and {w} are not coprime")
    w_bar = pow(w, -1, v) if v > 1 else 0
    v_bar = pow(v, -1, w) if w > 1 else 0
    lhs = s4_ext(c, spec, t, v * w, max_q)
    rhs = s4_ext(c * w * w, spec, w_bar * t, v, max_q) * s4_ext(c * v * v, spec, v_bar * t, w, max_q)
    return float(abs(lhs - rhs))


def s4_spectrum(c: int, spec: ShiftSpec, v: int, max_q: int = DEFAULT_MAX_Q) -> np.ndarray:
    """``S4(c, m, u, t; v)`` for every ``t mod v`` with one transform."""
    s3 = s3_table(c, spec, v, max_q)
    return np.fft.ifft(s3) * v


def s4_grid(c: int, v: int, shifts1, shifts2, max_q: int = DEFAULT_MAX_Q) -> np.ndarray:
    """``S4`` over a grid of raw shifts: result ``[i, j, t]`` for ``shifts1[i]``, ``shifts2[j]``."""
    sp = complete_cubic_spectrum(c, v, max_q).values
    n = np.arange(v, dtype=np.int64)
    shifts2 = np.asarray(shifts2, dtype=np.int64)
    out = np.empty((len(shifts1), len(shifts2), v), dtype=complex)
    for i, s1 in enumerate(shifts1):
        s2 = sp[(n + s1) % v] * np.conj(sp)
        s3 = s2[(n[None, :] + shifts2[:, None]) % v] * np.conj(s2)[None, :]
        out[i] = np.fft.ifft(s3, axis=1) * v
    return out


def s4_direct(c: int, spec: ShiftSpec, v: int) -> np.ndarray:
    """``S4`` for every ``t mod v`` from the expanded quadruple sum, O(v^4).

    Summing over ``n`` first leaves ``v`` times the sum over ``w, x, y`` with
    ``z = x + y - w - t`` of ``e((c(w^3 - x^3 - y^3 + z^3) + s2 (w - x) + s1 (w - y)) / v)``.
    Uses no complete sums at all, so it checks the spectrum path independently.
    """
    w, x, y = np.meshgrid(*(np.arange(v, dtype=np.int64),) * 3, indexing="ij")
    cube = lambda k: (k * k % v) * k % v  # noqa: E731
    fixed = ((c % v) * ((cube(w) - cube(x) - cube(y)) % v) + (spec.shift2 % v) * (w - x) + (spec.shift1 % v) * (w - y)) % v
    out = np.empty(v, dtype=complex)
    for t in range(v):
        z = (x + y - w - t) % v
        out[t] = v * unit_phases((fixed + (c % v) * cube(z)) % v, v).sum()
    return out
