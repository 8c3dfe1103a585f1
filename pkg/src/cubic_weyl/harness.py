"""Verification suites: identities checked to a tolerance, envelopes measured.

Every suite draws its instances from ``random.Random(seed)`` and nothing else,
so a ``SuiteReport`` is a pure function of ``(name, trials, seed, bounds)``.
Identity suites record ``ratio = residual / tolerance`` (threshold 1);
envelope suites record ``ratio = lhs / envelope`` against a fixed generous
constant, so the report doubles as a measurement of the implied constant.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import arith, exp_sums, factor_plan, quad_field, weyl_sums
from .errors import FactorizationError, InfeasibleSplitError, InvalidInputError, ResourceError
from .exp_sums import ShiftSpec
from .factor_plan import FactorSplit
from .quad_field import QuadraticIrrational
from .weyl_sums import WeylContext

log = logging.getLogger(__name__)


@dataclass
class SuiteReport:
    suite: str
    trials: int
    seed: int
    bounds: dict
    threshold: float
    records: list = field(default_factory=list)
    skipped: int = 0
    runtime: float = 0.0

    @property
    def max_ratio(self) -> float:
        return max((r["ratio"] for r in self.records), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_ratio <= self.threshold

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "trials": self.trials,
            "seed": self.seed,
            "bounds": self.bounds,
            "threshold": self.threshold,
            "max_ratio": self.max_ratio,
            "pass": self.passed,
            "skipped": self.skipped,
            "records": self.records,
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return out


def _coprime_to(rng: random.Random, q: int) -> int:
    if q == 1:
        return 1
    while True:
        a = rng.randrange(1, q)
        if math.gcd(a, q) == 1:
            return a


def gcd_sum(v: int, H1: int, H2: int, rho: float) -> float:
    """``sum_{H2 - H1 < h <= H2} gcd(h, v)^rho`` by brute force."""
    h = np.arange(H2 - H1 + 1, H2 + 1, dtype=np.int64)
    return float((np.gcd(h, v).astype(float) ** rho).sum())


def _product_formula(rng, bounds):
    top = bounds["max_uv"]
    u, v = rng.randint(1, top), rng.randint(1, top)
    if math.gcd(u, v) != 1:
        return None
    q = u * v
    a, h = rng.randrange(q), rng.randrange(q)
    whole = exp_sums.complete_cubic_sum(a, h, q)
    parts = exp_sums.complete_cubic_sum(a * v * v, h, u) * exp_sums.complete_cubic_sum(a * u * u, h, v)
    residual = abs(whole.value - parts.value)
    return {"inputs": {"a": a, "h": h, "u": u, "v": v}, "lhs": residual, "rhs": bounds["tol"]}


def _lv_envelope(rng, bounds):
    q = rng.randint(1, bounds["max_q"])
    a, h = _coprime_to(rng, q), rng.randrange(q)
    lhs = abs(exp_sums.complete_cubic_sum(a, h, q))
    rhs = math.sqrt(q) * math.gcd(q, h) ** 0.25 * arith.divisor_count(q)
    return {"inputs": {"a": a, "h": h, "q": q}, "lhs": lhs, "rhs": rhs}


def _gcd_sum(rng, bounds):
    v = rng.randint(1, bounds["max_v"])
    H2 = rng.randint(1, bounds["max_h"])
    H1 = rng.randint(1, H2)
    rho = rng.random()
    lhs = gcd_sum(v, H1, H2, rho)
    rhs = (H1 + min(v, H2)) * arith.divisor_count(v)
    return {"inputs": {"v": v, "H1": H1, "H2": H2, "rho": rho}, "lhs": lhs, "rhs": rhs}


def _m4(rng, bounds):
    v, w = rng.randint(1, bounds["max_vw"]), rng.randint(1, bounds["max_vw"])
    if math.gcd(v, w) != 1:
        return None
    q = v * w
    c, m, u, t = rng.randrange(q), rng.randrange(q), rng.randrange(q), rng.randrange(q)
    residual = exp_sums.m4_residual(c, ShiftSpec(m, u), t, v, w)
    return {"inputs": {"c": c, "m": m, "u": u, "t": t, "v": v, "w": w}, "lhs": residual, "rhs": bounds["tol"]}


def s4_envelope_denominator(p: int, m: int, u: int, t: int) -> float:
    return p**2.5 * math.sqrt(math.gcd(math.gcd(math.gcd(p, t), m), u))


def _s4_prime(rng, bounds):
    primes = [int(p) for p in arith.primes_up_to(bounds["max_p"])]
    p = rng.choice(primes)
    c, m, u, t = rng.randrange(1, p), rng.randrange(p), rng.randrange(p), rng.randrange(p)
    lhs = abs(exp_sums.s4(c, ShiftSpec(m, u), t, p))
    return {"inputs": {"p": p, "c": c, "m": m, "u": u, "t": t}, "lhs": lhs, "rhs": s4_envelope_denominator(p, m, u, t)}


def _s_a0(rng, bounds):
    q = rng.randint(1, bounds["max_q"])
    a = _coprime_to(rng, q)
    lhs = abs(exp_sums.complete_cubic_sum(a, 0, q))
    return {"inputs": {"a": a, "q": q}, "lhs": lhs, "rhs": q ** (2 / 3)}


def _decompose(rng, bounds):
    q = rng.randint(1, bounds["max_q"])
    a = _coprime_to(rng, q)
    t = rng.uniform(0, q)
    residual = weyl_sums.hq_decompose_check(WeylContext(a, q, q), t)
    return {"inputs": {"a": a, "q": q, "t": t}, "lhs": residual, "rhs": bounds["tol"] * q}


def _eta_bound(rng, bounds):
    N = rng.randint(bounds["min_n"], bounds["max_n"])
    q_hi = min(math.isqrt(N**3), bounds["max_q"])
    if q_hi < N:
        return None
    q = rng.randint(N, q_hi)
    a = _coprime_to(rng, q)
    ctx = WeylContext(a, q, N)
    ratio = weyl_sums.eta_bound_ratio(ctx)
    return {"inputs": {"a": a, "q": q, "N": N}, "lhs": ratio, "rhs": 1.0}


# name -> (trial function, threshold, default bounds)
SUITES = {
    "product-formula": (_product_formula, 1.0, {"max_uv": 500, "tol": 1e-6}),
    "lv-envelope": (_lv_envelope, 10.0, {"max_q": 10_000}),
    "gcd-sum": (_gcd_sum, 1.0, {"max_v": 10_000, "max_h": 20_000}),
    "m4": (_m4, 1.0, {"max_vw": 50, "tol": 1e-6}),
    "s4-prime-bound": (_s4_prime, 4.0, {"max_p": 97}),
    "s-a0-envelope": (_s_a0, 10.0, {"max_q": 10_000}),
    "decompose-identity": (_decompose, 1.0, {"max_q": 10_000, "tol": 1e-8}),
    "lemma1": (_eta_bound, 20.0, {"min_n": 20, "max_n": 400, "max_q": 8000}),
}

# per-suite resource ceilings on the bounds a caller may request
_BOUND_LIMITS = {"max_uv": 4096, "max_q": 1 << 20, "max_v": 1 << 22, "max_h": 1 << 22, "max_vw": 200, "max_p": 1000, "max_n": 4000}


def run_suite(name: str, trials: int, seed: int, bounds: dict | None = None) -> SuiteReport:
    """Run ``trials`` seeded instances of the named property."""
    if name not in SUITES:
        raise InvalidInputError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn, threshold, defaults = SUITES[name]
    merged = {**defaults, **(bounds or {})}
    for key, value in merged.items():
        if key in _BOUND_LIMITS and value > _BOUND_LIMITS[key]:
            raise ResourceError(f"{key}={value} exceeds the limit {_BOUND_LIMITS[key]}")
    rng = random.Random(seed)
    report = SuiteReport(name, trials, seed, merged, threshold)
    start = time.perf_counter()
    for trial in range(trials):
        rec = fn(rng, merged)
        if rec is None:
            report.skipped += 1
            continue
        rec["ratio"] = rec["lhs"] / rec["rhs"] if rec["rhs"] else (0.0 if rec["lhs"] == 0 else math.inf)
        report.records.append({"trial": trial, **rec})
    report.runtime = time.perf_counter() - start
    log.info("suite %s: %d records, max ratio %.4g, %.2fs", name, len(report.records), report.max_ratio, report.runtime)
    return report


def s4_prime_envelope(p: int, cs=None) -> dict:
    """Exhaustive ``max |S4(c,m,u,t;p)| / (p^(5/2) (p,t,m,u)^(1/2))`` over all residue triples.

    Besides the overall maximum, reports the maximum within each degeneracy
    class of ``(m, u, t) mod p``, since the classes behave differently.
    """
    cs = range(1, p) if cs is None else cs
    idx = np.arange(p)
    mm, uu, tt = np.meshgrid(idx, idx, idx, indexing="ij")
    g = np.gcd(np.gcd(np.gcd(mm, uu), tt), p)
    denom = p**2.5 * np.sqrt(g)
    classes = {
        "m,u,t nonzero": (mm > 0) & (uu > 0) & (tt > 0),
        "t=0; m,u nonzero": (mm > 0) & (uu > 0) & (tt == 0),
        "m=u=0; t nonzero": (mm == 0) & (uu == 0) & (tt > 0),
        "exactly one of m,u zero": (mm == 0) ^ (uu == 0),
        "m=u=t=0": (mm == 0) & (uu == 0) & (tt == 0),
    }
    best = {"ratio": 0.0}
    by_class = {k: 0.0 for k in classes}
    for c in cs:
        ratio = np.abs(exp_sums.s4_grid(c, p, idx, idx).astype(complex)) / denom
        i = np.unravel_index(int(ratio.argmax()), ratio.shape)
        if ratio[i] > best["ratio"]:
            best = {"ratio": float(ratio[i]), "c": int(c), "m": int(i[0]), "u": int(i[1]), "t": int(i[2])}
        for k, mask in classes.items():
            if mask.any():
                by_class[k] = max(by_class[k], float(ratio[mask].max()))
    return {"p": p, "max_ratio": best["ratio"], "argmax": best, "by_class": by_class}


def _cs_slack(big: float, small: float) -> tuple[float, bool]:
    """Slack ``big - small`` and whether it is nonnegative up to rounding."""
    slack = big - small
    return slack, slack >= -1e-12 * max(abs(big), abs(small), 1.0)


def iteration_trace(split: FactorSplit, a: int, max_q: int = 10_000) -> dict:
    """Every quantity of both A-process steps and the B-process, from the definitions.

    For each ``r <= q`` the interval ``I`` is the maximising block of
    ``eta(r)``; then for every ``|m| <= M`` and ``|u| <= U`` the chain
    ``M^2 eta^2 <= eta1 eta2``, ``eta2 <= M sum |eta3|``,
    ``|eta3|^2 <= U^-2 eta4 eta5``, ``eta5 <= U sum |eta6|`` and the
    completion bound for ``eta6`` are evaluated.  The two Cauchy-Schwarz steps
    must hold; the envelope steps are reported as ratios.
    """
    q, N, K, M, U = split.q, split.N, split.K, split.M, split.U
    q1, q2, q3 = split.q1, split.q2, split.q3
    if q > max_q:
        raise ResourceError(f"q={q} too large for a full trace (limit {max_q})")
    if math.gcd(a, q) != 1:
        raise InvalidInputError(f"gcd({a}, {q}) != 1")
    if M < 1 or U < 1:
        raise InvalidInputError(f"need M, U >= 1; got M={M}, U={U}")
    a1 = a * q2 * q2 * q3 * q3
    b = a * q1 * q1
    b2 = b * q3 * q3
    c = b * q2 * q2
    S_q = exp_sums.complete_cubic_spectrum(a, q).values
    S_1 = exp_sums.complete_cubic_spectrum(a1, q1).values
    S_23 = exp_sums.complete_cubic_spectrum(b, q2 * q3).values
    S_2 = exp_sums.complete_cubic_spectrum(b2, q2).values
    S_3 = exp_sums.complete_cubic_spectrum(c, q3).values
    ctx = WeylContext(a, q, N)

    def spec(arr, mod, hs):
        return arr[np.asarray(hs, dtype=np.int64) % mod]

    def s2(arr, mod, m, hs):
        hs = np.asarray(hs, dtype=np.int64)
        return spec(arr, mod, hs + m * q1) * np.conj(spec(arr, mod, hs))

    d1, d2 = arith.divisor_count(q1), arith.divisor_count(q2)
    t_range = np.arange(-((q3 - 1) // 2), q3 // 2 + 1, dtype=np.int64)
    t_weight = np.where(t_range == 0, K, np.minimum(K, q3 / np.maximum(np.abs(t_range), 1)))
    s4_cache: dict = {}

    stats = {
        "cs_first_min_slack": math.inf, "cs_first_ok": True,
        "shift_sum_first_min_slack": math.inf, "shift_sum_first_ok": True,
        "cs_second_min_slack": math.inf, "cs_second_ok": True,
        "shift_sum_second_min_slack": math.inf, "shift_sum_second_ok": True,
        "eta1_envelope_ratio": 0.0, "eta4_envelope_ratio": 0.0, "completion_ratio": 0.0,
        "identity_max_residual": 0.0, "eta3_zero_min_real": math.inf, "eta3_zero_max_imag": 0.0,
    }
    checks = {"cs_first": 0, "cs_second": 0}

    def track_identity(x, y):
        scale = max(1.0, abs(complex(x)), abs(complex(y)))
        stats["identity_max_residual"] = max(stats["identity_max_residual"], abs(complex(x - y)) / scale)

    for r in range(1, q + 1):
        eta, L = weyl_sums.eta_r_argmax(ctx, r, half=False)
        lo = (r - 1) * K
        I = np.arange(lo + 1, lo + L + 1, dtype=np.int64)
        in_I = lambda x: (x > lo) & (x <= lo + L)  # noqa: E731
        sigma = spec(S_q, q, I).sum()
        h = np.arange((r - 2) * K + 1, r * K, dtype=np.int64)

        # first A-process
        inner = np.zeros(len(h), dtype=np.clongdouble)
        for m in range(1, M + 1):
            n = h + m * q1
            inner += np.where(in_I(n), spec(S_23, q2 * q3, n), 0)
        track_identity(M * sigma, (spec(S_1, q1, h) * inner).sum())
        eta1 = float((np.abs(spec(S_1, q1, h).astype(complex)) ** 2).sum())
        eta2 = float((np.abs(inner.astype(complex)) ** 2).sum())
        slack, ok = _cs_slack(eta1 * eta2, M * M * abs(complex(sigma)) ** 2)
        stats["cs_first_min_slack"] = min(stats["cs_first_min_slack"], slack)
        stats["cs_first_ok"] &= ok
        checks["cs_first"] += 1
        stats["eta1_envelope_ratio"] = max(stats["eta1_envelope_ratio"], eta1 / (q1 * (K + q1) * d1))

        eta3 = {}
        weighted = 0
        for m in range(-M, M + 1):
            I_m = I[in_I(I + m * q1)]
            eta3[m] = (s2(S_23, q2 * q3, m, I_m)).sum()
            weighted += (M - abs(m)) * eta3[m]
        track_identity(weighted, eta2)
        slack, ok = _cs_slack(M * sum(abs(complex(v)) for v in eta3.values()), eta2)
        stats["shift_sum_first_min_slack"] = min(stats["shift_sum_first_min_slack"], slack)
        stats["shift_sum_first_ok"] &= ok
        stats["eta3_zero_min_real"] = min(stats["eta3_zero_min_real"], float(eta3[0].real))
        stats["eta3_zero_max_imag"] = max(stats["eta3_zero_max_imag"], abs(float(eta3[0].imag)))

        # second A-process, one m at a time
        for m in range(-M, M + 1):
            I_m = I[in_I(I + m * q1)]
            in_Im = lambda x: np.isin(x, I_m)  # noqa: E731
            if len(I_m):
                track_identity(eta3[m], (s2(S_2, q2, m, I_m) * s2(S_3, q3, m, I_m)).sum())
            inner2 = np.zeros(len(h), dtype=np.clongdouble)
            for u in range(1, U + 1):
                n = h + u * q2
                inner2 += np.where(in_Im(n), s2(S_3, q3, m, n), 0)
            track_identity(U * eta3[m], (s2(S_2, q2, m, h) * inner2).sum())
            eta4 = float((np.abs(s2(S_2, q2, m, h).astype(complex)) ** 2).sum())
            eta5 = float((np.abs(inner2.astype(complex)) ** 2).sum())
            slack, ok = _cs_slack(eta4 * eta5 / (U * U), abs(complex(eta3[m])) ** 2)
            stats["cs_second_min_slack"] = min(stats["cs_second_min_slack"], slack)
            stats["cs_second_ok"] &= ok
            checks["cs_second"] += 1
            stats["eta4_envelope_ratio"] = max(stats["eta4_envelope_ratio"], eta4 / (q2 * q2 * (K + q2) * d2))

            weighted5, abs6 = 0, 0.0
            for u in range(-U, U + 1):
                I_mu = I_m[in_Im(I_m + u * q2)]
                s3 = s2(S_3, q3, m, I_mu + u * q2) * np.conj(s2(S_3, q3, m, I_mu))
                eta6 = s3.sum()
                weighted5 += (U - abs(u)) * eta6
                abs6 += abs(complex(eta6))
                key = (m % q3, u % q3)
                if key not in s4_cache:
                    s4_cache[key] = exp_sums.s4_spectrum(c, ShiftSpec(m * q1, u * q2), q3)
                s4t = s4_cache[key][t_range % q3]
                lin = np.array([exp_sums.unit_phases((-(I_mu * t)) % q3, q3).sum() for t in t_range])
                track_identity(eta6, (s4t * lin).sum() / q3)
                bound = float((t_weight * np.abs(s4t.astype(complex))).sum() / q3)
                if bound > 0:
                    stats["completion_ratio"] = max(stats["completion_ratio"], abs(complex(eta6)) / bound)
            track_identity(weighted5, eta5)
            slack, ok = _cs_slack(U * abs6, eta5)
            stats["shift_sum_second_min_slack"] = min(stats["shift_sum_second_min_slack"], slack)
            stats["shift_sum_second_ok"] &= ok

    return {"split": split.to_dict(), "a": a, "r_max": q, "checks": checks, **stats}


@dataclass
class ScanRecord:
    N: int
    abs_sum: float
    running_sup: float
    slope: float | None
    q: int | None = None
    bound_ratio: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "abs_sum": self.abs_sum,
            "running_sup": self.running_sup,
            "slope": self.slope,
            "q": self.q,
            "bound_ratio": self.bound_ratio,
            "note": self.note,
        }


def fit_slope(xs, ys) -> float | None:
    """Least-squares slope of ``log y`` against ``log x``; None for fewer than two points."""
    if len(xs) < 2:
        return None
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


def exponent_scan(alpha, N_min: int, N_max: int, eps: float = 1.0, max_n: int = weyl_sums.DEFAULT_MAX_N) -> list[ScanRecord]:
    """``|S(alpha, N)|`` and its running supremum at each power of two in ``[N_min, N_max]``.

    The supremum runs over every ``N' <= N``, not only the sampled powers.
    When the smooth approximation with denominator at most ``N^(3/2)`` admits
    a valid split, the ratio of ``|S(alpha, N)|`` to the composite bound (with
    unit constant and no ``q^eps``) is recorded as well.
    """
    for x in (N_min, N_max):
        if x < 1 or x & (x - 1):
            raise InvalidInputError(f"{x} is not a power of two")
    prefix = weyl_sums.weyl_prefix_sums(alpha, N_max, max_n=max_n)
    sup = np.maximum.accumulate(np.abs(prefix))
    records: list[ScanRecord] = []
    Ns, sups = [], []
    N = N_min
    while N <= N_max:
        Ns.append(N)
        sups.append(float(sup[N - 1]))
        rec = ScanRecord(N, float(abs(prefix[N - 1])), sups[-1], fit_slope(Ns, sups))
        if isinstance(alpha, QuadraticIrrational):
            _attach_bound_ratio(rec, alpha, N, eps)
        records.append(rec)
        N *= 2
    return records


def _attach_bound_ratio(rec: ScanRecord, alpha: QuadraticIrrational, N: int, eps: float):
    try:
        approx = quad_field.smooth_approx(alpha, math.isqrt(N**3), eps)
        rec.q = approx.q
        split = factor_plan.split_q(approx.factorization, N)
    except (InfeasibleSplitError, FactorizationError, InvalidInputError) as exc:
        rec.note = f"no split: {exc}"
        return
    delta = weyl_sums.alpha_minus(alpha, approx.a, approx.q)
    rec.bound_ratio = rec.abs_sum / factor_plan.genthm_rhs(split, delta)


def composite_bound_corpus(ds=(2, 3, 5, 6, 7, 10, 11, 13), max_q: int = 1 << 20, n_grid: int = 6) -> dict:
    """``|S(alpha, N)| / genthm_rhs`` on every feasible (split, N) from Pell denominators.

    For ``alpha = sqrt(d)`` each Pell approximation ``p_n/q_n`` with
    ``q_n <= max_q`` is tried against ``n_grid`` lengths spread geometrically
    over ``[q^(2/3), q]``; infeasible splits are skipped.
    """
    instances = []
    for d in ds:
        alpha = QuadraticIrrational.sqrt(d)
        unit = quad_field.pell_fundamental(d)
        terms = list(quad_field.pell_sequence_until(unit, lambda t: t.q_n > max_q))
        if not terms:
            continue
        prefix = None
        for term in terms:
            q = term.q_n
            try:
                fac = quad_field.factor_pell_denominator(unit, term.n)
            except FactorizationError:
                continue
            lo, hi = math.ceil(q ** (2 / 3)), q
            Ns = sorted({max(lo, min(hi, round(lo * (hi / lo) ** (i / max(1, n_grid - 1))))) for i in range(n_grid)})
            for N in Ns:
                while N * N * N < q * q:
                    N += 1
                try:
                    split = factor_plan.split_q(fac, N)
                except InfeasibleSplitError:
                    continue
                if prefix is None:
                    prefix = weyl_sums.weyl_prefix_sums(alpha, terms[-1].q_n)
                delta = weyl_sums.alpha_minus(alpha, term.p_n, q)
                lhs = float(abs(prefix[N - 1]))
                rhs = factor_plan.genthm_rhs(split, delta)
                instances.append({"d": d, "n": term.n, "q": q, "N": N, "q1": split.q1, "q2": split.q2, "q3": split.q3, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs})
    ratios = [i["ratio"] for i in instances]
    median = float(np.median(ratios)) if ratios else math.nan
    return {
        "instances": instances,
        "measured_C": max(ratios, default=math.nan),
        "median_ratio": median,
        "max_over_median": max(ratios) / median if ratios and median > 0 else math.nan,
    }


def abc_quality(d: int, n_max: int) -> list[dict]:
    """Powerful part ``v0`` of each Pell denominator ``v = q_n`` and ``log v0 / log v``."""
    unit = quad_field.pell_fundamental(d)
    rows = []
    for term in quad_field.pell_sequence(unit, n_max):
        v = term.q_n
        try:
            fac = quad_field.factor_pell_denominator(unit, term.n)
        except FactorizationError as exc:
            rows.append({"n": term.n, "v": v, "v0": None, "exponent": None, "flag": f"factor-failed: {exc.cofactor}"})
            continue
        v0 = factor_plan.powerful_part(fac)
        exponent = math.log(v0) / math.log(v) if v > 1 else 0.0
        rows.append({"n": term.n, "v": v, "v0": v0, "exponent": exponent, "flag": ""})
    return rows


__all__ = [
    "SuiteReport",
    "SUITES",
    "run_suite",
    "gcd_sum",
    "s4_prime_envelope",
    "iteration_trace",
    "ScanRecord",
    "exponent_scan",
    "fit_slope",
    "composite_bound_corpus",
    "abc_quality",
]
