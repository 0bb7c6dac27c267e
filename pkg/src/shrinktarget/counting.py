"""Empirical verification lab for the quantitative hit-counting law.

R(x, N) = #{1 <= n <= N : T^n(x) in E_n} is tracked with three-valued
membership along exact orbits: definite hits land in R_lo, boundary-
ambiguous ones only in R_hi, and the normalized error

    e(N) = (R_mid - Phi(N)) / (Phi(N)^(1/2) (log Phi(N))^(3/2+eps))

is reported at checkpoints (defined once Phi(N) > e).

Engine dispatch: integer diagonal systems run on vectorized digit windows
(a float64 window of ~42 bits decides membership almost always; near-
boundary steps are re-decided exactly from the digit stream), which is
what makes N = 10^6 runs cheap.  Everything else runs on the interval
engine at desk scale.

Determinism: every sample derives its own generator from
(seed, sample_id), so results are byte-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import AmbiguityBudgetExceeded, DegenerateF, PrecisionExhausted
from .cylinders import preimage_intervals
from .measures import ParryYrrapMeasure
from .orbits import (
    DiagonalTorusSystem,
    IntegerMatrixSystem,
    UnitRealInterval,
    _wrap_distance_bounds,
    as_fraction,
    beta_step,
    ScaledScalar,
    _schedule_bits,
)
from .targets import Containment, Shape, TargetSpec, contains, phi_values

DEFAULT_EPSILON = 0.5
AMBIGUITY_BUDGET = 1e-3


@dataclass(frozen=True)
class CheckpointRow:
    n: int
    r_lo: int
    r_hi: int
    phi: float
    e: Optional[float]

    @property
    def r_mid(self) -> float:
        return (self.r_lo + self.r_hi) / 2.0


@dataclass(frozen=True)
class CountingResult:
    sample_id: int
    checkpoints: tuple
    ambiguous_hits: int
    epsilon: float

    @property
    def final(self) -> CheckpointRow:
        return self.checkpoints[-1]

    def ambiguity_ok(self, budget: float = AMBIGUITY_BUDGET) -> bool:
        r_hi = self.final.r_hi
        return self.ambiguous_hits <= max(budget * r_hi, 0.0)


@dataclass(frozen=True)
class CountingSummary:
    """Aggregate of a seeded multi-sample counting run."""

    results: tuple
    phi_final: float
    fraction_in_band: float
    band_tol: float
    max_abs_e: float
    seed: int


def _error_term(r_mid: float, phi: float, epsilon: float) -> Optional[float]:
    if phi <= math.e:
        return None
    return (r_mid - phi) / (math.sqrt(phi) * math.log(phi) ** (1.5 + epsilon))


def _digit_window(base: int) -> int:
    return math.ceil(42.0 / math.log2(base))


def _rational_digits(x: Fraction, base: int, count: int) -> np.ndarray:
    """First ``count`` base-b digits of x in [0,1), vectorized in blocks."""
    x = x % 1
    p, q = x.numerator, x.denominator
    block = max(1, int(62 // math.log2(base)))
    scale = base ** block
    blocks = []
    remaining = count
    while remaining > 0:
        p *= scale
        v, p = divmod(p, q)
        blocks.append(v)
        remaining -= block
    arr = np.array(blocks, dtype=np.int64)
    digits = np.empty((len(blocks), block), dtype=np.int8)
    for k in range(block - 1, -1, -1):
        digits[:, k] = arr % base
        arr //= base
    return digits.reshape(-1)[:count]


def _window_values(digits: np.ndarray, base: int, n_steps: int, window: int) -> np.ndarray:
    """values[n-1] ~ T^n(x) for n = 1..N, from ``window`` leading digits."""
    weights = [float(base) ** -(k + 1) for k in range(window)]
    vals = np.zeros(n_steps, dtype=np.float64)
    d = digits.astype(np.float64)
    for k in range(window):
        vals += weights[k] * d[1 + k:1 + k + n_steps]
    return vals


def _exact_recheck(digits: np.ndarray, base: int, n: int, center: Fraction,
                   radius: Fraction) -> Optional[bool]:
    """Exact ||T^n x - a|| <= r from the stored digit tail; None at a tie.

    T^n(x) is the stream read from digit index n onward.
    """
    avail = len(digits) - n
    k = 16
    while True:
        k = min(k, avail)
        val = 0
        for dig in digits[n: n + k]:
            val = val * base + int(dig)
        lo = Fraction(val, base ** k)
        hi = lo + Fraction(1, base ** k)
        d_lo, d_hi = _wrap_distance_bounds(lo, hi, center % 1)
        if d_hi <= radius:
            return True
        if d_lo > radius:
            return False
        if k >= avail:
            return None
        k *= 4


def _radii_arrays(target: TargetSpec, n_steps: int) -> list[np.ndarray]:
    ns = np.arange(1, n_steps + 1)
    if target.shape == Shape.RECTANGLE:
        return [np.asarray(r.psi(ns), dtype=np.float64) for r in target.rates]
    psi = np.asarray(target.rates[0].psi(ns), dtype=np.float64)
    return [psi] * target.d


def _digit_membership(system: DiagonalTorusSystem, target: TargetSpec,
                      digit_arrays: list[np.ndarray], n_steps: int):
    """(hit_lo, hit_hi) boolean arrays for n = 1..N, with exact rechecks."""
    bases = [int(b) for b in system.betas]
    d = len(bases)
    radii = _radii_arrays(target, n_steps)
    dists = []
    bands = []
    for i in range(d):
        window = min(_digit_window(bases[i]), len(digit_arrays[i]) - n_steps - 1)
        vals = _window_values(digit_arrays[i], bases[i], n_steps, window)
        a = target.center[i]
        diff = np.abs(vals - a)
        dist = np.minimum(diff, 1.0 - diff)
        dists.append(dist)
        bands.append(float(bases[i]) ** -window + 1e-13)
    if target.shape == Shape.HYPERBOLOID:
        lo_prod = np.ones(n_steps)
        hi_prod = np.ones(n_steps)
        for i in range(d):
            lo_prod *= np.maximum(dists[i] - bands[i], 0.0)
            hi_prod *= dists[i] + bands[i]
        psi = radii[0]
        hit_lo = hi_prod <= psi
        hit_hi = lo_prod <= psi
    else:
        hit_lo = np.ones(n_steps, dtype=bool)
        hit_hi = np.ones(n_steps, dtype=bool)
        for i in range(d):
            hit_lo &= dists[i] + bands[i] <= radii[i]
            hit_hi &= dists[i] - bands[i] <= radii[i]
    unresolved = np.flatnonzero(hit_hi & ~hit_lo)
    for idx in unresolved:
        n = int(idx) + 1
        decided = _membership_exact(system, target, digit_arrays, n)
        if decided is True:
            hit_lo[idx] = True
        elif decided is False:
            hit_hi[idx] = False
    return hit_lo, hit_hi


def _membership_exact(system, target, digit_arrays, n: int) -> Optional[bool]:
    bases = [int(b) for b in system.betas]
    radii = (
        [as_fraction(r.psi(n)) for r in target.rates]
        if target.shape == Shape.RECTANGLE
        else [as_fraction(target.rates[0].psi(n))] * target.d
    )
    if target.shape == Shape.HYPERBOLOID:
        lo_prod = Fraction(1)
        hi_prod = Fraction(1)
        for i, base in enumerate(bases):
            ok = _exact_distance_bounds(digit_arrays[i], base, n, target.center[i])
            if ok is None:
                return None
            d_lo, d_hi = ok
            lo_prod *= d_lo
            hi_prod *= d_hi
        psi = as_fraction(target.rates[0].psi(n))
        if hi_prod <= psi:
            return True
        if lo_prod > psi:
            return False
        return None
    verdict = True
    for i, base in enumerate(bases):
        res = _exact_recheck(digit_arrays[i], base, n, as_fraction(target.center[i]), radii[i])
        if res is None:
            return None
        if res is False:
            return False
    return verdict


def _exact_distance_bounds(digits, base, n, center):
    avail = len(digits) - n
    k = min(64, avail)
    val = 0
    for dig in digits[n: n + k]:
        val = val * base + int(dig)
    lo = Fraction(val, base ** k)
    hi = lo + Fraction(1, base ** k)
    return _wrap_distance_bounds(lo, hi, as_fraction(center) % 1)


def _digit_arrays_for_sample(system: DiagonalTorusSystem, n_steps: int,
                             rng: Optional[np.random.Generator],
                             x: Optional[Sequence]) -> list[np.ndarray]:
    bases = [int(b) for b in system.betas]
    arrays = []
    for i, base in enumerate(bases):
        total = 2 * n_steps + _digit_window(base) + 96
        if x is None:
            arrays.append(rng.integers(0, base, size=total, dtype=np.int8))
        else:
            arrays.append(_rational_digits(as_fraction(x[i]), base, total))
    return arrays


def _count_digit_engine(system, target, digit_arrays, checkpoints, epsilon,
                        phi) -> tuple:
    n_steps = checkpoints[-1]
    hit_lo, hit_hi = _digit_membership(system, target, digit_arrays, n_steps)
    cum_lo = np.cumsum(hit_lo)
    cum_hi = np.cumsum(hit_hi)
    rows = []
    for j, n in enumerate(checkpoints):
        r_lo = int(cum_lo[n - 1]) if n >= 1 else 0
        r_hi = int(cum_hi[n - 1]) if n >= 1 else 0
        rows.append(CheckpointRow(
            n=n, r_lo=r_lo, r_hi=r_hi, phi=float(phi[j]),
            e=_error_term((r_lo + r_hi) / 2.0, float(phi[j]), epsilon),
        ))
    ambiguous = int(cum_hi[-1] - cum_lo[-1])
    return tuple(rows), ambiguous


def _count_interval_engine(system, target, x, checkpoints, epsilon, phi,
                           precision_bits=None) -> tuple:
    n_steps = checkpoints[-1]
    d = system.d
    moduli = system.moduli
    bits0 = [
        precision_bits or _schedule_bits(moduli[i], n_steps) for i in range(d)
    ]
    ivs = []
    for i in range(d):
        c = x[i]
        ivs.append(
            c.rescaled(bits0[i]) if isinstance(c, UnitRealInterval)
            else UnitRealInterval.from_value(c, bits0[i])
        )
    betas_scaled = [
        ScaledScalar.build(system.betas[i], bits0[i] + 8) for i in range(d)
    ]
    r_lo = 0
    r_hi = 0
    rows = []
    cp_iter = iter(enumerate(checkpoints))
    cp_idx, next_cp = next(cp_iter)
    while next_cp == 0:
        rows.append(CheckpointRow(0, 0, 0, 0.0, None))
        cp_idx, next_cp = next(cp_iter)
    for n in range(1, n_steps + 1):
        for i in range(d):
            target_bits = min(ivs[i].precision_bits,
                              _schedule_bits(moduli[i], n_steps - n))
            try:
                ivs[i] = beta_step(betas_scaled[i], ivs[i], out_bits=target_bits)
            except PrecisionExhausted as exc:
                exc.step = n
                exc.last_checkpoint = rows[-1] if rows else None
                raise
        verdict = contains(target, n, ivs)
        if verdict == Containment.YES:
            r_lo += 1
            r_hi += 1
        elif verdict == Containment.AMBIGUOUS:
            r_hi += 1
        if n == next_cp:
            rows.append(CheckpointRow(
                n=n, r_lo=r_lo, r_hi=r_hi, phi=float(phi[cp_idx]),
                e=_error_term((r_lo + r_hi) / 2.0, float(phi[cp_idx]), epsilon),
            ))
            try:
                cp_idx, next_cp = next(cp_iter)
            except StopIteration:
                break
    return tuple(rows), r_hi - r_lo


def _phi_at_checkpoints(target, checkpoints, measure) -> np.ndarray:
    return phi_values(target, checkpoints, measure=measure)


def count_hits(system, target: TargetSpec, x, n_steps: int,
               checkpoints: Optional[Sequence[int]] = None,
               epsilon: float = DEFAULT_EPSILON, measure=None,
               sample_id: int = 0, rng: Optional[np.random.Generator] = None,
               precision_bits=None) -> CountingResult:
    """One orbit's hit counts against the target family.

    ``x`` may be a point (rationals/floats/enclosures) or None to draw a
    fresh initial condition from ``rng`` (uniform under Lebesgue, or the
    supplied product measure).  Integer diagonal systems use the digit
    engine; anything else the interval engine.
    """
    if n_steps < 0:
        raise ValueError("N must be >= 0")
    cps = sorted(set(int(c) for c in (checkpoints or [n_steps])))
    if cps[-1] != n_steps:
        cps.append(n_steps)
    if any(c < 0 for c in cps):
        raise ValueError("checkpoints must be >= 0")
    if n_steps == 0:
        return CountingResult(sample_id, (CheckpointRow(0, 0, 0, 0.0, None),), 0, epsilon)
    cps = [c for c in cps if c >= 1]
    phi = _phi_at_checkpoints(target, cps, measure)
    if isinstance(system, DiagonalTorusSystem) and system.degenerate:
        raise ValueError(
            "counting requires every |beta_i| > 1; peel the |beta| <= 1 "
            "coordinates off with the degenerate reduction first"
        )
    if isinstance(system, IntegerMatrixSystem):
        rows, ambiguous = _count_matrix_engine(
            system, target, x, cps, epsilon, phi, rng)
    elif system.is_integer:
        if x is not None and not all(isinstance(c, (int, Fraction)) for c in x):
            x = [as_fraction(c) for c in x]
        digit_arrays = _digit_arrays_for_sample(system, n_steps, rng, x)
        rows, ambiguous = _count_digit_engine(
            system, target, digit_arrays, cps, epsilon, phi)
    else:
        if x is None:
            x = _draw_initial(system, measure, rng, n_steps)
        rows, ambiguous = _count_interval_engine(
            system, target, x, cps, epsilon, phi, precision_bits)
    return CountingResult(sample_id, rows, ambiguous, epsilon)


def _count_matrix_engine(system, target, x, checkpoints, epsilon, phi, rng):
    """Exact rational orbits under an integer matrix (fixed denominator)."""
    n_steps = checkpoints[-1]
    d = system.d
    if x is None:
        bits = 128
        x = []
        for _ in range(d):
            words = rng.integers(0, 1 << 32, size=4, dtype=np.uint64)
            num = 0
            for w in words:
                num = (num << 32) | int(w)
            x.append(Fraction(num, 1 << bits))
    pt = [as_fraction(c) % 1 for c in x]
    rows = []
    r_lo = 0
    r_hi = 0
    cp_iter = iter(enumerate(checkpoints))
    cp_idx, next_cp = next(cp_iter)
    for n in range(1, n_steps + 1):
        pt = [
            sum(system.matrix[i][j] * pt[j] for j in range(d)) % 1
            for i in range(d)
        ]
        if _exact_point_membership(target, n, pt):
            r_lo += 1
            r_hi += 1
        if n == next_cp:
            rows.append(CheckpointRow(
                n=n, r_lo=r_lo, r_hi=r_hi, phi=float(phi[cp_idx]),
                e=_error_term((r_lo + r_hi) / 2.0, float(phi[cp_idx]), epsilon),
            ))
            try:
                cp_idx, next_cp = next(cp_iter)
            except StopIteration:
                break
    return tuple(rows), 0


def _exact_point_membership(target, n: int, pt) -> bool:
    dists = []
    for c, a in zip(pt, target.center):
        off = (c - as_fraction(a)) % 1
        dists.append(min(off, 1 - off))
    if target.shape == Shape.HYPERBOLOID:
        prod = Fraction(1)
        for v in dists:
            prod *= v
        return prod <= as_fraction(target.rates[0].psi(n))
    radii = (
        [as_fraction(r.psi(n)) for r in target.rates]
        if target.shape == Shape.RECTANGLE
        else [as_fraction(target.rates[0].psi(n))] * target.d
    )
    return all(v <= r for v, r in zip(dists, radii))


def _draw_initial(system, measure, rng, n_steps):
    d = system.d
    bits = max(96, max(_schedule_bits(m, n_steps) for m in system.moduli))
    if measure is None:
        coords = []
        for _ in range(d):
            words = rng.integers(0, 1 << 32, size=(bits + 31) // 32, dtype=np.uint64)
            num = 0
            for w in words:
                num = (num << 32) | int(w)
            num &= (1 << bits) - 1
            coords.append(Fraction(num, 1 << bits))
        return coords
    cols = measure.sample(rng, 1)[0]
    coords = []
    for i in range(d):
        extra_bits = bits - 53
        extra = 0
        if extra_bits > 0:
            words = rng.integers(0, 1 << 32, size=(extra_bits + 31) // 32, dtype=np.uint64)
            for w in words:
                extra = (extra << 32) | int(w)
            extra &= (1 << extra_bits) - 1
        base = as_fraction(float(cols[i]))
        coords.append((base + Fraction(extra, 1 << bits)) % 1)
    return coords


def _sample_rng(seed: int, sample_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(sample_id,)))


def _run_sample(args) -> CountingResult:
    (system, target, n_steps, checkpoints, epsilon, measure, seed, sample_id) = args
    rng = _sample_rng(seed, sample_id)
    return count_hits(system, target, None, n_steps, checkpoints, epsilon,
                      measure, sample_id=sample_id, rng=rng)


def monte_carlo_counting(system, target: TargetSpec, num_samples: int,
                         n_steps: int, seed: int,
                         checkpoints: Optional[Sequence[int]] = None,
                         epsilon: float = DEFAULT_EPSILON, band_tol: float = 0.2,
                         measure=None, jobs: int = 1,
                         ambiguity_budget: float = AMBIGUITY_BUDGET,
                         strict_ambiguity: bool = False) -> CountingSummary:
    """Seeded multi-sample counting experiment.

    Sample i uses the generator derived from (seed, i); aggregation is in
    sample order, so output is identical for any ``jobs``.  The summary
    reports the fraction of samples with |R/Phi - 1| <= band_tol at the
    final checkpoint and the largest |e(N)| seen.
    """
    if num_samples < 1:
        raise ValueError("need at least one sample")
    payloads = [
        (system, target, n_steps, checkpoints, epsilon, measure, seed, i)
        for i in range(num_samples)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_sample, payloads, chunksize=max(1, num_samples // (4 * jobs))))
    else:
        results = [_run_sample(p) for p in payloads]
    results.sort(key=lambda r: r.sample_id)
    phi_final = results[0].final.phi
    in_band = 0
    max_abs_e = 0.0
    for res in results:
        if strict_ambiguity and not res.ambiguity_ok(ambiguity_budget):
            raise AmbiguityBudgetExceeded(
                f"sample {res.sample_id}: {res.ambiguous_hits} ambiguous hits"
            )
        final = res.final
        if phi_final > 0 and abs(final.r_mid / phi_final - 1.0) <= band_tol:
            in_band += 1
        for row in res.checkpoints:
            if row.e is not None:
                max_abs_e = max(max_abs_e, abs(row.e))
    return CountingSummary(
        results=tuple(results), phi_final=phi_final,
        fraction_in_band=in_band / num_samples, band_tol=band_tol,
        max_abs_e=max_abs_e, seed=seed,
    )


# ---------------------------------------------------------------------------
# correlation / mixing estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationSeries:
    """phi-hat estimates per lag, their running sum, and an exponential fit."""

    entries: tuple  # (n, estimate, std_error)
    kappa_hat: float
    fit_c: float
    fit_gamma: float
    fit_r2: float


def _beta_adic_order(value: Fraction, base: int, max_order: int) -> Optional[int]:
    for k in range(max_order + 1):
        if (value * base ** k).denominator == 1:
            return k
    return None


def correlation_estimate(beta, e_set: tuple, f_set: tuple, lag: int,
                         num_samples: Optional[int] = None,
                         seed: Optional[int] = None, method: str = "auto",
                         mu: Optional[ParryYrrapMeasure] = None):
    """Estimate |mu(E ∩ T^-n F)/mu(F) - mu(E)| for interval sets E, F.

    Methods: "mc" (Monte Carlo over mu-distributed samples, binomial
    standard error), "exact" (preimage decomposition of F, zero standard
    error), or "auto" (exact-zero fast path for integer beta with
    beta-adic E of order <= lag, then exact for modest lags, else MC).
    """
    mu = mu or ParryYrrapMeasure(beta)
    b = mu.beta
    mu_e = mu.measure_interval(*e_set)
    mu_f = mu.measure_interval(*f_set)
    if mu_f < 1e-6:
        raise DegenerateF(f"mu(F) = {mu_f:.2e} below the 1e-6 floor")
    if lag == 0:
        joint = mu.measure_interval(max(e_set[0], f_set[0]), min(e_set[1], f_set[1])) \
            if min(e_set[1], f_set[1]) > max(e_set[0], f_set[0]) else 0.0
        return abs(joint / mu_f - mu_e), 0.0
    if method == "auto":
        if float(b).is_integer() and b > 1:
            base = int(b)
            k_lo = _beta_adic_order(as_fraction(e_set[0]), base, lag)
            k_hi = _beta_adic_order(as_fraction(e_set[1]), base, lag)
            if k_lo is not None and k_hi is not None:
                return 0.0, 0.0
        method = "exact" if num_samples is None else "mc"
    if method == "exact":
        joint = _exact_joint(mu, e_set, f_set, lag, beta_input=beta)
        return abs(joint / mu_f - mu_e), 0.0
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(lag,)))
    xs = mu.sample(rng, num_samples)
    orbit = xs.copy()
    for _ in range(lag):
        orbit = np.mod(b * orbit, 1.0)
    hits = ((xs >= e_set[0]) & (xs < e_set[1]) &
            (orbit >= f_set[0]) & (orbit < f_set[1]))
    p = float(np.mean(hits))
    se = math.sqrt(max(p * (1 - p), 1e-300) / num_samples) / mu_f
    return abs(p / mu_f - mu_e), se


def _exact_joint(mu: ParryYrrapMeasure, e_set, f_set, lag: int, beta_input=None) -> float:
    center = (f_set[0] + f_set[1]) / 2.0
    radius = (f_set[1] - f_set[0]) / 2.0
    pieces = preimage_intervals(beta_input if beta_input is not None else mu.beta,
                                lag, center, radius)
    lo = np.array([p[0] for p in pieces])
    hi = np.array([p[1] for p in pieces])
    lo = np.clip(lo, e_set[0], e_set[1])
    hi = np.clip(hi, e_set[0], e_set[1])
    keep = hi > lo
    return _batched_measure(mu, lo[keep], hi[keep])


def _batched_measure(mu: ParryYrrapMeasure, lo: np.ndarray, hi: np.ndarray,
                     chunk: int = 1 << 14) -> float:
    total = 0.0
    orbit = mu.orbit_of_one[None, :]
    for start in range(0, len(lo), chunk):
        a = lo[start:start + chunk, None]
        b = hi[start:start + chunk, None]
        overlap = np.clip(orbit, a, b) - a
        total += float(np.sum(overlap @ mu._powers))
    return total / mu.normalizer


def fit_exponential(ns, values, std_errors=None) -> tuple[float, float, float]:
    """Fit values ~ C * gamma^n; returns (C, gamma, linear-scale R^2).

    The log-space regression uses only points that clear three standard
    errors (noise-floor points would otherwise flatten the slope); R^2 is
    then computed in linear space over every supplied point.
    """
    ns = np.asarray(ns, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    ses = np.zeros_like(values) if std_errors is None else np.asarray(std_errors)
    signal = values > np.maximum(3.0 * ses, 1e-13)
    if np.count_nonzero(signal) < 2:
        return 0.0, 0.0, 0.0
    slope, intercept = np.polyfit(ns[signal], np.log(values[signal]), 1)
    c = math.exp(intercept)
    gamma = math.exp(slope)
    fitted = c * gamma ** ns
    ss_res = float(np.sum((values - fitted) ** 2))
    ss_tot = float(np.sum((values - values.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return c, gamma, r2


def correlation_series(beta, e_set, f_set, lags: Sequence[int],
                       num_samples: Optional[int] = None,
                       seed: Optional[int] = None, method: str = "exact",
                       kappa_lags: int = 30) -> CorrelationSeries:
    """phi-hat over the requested lags plus the summability diagnostic.

    kappa_hat sums phi-hat over lags 1..kappa_lags and completes the series
    with the fitted geometric tail C gamma^(kappa_lags+1) / (1 - gamma).
    """
    mu = ParryYrrapMeasure(beta)
    lags = sorted(set(int(n) for n in lags))
    if method == "mc":
        entries = _mc_series(mu, e_set, f_set, lags, num_samples, seed)
    else:
        entries = tuple(
            (n, *correlation_estimate(beta, e_set, f_set, n, method=method,
                                      num_samples=num_samples, seed=seed, mu=mu))
            for n in lags
        )
    ns = [n for n, _, _ in entries]
    vals = [v for _, v, _ in entries]
    ses = [s for _, _, s in entries]
    c, gamma, r2 = fit_exponential(ns, vals, ses)
    kappa_cover = [n for n in range(1, kappa_lags + 1)]
    known = dict((n, v) for n, v, _ in entries)
    kappa = 0.0
    for n in kappa_cover:
        if n in known:
            kappa += known[n]
        elif 0 < gamma < 1:
            kappa += c * gamma ** n
    if 0 < gamma < 1:
        kappa += c * gamma ** (kappa_lags + 1) / (1 - gamma)
    return CorrelationSeries(entries=tuple(entries), kappa_hat=kappa,
                             fit_c=c, fit_gamma=gamma, fit_r2=r2)


def _mc_series(mu, e_set, f_set, lags, num_samples, seed):
    """One sample sweep serving every lag (shared orbit array)."""
    if num_samples is None:
        raise ValueError("Monte Carlo series needs num_samples")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    mu_e = mu.measure_interval(*e_set)
    mu_f = mu.measure_interval(*f_set)
    if mu_f < 1e-6:
        raise DegenerateF(f"mu(F) = {mu_f:.2e} below the 1e-6 floor")
    xs = mu.sample(rng, num_samples)
    in_e = (xs >= e_set[0]) & (xs < e_set[1])
    orbit = xs.copy()
    entries = []
    max_lag = max(lags)
    want = set(lags)
    for n in range(1, max_lag + 1):
        orbit = np.mod(mu.beta * orbit, 1.0)
        if n in want:
            joint = float(np.mean(in_e & (orbit >= f_set[0]) & (orbit < f_set[1])))
            se = math.sqrt(max(joint * (1 - joint), 1e-300) / num_samples) / mu_f
            entries.append((n, abs(joint / mu_f - mu_e), se))
    return tuple(entries)


# ---------------------------------------------------------------------------
# variance diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceReport:
    window: tuple
    empirical_var: float
    bound: float
    kappa_hat: float
    measure_sum: float
    num_samples: int

    @property
    def ratio(self) -> float:
        return self.empirical_var / self.bound if self.bound > 0 else math.inf


def window_hits(system, target: TargetSpec, a: int, b: int, num_samples: int,
                seed: int, measure=None) -> np.ndarray:
    """Z_{a,b}(x) = sum_{a<=n<=b} 1[T^n x in E_n] over seeded samples."""
    if not 1 <= a <= b:
        raise ValueError("need 1 <= a <= b")
    zs = np.empty(num_samples, dtype=np.float64)
    for i in range(num_samples):
        rng = _sample_rng(seed, i)
        res = count_hits(system, target, None, b, checkpoints=[a - 1, b] if a > 1 else [b],
                         measure=measure, sample_id=i, rng=rng)
        if a > 1:
            first = next(row for row in res.checkpoints if row.n == a - 1)
            last = res.final
            zs[i] = last.r_mid - first.r_mid
        else:
            zs[i] = res.final.r_mid
    return zs


def variance_check(system, target: TargetSpec, a: int, b: int,
                   num_samples: int, seed: int, kappa_hat: float = 0.0,
                   measure=None) -> VarianceReport:
    """Empirical Var(Z_{a,b}) against the bound (2 kappa + 1) sum mu(E_n)."""
    zs = window_hits(system, target, a, b, num_samples, seed, measure=measure)
    phis = phi_values(target, [a - 1, b] if a > 1 else [b], measure=measure)
    measure_sum = float(phis[-1] - (phis[0] if a > 1 else 0.0))
    emp = float(np.var(zs, ddof=1)) if num_samples > 1 else 0.0
    bound = (2.0 * kappa_hat + 1.0) * measure_sum
    return VarianceReport(
        window=(a, b), empirical_var=emp, bound=bound, kappa_hat=kappa_hat,
        measure_sum=measure_sum, num_samples=num_samples,
    )


def paley_zygmund_bound(zs: np.ndarray, lam: float) -> tuple[float, float, float]:
    """(empirical fraction above lam*E[Z], PZ lower bound, its MC error).

    The fraction of samples with Z > lam E[Z] must be at least
    (1-lam)^2 E[Z]^2 / E[Z^2] up to Monte Carlo noise.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must be in (0,1)")
    m1 = float(np.mean(zs))
    m2 = float(np.mean(zs ** 2))
    frac = float(np.mean(zs > lam * m1))
    bound = (1 - lam) ** 2 * m1 * m1 / m2 if m2 > 0 else 0.0
    n = len(zs)
    se_frac = math.sqrt(max(frac * (1 - frac), 1e-300) / n)
    se_moments = 2.0 * float(np.std(zs)) / math.sqrt(n) / max(m1, 1e-300)
    return frac, bound, se_frac + abs(bound) * se_moments
