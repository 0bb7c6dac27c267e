"""Shrinking-target families: balls, rectangles and hyperboloids on the torus.

Distances are always to the nearest integer (wrap-aware).  Target volumes
cap at 1 once the radius fills the torus.  The lower order at infinity
lambda(psi) = liminf -log(psi(n))/n drives every dimension formula.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import OutOfTable


class Shape(enum.Enum):
    BALL = "ball"
    RECTANGLE = "rectangle"
    HYPERBOLOID = "hyperboloid"


@dataclass(frozen=True)
class RateFunction:
    """A positive rate psi(n), one of four kinds.

    exponential(t):       psi(n) = exp(-n t),  lower order t
    power(c, kappa):      psi(n) = c n^-kappa, lower order 0
    superexponential():   psi(n) = exp(-n^2),  lower order +inf
    table(values, ...):   explicit finite values with an extension rule
    """

    kind: str
    t: float = 0.0
    c: float = 1.0
    kappa: float = 0.0
    values: tuple = ()
    extend: str = "none"  # "none" (raise past range) or "hold" (repeat last)

    @classmethod
    def exponential(cls, t: float) -> "RateFunction":
        if t < 0:
            raise ValueError("exponential rate needs t >= 0")
        return cls(kind="exponential", t=float(t))

    @classmethod
    def power(cls, c: float, kappa: float) -> "RateFunction":
        if c <= 0 or kappa < 0:
            raise ValueError("power rate needs c > 0 and kappa >= 0")
        return cls(kind="power", c=float(c), kappa=float(kappa))

    @classmethod
    def superexponential(cls) -> "RateFunction":
        return cls(kind="superexponential")

    @classmethod
    def table(cls, values: Sequence[float], extend: str = "none") -> "RateFunction":
        vals = tuple(float(v) for v in values)
        if not vals or any(v <= 0 for v in vals):
            raise ValueError("table values must be positive and non-empty")
        if extend not in ("none", "hold"):
            raise ValueError("extend must be 'none' or 'hold'")
        return cls(kind="table", values=vals, extend=extend)

    def psi(self, n):
        """psi(n) for scalar or array n >= 1."""
        arr = np.asarray(n, dtype=np.float64)
        if np.any(arr < 1):
            raise ValueError("n must be >= 1")
        if self.kind == "exponential":
            out = np.exp(-arr * self.t)
        elif self.kind == "power":
            out = self.c * arr ** -self.kappa
        elif self.kind == "superexponential":
            out = np.exp(-(arr ** 2))
        elif self.kind == "table":
            idx = np.asarray(np.round(arr), dtype=np.int64) - 1
            past = idx >= len(self.values)
            if np.any(past) and self.extend == "none":
                raise OutOfTable(f"n={int(arr.max())} past table of {len(self.values)}")
            idx = np.minimum(idx, len(self.values) - 1)
            out = np.asarray(self.values, dtype=np.float64)[idx]
        else:
            raise ValueError(f"unknown kind {self.kind}")
        return float(out) if np.ndim(n) == 0 else out

    def log_psi(self, n):
        """log psi(n) evaluated symbolically (no underflow at large n)."""
        arr = np.asarray(n, dtype=np.float64)
        if self.kind == "exponential":
            out = -arr * self.t
        elif self.kind == "power":
            out = math.log(self.c) - self.kappa * np.log(arr)
        elif self.kind == "superexponential":
            out = -(arr ** 2)
        else:
            out = np.log(self.psi(n))
        return float(out) if np.ndim(n) == 0 else out

    @property
    def is_decreasing(self) -> bool:
        if self.kind == "exponential":
            return self.t > 0
        if self.kind == "power":
            return self.kappa > 0
        if self.kind == "superexponential":
            return True
        return all(b <= a for a, b in zip(self.values, self.values[1:]))

    @property
    def vanishes(self) -> bool:
        """Whether psi(n) -> 0."""
        if self.kind == "exponential":
            return self.t > 0
        if self.kind == "power":
            return self.kappa > 0
        if self.kind == "superexponential":
            return True
        return False  # finite tables with "hold" never vanish; "none" is unknowable

    def lower_order(self, horizon: Optional[int] = None):
        """lambda(psi) = liminf -log psi(n) / n.

        Closed form for symbolic kinds; for tables, a numeric liminf
        estimate (min over the tail half of the horizon) returned together
        with the window it was taken over.
        """
        if self.kind == "exponential":
            return self.t
        if self.kind == "power":
            return 0.0
        if self.kind == "superexponential":
            return math.inf
        n_max = min(horizon or len(self.values), len(self.values))
        lo = max(1, n_max // 2)
        ns = np.arange(lo, n_max + 1)
        vals = -np.log(self.psi(ns)) / ns
        return float(vals.min()), (int(lo), int(n_max))

    def subsampled_lower_order(self, k: int, horizon: Optional[int] = None):
        """liminf over multiples of k of -log psi(kn) / (kn).

        Equals lambda(psi) for decreasing psi.  Closed form for symbolic
        kinds (where it holds with no monotonicity caveat).
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if self.kind in ("exponential", "power", "superexponential"):
            return self.lower_order()
        n_max = min(horizon or len(self.values), len(self.values)) // k
        if n_max < 1:
            raise OutOfTable("table too short for this subsampling")
        lo = max(1, n_max // 2)
        ns = k * np.arange(lo, n_max + 1)
        vals = -np.log(self.psi(ns)) / ns
        return float(vals.min()), (int(k * lo), int(k * n_max))

    def tau_limsup(self, beta_modulus: float, horizon: int = 10_000) -> float:
        """limsup psi(n) |beta|^-n for |beta| <= 1 (degenerate reduction)."""
        if beta_modulus > 1:
            raise ValueError("tau is used for |beta| <= 1")
        if beta_modulus == 0:
            return math.inf
        gap = math.log(1.0 / beta_modulus) if beta_modulus < 1 else 0.0
        if self.kind == "exponential":
            if self.t > gap:
                return 0.0
            if self.t == gap:
                return 1.0
            return math.inf
        if self.kind == "power":
            return 0.0 if gap == 0.0 and self.kappa > 0 else (math.inf if gap > 0 else 1.0)
        if self.kind == "superexponential":
            return 0.0
        ns = np.arange(1, min(horizon, len(self.values)) + 1)
        return float(np.max(self.psi(ns) * beta_modulus ** -ns.astype(float)))


@dataclass(frozen=True)
class AccumulationSet:
    """Accumulation points of (-log psi_1(n)/n, ..., -log psi_d(n)/n)."""

    points: tuple
    radius: float = 0.0

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.points)
        if not pts:
            raise ValueError("accumulation set must be non-empty")
        for p in pts:
            if any(c < 0 for c in p):
                raise ValueError("entries must be >= 0 (or +inf)")
        object.__setattr__(self, "points", pts)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(c) for p in self.points for c in p)

    @property
    def d(self) -> int:
        return len(self.points[0])


def accumulation_set(rates: Sequence[RateFunction], horizon: int = 2000,
                     cluster_radius: float = 1e-3) -> AccumulationSet:
    """U(Psi) for a vector of rates.

    Symbolic kinds contribute their exact limit (t, 0, or +inf), so the
    set is a singleton; table kinds are clustered numerically over the
    horizon tail and the cluster radius is reported.
    """
    limits = []
    any_table = False
    for r in rates:
        if r.kind == "exponential":
            limits.append((r.t,))
        elif r.kind == "power":
            limits.append((0.0,))
        elif r.kind == "superexponential":
            limits.append((math.inf,))
        else:
            any_table = True
            limits.append(None)
    if not any_table:
        return AccumulationSet((tuple(l[0] for l in limits),))
    n_hi = min(horizon, min(len(r.values) for r in rates if r.kind == "table"))
    n_lo = max(1, n_hi // 2)
    ns = np.arange(n_lo, n_hi + 1)
    cols = []
    for r, lim in zip(rates, limits):
        if lim is None:
            cols.append(-np.log(r.psi(ns)) / ns)
        else:
            cols.append(np.full(len(ns), lim[0]))
    pts = np.stack(cols, axis=1)
    clusters: list[np.ndarray] = []
    for row in pts:
        for c in clusters:
            if np.all(np.abs(np.minimum(row, 1e300) - np.minimum(c, 1e300)) <= cluster_radius):
                break
        else:
            clusters.append(row)
    return AccumulationSet(tuple(tuple(c) for c in clusters), radius=cluster_radius)


def _hyperboloid_boundary_bound(d: int, delta: float) -> float:
    # documented non-sharp bound on the (d-1)-content of the boundary surface
    return (4.0 ** d) * d * (1.0 + math.log(1.0 / min(delta, 0.5))) ** (d - 1)


@dataclass(frozen=True)
class TargetSpec:
    """A target family E_n: shape, center, and rate(s).

    Balls (max norm) and hyperboloids take one rate; rectangles take one
    rate per coordinate.  ``boundary_content_bound`` witnesses the bounded
    boundary-content property: 2d for balls/rectangles, a documented
    analytic (non-sharp) constant for hyperboloids.
    """

    shape: Shape
    center: tuple
    rates: tuple
    boundary_content_bound: float = field(default=0.0)

    def __post_init__(self):
        center = tuple(float(c) % 1.0 for c in self.center)
        object.__setattr__(self, "center", center)
        rates = tuple(self.rates) if isinstance(self.rates, (tuple, list)) else (self.rates,)
        object.__setattr__(self, "rates", rates)
        d = len(center)
        if d < 1:
            raise ValueError("center must have at least one coordinate")
        if self.shape == Shape.RECTANGLE:
            if len(rates) != d:
                raise ValueError("rectangles need one rate per coordinate")
        elif len(rates) != 1:
            raise ValueError("balls and hyperboloids take a single rate")
        if self.boundary_content_bound == 0.0:
            if self.shape == Shape.HYPERBOLOID:
                bound = _hyperboloid_boundary_bound(d, float(rates[0].psi(1)))
            else:
                bound = 2.0 * d
            object.__setattr__(self, "boundary_content_bound", bound)

    @property
    def d(self) -> int:
        return len(self.center)

    def radii(self, n):
        """Per-coordinate radii at time n (rectangles) or the single radius."""
        if self.shape == Shape.RECTANGLE:
            return tuple(r.psi(n) for r in self.rates)
        return self.rates[0].psi(n)


def ball(center, rate: RateFunction) -> TargetSpec:
    return TargetSpec(Shape.BALL, tuple(center), (rate,))


def rectangle(center, rates: Sequence[RateFunction]) -> TargetSpec:
    return TargetSpec(Shape.RECTANGLE, tuple(center), tuple(rates))


def hyperboloid(center, rate: RateFunction) -> TargetSpec:
    return TargetSpec(Shape.HYPERBOLOID, tuple(center), (rate,))


def hyperboloid_volume(d: int, delta):
    """Lebesgue volume of {x in T^d : prod ||x_i|| < delta}.

    1 once delta >= 2^-d; otherwise
    2^d delta * sum_{t=0}^{d-1} (1/t!) log(1/(2^d delta))^t.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    delta_arr = np.asarray(delta, dtype=np.float64)
    if np.any(delta_arr <= 0):
        raise ValueError("delta must be positive")
    scaled = (2.0 ** d) * delta_arr
    small = scaled < 1.0
    logs = np.where(small, -np.log(np.where(small, scaled, 1.0)), 0.0)
    total = np.zeros_like(delta_arr)
    term = np.ones_like(delta_arr)
    for t in range(d):
        if t > 0:
            term = term * logs / t
        total = total + term
    out = np.where(small, scaled * total, 1.0)
    return float(out) if np.ndim(delta) == 0 else out


def lebesgue_volume(target: TargetSpec, n):
    """m_d(E_n); exact closed forms, independent of the center."""
    if target.shape == Shape.BALL:
        psi = target.rates[0].psi(n)
        return np.minimum(1.0, 2.0 * np.asarray(psi)) ** target.d if np.ndim(n) else min(1.0, 2.0 * psi) ** target.d
    if target.shape == Shape.RECTANGLE:
        out = 1.0
        for r in target.rates:
            out = out * np.minimum(1.0, 2.0 * np.asarray(r.psi(n), dtype=np.float64))
        return float(out) if np.ndim(n) == 0 else out
    return hyperboloid_volume(target.d, target.rates[0].psi(n))


def phi_values(target: TargetSpec, checkpoints: Sequence[int], measure=None,
               chunk: int = 1 << 20, rng=None, mc_samples: int = 100_000):
    """Phi at each checkpoint: cumulative sum of target measures up to N.

    ``measure=None`` uses Lebesgue closed forms (vectorized and chunked so
    N = 10^6 costs one pass).  A ProductMeasure evaluates balls and
    rectangles per factor exactly; hyperboloid targets under a product
    measure have no closed form and fall back to Monte Carlo with
    ``mc_samples`` draws per step from the supplied ``rng`` (use
    ``nu_hyperboloid_volume`` directly for the per-step standard errors).
    """
    cps = sorted(int(c) for c in checkpoints)
    if not cps or cps[0] < 0:
        raise ValueError("checkpoints must be non-negative")
    n_max = cps[-1]
    out = {0: 0.0}
    total = 0.0
    next_idx = 0
    while cps[next_idx] == 0:
        next_idx += 1
        if next_idx == len(cps):
            return np.array([out[c] for c in cps])
    for start in range(1, n_max + 1, chunk):
        stop = min(start + chunk - 1, n_max)
        ns = np.arange(start, stop + 1)
        if measure is None:
            vols = np.asarray(lebesgue_volume(target, ns), dtype=np.float64)
        else:
            vols = _nu_volumes(target, ns, measure, rng, mc_samples)
        csum = np.cumsum(vols) + total
        total = float(csum[-1])
        while next_idx < len(cps) and cps[next_idx] <= stop:
            out[cps[next_idx]] = float(csum[cps[next_idx] - start])
            next_idx += 1
    return np.array([out[c] for c in cps])


def phi_sum(target: TargetSpec, n_steps: int, measure=None) -> float:
    """Phi(N) = sum_{n=1}^{N} measure(E_n)."""
    if n_steps < 0:
        raise ValueError("N must be >= 0")
    if n_steps == 0:
        return 0.0
    return float(phi_values(target, [n_steps], measure=measure)[0])


def _nu_volumes(target: TargetSpec, ns: np.ndarray, measure, rng=None,
                mc_samples: int = 100_000) -> np.ndarray:
    if target.shape == Shape.HYPERBOLOID:
        if rng is None:
            raise ValueError(
                "hyperboloid volumes under a product measure are Monte Carlo "
                "estimates: pass a seeded rng"
            )
        out = np.empty(len(ns))
        for i, n in enumerate(ns):
            out[i], _ = nu_hyperboloid_volume(
                measure, target.center, target.rates[0].psi(int(n)), rng, mc_samples)
        return out
    out = np.empty(len(ns))
    for i, n in enumerate(ns):
        if target.shape == Shape.BALL:
            out[i] = measure.ball(target.center, target.rates[0].psi(int(n)))
        else:
            radii = [r.psi(int(n)) for r in target.rates]
            out[i] = np.prod([
                _factor_ball(measure.factors[j], target.center[j], radii[j])
                for j in range(target.d)
            ])
    return out


def _factor_ball(mu, a, r):
    from .measures import _wrapped_interval_measure

    return _wrapped_interval_measure(mu, a, r)


def nu_hyperboloid_volume(measure, center, delta: float, rng: np.random.Generator,
                          samples: int = 100_000) -> tuple[float, float]:
    """Monte Carlo nu-measure of a hyperboloid target, with standard error."""
    pts = measure.sample(rng, samples)
    dist = np.abs(pts - np.asarray(center)[None, :])
    dist = np.minimum(dist, 1.0 - dist)
    hits = np.prod(dist, axis=1) <= delta
    p = float(np.mean(hits))
    se = math.sqrt(max(p * (1 - p), 1e-300) / samples)
    return p, se


class Containment(enum.Enum):
    YES = "yes"
    NO = "no"
    AMBIGUOUS = "ambiguous"


def _distance_bounds(coord, a: float) -> tuple[float, float]:
    """Range of ||x - a|| as x runs over a point or enclosure coordinate."""
    from .orbits import UnitRealInterval

    if isinstance(coord, UnitRealInterval):
        lo = coord.lo_float
        width = coord.width_float
    elif isinstance(coord, tuple):
        lo, hi = float(coord[0]), float(coord[1])
        width = (hi - lo) % 1.0 if hi != lo else 0.0
    else:
        x = float(coord) % 1.0
        diff = abs(x - (a % 1.0))
        d = min(diff, 1.0 - diff)
        return d, d
    if width >= 1.0:
        return 0.0, 0.5
    a = a % 1.0
    lo = lo % 1.0
    off_a = (a - lo) % 1.0
    d_lo = min((lo - a) % 1.0, (a - lo) % 1.0)
    hi = (lo + width) % 1.0
    d_hi = min((hi - a) % 1.0, (a - hi) % 1.0)
    d_min = 0.0 if off_a <= width else min(d_lo, d_hi)
    off_anti = (a + 0.5 - lo) % 1.0
    d_max = 0.5 if off_anti <= width else max(d_lo, d_hi)
    return d_min, d_max


def contains(target: TargetSpec, n: int, x) -> Containment:
    """Three-valued membership of x (points or enclosures) in E_n.

    Ambiguous only when the enclosure straddles the target boundary; the
    answer is monotone under enclosure refinement.
    """
    if len(x) != target.d:
        raise ValueError("point dimension mismatch")
    bounds = [_distance_bounds(c, a) for c, a in zip(x, target.center)]
    if target.shape == Shape.HYPERBOLOID:
        lo = math.prod(b[0] for b in bounds)
        hi = math.prod(b[1] for b in bounds)
        radius = target.rates[0].psi(n)
        if hi <= radius:
            return Containment.YES
        if lo > radius:
            return Containment.NO
        return Containment.AMBIGUOUS
    radii = (
        [target.rates[0].psi(n)] * target.d
        if target.shape == Shape.BALL
        else [r.psi(n) for r in target.rates]
    )
    if all(hi <= r for (_, hi), r in zip(bounds, radii)):
        return Containment.YES
    if any(lo > r for (lo, _), r in zip(bounds, radii)):
        return Containment.NO
    return Containment.AMBIGUOUS
