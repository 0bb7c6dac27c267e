"""Orbit engines for torus maps x -> beta*x mod 1 and x -> Mx mod 1.

Two engines, per the performance contract:

* an interval engine on dyadic-rational endpoints (``num / 2**bits``) with
  directed rounding, for arbitrary real multipliers at desk scale, and
* an exact digit-stream engine for integer bases, whose cursor shift
  realizes the map exactly in O(1) amortized time per step.

All scalar inputs are interpreted as the exact binary value passed: a float
is the dyadic rational it stores.  The tokens ``"g"``/``"golden"`` and
``"e"`` resolve to directed high-precision enclosures of the golden ratio
and Euler's number.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import mpmath
import numpy as np

from .errors import BudgetTooLarge, PrecisionExhausted, SingularMatrix

GUARD_BITS = 64
WIDTH_TOLERANCE_BITS = 8
_DEFAULT_PRECISION_CAP = 1 << 20

Number = Union[int, float, Fraction, str]


def precision_cap() -> int:
    """Configured cap on precision budgets, in bits."""
    env = os.environ.get("SHRINKTARGET_PRECISION_CAP")
    return int(env) if env else _DEFAULT_PRECISION_CAP


def as_fraction(x: Number) -> Fraction:
    """Exact conversion of a scalar to a Fraction.

    Floats convert via their exact binary value; strings parse as decimal
    literals or fractions ("0.7", "9/5").  The symbolic tokens handled by
    :func:`resolve_scalar` are not accepted here because they are not
    rational.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        frac = Fraction(man, 1) * (Fraction(2) ** exp)
        return -frac if sign else frac
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


_SYMBOLIC = {"g", "golden", "e"}


def is_symbolic(x) -> bool:
    return isinstance(x, str) and x.lstrip("+-").lower() in _SYMBOLIC


def resolve_scalar(x: Number, bits: int = 96) -> Fraction:
    """Resolve a scalar (possibly symbolic "g"/"golden"/"e") to a Fraction.

    Symbolic constants are rounded to ``bits`` bits; everything else is
    exact.
    """
    if is_symbolic(x):
        lo, hi = _symbolic_bounds(x, bits)
        return (lo + hi) / 2
    return as_fraction(x)


def _symbolic_bounds(token: str, bits: int) -> tuple[Fraction, Fraction]:
    name = token.lstrip("+-").lower()
    negative = token.strip().startswith("-")
    with mpmath.workprec(bits + 16):
        if name in ("g", "golden"):
            val = (1 + mpmath.sqrt(5)) / 2
        else:
            val = mpmath.e
        frac = as_fraction(mpmath.mpf(val))
    scale = 1 << bits
    lo = Fraction(math.floor(frac * scale) - 1, scale)
    hi = Fraction(math.floor(frac * scale) + 2, scale)
    if negative:
        lo, hi = -hi, -lo
    return lo, hi


def _scalar_bounds(x: Number, bits: int) -> tuple[int, int]:
    """Integer bounds b_lo <= x*2**bits <= b_hi (exact for rationals)."""
    if is_symbolic(x):
        lo, hi = _symbolic_bounds(x, bits)
        scale = 1 << bits
        return math.floor(lo * scale), math.ceil(hi * scale)
    frac = as_fraction(x)
    scaled = frac * (1 << bits)
    lo = math.floor(scaled)
    hi = lo if scaled == lo else lo + 1
    return lo, hi


class ScaledScalar:
    """Directed integer enclosure lo/2**bits <= value <= hi/2**bits.

    Dyadic inputs (ints, floats) get their minimal exact representation so
    multiplying by them stays a single small-integer product.
    """

    __slots__ = ("lo", "hi", "bits")

    def __init__(self, lo: int, hi: int, bits: int):
        self.lo = lo
        self.hi = hi
        self.bits = bits

    @classmethod
    def build(cls, value: Number, bits: int) -> "ScaledScalar":
        if isinstance(value, ScaledScalar):
            return value
        if not is_symbolic(value):
            frac = as_fraction(value)
            den = frac.denominator
            if den & (den - 1) == 0:
                b = den.bit_length() - 1
                return cls(frac.numerator, frac.numerator, b)
        lo, hi = _scalar_bounds(value, bits)
        return cls(lo, hi, bits)

    def at(self, bits: int) -> tuple[int, int]:
        """Outward bounds rescaled to ``bits`` bits."""
        if bits >= self.bits:
            shift = bits - self.bits
            return self.lo << shift, self.hi << shift
        shift = self.bits - bits
        return self.lo >> shift, -((-self.hi) >> shift)

    @property
    def abs_floor(self) -> Fraction:
        vals = (abs(Fraction(self.lo, 1 << self.bits)), abs(Fraction(self.hi, 1 << self.bits)))
        return min(vals)


class UnitRealInterval:
    """A point of [0,1) tracked by an interval enclosure mod 1.

    Internally ``[start, start+width] / 2**precision_bits`` with the value
    understood modulo one; ``wraps`` flags enclosures that straddle the
    0/1 seam (the flagged two-piece result of a boundary-straddling step).
    """

    __slots__ = ("_start", "_width", "precision_bits")

    def __init__(self, start_num: int, width_num: int, precision_bits: int):
        if precision_bits < 1:
            raise ValueError("precision_bits must be positive")
        if width_num < 0:
            raise ValueError("negative enclosure width")
        scale = 1 << precision_bits
        self._start = start_num % scale
        self._width = width_num
        self.precision_bits = precision_bits

    @classmethod
    def from_value(cls, x: Number, precision_bits: int = 128) -> "UnitRealInterval":
        if precision_bits < GUARD_BITS:
            raise ValueError(f"precision_bits must be >= guard ({GUARD_BITS})")
        lo, hi = _scalar_bounds(x, precision_bits)
        iv = cls(lo, hi - lo, precision_bits)
        iv._check_guard()
        return iv

    @classmethod
    def from_bounds(cls, lo: Number, hi: Number, precision_bits: int = 128) -> "UnitRealInterval":
        if precision_bits < GUARD_BITS:
            raise ValueError(f"precision_bits must be >= guard ({GUARD_BITS})")
        flo = as_fraction(lo) % 1
        fhi = as_fraction(hi) % 1
        scale = 1 << precision_bits
        a = math.floor(flo * scale)
        width_frac = (fhi - flo) % 1
        b = a + math.ceil(width_frac * scale)
        iv = cls(a, b - a, precision_bits)
        iv._check_guard()
        return iv

    def _check_guard(self):
        if self.width > Fraction(1, 1 << GUARD_BITS):
            raise ValueError(
                f"enclosure width {float(self.width):.3e} exceeds 2^-{GUARD_BITS} at construction"
            )

    @property
    def lo(self) -> Fraction:
        return Fraction(self._start, 1 << self.precision_bits)

    @property
    def hi(self) -> Fraction:
        scale = 1 << self.precision_bits
        return Fraction((self._start + self._width) % scale, scale)

    @property
    def lo_float(self) -> float:
        return self._start / (1 << self.precision_bits)

    @property
    def hi_float(self) -> float:
        scale = 1 << self.precision_bits
        return ((self._start + self._width) % scale) / scale

    @property
    def width(self) -> Fraction:
        return Fraction(self._width, 1 << self.precision_bits)

    @property
    def width_float(self) -> float:
        return self._width / (1 << self.precision_bits)

    @property
    def wraps(self) -> bool:
        return self._start + self._width >= (1 << self.precision_bits)

    @property
    def midpoint_float(self) -> float:
        scale = 1 << self.precision_bits
        return ((self._start + self._width // 2) % scale) / scale

    def contains_value(self, x: Number) -> bool:
        """Exact membership of a scalar in the enclosure (mod 1)."""
        frac = as_fraction(x) % 1
        scale = 1 << self.precision_bits
        offset = (frac - self.lo) % 1
        return offset <= Fraction(self._width, scale)

    def rescaled(self, bits: int) -> "UnitRealInterval":
        """Outward-rounded copy at ``bits`` bits of precision."""
        if bits == self.precision_bits:
            return self
        if bits > self.precision_bits:
            shift = bits - self.precision_bits
            return UnitRealInterval(self._start << shift, self._width << shift, bits)
        shift = self.precision_bits - bits
        start = self._start >> shift
        end = -((-(self._start + self._width)) >> shift)
        return UnitRealInterval(start, end - start, bits)

    def __repr__(self):
        return (
            f"UnitRealInterval(lo={self.lo_float:.17g}, hi={self.hi_float:.17g}, "
            f"bits={self.precision_bits}{', wraps' if self.wraps else ''})"
        )


def beta_step(
    beta: Number,
    x: UnitRealInterval,
    out_bits: Optional[int] = None,
    width_tolerance_bits: int = WIDTH_TOLERANCE_BITS,
) -> UnitRealInterval:
    """One application of x -> beta*x mod 1 on an enclosure.

    frac(y) = y - floor(y) maps into [0,1) for either sign of beta.  A
    result that straddles an integer boundary comes back as a wrapped
    (two-piece) interval with ``wraps=True``.
    """
    p = x.precision_bits
    scaled = ScaledScalar.build(beta, p + 8)
    q = min(scaled.bits, p + 8)
    b_lo, b_hi = scaled.at(q)
    if max(abs(b_lo), abs(b_hi)) <= (1 << q):
        raise ValueError("|beta| must be > 1")
    a0 = x._start
    if b_lo == b_hi:
        if x._width == 0:
            m_lo = m_hi = a0 * b_lo
        else:
            p0 = a0 * b_lo
            p1 = (a0 + x._width) * b_lo
            m_lo, m_hi = (p0, p1) if p0 <= p1 else (p1, p0)
    else:
        a1 = a0 + x._width
        prods = (a0 * b_lo, a0 * b_hi, a1 * b_lo, a1 * b_hi)
        m_lo = min(prods)
        m_hi = max(prods)
    total_bits = p + q
    if out_bits is None:
        out_bits = p
    floor_lo = m_lo >> total_bits
    rem = m_lo - (floor_lo << total_bits)
    shift = total_bits - out_bits
    if shift >= 0:
        start = rem >> shift
        end = -((-(rem + (m_hi - m_lo))) >> shift)
    else:
        start = rem << -shift
        end = (rem + (m_hi - m_lo)) << -shift
    width = end - start
    if width >= (1 << out_bits) or width > (1 << max(out_bits - width_tolerance_bits, 0)):
        raise PrecisionExhausted(
            f"enclosure width {width / (1 << out_bits):.3e} exceeds 2^-{width_tolerance_bits}"
        )
    return UnitRealInterval(start, width, out_bits)


@dataclass(frozen=True)
class DiagonalTorusSystem:
    """diag(beta_1..beta_d) acting on the d-torus coordinatewise."""

    betas: tuple
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(self.betas))
        if not self.betas:
            raise ValueError("empty diagonal")
        if not self.degenerate:
            for b in self.betas:
                if abs(self.modulus_of(b)) <= 1:
                    raise ValueError(
                        f"|beta|={float(self.modulus_of(b))} <= 1: use "
                        "DiagonalTorusSystem.with_degenerate for the reduction path"
                    )

    @staticmethod
    def modulus_of(b) -> Fraction:
        return abs(resolve_scalar(b))

    @classmethod
    def with_degenerate(cls, betas) -> "DiagonalTorusSystem":
        """Constructor admitting |beta_i| <= 1, for the reduction analysis only."""
        return cls(tuple(betas), degenerate=True)

    @property
    def d(self) -> int:
        return len(self.betas)

    @property
    def moduli(self) -> tuple:
        return tuple(float(self.modulus_of(b)) for b in self.betas)

    @property
    def max_modulus(self) -> float:
        return max(self.moduli)

    @property
    def is_integer(self) -> bool:
        return all(
            isinstance(b, int) or (isinstance(b, float) and b.is_integer()) or
            (isinstance(b, Fraction) and b.denominator == 1)
            for b in self.betas
        )


@dataclass(frozen=True)
class IntegerMatrixSystem:
    """Non-singular integer matrix acting on the d-torus, x -> Mx mod 1."""

    matrix: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", rows)
        d = len(rows)
        if any(len(row) != d for row in rows):
            raise ValueError("matrix must be square")
        if _int_det(rows) == 0:
            raise SingularMatrix("matrix determinant is zero")

    @property
    def d(self) -> int:
        return len(self.matrix)

    @property
    def infinity_norm(self) -> int:
        return max(sum(abs(v) for v in row) for row in self.matrix)


def _int_det(rows) -> int:
    """Exact determinant by fraction-free Gaussian elimination (Bareiss)."""
    n = len(rows)
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def required_precision(system, n_steps: int, cap: Optional[int] = None) -> int:
    """Bits needed so that ``iterate`` never exhausts precision in n steps.

    ceil(n * log2(max expansion factor)) + 64 guard bits.  For integer
    matrices the expansion factor is the infinity norm (a sound bound on
    how fast enclosures can grow under Mx mod 1).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if isinstance(system, IntegerMatrixSystem):
        growth = float(system.infinity_norm)
    else:
        growth = float(system.max_modulus)
    if growth <= 1:
        bits = GUARD_BITS
    else:
        bits = math.ceil(n_steps * math.log2(growth)) + GUARD_BITS
    limit = cap if cap is not None else precision_cap()
    if bits > limit:
        raise BudgetTooLarge(
            f"{bits} bits needed for {n_steps} steps exceeds cap {limit}; "
            "use the integer digit engine for long runs"
        )
    return bits


def _schedule_bits(modulus: float, remaining: int) -> int:
    if modulus <= 1:
        return GUARD_BITS
    return math.ceil(remaining * math.log2(modulus)) + GUARD_BITS


def iterate(
    system,
    x: Sequence,
    n: int,
    precision_bits: Optional[int] = None,
    width_tolerance_bits: int = WIDTH_TOLERANCE_BITS,
):
    """Coordinatewise enclosure (or exact rationals) of T^n(x).

    DiagonalTorusSystem: per-coordinate beta steps under a shrinking
    precision schedule (bits retained at step j cover only the n-j steps
    still to come, plus guard).  Exact Fractions are returned when the
    system is an integer matrix (or integer diagonal) applied to rational
    points.  Raises PrecisionExhausted with the failing step index.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(system, IntegerMatrixSystem):
        return _iterate_matrix(system, x, n, precision_bits, width_tolerance_bits)
    return _iterate_diagonal(system, x, n, precision_bits, width_tolerance_bits)


def _all_rational(x) -> bool:
    return all(isinstance(c, (int, Fraction)) for c in x)


def _iterate_matrix(system, x, n, precision_bits, width_tolerance_bits):
    d = system.d
    if len(x) != d:
        raise ValueError("point dimension mismatch")
    if _all_rational(x):
        pt = [Fraction(c) % 1 for c in x]
        for _ in range(n):
            pt = [
                sum(system.matrix[i][j] * pt[j] for j in range(d)) % 1
                for i in range(d)
            ]
        return tuple(pt)
    bits = precision_bits or required_precision(system, max(n, 1))
    ivs = [
        c.rescaled(bits) if isinstance(c, UnitRealInterval)
        else UnitRealInterval.from_value(c, bits)
        for c in x
    ]
    scale = 1 << bits
    tol_width = 1 << max(bits - width_tolerance_bits, 0)
    for step in range(n):
        starts = [iv._start for iv in ivs]
        widths = [iv._width for iv in ivs]
        new = []
        for i in range(d):
            lo = 0
            hi = 0
            for j in range(d):
                m = system.matrix[i][j]
                if m >= 0:
                    lo += m * starts[j]
                    hi += m * (starts[j] + widths[j])
                else:
                    lo += m * (starts[j] + widths[j])
                    hi += m * starts[j]
            width = hi - lo
            if width > tol_width:
                raise PrecisionExhausted(
                    f"coordinate {i} enclosure too wide at step {step + 1}", step=step
                )
            new.append(UnitRealInterval(lo % scale, width, bits))
        ivs = new
    return tuple(ivs)


def _iterate_diagonal(system, x, n, precision_bits, width_tolerance_bits):
    d = system.d
    if len(x) != d:
        raise ValueError("point dimension mismatch")
    if system.is_integer and _all_rational(x) and not system.degenerate:
        pt = []
        for b, c in zip(system.betas, x):
            v = Fraction(c) % 1
            bi = int(b)
            num, den = v.numerator, v.denominator
            num = (num * pow(bi, n, den)) % den if n > 0 else num
            pt.append(Fraction(num, den))
        return tuple(pt)
    out = []
    for i, b in enumerate(system.betas):
        mod = float(DiagonalTorusSystem.modulus_of(b))
        bits0 = precision_bits or _schedule_bits(mod, n)
        if precision_bits is None and bits0 > precision_cap():
            raise BudgetTooLarge(f"{bits0} bits needed for coordinate {i}")
        c = x[i]
        iv = (
            c.rescaled(bits0) if isinstance(c, UnitRealInterval)
            else UnitRealInterval.from_value(c, max(bits0, GUARD_BITS))
        )
        scaled_beta = ScaledScalar.build(b, iv.precision_bits + 8)
        for step in range(n):
            target = min(iv.precision_bits, _schedule_bits(mod, n - step - 1))
            try:
                iv = beta_step(scaled_beta, iv, out_bits=target,
                               width_tolerance_bits=width_tolerance_bits)
            except PrecisionExhausted as exc:
                exc.step = step
                raise
        out.append(iv)
    return tuple(out)


class DigitStream:
    """Lazily extended base-beta digit sequence; the cursor shift is T^n.

    Represents x = sum digits[k] * beta^-(k+1).  Sources: an exact
    Fraction (digits computed by long division on demand), a seeded
    numpy Generator (i.i.d. uniform digits, i.e. x ~ Lebesgue), or an
    explicit digit sequence.
    """

    def __init__(self, base: int, *, fraction=None, rng=None, digits=None):
        if int(base) != base or base < 2:
            raise ValueError("base must be an integer >= 2")
        self.base = int(base)
        self.cursor = 0
        self._digits: list[int] = []
        self._rem = None
        self._rng = None
        if fraction is not None:
            frac = as_fraction(fraction) % 1
            self._rem = (frac.numerator, frac.denominator)
        elif rng is not None:
            self._rng = rng
        elif digits is not None:
            self._digits = [int(v) for v in digits]
            if any(v < 0 or v >= base for v in self._digits):
                raise ValueError("digit out of range")
        else:
            raise ValueError("one of fraction, rng, digits is required")

    @classmethod
    def from_fraction(cls, x, base: int) -> "DigitStream":
        return cls(base, fraction=x)

    @classmethod
    def from_rng(cls, base: int, rng: np.random.Generator) -> "DigitStream":
        return cls(base, rng=rng)

    @classmethod
    def from_digits(cls, digits: Iterable[int], base: int) -> "DigitStream":
        return cls(base, digits=digits)

    def _extend(self, upto: int):
        while len(self._digits) < upto:
            if self._rem is not None:
                p, q = self._rem
                p *= self.base
                self._digits.append(p // q)
                self._rem = (p % q, q)
            elif self._rng is not None:
                block = self._rng.integers(0, self.base, size=max(64, upto - len(self._digits)))
                self._digits.extend(int(v) for v in block)
            else:
                raise IndexError("fixed digit stream exhausted")

    def digit(self, k: int) -> int:
        idx = self.cursor + k
        self._extend(idx + 1)
        return self._digits[idx]

    def shift(self, n: int = 1) -> "DigitStream":
        if n < 0 or self.cursor + n < 0:
            raise ValueError("cannot shift before the stream origin")
        self._extend(self.cursor + n)
        self.cursor += n
        return self

    def value_bounds(self, num_digits: int) -> tuple[Fraction, Fraction]:
        """Exact bracket [lo, lo + base^-num_digits] of the current value."""
        self._extend(self.cursor + num_digits)
        num = 0
        for k in range(num_digits):
            num = num * self.base + self._digits[self.cursor + k]
        den = self.base ** num_digits
        lo = Fraction(num, den)
        return lo, lo + Fraction(1, den)

    def float_value(self, num_digits: Optional[int] = None) -> float:
        if num_digits is None:
            num_digits = math.ceil(60 / math.log2(self.base))
        lo, _ = self.value_bounds(num_digits)
        return float(lo)

    def distance_within(self, center, radius, max_digits: int = 4096) -> Optional[bool]:
        """Three-valued test of ||x - center|| <= radius (wrap-aware).

        Returns True/False once decidable from finitely many digits, or
        None if the value sits on the boundary to within base^-max_digits.
        """
        a = as_fraction(center) % 1
        r = as_fraction(radius)
        k = max(8, math.ceil(16 / math.log2(self.base)))
        while True:
            lo, hi = self.value_bounds(k)
            d_lo, d_hi = _wrap_distance_bounds(lo, hi, a)
            if d_hi <= r:
                return True
            if d_lo > r:
                return False
            if k >= max_digits:
                return None
            k = min(2 * k, max_digits)


def _wrap_distance_bounds(lo: Fraction, hi: Fraction, a: Fraction):
    """Range of ||x - a|| for x in [lo, hi] (arc on the circle, hi-lo < 1)."""
    width = hi - lo
    if width >= 1:
        return Fraction(0), Fraction(1, 2)
    offset_a = (a - lo) % 1
    d_end_lo = min((lo - a) % 1, (a - lo) % 1)
    d_end_hi = min((hi - a) % 1, (a - hi) % 1)
    d_min = Fraction(0) if offset_a <= width else min(d_end_lo, d_end_hi)
    offset_anti = (a + Fraction(1, 2) - lo) % 1
    d_max = Fraction(1, 2) if offset_anti <= width else max(d_end_lo, d_end_hi)
    return d_min, d_max


def char_poly_int(matrix) -> list[int]:
    """Exact characteristic polynomial coefficients [1, c1, ..., cd]."""
    rows = [[Fraction(int(v)) for v in row] for row in matrix]
    d = len(rows)
    coeffs = [Fraction(1)]
    b = [row[:] for row in rows]
    for k in range(1, d + 1):
        tr = sum(b[i][i] for i in range(d))
        ck = -tr / k
        coeffs.append(ck)
        if k == d:
            break
        for i in range(d):
            b[i][i] += ck
        b = [
            [sum(rows[i][m] * b[m][j] for m in range(d)) for j in range(d)]
            for i in range(d)
        ]
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise AssertionError("characteristic polynomial must be integer")
        out.append(int(c))
    return out


def eigenvalue_moduli(system, tol: float = 1e-12) -> list[float]:
    """Sorted eigenvalue moduli of an integer matrix, error <= tol.

    Exact integer characteristic polynomial, then high-precision root
    finding with an error estimate; precision is raised until the
    estimate clears tol.
    """
    matrix = system.matrix if isinstance(system, IntegerMatrixSystem) else tuple(
        tuple(int(v) for v in row) for row in system
    )
    if _int_det(matrix) == 0:
        raise SingularMatrix("matrix determinant is zero")
    coeffs = char_poly_int(matrix)
    extraprec = 120
    for _ in range(6):
        with mpmath.workprec(53 + extraprec):
            roots, err = mpmath.polyroots(
                coeffs, maxsteps=200, extraprec=extraprec, error=True
            )
            if err < tol / 10:
                return sorted(float(abs(r)) for r in roots)
        extraprec *= 2
    raise ArithmeticError("root isolation did not reach the requested accuracy")
