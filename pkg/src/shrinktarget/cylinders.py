"""Cylinder structure of beta-expansions: intervals of linearity of T_beta^n.

For beta > 1 the order-n cylinders are driven by the orbit of 1: a cylinder
whose n-step image is [0, y) splits into floor(beta*y) full children (image
all of [0,1)) followed by one partial child of image [0, frac(beta*y)).
That automaton gives exact counts, full/not-full flags, and streaming
left-to-right scans without materializing the tree.  A direct
interval-refinement engine covers negative beta (and doubles as an
independent oracle for the automaton).

Boundary convention: cylinders are half-open [a, b); results at points that
sit exactly on a boundary are convention-dependent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np

from .errors import Indeterminate, PrecisionExhausted
from .orbits import as_fraction, is_symbolic, resolve_scalar

FULL_DECISION_TOL = 2.0 ** -40
_MAX_EXPLICIT = 2_000_000


@dataclass(frozen=True)
class Cylinder:
    """Maximal interval of linearity of T_beta^n.

    ``image`` is the (lo, hi) interval T_beta^n maps this cylinder onto;
    ``uncertainty`` bounds the rounding error carried by the stored
    endpoints (0 for the exact automaton construction).
    """

    beta: float
    word: tuple
    left: float
    right: float
    full: bool
    image: tuple
    uncertainty: float = 0.0

    @property
    def order(self) -> int:
        return len(self.word)

    @property
    def length(self) -> float:
        return self.right - self.left


class BetaAutomaton:
    """Orbit-of-1 automaton of T_beta for beta > 1.

    State j holds y_j = T_beta^j(1) (y_0 = 1); from state j there are
    m_j = floor(beta*y_j) full children (state 0) and, unless beta*y_j is
    an exact integer, one partial child (state j+1).  Arithmetic runs at
    high precision with an exact-snap threshold so algebraic coincidences
    (e.g. the golden ratio's finite expansion of 1) are honored.
    """

    def __init__(self, beta, depth: int, bits: Optional[int] = None):
        b_float = float(resolve_scalar(beta))
        if b_float <= 1:
            raise ValueError("automaton requires beta > 1")
        self.beta = b_float
        self.depth = depth
        if bits is None:
            bits = max(320, 2 * (math.ceil(depth * math.log2(b_float)) + 80))
        self.bits = bits
        snap_exp = bits // 2
        with mpmath.workprec(bits):
            if is_symbolic(beta):
                bval = (1 + mpmath.sqrt(5)) / 2 if str(beta).lower() in ("g", "golden") else mpmath.e
            else:
                frac = as_fraction(beta)
                bval = mpmath.mpf(frac.numerator) / frac.denominator
            snap = mpmath.mpf(2) ** (-snap_exp)
            ys = [mpmath.mpf(1)]
            ms: list[int] = []
            terminal: list[bool] = []
            for _ in range(depth + 1):
                z = bval * ys[-1]
                k = int(mpmath.floor(z))
                f = z - k
                if f < snap:
                    ms.append(k)
                    terminal.append(True)
                    ys.append(mpmath.mpf(0))
                elif f > 1 - snap:
                    ms.append(k + 1)
                    terminal.append(True)
                    ys.append(mpmath.mpf(0))
                else:
                    ms.append(k)
                    terminal.append(False)
                    ys.append(f)
                if terminal[-1]:
                    break
            self.y_values = [float(y) for y in ys]
            self.branch_counts = ms
            self.terminal = terminal

    def state(self, j: int) -> tuple[int, bool, float]:
        """(full children, terminal?, y) for state j; terminal states repeat."""
        if j < len(self.branch_counts):
            return self.branch_counts[j], self.terminal[j], self.y_values[j]
        # orbit of 1 hit zero: the chain of states ended earlier
        return 0, True, 0.0

    @property
    def orbit_length(self) -> int:
        return len(self.branch_counts)

    def count(self, n: int) -> int:
        """Exact number of order-n cylinders (paths of length n from state 0)."""

        @lru_cache(maxsize=None)
        def c(j: int, k: int) -> int:
            if k == 0:
                return 1
            m, term, _ = self.state(j)
            total = m * c(0, k - 1)
            if not term:
                total += c(j + 1, k - 1)
            return total

        return c(0, n)

    def leaf_states(self, j: int, k: int) -> np.ndarray:
        """Depth-k leaf state indices below state j, in left-to-right order."""
        if k == 0:
            return np.array([j], dtype=np.int32)
        m, term, _ = self.state(j)
        parts = [self.leaf_states(0, k - 1)] * m
        if not term:
            parts.append(self.leaf_states(j + 1, k - 1))
        if not parts:
            return np.empty(0, dtype=np.int32)
        return np.concatenate(parts)


def count_cylinders(beta, n: int) -> int:
    """Exact count N_n of order-n cylinders of T_beta, beta > 1."""
    return BetaAutomaton(beta, n).count(n)


def cylinders_of_order(beta, n: int, engine: str = "auto") -> list[Cylinder]:
    """Ordered list of the order-n cylinders covering [0,1).

    ``engine="automaton"`` (beta > 1 only) uses the orbit-of-1 structure;
    ``engine="refine"`` refines intervals directly and also handles
    beta < -1.  Counts above ~2e6 refuse to materialize; use the streaming
    scan helpers instead.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    b = float(resolve_scalar(beta))
    if abs(b) <= 1:
        raise ValueError("|beta| must be > 1")
    if engine == "auto":
        engine = "automaton" if b > 1 else "refine"
    if engine == "automaton":
        if b <= 1:
            raise ValueError("the automaton engine requires beta > 1")
        return _cylinders_automaton(beta, n)
    if engine == "refine":
        return _cylinders_refine(beta, n)
    raise ValueError(f"unknown engine {engine!r}")


def _cylinders_automaton(beta, n: int) -> list[Cylinder]:
    auto = BetaAutomaton(beta, n)
    total = auto.count(n)
    if total > _MAX_EXPLICIT:
        raise ValueError(
            f"{total} cylinders at order {n}: too many to materialize; "
            "use full_cylinder_gap / count_cylinders for streaming statistics"
        )
    b = auto.beta
    out: list[Cylinder] = []
    inv_pow = [b ** -(k + 1) for k in range(n)]

    def walk(j: int, depth: int, left: float, word: tuple):
        if depth == n:
            _, _, y = auto.state(j)
            width = y * (b ** -n)
            out.append(
                Cylinder(b, word, left, left + width, full=(j == 0),
                         image=(0.0, y), uncertainty=2e-15 * n)
            )
            return
        m, term, _ = auto.state(j)
        for digit in range(m):
            walk(0, depth + 1, left + digit * inv_pow[depth], word + (digit,))
        if not term:
            walk(j + 1, depth + 1, left + m * inv_pow[depth], word + (m,))

    walk(0, 0, 0.0, ())
    return out


def _cylinders_refine(beta, n: int) -> list[Cylinder]:
    """Order-n cylinders by direct refinement; works for either sign of beta."""
    b = float(resolve_scalar(beta))
    absb = abs(b)
    num_cells = math.floor(absb) + 1
    # pieces: (left, right, slope, offset) with T^k(x) = slope*x + offset on [left, right)
    pieces = [(0.0, 1.0, 1.0, 0.0, ())]
    for _ in range(n):
        nxt = []
        for (l, r, s, t, word) in pieces:
            u, v = sorted((s * l + t, s * r + t))
            for j in range(num_cells):
                cell_lo = j / absb
                cell_hi = min((j + 1) / absb, 1.0)
                lo = max(u, cell_lo)
                hi = min(v, cell_hi)
                if hi - lo <= 1e-15:
                    continue
                if s > 0:
                    xl, xr = (lo - t) / s, (hi - t) / s
                else:
                    xl, xr = (hi - t) / s, (lo - t) / s
                if b > 0:
                    s2, t2 = b * s, b * t - j
                else:
                    s2, t2 = b * s, b * t + j + 1
                nxt.append((xl, xr, s2, t2, word + (j,)))
            if len(nxt) > _MAX_EXPLICIT:
                raise ValueError("too many cylinders to materialize")
        pieces = nxt
    out = []
    for (l, r, s, t, word) in sorted(pieces, key=lambda p: p[0]):
        u, v = sorted((s * l + t, s * r + t))
        unc = 1e-13 * n * max(1.0, absb)
        full = u <= FULL_DECISION_TOL and v >= 1 - FULL_DECISION_TOL
        out.append(Cylinder(b, word, l, r, full=full, image=(u, v), uncertainty=unc))
    return out


def is_full_cylinder(beta, cyl: Cylinder, tol: float = FULL_DECISION_TOL) -> bool:
    """True iff T_beta^n maps the cylinder onto all of [0,1).

    Full is declared only when both image endpoints sit within ``tol`` of 0
    and 1.  Raises Indeterminate when the stored endpoint uncertainty
    overlaps the decision threshold.
    """
    u, v = cyl.image
    unc = cyl.uncertainty
    lo_gap = u - 0.0
    hi_gap = 1.0 - v
    if max(lo_gap, hi_gap) + unc <= tol:
        return True
    if max(lo_gap, hi_gap) - unc > tol:
        return False
    raise Indeterminate(
        "image endpoint within rounding uncertainty of the fullness threshold; "
        "rebuild the cylinder at higher precision"
    )


def full_cylinder_stats(beta, n: int) -> dict:
    """Streaming left-to-right scan of the order-n cylinders (beta > 1).

    Returns the exact cylinder count, number of full cylinders, the longest
    run of consecutive non-full cylinders (anywhere, including the ends),
    and the maximum distance between consecutive full cylinders.
    """
    auto = BetaAutomaton(beta, n)
    b = auto.beta
    if n < 1:
        raise ValueError("n must be >= 1")
    h = min(n // 2, 12)
    top = auto.leaf_states(0, n - h)
    widths = np.array([auto.state(j)[2] for j in range(n + 2)], dtype=np.float64)
    chunks = {int(s): auto.leaf_states(int(s), h) for s in np.unique(top)}

    max_run = 0
    max_gap_w = 0.0
    carry_run = 0
    carry_w = 0.0
    seen_full = False
    total = 0
    fulls = 0
    for s in top:
        chunk = chunks[int(s)]
        total += len(chunk)
        w = widths[chunk]
        positions = np.flatnonzero(chunk == 0)
        if len(positions) == 0:
            carry_run += len(chunk)
            carry_w += float(w.sum())
            continue
        fulls += len(positions)
        cums = np.cumsum(w)
        first = int(positions[0])
        head_run = carry_run + first
        head_w = carry_w + (float(cums[first - 1]) if first > 0 else 0.0)
        max_run = max(max_run, head_run)
        if seen_full:
            max_gap_w = max(max_gap_w, head_w)
        if len(positions) > 1:
            runs = np.diff(positions) - 1
            max_run = max(max_run, int(runs.max()))
            seg_w = cums[positions[1:] - 1] - cums[positions[:-1]]
            max_gap_w = max(max_gap_w, float(seg_w.max()))
        last = int(positions[-1])
        carry_run = len(chunk) - 1 - last
        carry_w = float(cums[-1]) - float(cums[last])
        seen_full = True
    max_run = max(max_run, carry_run)
    if not seen_full:
        raise PrecisionExhausted("no full cylinder found in the scan")
    scale = b ** -n
    return {
        "count": total,
        "full_count": fulls,
        "max_nonfull_run": max_run,
        "max_gap": max_gap_w * scale,
    }


def full_cylinder_gap(beta, n: int) -> float:
    """Max distance between consecutive full order-n cylinders (beta > 1).

    Always < (n+1) * beta^-n: every n+1 consecutive cylinders contain a
    full one and each non-full cylinder is shorter than beta^-n.
    """
    return full_cylinder_stats(beta, n)["max_gap"]


def _ball_arcs(a: float, r: float) -> list[tuple[float, float]]:
    """B(a, r) on the torus as subintervals of [0, 1)."""
    if r >= 0.5:
        return [(0.0, 1.0)]
    lo, hi = a - r, a + r
    if lo < 0:
        return [(0.0, hi), (lo + 1.0, 1.0)]
    if hi > 1:
        return [(0.0, hi - 1.0), (lo, 1.0)]
    return [(lo, hi)]


def preimage_intervals(beta, n: int, a: float, r: float) -> list[tuple[float, float]]:
    """T_beta^{-n}(B(a, r)) as disjoint intervals, each inside one cylinder.

    Each piece lies inside a single order-n cylinder and has length at most
    2 r |beta|^{-n}.  Pieces are returned sorted and never merged across
    cylinder boundaries.
    """
    if not (0 < r < 0.5 or n == 0):
        if not 0 < r:
            raise ValueError("radius must be positive")
        if r >= 0.5:
            raise ValueError("radius must be < 1/2")
    b = float(resolve_scalar(beta))
    if abs(b) <= 1:
        raise ValueError("|beta| must be > 1")
    arcs = _ball_arcs(a % 1.0, r)
    lo = np.array([p[0] for p in arcs])
    hi = np.array([p[1] for p in arcs])
    for _ in range(n):
        lo, hi = _pullback(b, lo, hi)
    order = np.argsort(lo, kind="stable")
    return [(float(lo[i]), float(hi[i])) for i in order]


def _pullback(b: float, lo: np.ndarray, hi: np.ndarray):
    """One inverse branch expansion of a union of intervals in [0,1)."""
    absb = abs(b)
    num_cells = math.floor(absb) + 1
    outs_lo = []
    outs_hi = []
    for j in range(num_cells):
        cell_lo = j / absb
        cell_hi = min((j + 1) / absb, 1.0)
        if b > 0:
            # T(x) = b x - j on the cell
            cand_lo = (lo + j) / b
            cand_hi = (hi + j) / b
        else:
            # T(x) = b x + j + 1 on the cell (b < 0 reverses orientation)
            cand_lo = (hi - (j + 1)) / b
            cand_hi = (lo - (j + 1)) / b
        clip_lo = np.maximum(cand_lo, cell_lo)
        clip_hi = np.minimum(cand_hi, cell_hi)
        keep = clip_hi - clip_lo > 1e-16
        if np.any(keep):
            outs_lo.append(clip_lo[keep])
            outs_hi.append(clip_hi[keep])
    if not outs_lo:
        return np.empty(0), np.empty(0)
    return np.concatenate(outs_lo), np.concatenate(outs_hi)
