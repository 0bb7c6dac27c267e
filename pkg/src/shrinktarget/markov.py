"""Constructive Markov subsystems for piecewise linear maps of [0, 1].

Given a map of constant slope modulus b > 8, normalizing the linearity
partition so no piece is more than twice the shortest, then trimming each
piece to the preimage of the pieces fully contained in its image, yields a
Markov subsystem whose transition matrix has row sums >= [b/2] - 2 >= 1.
That forces word counts >= m (b/2 - 3)^(n-1), hence topological entropy
>= log(b/2 - 3) and Hausdorff dimension >= 1 - log8/log b for the
invariant set.

Interval endpoints are exact Fractions whenever the map data is rational;
otherwise floats with a 2^-40 containment slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import SlopeTooSmall
from .measures import SupportSet
from .orbits import as_fraction, is_symbolic, resolve_scalar

CONTAINMENT_SLACK = 2.0 ** -40


def _num(x):
    """Keep Fractions exact, floats as floats."""
    return x if isinstance(x, Fraction) else float(x)


@dataclass(frozen=True)
class PiecewiseLinearMap:
    """T(x) = slopes[j] * x + intercepts[j] on [breakpoints[j], breakpoints[j+1]).

    All slopes share one modulus (the expansion factor), and every piece
    maps into [0, 1].
    """

    breakpoints: tuple
    slopes: tuple
    intercepts: tuple

    def __post_init__(self):
        bp = tuple(self.breakpoints)
        sl = tuple(self.slopes)
        ic = tuple(self.intercepts)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "slopes", sl)
        object.__setattr__(self, "intercepts", ic)
        if len(bp) != len(sl) + 1 or len(sl) != len(ic):
            raise ValueError("need len(breakpoints) == len(slopes)+1 == len(intercepts)+1")
        if bp[0] != 0 or bp[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        mods = {abs(float(s)) for s in sl}
        if max(mods) - min(mods) > 1e-12:
            raise ValueError("slope modulus must be constant across pieces")
        for j in range(len(sl)):
            lo, hi = self.image_of_piece(j)
            if float(lo) < -1e-9 or float(hi) > 1 + 1e-9:
                raise ValueError(f"piece {j} maps outside [0,1]")

    @property
    def num_pieces(self) -> int:
        return len(self.slopes)

    @property
    def slope_modulus(self) -> float:
        return abs(float(self.slopes[0]))

    def piece_lengths(self) -> list:
        return [b - a for a, b in zip(self.breakpoints, self.breakpoints[1:])]

    def image_of_piece(self, j: int) -> tuple:
        a, b = self.breakpoints[j], self.breakpoints[j + 1]
        s, t = self.slopes[j], self.intercepts[j]
        u, v = s * a + t, s * b + t
        return (u, v) if u <= v else (v, u)

    def apply(self, x: float) -> float:
        for j in range(self.num_pieces):
            if self.breakpoints[j] <= x < self.breakpoints[j + 1]:
                return float(self.slopes[j]) * float(x) + float(self.intercepts[j])
        if x == self.breakpoints[-1]:
            j = self.num_pieces - 1
            return float(self.slopes[j]) * float(x) + float(self.intercepts[j])
        raise ValueError("x outside [0, 1]")

    def image_of_interval(self, lo, hi) -> list:
        """Forward image of [lo, hi] as a list of intervals."""
        out = []
        for j in range(self.num_pieces):
            a = max(lo, self.breakpoints[j])
            b = min(hi, self.breakpoints[j + 1])
            if b <= a:
                continue
            s, t = self.slopes[j], self.intercepts[j]
            u, v = s * a + t, s * b + t
            out.append((u, v) if u <= v else (v, u))
        return _merge_intervals(out)


def _merge_intervals(ivs: list, slack=0) -> list:
    if not ivs:
        return []
    ivs = sorted(ivs)
    out = [list(ivs[0])]
    for a, b in ivs[1:]:
        if a <= out[-1][1] + slack:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(p) for p in out]


def beta_map(beta) -> PiecewiseLinearMap:
    """T_beta(x) = beta x mod 1 as an explicit piecewise linear map."""
    exact = not is_symbolic(beta)
    b = as_fraction(beta) if exact else resolve_scalar(beta, 128)
    absb = abs(b)
    if absb <= 1:
        raise ValueError("|beta| must be > 1")
    cells = math.floor(absb) + (0 if absb == math.floor(absb) else 1)
    bps = [Fraction(j) / absb for j in range(cells)] + [Fraction(1)]
    slopes = []
    intercepts = []
    for j in range(cells):
        if b > 0:
            slopes.append(b)
            intercepts.append(Fraction(-j))
        else:
            slopes.append(b)
            intercepts.append(Fraction(j + 1))
    if not exact:
        return PiecewiseLinearMap(
            tuple(float(x) for x in bps),
            tuple(float(s) for s in slopes),
            tuple(float(t) for t in intercepts),
        )
    return PiecewiseLinearMap(tuple(bps), tuple(slopes), tuple(intercepts))


def power_map(beta, k: int) -> PiecewiseLinearMap:
    """T_beta^k as one piecewise linear map: slope modulus |beta|^k,
    at most (floor|beta|+1)^k pieces."""
    if k < 1:
        raise ValueError("k must be >= 1")
    base = beta_map(beta)
    current = base
    for _ in range(k - 1):
        current = _compose(base, current)
    return current


def _compose(outer: PiecewiseLinearMap, inner: PiecewiseLinearMap) -> PiecewiseLinearMap:
    """outer o inner, splitting inner pieces where their image crosses
    outer breakpoints."""
    new_bps = set(inner.breakpoints)
    for j in range(inner.num_pieces):
        a, b = inner.breakpoints[j], inner.breakpoints[j + 1]
        s, t = inner.slopes[j], inner.intercepts[j]
        for c in outer.breakpoints[1:-1]:
            x = (c - t) / s
            if a < x < b:
                new_bps.add(x)
    bps = sorted(new_bps)
    slopes = []
    intercepts = []
    eps = Fraction(1, 10 ** 12) if isinstance(bps[0], Fraction) else 1e-12
    for a, b in zip(bps, bps[1:]):
        mid = (a + b) / 2
        j = _piece_at(inner, mid)
        s1, t1 = inner.slopes[j], inner.intercepts[j]
        y = s1 * mid + t1
        jo = _piece_at(outer, y, eps)
        s2, t2 = outer.slopes[jo], outer.intercepts[jo]
        slopes.append(s2 * s1)
        intercepts.append(s2 * t1 + t2)
    return PiecewiseLinearMap(tuple(bps), tuple(slopes), tuple(intercepts))


def _piece_at(pl: PiecewiseLinearMap, x, eps=0) -> int:
    for j in range(pl.num_pieces):
        if pl.breakpoints[j] <= x < pl.breakpoints[j + 1]:
            return j
    if x >= pl.breakpoints[-1] - eps if eps else x == pl.breakpoints[-1]:
        return pl.num_pieces - 1
    if x < pl.breakpoints[0]:
        return 0
    raise ValueError(f"point {x} outside the map domain")


def normalize_partition(pl: PiecewiseLinearMap) -> PiecewiseLinearMap:
    """Refine so every piece length lies in [kappa, 2 kappa].

    A piece longer than 2 kappa (kappa = shortest length) splits into 2^l
    equal parts, with 2^l kappa < length <= 2^(l+1) kappa.
    """
    lengths = pl.piece_lengths()
    kappa = min(lengths)
    bps = [pl.breakpoints[0]]
    slopes = []
    intercepts = []
    for j, length in enumerate(lengths):
        pieces = 1
        if length > 2 * kappa:
            l = 1
            while not ((2 ** l) * kappa < length <= (2 ** (l + 1)) * kappa):
                l += 1
            pieces = 2 ** l
        a = pl.breakpoints[j]
        step = length / pieces
        for p in range(pieces):
            bps.append(a + (p + 1) * step if p + 1 < pieces else pl.breakpoints[j + 1])
            slopes.append(pl.slopes[j])
            intercepts.append(pl.intercepts[j])
    return PiecewiseLinearMap(tuple(bps), tuple(slopes), tuple(intercepts))


@dataclass(frozen=True)
class MarkovSubsystem:
    """Invariant sub-dynamics with a finite Markov partition.

    ``pieces`` are the trimmed intervals P(i) (closed), ``matrix`` the 0/1
    transition matrix A[j][k] = [P(k) inside closure(T(P(j)))], and
    ``certificates`` the proof-grade bounds extracted from the build.
    """

    pieces: tuple
    matrix: tuple
    kappa: float
    slope_modulus: float
    certificates: dict

    @property
    def size(self) -> int:
        return len(self.pieces)

    def row_sums(self) -> list[int]:
        return [sum(row) for row in self.matrix]


def build_markov(pl: PiecewiseLinearMap) -> MarkovSubsystem:
    """The Markov subsystem of a constant-slope map with modulus > 8.

    Normalizes the partition, trims each piece to the preimage of the
    union of pieces its image fully contains (an adjacent run, so one
    O(m) scan per piece), and certifies row sums, entropy and dimension.
    """
    b = pl.slope_modulus
    if b <= 8:
        raise SlopeTooSmall(f"slope modulus {b} <= 8")
    norm = normalize_partition(pl)
    m = norm.num_pieces
    lengths = norm.piece_lengths()
    kappa = min(float(v) for v in lengths)
    exact = isinstance(norm.breakpoints[0], Fraction)
    slack = 0 if exact else CONTAINMENT_SLACK

    # pieces of the normalized partition fully inside each image (adjacent run)
    contained: list[tuple[int, int]] = []  # [lo_idx, hi_idx) per piece
    for j in range(m):
        u, v = norm.image_of_piece(j)
        lo = _first_piece_at_or_after(norm, u, slack)
        hi = lo
        while hi < m and norm.breakpoints[hi + 1] <= v + slack:
            hi += 1
        if hi <= lo:
            raise AssertionError("image contains no full piece despite slope > 8")
        contained.append((lo, hi))

    # trim: P(j) = piece(j) ∩ T^{-1}(closure of the contained run)
    pieces = []
    for j in range(m):
        lo_idx, hi_idx = contained[j]
        target_lo = norm.breakpoints[lo_idx]
        target_hi = norm.breakpoints[hi_idx]
        s, t = norm.slopes[j], norm.intercepts[j]
        x1 = (target_lo - t) / s
        x2 = (target_hi - t) / s
        plo, phi = (x1, x2) if x1 <= x2 else (x2, x1)
        if phi <= plo:
            raise AssertionError("empty trimmed piece despite slope > 8")
        pieces.append((plo, phi))

    matrix = []
    for j in range(m):
        s, t = norm.slopes[j], norm.intercepts[j]
        y1 = s * pieces[j][0] + t
        y2 = s * pieces[j][1] + t
        img_lo, img_hi = (y1, y2) if y1 <= y2 else (y2, y1)
        row = [
            1 if (pieces[k][0] >= img_lo - slack and pieces[k][1] <= img_hi + slack) else 0
            for k in range(m)
        ]
        matrix.append(tuple(row))

    row_min = min(sum(r) for r in matrix)
    needed = math.floor(b / 2) - 2
    if row_min < max(needed, 1):
        raise AssertionError(f"row sum {row_min} below the guaranteed {needed}")
    entropy_lb = math.log(b / 2 - 3)
    dim_lb = 1 - math.log(8) / math.log(b)
    return MarkovSubsystem(
        pieces=tuple((float(a), float(bb)) for a, bb in pieces),
        matrix=tuple(matrix),
        kappa=kappa,
        slope_modulus=b,
        certificates={
            "row_min": row_min,
            "row_min_guarantee": max(needed, 1),
            "entropy_lb": entropy_lb,
            "dim_lb": dim_lb,
        },
    )


def _first_piece_at_or_after(pl: PiecewiseLinearMap, x, slack) -> int:
    for k in range(pl.num_pieces):
        if pl.breakpoints[k] >= x - slack:
            return k
    return pl.num_pieces


def verify_markov(pieces: Sequence[tuple], pl: PiecewiseLinearMap,
                  slack: float = CONTAINMENT_SLACK) -> list[str]:
    """Independent checker of the Markov conditions on actual intervals.

    (i) pairwise disjoint interiors, (ii) injectivity on each piece (true
    for linear pieces of nonzero slope whenever a piece stays inside one
    linearity cell), (iii) if T(P(j)) meets the interior of P(k) then
    P(k) is contained in closure(T(P(j))).  Returns a list of violation
    messages (empty = all conditions hold).
    """
    problems = []
    ivs = sorted((float(a), float(b), i) for i, (a, b) in enumerate(pieces))
    for (a1, b1, i1), (a2, b2, i2) in zip(ivs, ivs[1:]):
        if a2 < b1 - slack:
            problems.append(f"pieces {i1} and {i2} have overlapping interiors")
    images = []
    for i, (a, b) in enumerate(pieces):
        ja = _piece_at(pl, float(a) + 1e-15, 1e-12)
        jb = _piece_at(pl, float(b) - 1e-15, 1e-12)
        if ja != jb:
            problems.append(f"piece {i} crosses a linearity breakpoint")
        s, t = float(pl.slopes[ja]), float(pl.intercepts[ja])
        y1, y2 = s * float(a) + t, s * float(b) + t
        images.append((min(y1, y2), max(y1, y2)))
    for j, (u, v) in enumerate(images):
        for k, (a, b) in enumerate(pieces):
            a, b = float(a), float(b)
            meets_interior = min(v, b) - max(u, a) > slack
            if meets_interior:
                inside = a >= u - slack and b <= v + slack
                if not inside:
                    problems.append(
                        f"T(P({j})) meets the interior of P({k}) without containing it"
                    )
    return problems


def word_count(matrix, n: int) -> int:
    """Exact number of admissible words of length n (big-integer DP)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = len(matrix)
    vec = [1] * m
    for _ in range(n - 1):
        vec = [sum(matrix[j][k] * vec[k] for k in range(m)) for j in range(m)]
    return sum(vec)


def is_primitive(matrix) -> tuple[bool, Optional[int]]:
    """Primitivity of a 0/1 matrix with the witness power k <= (m-1)^2 + 1."""
    a = np.asarray(matrix, dtype=np.int64)
    m = len(a)
    if np.any((a != 0) & (a != 1)):
        raise ValueError("matrix must be 0/1")
    limit = (m - 1) ** 2 + 1
    power = np.minimum(a, 1)
    k = 1
    while k <= limit:
        if np.all(power > 0):
            return True, k
        power = np.minimum(power @ a, 1)
        k += 1
    return False, None


def perron_bounds(matrix) -> tuple[float, float]:
    """Rigorous row-sum sandwich for the spectral radius."""
    sums = [sum(row) for row in matrix]
    return float(min(sums)), float(max(sums))


def entropy_and_dim(matrix, beta_modulus: float,
                    tol: float = 1e-12, max_iter: int = 100_000) -> tuple[float, float]:
    """(h_top, dim) from the Perron root of the transition matrix.

    Power iteration until successive Rayleigh quotients differ by < tol;
    the row-sum sandwich stays the rigorous bound (use perron_bounds).
    dim = h_top / log(beta_modulus).
    """
    a = np.asarray(matrix, dtype=np.float64)
    m = len(a)
    if m == 0:
        raise ValueError("empty matrix")
    v = np.ones(m) / math.sqrt(m)
    prev = 0.0
    for _ in range(max_iter):
        w = a @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return -math.inf, 0.0
        v = w / norm
        rho = float(v @ (a @ v))
        if abs(rho - prev) < tol:
            break
        prev = rho
    h = math.log(rho)
    return h, h / math.log(abs(beta_modulus))


def eventually_onto_search(pl: PiecewiseLinearMap, interval: tuple,
                           support: Union[SupportSet, tuple], max_k: int = 200,
                           tol: float = 1e-9) -> Optional[int]:
    """Smallest k <= max_k with T^k(I) covering the support, else None.

    Forward-image propagation on unions of intervals, merging as they
    grow; containment is checked within ``tol``.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        raise ValueError("interval must be non-degenerate")
    targets = support.intervals if isinstance(support, SupportSet) else tuple(support)
    current = [(lo, hi)]
    for k in range(1, max_k + 1):
        images = []
        for a, b in current:
            images.extend(pl.image_of_interval(a, b))
        current = _merge_intervals([(float(a), float(b)) for a, b in images], slack=tol)
        if _covers(current, targets, tol):
            return k
    return None


def _covers(cover: list, targets: Sequence[tuple], tol: float) -> bool:
    for (a, b) in targets:
        pos = a + tol
        while pos < b - tol:
            advanced = False
            for (u, v) in cover:
                if u <= pos + tol and v > pos:
                    pos = v
                    advanced = True
                    break
            if not advanced:
                return False
    return True
