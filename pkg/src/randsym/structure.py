"""Structural side of the inverse concentration theorems.

Covers the integer row-rewrite matrix R (diagonal k on rewritten rows,
unit diagonal elsewhere, off-diagonal support in the designated columns
with a sign split), the random-bipartition mask A_U, the decoupling
inequality harness (quadratic rho^8 / ((2pi)^{7/2} exp(4pi)) against the
bilinear small ball of A_U at an inflated radius), a rank <= 2 inverse
search driven by continued-fraction approximation of coefficient ratios,
and the certified forward bound for GAP-structured coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exactlinalg import bareiss_det
from .gap import ENUM_CAP, Gap, evaluate, is_proper
from .laws import AtomicLaw, difference_law
from .smallball import (LinearForm, QuadraticForm, bilinear_small_ball,
                        linear_small_ball_exact, linear_small_ball_mc,
                        quadratic_small_ball_exact)
from .streams import substream

#: (2*pi)^(7/2) * exp(4*pi), the decoupling loss constant (~1.784e8)
DECOUPLING_CONST = (2 * math.pi) ** 3.5 * math.exp(4 * math.pi)


class OverlapError(Exception):
    """Rewritten rows and coefficient columns must be disjoint."""


def _frac(x) -> Fraction:
    return Fraction(x)


# ---------------------------------------------------------------------------
# the row matrix R


@dataclass(frozen=True)
class RowMatrixSpec:
    """Integer data defining R (0-based index sets).

    rows: indices whose rows are rewritten (diagonal k there);
    cols_plus / cols_minus: coefficient columns entering with +k_ij and
    -k_ij; all other entries vanish except unit diagonals off `rows`.
    """

    n: int
    rows: Tuple[int, ...]
    cols_plus: Tuple[int, ...]
    cols_minus: Tuple[int, ...]
    k: int
    coeffs: Mapping[Tuple[int, int], int]
    bound_exponent: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(int(i) for i in self.rows)))
        object.__setattr__(self, "cols_plus", tuple(sorted(int(i) for i in self.cols_plus)))
        object.__setattr__(self, "cols_minus", tuple(sorted(int(i) for i in self.cols_minus)))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "coeffs",
                           {(int(i), int(j)): int(v) for (i, j), v in dict(self.coeffs).items()})
        if self.k == 0:
            raise ValueError("k must be a nonzero integer")
        cols = set(self.cols_plus) | set(self.cols_minus)
        if set(self.cols_plus) & set(self.cols_minus):
            raise ValueError("cols_plus and cols_minus must be disjoint")
        if set(self.rows) & cols:
            raise OverlapError(f"row set and column set overlap: {set(self.rows) & cols}")
        all_idx = set(self.rows) | cols
        if any(not 0 <= i < self.n for i in all_idx):
            raise ValueError("index out of range")
        for (i, j) in self.coeffs:
            if i not in set(self.rows) or j not in cols:
                raise ValueError(f"coefficient at ({i},{j}) outside rows x cols")
        if self.bound_exponent is not None:
            bound = float(self.n) ** float(self.bound_exponent)
            entries = [abs(self.k)] + [abs(v) for v in self.coeffs.values()]
            if any(e > bound for e in entries):
                raise ValueError(f"entry exceeds declared bound n^{self.bound_exponent}")

    @classmethod
    def from_json(cls, path: str) -> "RowMatrixSpec":
        """Load {n, I, I0p, I0pp, k, coeffs: [[i, i0, v], ...]}."""
        with open(path) as fh:
            data = json.load(fh)
        coeffs = {(int(i), int(j)): int(v) for i, j, v in data.get("coeffs", [])}
        return cls(n=int(data["n"]), rows=tuple(data["I"]),
                   cols_plus=tuple(data.get("I0p", ())),
                   cols_minus=tuple(data.get("I0pp", ())),
                   k=int(data["k"]), coeffs=coeffs,
                   bound_exponent=data.get("bound_exponent"))


def build_row_matrix(spec: RowMatrixSpec) -> np.ndarray:
    """The dense n x n integer matrix R."""
    n = spec.n
    R = np.zeros((n, n), dtype=np.int64)
    in_rows = set(spec.rows)
    for i in range(n):
        R[i, i] = spec.k if i in in_rows else 1
    for i in spec.rows:
        for j in spec.cols_plus:
            R[i, j] = spec.coeffs.get((i, j), 0)
        for j in spec.cols_minus:
            R[i, j] = -spec.coeffs.get((i, j), 0)
    return R


def row_matrix_det(spec: RowMatrixSpec) -> int:
    """Exact determinant of R; |det| = |k|^len(rows) by construction."""
    return int(bareiss_det(build_row_matrix(spec).tolist()))


def conditioning_check(R: np.ndarray, c: float) -> bool:
    """True iff every singular value of R lies in [n^-c, n^c]."""
    R = np.asarray(R, dtype=np.float64)
    n = R.shape[0]
    sv = np.linalg.svd(R, compute_uv=False)
    lo, hi = float(n) ** (-c), float(n) ** c
    return bool(sv.min() >= lo and sv.max() <= hi)


# ---------------------------------------------------------------------------
# bipartition mask and decoupling


@dataclass(frozen=True)
class Bipartition:
    """Index split: membership[i] says whether i is in U."""

    membership: Tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.membership)

    @classmethod
    def random(cls, n: int, seed: int) -> "Bipartition":
        rng = substream(seed)
        return cls(tuple(bool(b) for b in rng.random(n) < 0.5))

    @classmethod
    def from_indices(cls, n: int, members: Sequence[int]) -> "Bipartition":
        s = set(int(i) for i in members)
        return cls(tuple(i in s for i in range(n)))


def bipartition_matrix(a: Sequence[Sequence], u: Bipartition):
    """A_U: keep a_ij exactly when i and j sit on opposite sides of U."""
    rows = [list(r) for r in a]
    n = len(rows)
    if any(len(r) != n for r in rows) or n != u.n:
        raise ValueError("matrix and bipartition sizes disagree")
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                raise ValueError(f"matrix not symmetric at ({i},{j})")
    zero = 0 * rows[0][0]
    out = [[rows[i][j] if u.membership[i] != u.membership[j] else zero
            for j in range(n)] for i in range(n)]
    if isinstance(a, np.ndarray):
        return np.array(out, dtype=a.dtype)
    return tuple(tuple(r) for r in out)


@dataclass(frozen=True)
class DecouplingCheck:
    rho_quad: Union[Fraction, float]
    lhs: float
    rhs: Union[Fraction, float]
    radius: float
    radius_constant: float
    holds: bool


def verify_decoupling(form: QuadraticForm, law: AtomicLaw, beta, u: Bipartition,
                      radius_constant: float = 1.0) -> DecouplingCheck:
    """Check rho_quad^8 / ((2pi)^{7/2} exp(4pi)) <= bilinear rho of A_U.

    The bilinear side is evaluated at radius radius_constant * beta *
    sqrt(log n) under independent copies of xi - xi'.  Both small-ball
    probabilities are exact (fractions); only the universal constant and
    the radius are floating.
    """
    rho_q = quadratic_small_ball_exact(form, law, beta).rho
    lhs = float(rho_q) ** 8 / DECOUPLING_CONST
    n = form.n
    radius = radius_constant * float(beta) * math.sqrt(math.log(n)) if n > 1 else 0.0
    diff = difference_law(law)
    masked = bipartition_matrix(form.matrix, u)
    bil_form = QuadraticForm(masked)
    rhs = bilinear_small_ball(bil_form, diff, diff, radius, method="exact").rho
    return DecouplingCheck(rho_q, lhs, rhs, radius, radius_constant, bool(rhs >= lhs))


def decoupling_scan(form: QuadraticForm, law: AtomicLaw, beta, u: Bipartition,
                    constants: Sequence[float] = (1.0, 2.0, 4.0)):
    """Smallest radius constant making the decoupling inequality hold.

    Returns (constant or None, per-constant checks); None flags an
    instance needing more than the scanned constants.
    """
    checks = []
    for c in constants:
        chk = verify_decoupling(form, law, beta, u, radius_constant=c)
        checks.append(chk)
        if chk.holds:
            return c, checks
    return None, checks


# ---------------------------------------------------------------------------
# inverse search (rank <= 2) and the forward bound


def _convergents(x: Fraction, qmax: int) -> List[Fraction]:
    """Continued-fraction convergents of x with denominator <= qmax."""
    out: List[Fraction] = []
    num, den = x.numerator, x.denominator
    p0, q0, p1, q1 = 0, 1, 1, 0
    while den != 0:
        a = num // den
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > qmax:
            break
        out.append(Fraction(p1, q1))
        num, den = den, num - a * den
    return out


def _round_frac(x: Fraction) -> int:
    """Nearest integer, half away from zero."""
    n, d = x.numerator, x.denominator
    if n >= 0:
        return (2 * n + d) // (2 * d)
    return -((-2 * n + d) // (2 * d))


@dataclass(frozen=True)
class InverseLOReport:
    gap: Optional[Gap]
    covered: Tuple[int, ...]
    coverage: int
    needed: int
    size_cap: int
    candidates_tried: int
    note: str = ""


def _rank1_cover(a: List[Fraction], g: Fraction, beta: Fraction, half_cap: int):
    ks, covered = [], []
    for i, ai in enumerate(a):
        k = _round_frac(ai / g)
        if abs(k) <= half_cap and abs(ai - k * g) <= beta:
            covered.append(i)
            ks.append(k)
    return covered, ks


def _rank2_cover(a: List[Fraction], g1: Fraction, g2: Fraction, beta: Fraction,
                 size_cap: int):
    ks, covered = [], []
    for i, ai in enumerate(a):
        best = None
        k1c = _round_frac(ai / g1)
        for k1 in (k1c - 1, k1c, k1c + 1):
            k2 = _round_frac((ai - k1 * g1) / g2)
            res = abs(ai - k1 * g1 - k2 * g2)
            if res <= beta and (best is None or res < best[0]):
                best = (res, k1, k2)
        if best is not None:
            covered.append(i)
            ks.append((best[1], best[2]))
    if not covered:
        return covered, ks, None
    h1 = max(1, max(abs(k[0]) for k in ks))
    h2 = max(1, max(abs(k[1]) for k in ks))
    if (2 * h1 + 1) * (2 * h2 + 1) > size_cap:
        return [], [], None
    return covered, ks, (h1, h2)


def inverse_lo_search(form: LinearForm, law: AtomicLaw, beta, rank_cap: int = 2,
                      closeness_budget: int = 1, size_cap: Optional[int] = None,
                      seed: int = 0) -> InverseLOReport:
    """Search for a proper symmetric GAP of rank <= rank_cap covering the
    coefficients.

    At least n - closeness_budget coefficients must come beta-close.
    Candidate generators are built from continued-fraction approximants
    p/q (q <= sqrt(closeness_budget)) of coefficient ratios; absence of a
    covering gap within the size cap is a value, not an error.
    """
    if rank_cap not in (1, 2):
        raise ValueError("rank_cap must be 1 or 2")
    beta = _frac(beta)
    a = [_frac(x) for x in form.coefficients]
    n = len(a)
    budget = int(closeness_budget)
    needed = max(0, n - budget)
    if size_cap is None:
        est = linear_small_ball_mc(form, law, float(beta), trials=4096, seed=seed)
        rho = max(est.rho, 1.0 / 4096)
        size_cap = max(1, min(ENUM_CAP, math.ceil(4.0 / (rho * math.sqrt(max(budget, 1))))))
    nonzero = [(abs(x), i) for i, x in enumerate(a) if x != 0]
    if not nonzero:
        zero_gap = Gap.symmetric((), ())
        return InverseLOReport(zero_gap, tuple(range(n)), n, needed, size_cap, 0,
                               note="all coefficients zero")
    qmax = max(1, math.isqrt(max(budget, 1)))
    ref = min(nonzero)[1]
    half_cap = max(1, (size_cap - 1) // 2)
    cands: List[Fraction] = []
    for q in range(1, qmax + 1):
        cands.append(abs(a[ref]) / q)
    for i, ai in enumerate(a):
        if i == ref or ai == 0:
            continue
        for conv in _convergents(abs(ai / a[ref]), qmax):
            if conv != 0 and conv.denominator <= qmax:
                cands.append(abs(a[ref]) / conv.denominator)
    seen = set()
    pool: List[Fraction] = []
    for g in sorted(cands, reverse=True):
        if g > 0 and g not in seen:
            seen.add(g)
            pool.append(g)
    pool = pool[:64]
    best = None  # (coverage, volume, gens tuple, gap, covered)
    tried = 0
    scored: List[Tuple[int, Fraction]] = []
    for g in pool:
        tried += 1
        covered, ks = _rank1_cover(a, g, beta, half_cap)
        scored.append((len(covered), g))
        if not covered:
            continue
        half = max(1, max(abs(k) for k in ks))
        if 2 * half + 1 > size_cap:
            continue
        q1 = Gap.symmetric((g,), (half,))
        key = (-len(covered), q1.volume, (g,))
        if best is None or key < best[0]:
            best = (key, q1, tuple(covered))
    if rank_cap >= 2 and (best is None or -best[0][0] < needed):
        top = [g for _, g in sorted(scored, key=lambda t: (-t[0], t[1]))[:8]]
        for x1 in range(len(top)):
            for x2 in range(x1 + 1, len(top)):
                g1, g2 = top[x1], top[x2]
                if g1 == g2:
                    continue
                tried += 1
                covered, ks, halves = _rank2_cover(a, g1, g2, beta, size_cap)
                if halves is None or not covered:
                    continue
                q2 = Gap.symmetric((g1, g2), halves)
                if not is_proper(q2, ENUM_CAP):
                    continue
                key = (-len(covered), q2.volume, (g1, g2))
                if best is None or key < best[0]:
                    best = (key, q2, tuple(covered))
    if best is None or -best[0][0] < needed:
        cov = () if best is None else best[2]
        return InverseLOReport(None, cov, len(cov), needed, size_cap, tried,
                               note="no candidate covers enough coefficients")
    return InverseLOReport(best[1], best[2], len(best[2]), needed, size_cap, tried)


@dataclass(frozen=True)
class ForwardBound:
    """Certified small-ball lower bound at the stated radius."""

    bound: Union[Fraction, float]
    radius: Union[Fraction, float]


def forward_lo_bound(q: Gap, assignments: Sequence[Sequence[int]], law: AtomicLaw,
                     beta, coefficients: Optional[Sequence] = None) -> ForwardBound:
    """Lower bound on rho from GAP-rounded coefficients.

    Rounding each coefficient to its assigned gap element changes the sum
    by at most beta * n * max|atom|, so the exact small ball of the
    rounded form at radius 0 survives at the derived radius.
    """
    beta = _frac(beta)
    pts = [tuple(int(k) for k in p) for p in assignments]
    if coefficients is not None:
        coeffs = [_frac(c) for c in coefficients]
        if len(coeffs) != len(pts):
            raise ValueError("one assignment per coefficient required")
        for c, p in zip(coeffs, pts):
            if abs(c - evaluate(q, p)) > beta:
                raise ValueError(f"coefficient {c} is not beta-close at {p}")
    if not pts:
        return ForwardBound(Fraction(1), Fraction(0))
    rounded = [evaluate(q, p) for p in pts]
    est = linear_small_ball_exact(LinearForm(tuple(rounded)), law, 0)
    radius = beta * len(pts) * _frac(law.support_radius)
    return ForwardBound(est.rho, radius)
