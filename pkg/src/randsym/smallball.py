"""Small-ball (concentration) probabilities of linear, bilinear and
quadratic forms in iid entries.

The exact routines work on integer-scaled atoms: every rational quantity
(atom values, coefficients, masses) is put over a common denominator, so
convolution and window counting are integer arithmetic; outputs are
fractions.  Floats are admitted everywhere and treated as the exact
binary rationals they are.  The supremum over window centers is realized
as a maximum over closed windows whose left edge sits on an atom: sliding
any window right until its left edge hits an atom never loses mass, so
the finite scan attains the sup.

Monte Carlo variants draw from splittable streams keyed (seed, chunk)
and carry a Dvoretzky-Kiefer-Wolfowitz half-width at the 95% level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from .laws import AtomicLaw, Law
from .streams import chunk_bounds, substream

ATOM_CAP = 10 ** 7
_FLOAT_EXACT = 2 ** 53
_INT64_SAFE = 2 ** 61   # leaves room for value + clamped window width in int64
DKW_DELTA = 0.05


class AtomBlowup(Exception):
    """Exact sum distribution exceeds the atom cap."""


class EnumerationTooLarge(Exception):
    """Outcome enumeration exceeds the cap."""


def _frac(x) -> Fraction:
    return Fraction(x)


@dataclass(frozen=True)
class LinearForm:
    """sum_i a_i (x_i + f_i)."""

    coefficients: Tuple[Fraction, ...]
    shifts: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        coeffs = tuple(_frac(a) for a in self.coefficients)
        shifts = tuple(_frac(f) for f in self.shifts) if self.shifts else \
            tuple(Fraction(0) for _ in coeffs)
        if len(shifts) != len(coeffs):
            raise ValueError("shifts must match coefficients")
        if not coeffs:
            raise ValueError("form needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "shifts", shifts)

    @property
    def n(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class QuadraticForm:
    """sum_ij a_ij (x_i + f_i)(x_j + f_j) with a_ij = a_ji exactly."""

    matrix: Tuple[Tuple[Fraction, ...], ...]
    shifts: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        mat = tuple(tuple(_frac(a) for a in row) for row in self.matrix)
        n = len(mat)
        if any(len(row) != n for row in mat):
            raise ValueError("matrix must be square")
        for i in range(n):
            for j in range(i + 1, n):
                if mat[i][j] != mat[j][i]:
                    raise ValueError(f"matrix not symmetric at ({i},{j})")
        shifts = tuple(_frac(f) for f in self.shifts) if self.shifts else \
            tuple(Fraction(0) for _ in range(n))
        if len(shifts) != n:
            raise ValueError("shifts must match dimension")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "shifts", shifts)

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def is_normalized(self) -> bool:
        s = sum(a * a for row in self.matrix for a in row)
        return abs(float(s) - 1.0) <= 1e-12


@dataclass(frozen=True)
class SmallBallEstimate:
    """rho = sup_a P(|form - a| <= beta), with the attaining center."""

    rho: Union[Fraction, float]
    beta: Union[Fraction, float]
    method: str
    ci_halfwidth: float
    witness_center: Union[Fraction, float]

    def __post_init__(self):
        if not (0 <= float(self.rho) <= 1 + 1e-15):
            raise ValueError(f"rho {self.rho} outside [0, 1]")
        if self.method == "exact" and self.ci_halfwidth != 0:
            raise ValueError("exact estimates carry no confidence interval")


# ---------------------------------------------------------------------------
# exact engine: integer-scaled atom distributions


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _law_mass_counts(law: AtomicLaw) -> Tuple[List[int], int]:
    masses = [_frac(p) for p in law.masses]
    den = 1
    for p in masses:
        den = _lcm(den, p.denominator)
    return [int(p * den) for p in masses], den


def _rational_content(xs) -> Fraction:
    """Positive g with every x/g an integer (gcd of numerators over lcm of
    denominators); 1 for an all-zero list.  Keeps scaled lattices small:
    entries like +-c share content |c| and scale to +-1 whatever c is."""
    num = 0
    den = 1
    for x in xs:
        x = _frac(x)
        num = math.gcd(num, abs(x.numerator))
        den = _lcm(den, x.denominator)
    return Fraction(num, den) if num else Fraction(1)


def _aggregate_np(vals: np.ndarray, cnts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(vals, kind="stable")
    sv, sc = vals[order], cnts[order]
    starts = np.r_[0, np.flatnonzero(np.diff(sv)) + 1]
    return sv[starts], np.add.reduceat(sc, starts)


@dataclass
class _ScaledDist:
    """Integer atoms: value = vals[k] * scale, mass = cnts[k] / ctotal."""

    vals: Union[np.ndarray, List[int]]   # sorted ascending, unique
    cnts: Union[np.ndarray, List[int]]
    scale: Fraction                      # positive lattice unit
    ctotal: int

    def __len__(self) -> int:
        return len(self.vals)


def _linear_sum_dist(coeffs: Sequence[Fraction], law: AtomicLaw, cap: int) -> _ScaledDist:
    """Exact distribution of sum_i a_i x_i by sequential convolution."""
    values = [_frac(v) for v in law.values]
    counts, cden = _law_mass_counts(law)
    step_vals = [[a * v for v in values] for a in coeffs]
    scale = _rational_content([x for row in step_vals for x in row])
    step_ints = [[int(x / scale) for x in row] for row in step_vals]
    val_bound = sum(max(abs(x) for x in row) for row in step_ints) + 1
    ctotal = cden ** len(coeffs)
    if val_bound < _INT64_SAFE and ctotal < _INT64_SAFE:
        vals = np.zeros(1, dtype=np.int64)
        cnts = np.ones(1, dtype=np.int64)
        carr = np.asarray(counts, dtype=np.int64)
        for row in step_ints:
            rarr = np.asarray(row, dtype=np.int64)
            vals = (vals[:, None] + rarr[None, :]).ravel()
            cnts = (cnts[:, None] * carr[None, :]).ravel()
            vals, cnts = _aggregate_np(vals, cnts)
            if len(vals) > cap:
                raise AtomBlowup(f"{len(vals)} atoms exceed cap {cap}")
        return _ScaledDist(vals, cnts, scale, ctotal)
    acc = {0: 1}
    for row in step_ints:
        new: dict = {}
        for v, c in acc.items():
            for iv, ic in zip(row, counts):
                key = v + iv
                new[key] = new.get(key, 0) + c * ic
        if len(new) > cap:
            raise AtomBlowup(f"{len(new)} atoms exceed cap {cap}")
        acc = new
    items = sorted(acc.items())
    return _ScaledDist([v for v, _ in items], [c for _, c in items], scale, ctotal)


def _window_best(dist: _ScaledDist, beta: Fraction) -> Tuple[int, Fraction]:
    """(max closed-window count, witness center) for width 2*beta.

    Windows anchored at atom left edges attain the sup (sliding right
    until the left edge hits an atom never loses mass); the integer
    comparison with W = floor(2 * beta / scale) is exact because atoms
    are integers.  The center reported is the midpoint of the extreme
    captured atoms, which the closed window around it still covers.
    """
    width = math.floor(2 * beta / dist.scale)
    if isinstance(dist.vals, np.ndarray):
        span = int(dist.vals[-1]) - int(dist.vals[0])
        width = min(width, span)        # wider windows already cover everything
        prefix = np.r_[0, np.cumsum(dist.cnts)]
        rights = np.searchsorted(dist.vals, dist.vals + np.int64(width), side="right")
        totals = prefix[rights] - prefix[:-1]
        j = int(np.argmax(totals))
        lo, hi = int(dist.vals[j]), int(dist.vals[rights[j] - 1])
        return int(totals[j]), Fraction(lo + hi, 2) * dist.scale
    import bisect
    prefix = [0]
    for c in dist.cnts:
        prefix.append(prefix[-1] + c)
    best, center = -1, Fraction(0)
    for j, v in enumerate(dist.vals):
        r = bisect.bisect_right(dist.vals, v + width)
        tot = prefix[r] - prefix[j]
        if tot > best:
            best = tot
            center = Fraction(v + dist.vals[r - 1], 2) * dist.scale
    return best, center


def _interval_count(dist: _ScaledDist, lo: Fraction, hi: Fraction) -> int:
    """Exact mass count of atoms with lo <= value <= hi (values in scale units)."""
    lo_i = math.ceil(lo / dist.scale)
    hi_i = math.floor(hi / dist.scale)
    if isinstance(dist.vals, np.ndarray):
        # clamp to the atom range so huge bounds stay inside int64
        vmin, vmax = int(dist.vals[0]), int(dist.vals[-1])
        if hi_i < vmin or lo_i > vmax:
            return 0
        lo_i, hi_i = max(lo_i, vmin), min(hi_i, vmax)
        prefix = np.r_[0, np.cumsum(dist.cnts)]
        a = np.searchsorted(dist.vals, np.int64(lo_i), side="left")
        b = np.searchsorted(dist.vals, np.int64(hi_i), side="right")
        return int(prefix[b] - prefix[a])
    import bisect
    a = bisect.bisect_left(dist.vals, lo_i)
    b = bisect.bisect_right(dist.vals, hi_i)
    return sum(dist.cnts[a:b])


def linear_small_ball_exact(form: LinearForm, law: AtomicLaw, beta,
                            cap: int = ATOM_CAP) -> SmallBallEstimate:
    """Exact sup_a P(|sum a_i (x_i + f_i) - a| <= beta) for an atomic law."""
    beta = _frac(beta)
    if beta < 0:
        raise ValueError("beta must be >= 0")
    shift = sum((a * f for a, f in zip(form.coefficients, form.shifts)), Fraction(0))
    dist = _linear_sum_dist(form.coefficients, law, cap)
    best, center = _window_best(dist, beta)
    rho = Fraction(best, dist.ctotal)
    return SmallBallEstimate(rho, beta, "exact", 0.0, center + shift)


def linear_window_mass(form: LinearForm, law: AtomicLaw, center, beta,
                       cap: int = ATOM_CAP) -> Fraction:
    """Exact P(|sum a_i (x_i + f_i) - center| <= beta): re-evaluates a witness."""
    beta = _frac(beta)
    center = _frac(center)
    shift = sum((a * f for a, f in zip(form.coefficients, form.shifts)), Fraction(0))
    dist = _linear_sum_dist(form.coefficients, law, cap)
    c0 = center - shift
    return Fraction(_interval_count(dist, c0 - beta, c0 + beta), dist.ctotal)


def linear_small_ball_mc(form: LinearForm, sampler: Law, beta, trials: int,
                         seed: int) -> SmallBallEstimate:
    """Monte Carlo sup_a P(|sum a_i (x_i + f_i) - a| <= beta).

    DKW half-width sqrt(ln(2/delta) / (2 trials)) at delta = 0.05.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    beta_f = float(beta)
    a = np.array([float(c) for c in form.coefficients])
    shift = float(sum(float(c) * float(f) for c, f in zip(form.coefficients, form.shifts)))
    vals = np.empty(trials, dtype=np.float64)
    for ci, start, stop in chunk_bounds(trials):
        rng = substream(seed, ci)
        draws = sampler.sample_values(rng, (stop - start, form.n))
        vals[start:stop] = draws @ a + shift
    vals.sort(kind="stable")
    rights = np.searchsorted(vals, vals + 2 * beta_f, side="right")
    totals = rights - np.arange(trials)
    j = int(np.argmax(totals))
    rho = float(totals[j]) / trials
    ci_half = math.sqrt(math.log(2 / DKW_DELTA) / (2 * trials))
    center = 0.5 * (float(vals[j]) + float(vals[rights[j] - 1]))
    return SmallBallEstimate(rho, beta_f, "monte_carlo", ci_half, center)


# ---------------------------------------------------------------------------
# quadratic and bilinear enumeration


def _z_values_scaled(law: AtomicLaw, shifts: Sequence[Fraction]) -> Tuple[List[List[int]], Fraction]:
    """Per-coordinate shifted atom values (x + f_i) on one integer lattice."""
    values = [_frac(v) for v in law.values]
    zs = [[v + f for v in values] for f in shifts]
    g = _rational_content([x for row in zs for x in row])
    return [[int(x / g) for x in row] for row in zs], g


def _matrix_scaled(mat: Sequence[Sequence[Fraction]]) -> Tuple[List[List[int]], Fraction]:
    entries = [_frac(a) for row in mat for a in row]
    g = _rational_content(entries)
    return [[int(_frac(a) / g) for a in row] for row in mat], g


def _digit_matrix(indices: np.ndarray, n: int, m: int) -> np.ndarray:
    """Mixed-radix digits of outcome indices; coordinate 0 is the slowest."""
    out = np.empty((len(indices), n), dtype=np.int64)
    rem = indices.astype(np.int64)
    for i in range(n - 1, -1, -1):
        out[:, i] = rem % m
        rem //= m
    return out


def _gather(z_int: List[List[int]], digits: np.ndarray) -> np.ndarray:
    zarr = np.asarray(z_int, dtype=np.int64)  # (n, m)
    cols = np.arange(digits.shape[1])
    return zarr[cols[None, :], digits]


def _counts_for(digits: np.ndarray, counts: Sequence[int]) -> np.ndarray:
    carr = np.asarray(counts, dtype=np.int64)
    return np.prod(carr[digits], axis=1)


def quadratic_small_ball_exact(form: QuadraticForm, law: AtomicLaw, beta,
                               cap: int = ATOM_CAP) -> SmallBallEstimate:
    """Exact sup_a P(|sum a_ij (x_i+f_i)(x_j+f_j) - a| <= beta) by full enumeration."""
    beta = _frac(beta)
    if beta < 0:
        raise ValueError("beta must be >= 0")
    n = form.n
    m = len(law.atoms)
    outcomes = m ** n
    if outcomes > cap:
        raise EnumerationTooLarge(f"{m}^{n} outcomes exceed cap {cap}")
    a_int, ga = _matrix_scaled(form.matrix)
    z_int, gz = _z_values_scaled(law, form.shifts)
    counts, cden = _law_mass_counts(law)
    scale = ga * gz * gz
    ctotal = cden ** n
    zmax = [max(abs(v) for v in row) for row in z_int]
    val_bound = sum(abs(a_int[i][j]) * zmax[i] * zmax[j]
                    for i in range(n) for j in range(n)) + 1
    if val_bound >= _FLOAT_EXACT or ctotal >= _INT64_SAFE:
        raise EnumerationTooLarge(
            "scaled values too large for exact vectorized enumeration")
    A = np.asarray(a_int, dtype=np.float64)
    pieces_v, pieces_c = [], []
    chunk = 1 << 16
    for start in range(0, outcomes, chunk):
        idx = np.arange(start, min(start + chunk, outcomes))
        digits = _digit_matrix(idx, n, m)
        Z = _gather(z_int, digits).astype(np.float64)
        vals = np.rint(np.einsum("ti,ij,tj->t", Z, A, Z)).astype(np.int64)
        cnts = _counts_for(digits, counts)
        v, c = _aggregate_np(vals, cnts)
        pieces_v.append(v)
        pieces_c.append(c)
    vals, cnts = _aggregate_np(np.concatenate(pieces_v), np.concatenate(pieces_c))
    dist = _ScaledDist(vals, cnts, scale, ctotal)
    best, center = _window_best(dist, beta)
    return SmallBallEstimate(Fraction(best, ctotal), beta, "exact", 0.0, center)


def quadratic_small_ball_mc(form: QuadraticForm, sampler: Law, beta, trials: int,
                            seed: int) -> SmallBallEstimate:
    """Monte Carlo counterpart of quadratic_small_ball_exact."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    beta_f = float(beta)
    n = form.n
    A = np.array([[float(a) for a in row] for row in form.matrix])
    f = np.array([float(x) for x in form.shifts])
    vals = np.empty(trials, dtype=np.float64)
    for ci, start, stop in chunk_bounds(trials):
        rng = substream(seed, ci)
        Z = sampler.sample_values(rng, (stop - start, n)) + f
        vals[start:stop] = np.einsum("ti,ij,tj->t", Z, A, Z)
    vals.sort(kind="stable")
    rights = np.searchsorted(vals, vals + 2 * beta_f, side="right")
    totals = rights - np.arange(trials)
    j = int(np.argmax(totals))
    ci_half = math.sqrt(math.log(2 / DKW_DELTA) / (2 * trials))
    center = 0.5 * (float(vals[j]) + float(vals[rights[j] - 1]))
    return SmallBallEstimate(float(totals[j]) / trials, beta_f, "monte_carlo",
                             ci_half, center)


def bilinear_small_ball(form: QuadraticForm, law_x: Law, law_y: Law, beta,
                        method: str = "exact", trials: int = 10 ** 5,
                        seed: int = 0, cap: int = ATOM_CAP) -> SmallBallEstimate:
    """sup_a P(|sum a_ij (x_i+f_i)(y_j+f_j) - a| <= beta), x and y independent."""
    if method == "exact":
        if not (isinstance(law_x, AtomicLaw) and isinstance(law_y, AtomicLaw)):
            raise ValueError("exact method needs atomic laws")
        return _bilinear_exact(form, law_x, law_y, _frac(beta), cap)
    if method == "mc":
        return _bilinear_mc(form, law_x, law_y, float(beta), trials, seed)
    raise ValueError(f"unknown method {method!r}")


def _bilinear_exact(form: QuadraticForm, law_x: AtomicLaw, law_y: AtomicLaw,
                    beta: Fraction, cap: int) -> SmallBallEstimate:
    n = form.n
    mx, my = len(law_x.atoms), len(law_y.atoms)
    if (mx ** n) * (my ** n) > cap:
        raise EnumerationTooLarge(f"{mx}^{n} * {my}^{n} outcomes exceed cap {cap}")
    a_int, ga = _matrix_scaled(form.matrix)
    zx_int, gzx = _z_values_scaled(law_x, form.shifts)
    zy_int, gzy = _z_values_scaled(law_y, form.shifts)
    counts_x, cden_x = _law_mass_counts(law_x)
    counts_y, cden_y = _law_mass_counts(law_y)
    scale = ga * gzx * gzy
    ctotal = (cden_x ** n) * (cden_y ** n)
    zx_max = [max(abs(v) for v in row) for row in zx_int]
    zy_max = [max(abs(v) for v in row) for row in zy_int]
    val_bound = sum(abs(a_int[i][j]) * zx_max[i] * zy_max[j]
                    for i in range(n) for j in range(n)) + 1
    if val_bound >= _FLOAT_EXACT or ctotal >= _INT64_SAFE:
        raise EnumerationTooLarge(
            "scaled values too large for exact vectorized enumeration")
    A = np.asarray(a_int, dtype=np.float64)
    ny = my ** n
    idx_y = np.arange(ny)
    dig_y = _digit_matrix(idx_y, n, my)
    Zy = _gather(zy_int, dig_y).astype(np.float64)
    cy = _counts_for(dig_y, counts_y)
    nx = mx ** n
    pieces_v, pieces_c = [], []
    chunk = max(1, (1 << 21) // max(ny, 1))
    for start in range(0, nx, chunk):
        idx = np.arange(start, min(start + chunk, nx))
        dig_x = _digit_matrix(idx, n, mx)
        Zx = _gather(zx_int, dig_x).astype(np.float64)
        cx = _counts_for(dig_x, counts_x)
        vals = np.rint((Zx @ A) @ Zy.T).astype(np.int64).ravel()
        cnts = (cx[:, None] * cy[None, :]).ravel()
        v, c = _aggregate_np(vals, cnts)
        pieces_v.append(v)
        pieces_c.append(c)
    vals, cnts = _aggregate_np(np.concatenate(pieces_v), np.concatenate(pieces_c))
    dist = _ScaledDist(vals, cnts, scale, ctotal)
    best, center = _window_best(dist, beta)
    return SmallBallEstimate(Fraction(best, ctotal), beta, "exact", 0.0, center)


def _bilinear_mc(form: QuadraticForm, law_x: Law, law_y: Law, beta: float,
                 trials: int, seed: int) -> SmallBallEstimate:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = form.n
    A = np.array([[float(a) for a in row] for row in form.matrix])
    f = np.array([float(x) for x in form.shifts])
    vals = np.empty(trials, dtype=np.float64)
    for ci, start, stop in chunk_bounds(trials):
        rng = substream(seed, ci)
        X = law_x.sample_values(rng, (stop - start, n)) + f
        Y = law_y.sample_values(rng, (stop - start, n)) + f
        vals[start:stop] = np.einsum("ti,ij,tj->t", X, A, Y)
    vals.sort(kind="stable")
    rights = np.searchsorted(vals, vals + 2 * beta, side="right")
    totals = rights - np.arange(trials)
    j = int(np.argmax(totals))
    ci_half = math.sqrt(math.log(2 / DKW_DELTA) / (2 * trials))
    center = 0.5 * (float(vals[j]) + float(vals[rights[j] - 1]))
    return SmallBallEstimate(float(totals[j]) / trials, beta, "monte_carlo",
                             ci_half, center)


# ---------------------------------------------------------------------------
# truncated products over suffixes


def suffix_smallball_factors(u: Sequence, law: AtomicLaw, beta, n0: int,
                             cap: int = ATOM_CAP) -> List[Fraction]:
    """rho_beta^(i)(u) = sup_a P(|x_i u_i + ... + x_{n0} u_{n0} - a| <= beta), i = 1..n0."""
    u = [_frac(x) for x in u]
    if not 1 <= n0 <= len(u):
        raise ValueError("need 1 <= n0 <= len(u)")
    factors = []
    for i in range(n0):
        est = linear_small_ball_exact(LinearForm(tuple(u[i:n0])), law, beta, cap)
        factors.append(est.rho)
    return factors


def truncated_product_bound(u: Sequence, law: AtomicLaw, beta, n0: int,
                            cap: int = ATOM_CAP) -> Fraction:
    """Product of the suffix small-ball factors over i = 1..n0.

    Upper-bounds the probability that a vector stays nearly orthogonal to
    n0 exposed rows.
    """
    prod = Fraction(1)
    for rho in suffix_smallball_factors(u, law, beta, n0, cap):
        prod *= rho
    return prod


def central_binomial_rho(n: int) -> Fraction:
    """Exact rho for the all-ones form, Bernoulli entries, beta = 0 (even n)."""
    if n % 2:
        raise ValueError("even n required")
    return Fraction(math.comb(n, n // 2), 2 ** n)
