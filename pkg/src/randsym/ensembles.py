"""Random symmetric matrices M = F + X and their measurements.

The upper triangle of X (diagonal included) is iid from an entry law;
draws are keyed by seed.  Rational laws with integer-valued fixed parts
produce an exact matrix alongside the floating mirror, enabling exact
rank, cofactor and determinant work over the rationals (fraction-free
elimination).  Spectral quantities use the symmetric eigendecomposition:
for symmetric matrices the singular values are the |eigenvalues|, so
sigma_n = min |lambda| and kappa = sigma_1 / sigma_n.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .exactlinalg import (adjugate, bareiss_det, cofactor_matrix, exact_rank as _rank,
                          rowspace_membership)
from .laws import AtomicLaw, Law
from .streams import chunk_bounds, substream


class BoundViolation(Exception):
    """Fixed part exceeds its declared n^gamma entry bound."""


class ConvergenceFailure(Exception):
    """Eigensolver did not converge."""


class NoPivot(Exception):
    """No row removal preserves rank >= n-2 (impossible; arithmetic bug)."""


def _frac(x) -> Fraction:
    return Fraction(x)


@dataclass(frozen=True)
class SymmetricSample:
    """M = F + X with X symmetric iid-upper-triangle."""

    n: int
    fixed: np.ndarray
    noise: np.ndarray
    matrix: np.ndarray
    exact: Optional[Tuple[Tuple[Union[int, Fraction], ...], ...]]
    gamma: float
    seed: int

    @property
    def entry_kind(self) -> str:
        return "exact" if self.exact is not None else "float"

    def exact_rows(self) -> List[List[Union[int, Fraction]]]:
        if self.exact is None:
            raise ValueError("sample has floating entries only")
        return [list(r) for r in self.exact]


def _exact_fixed(F: Optional[Sequence[Sequence]], n: int):
    """Exact fixed part; floats are taken as the binary rationals they are."""
    if F is None:
        return [[Fraction(0)] * n for _ in range(n)]
    rows = []
    for r in F:
        row = []
        for x in r:
            if isinstance(x, (int, Fraction)):
                row.append(Fraction(x))
            elif isinstance(x, (float, np.floating)) and math.isfinite(x):
                row.append(Fraction(float(x)))
            else:
                return None
        rows.append(row)
    return rows


def sample_symmetric(law: Law, F, n: int, seed: int, gamma: float = 1.0,
                     exact: Union[bool, str] = "auto") -> SymmetricSample:
    """Draw M = F + X; the upper triangle of X (with diagonal) is iid.

    Deterministic in seed.  exact="auto" builds the exact rational matrix
    when the law is rational and F is; exact=False skips it (cheaper for
    spectral Monte Carlo), exact=True demands it.
    """
    if F is None:
        F_arr = np.zeros((n, n), dtype=np.float64)
    else:
        F_arr = np.asarray([[float(x) for x in row] for row in F], dtype=np.float64) \
            if not isinstance(F, np.ndarray) else F.astype(np.float64)
    if F_arr.shape != (n, n):
        raise ValueError(f"fixed part must be {n} x {n}")
    if not np.allclose(F_arr, F_arr.T, rtol=0, atol=0):
        raise ValueError("fixed part must be symmetric")
    bound = float(n) ** float(gamma)
    if np.max(np.abs(F_arr)) > bound:
        raise BoundViolation(f"|f_ij| exceeds n^gamma = {bound}")
    rng = substream(seed)
    m = n * (n + 1) // 2
    iu = np.triu_indices(n)
    want_exact = (exact is True) or (
        exact == "auto" and isinstance(law, AtomicLaw) and law.is_rational)
    if isinstance(law, AtomicLaw):
        idx = law.sample_indices(rng, m)
        vals_f = law.values_float()[idx]
    else:
        if exact is True:
            raise ValueError("exact sampling needs a rational atomic law")
        idx = None
        vals_f = law.sample_values(rng, m)
        want_exact = False
    X = np.zeros((n, n), dtype=np.float64)
    X[iu] = vals_f
    X = X + np.triu(X, 1).T
    exact_rows = None
    if want_exact:
        f_exact = _exact_fixed(F if F is not None else None, n)
        if f_exact is None:
            if exact is True:
                raise ValueError("fixed part is not exactly representable")
        else:
            values = [v if isinstance(v, Fraction) else Fraction(v) for v in law.values]
            as_int = all(v.denominator == 1 for v in values)
            atoms = [int(v) if as_int else v for v in values]
            vals_e = [atoms[i] for i in idx]
            rows = [[None] * n for _ in range(n)]
            pos = 0
            for i, j in zip(*iu):
                v = vals_e[pos]
                pos += 1
                rows[i][j] = f_exact[i][j] + v
                rows[j][i] = rows[i][j]
            exact_rows = tuple(tuple(r) for r in rows)
    return SymmetricSample(n=n, fixed=F_arr, noise=X, matrix=F_arr + X,
                           exact=exact_rows, gamma=float(gamma), seed=int(seed))


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray        # ascending
    sigma_1: float
    sigma_n: float
    kappa: float
    log_abs_det: float
    corank: Optional[int]


def spectral_summary(m: Union[SymmetricSample, np.ndarray]) -> SpectralSummary:
    """Eigenvalues and the derived sigma_1, sigma_n, kappa, log|det|."""
    if isinstance(m, SymmetricSample):
        mat = m.matrix
        exact = m.exact
        n = m.n
    else:
        mat = np.asarray(m, dtype=np.float64)
        exact = None
        n = mat.shape[0]
    try:
        lam = np.linalg.eigvalsh(mat)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(str(e)) from e
    absl = np.abs(lam)
    sigma_1 = float(absl.max())
    sigma_n = float(absl.min())
    kappa = sigma_1 / sigma_n if sigma_n > 0 else math.inf
    log_abs_det = float(np.sum(np.log(absl))) if sigma_n > 0 else -math.inf
    corank = None
    if exact is not None and n <= 64:
        corank = n - _rank([list(r) for r in exact])
    return SpectralSummary(lam, sigma_1, sigma_n, kappa, log_abs_det, corank)


def exact_rank(m: Union[SymmetricSample, Sequence[Sequence]]) -> int:
    """Rank over the rationals (fraction-free elimination)."""
    rows = m.exact_rows() if isinstance(m, SymmetricSample) else [list(r) for r in m]
    return _rank(rows)


def exact_det(m: Union[SymmetricSample, Sequence[Sequence]]):
    rows = m.exact_rows() if isinstance(m, SymmetricSample) else [list(r) for r in m]
    return bareiss_det(rows)


# ---------------------------------------------------------------------------
# cofactor identities and the tail-chain audit


@dataclass(frozen=True)
class CofactorIdentity:
    lhs: Union[int, Fraction]
    rhs: Union[int, Fraction]
    equal: bool


def cofactor_expansion_check(m: Union[SymmetricSample, Sequence[Sequence]]) -> CofactorIdentity:
    """Verify det(M) = m11 * det(A) - x^T adj(A) x exactly.

    A is M with the first row and column removed, x the off-diagonal top
    row.  This is the bordered-determinant identity the symmetric
    quadratic expansion folds into.
    """
    rows = m.exact_rows() if isinstance(m, SymmetricSample) else [list(r) for r in m]
    n = len(rows)
    if n > 10:
        raise ValueError("exact expansion check is limited to n <= 10")
    lhs = bareiss_det(rows)
    if n == 1:
        return CofactorIdentity(lhs, rows[0][0], lhs == rows[0][0])
    A = [row[1:] for row in rows[1:]]
    x = rows[0][1:]
    adj = adjugate(A)
    quad = sum(x[i] * adj[i][j] * x[j] for i in range(n - 1) for j in range(n - 1))
    rhs = rows[0][0] * bareiss_det(A) - quad
    return CofactorIdentity(lhs, rhs, lhs == rhs)


def _power_leq(lhs, n: int, expo: Fraction, rhs) -> bool:
    """Exact check lhs <= n^expo * rhs for rationals lhs, rhs >= 0."""
    expo = Fraction(expo)
    p, q = expo.numerator, expo.denominator
    left = Fraction(lhs) ** q
    right = Fraction(n) ** p * Fraction(rhs) ** q
    return left <= right


@dataclass(frozen=True)
class CofactorAudit:
    hypothesis: bool
    checks: dict
    ok: bool


def cofactor_inequality_check(m: SymmetricSample, a_exp: float, b_exp: float,
                              gamma: float) -> CofactorAudit:
    """Audit the cofactor tail chain on one sampled instance.

    Vacuous (ok) when the hypothesis sigma_n <= n^-a_exp fails or the
    entry bounds are not met.  Otherwise, with the rows permuted so the
    first row attains the largest cofactor row sum, check exactly:

    * row bound: sum_j c_1j(M)^2 >= n^(2A-1) det(M)^2,
    * Cauchy-Schwarz column expansions of c_1j against M_{n-1} cofactors
      with the n^(2B+2gamma+3) entry-bound factor,
    * the chain conclusion sum c_ij(M_{n-1})^2 >= n^(2A-2B-2gamma-4)/2
      * det(M)^2 (the explicit 1/2 from summing the two column bounds is
      absorbed asymptotically; the audit keeps it).
    """
    if m.entry_kind != "exact":
        raise ValueError("exact entries required")
    n = m.n
    if n > 8:
        raise ValueError("exact cofactor audit is limited to n <= 8")
    a_exp = Fraction(a_exp)
    sn = spectral_summary(m).sigma_n
    hyp = sn <= float(n) ** float(-a_exp)
    hyp = hyp and np.max(np.abs(m.noise)) <= float(n) ** (float(b_exp) + 1)
    hyp = hyp and np.max(np.abs(m.fixed)) <= float(n) ** float(gamma)
    if not hyp:
        return CofactorAudit(False, {}, True)
    rows = m.exact_rows()
    C = cofactor_matrix(rows)
    row_sums = [sum(c * c for c in r) for r in C]
    r_star = max(range(n), key=lambda i: (row_sums[i], -i))
    if r_star != 0:
        order = [r_star] + [i for i in range(n) if i != r_star]
        rows = [[rows[i][j] for j in order] for i in order]
        C = cofactor_matrix(rows)
        row_sums = [sum(c * c for c in r) for r in C]
    det = bareiss_det(rows)
    det2 = Fraction(det) ** 2
    b_fac = 2 * Fraction(b_exp) + 2 * Fraction(gamma) + 3
    checks = {}
    # row bound: sum_j c_1j^2 >= n^(2A-1) det^2, flipped for _power_leq
    checks["row_bound"] = _power_leq(det2, n, 1 - 2 * a_exp, Fraction(row_sums[0]))
    sub = [row[1:] for row in rows[1:]]
    Csub = cofactor_matrix(sub) if n >= 2 else []
    col1_sq = sum(Fraction(rows[i][0]) ** 2 for i in range(1, n))
    col2_sq = sum(Fraction(rows[i][1]) ** 2 for i in range(1, n)) if n >= 2 else Fraction(0)
    cs_ok = True
    for j in range(1, n):
        target = sum(Fraction(Csub[i][j - 1]) ** 2 for i in range(n - 1))
        cs_ok = cs_ok and Fraction(C[0][j]) ** 2 <= col1_sq * target
        cs_ok = cs_ok and _power_leq(Fraction(C[0][j]) ** 2, n, b_fac, target)
    checks["cs_offdiag"] = cs_ok
    if n >= 2:
        target2 = sum(Fraction(Csub[i][0]) ** 2 for i in range(n - 1))
        first_ok = Fraction(C[0][0]) ** 2 <= col2_sq * target2
        first_ok = first_ok and _power_leq(Fraction(C[0][0]) ** 2, n, b_fac, target2)
        checks["cs_first"] = first_ok
        total = sum(Fraction(c) ** 2 for r in Csub for c in r)
        chain_expo = 2 * a_exp - 2 * Fraction(b_exp) - 2 * Fraction(gamma) - 4
        checks["chain"] = _power_leq(det2 / 2, n, -chain_expo, total)
    ok = all(checks.values())
    return CofactorAudit(True, checks, ok)


# ---------------------------------------------------------------------------
# rank growth under symmetric bordering


@dataclass(frozen=True)
class GrowthStep:
    size: int
    new_rank: int
    jumped_by_2: bool


def grow_and_track(m: SymmetricSample, law: AtomicLaw, steps: int,
                   seed: int) -> List[GrowthStep]:
    """Border M with fresh symmetric rows/columns, tracking exact rank.

    Each step prepends an independent first row and column (diagonal
    entry plus one entry per old row), then recomputes the exact rank and
    records whether it rose by 2.
    """
    if m.entry_kind != "exact":
        raise ValueError("exact entries required")
    if not (isinstance(law, AtomicLaw) and law.is_rational):
        raise ValueError("rational atomic law required")
    rows = m.exact_rows()
    rank = _rank(rows)
    if rank > m.n - 2:
        raise ValueError(f"rank {rank} > n - 2 = {m.n - 2}: nothing to grow")
    values = [Fraction(v) for v in law.values]
    as_int = all(v.denominator == 1 for v in values)
    atoms = [int(v) if as_int else v for v in values]
    out: List[GrowthStep] = []
    for t in range(steps):
        rng = substream(seed, t)
        k = len(rows) + 1
        idx = law.sample_indices(rng, k)
        new_entries = [atoms[i] for i in idx]
        top = list(new_entries)
        rows = [top] + [[new_entries[i + 1]] + row for i, row in enumerate(rows)]
        new_rank = _rank(rows)
        out.append(GrowthStep(size=k, new_rank=new_rank, jumped_by_2=new_rank == rank + 2))
        rank = new_rank
    return out


def remove_pivot_row(m: SymmetricSample) -> int:
    """Index whose symmetric removal keeps rank >= n - 2 (first such)."""
    rows = m.exact_rows()
    n = m.n
    if _rank(rows) != n - 1:
        raise ValueError("rank must be exactly n - 1")
    for i in range(n):
        sub = [[rows[r][c] for c in range(n) if c != i] for r in range(n) if r != i]
        if not sub or _rank(sub) >= n - 2:
            return i
    raise NoPivot("no symmetric removal preserves rank n - 2")


# ---------------------------------------------------------------------------
# near-kernel vectors


@dataclass(frozen=True)
class NearKernel:
    u: np.ndarray
    residuals: np.ndarray          # |<u, row_i>| sorted descending
    lambda_min: float
    budget_max: float              # largest residual among the n - budget smallest


def near_kernel_vector(m: Union[SymmetricSample, np.ndarray],
                       row_budget: int = 0) -> NearKernel:
    """Unit eigenvector of the smallest |eigenvalue| with its row residuals."""
    mat = m.matrix if isinstance(m, SymmetricSample) else np.asarray(m, dtype=np.float64)
    try:
        lam, vec = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(str(e)) from e
    j = int(np.argmin(np.abs(lam)))
    u = vec[:, j]
    res = np.sort(np.abs(mat @ u))[::-1]
    n = len(res)
    budget = min(max(int(row_budget), 0), n - 1)
    budget_max = float(np.sort(res)[: n - budget][-1]) if n - budget > 0 else 0.0
    return NearKernel(u=u, residuals=res, lambda_min=float(lam[j]), budget_max=budget_max)


# ---------------------------------------------------------------------------
# subspace membership Monte Carlo (the Odlyzko bound)


@dataclass(frozen=True)
class MembershipResult:
    n: int
    k: int
    trials: int
    freq: float
    se: float
    bound: float


def _law_int_values(law: AtomicLaw) -> Tuple[np.ndarray, int]:
    values = [Fraction(v) for v in law.values]
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return np.array([int(v * den) for v in values], dtype=np.int64), den


def subspace_membership_mc(law: AtomicLaw, n: int, k: int, trials: int, seed: int,
                           c3: float = 0.5) -> MembershipResult:
    """Frequency of a random row landing in the span of k earlier rows.

    H is the span of k iid law vectors (drawn once from (seed, 0));
    membership of each trial vector is decided exactly over the
    rationals.  The reference bound is (sqrt(1 - c3))^(n - k).
    """
    if not law.is_rational:
        raise ValueError("rational atomic law required")
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    vals_int, _ = _law_int_values(law)
    rng = substream(seed, 0)
    V = vals_int[law.sample_indices(rng, (k, n))]
    hits = 0
    for ci, start, stop in chunk_bounds(trials, 4096):
        rng = substream(seed, 1 + ci)
        U = vals_int[law.sample_indices(rng, (stop - start, n))]
        hits += int(np.sum(rowspace_membership(V.tolist(), U)))
    freq = hits / trials
    se = math.sqrt(freq * (1 - freq) / trials)
    bound = math.sqrt(1 - c3) ** (n - k)
    return MembershipResult(n=n, k=k, trials=trials, freq=freq, se=se, bound=bound)


# ---------------------------------------------------------------------------
# matrix I/O


def write_matrix_text(mat: np.ndarray, path: str) -> None:
    np.savetxt(path, np.asarray(mat, dtype=np.float64), fmt="%.17g")


def read_matrix_text(path: str) -> np.ndarray:
    out = np.loadtxt(path, dtype=np.float64)
    return out.reshape(1, 1) if out.ndim == 0 else np.atleast_2d(out)


def write_matrix_binary(mat: np.ndarray, path: str) -> None:
    """Binary record: int64 n, then n*n row-major float64."""
    arr = np.asarray(mat, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", arr.shape[0]))
        fh.write(arr.astype("<f8").tobytes())


def read_matrix_binary(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<q", fh.read(8))
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8")
    return data.reshape(n, n).copy()


def write_matrix_exact(rows: Sequence[Sequence], path: str) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(" ".join(_fmt_frac(x) for x in row) + "\n")


def read_matrix_exact(path: str) -> List[List[Fraction]]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append([Fraction(tok) for tok in line.split()])
    return out


def _fmt_frac(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
