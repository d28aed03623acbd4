"""Exact linear algebra over the rationals.

Fraction-free (Bareiss) elimination for determinants and ranks, cofactor
matrices, rational kernels, and a vectorized exact row-space membership
test.  Matrices are lists of lists holding ints or fractions.Fraction;
integer matrices stay integer throughout (Bareiss divisions are exact).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

import numpy as np


class FullRank(Exception):
    """No nonzero integer kernel vector exists."""


Matrix = List[List]


def _copy(mat: Sequence[Sequence]) -> Matrix:
    return [list(row) for row in mat]


def _all_int(mat: Sequence[Sequence]) -> bool:
    return all(isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)
               for row in mat for x in row)


def _as_int_rows(mat: Sequence[Sequence]) -> Matrix:
    return [[int(x) for x in row] for row in mat]


def bareiss_det(mat: Sequence[Sequence]):
    """Exact determinant; int for integer input, Fraction otherwise."""
    n = len(mat)
    if n == 0:
        return 1
    if any(len(row) != n for row in mat):
        raise ValueError("determinant needs a square matrix")
    integer = _all_int(mat)
    m = _as_int_rows(mat) if integer else [[Fraction(x) for x in row] for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0 if integer else Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                t = m[k][k] * m[i][j] - m[i][k] * m[k][j]
                m[i][j] = t // prev if integer else t / prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def exact_rank(mat: Sequence[Sequence]) -> int:
    """Rank over the rationals via fraction-free elimination."""
    if not mat:
        return 0
    integer = _all_int(mat)
    m = _as_int_rows(mat) if integer else [[Fraction(x) for x in row] for row in mat]
    nr, nc = len(m), len(m[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nr):
            # update every trailing entry: Bareiss divisions stay exact
            # only if all entries remain minors of the input
            for j in range(nc):
                if j == c:
                    continue
                t = m[r][c] * m[i][j] - m[i][c] * m[r][j]
                m[i][j] = t // prev if integer else t / prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        rank += 1
        if r == nr:
            break
    return rank


def minor_det(mat: Sequence[Sequence], drop_row: int, drop_col: int):
    sub = [[mat[i][j] for j in range(len(mat)) if j != drop_col]
           for i in range(len(mat)) if i != drop_row]
    return bareiss_det(sub) if sub else 1


def cofactor(mat: Sequence[Sequence], i: int, j: int):
    """Signed cofactor c_ij (0-based indices)."""
    s = -1 if (i + j) % 2 else 1
    return s * minor_det(mat, i, j)


def cofactor_matrix(mat: Sequence[Sequence]) -> Matrix:
    n = len(mat)
    return [[cofactor(mat, i, j) for j in range(n)] for i in range(n)]


def adjugate(mat: Sequence[Sequence]) -> Matrix:
    """adj(M): transpose of the cofactor matrix, exact."""
    n = len(mat)
    c = cofactor_matrix(mat)
    return [[c[j][i] for j in range(n)] for i in range(n)]


def _primitive(vec: Sequence[Fraction]) -> Tuple[int, ...]:
    """Scale a rational vector to coprime integers, last nonzero positive."""
    fracs = [Fraction(x) for x in vec]
    den = 1
    for x in fracs:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector cannot be primitivized")
    ints = [x // g for x in ints]
    last = next(x for x in reversed(ints) if x != 0)
    if last < 0:
        ints = [-x for x in ints]
    return tuple(ints)


def kernel_basis(rows: Sequence[Sequence], ncols: int) -> List[List[Fraction]]:
    """Canonical rational basis of {x : rows @ x = 0} from the RREF."""
    m = [[Fraction(x) for x in row] for row in rows]
    nr = len(m)
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            v[pc] = -m[ri][fc]
        basis.append(v)
    return basis


def primitive_kernel_vector(points: Sequence[Sequence[int]], dim: int) -> Tuple[int, ...]:
    """Deterministic primitive integer vector annihilating all points.

    Choice rule: take the canonical RREF kernel basis, primitivize each
    vector with the last nonzero entry positive, return the
    lexicographically smallest.  Raises FullRank when the points span.
    """
    basis = kernel_basis(points, dim) if points else \
        [[Fraction(1) if j == i else Fraction(0) for j in range(dim)] for i in range(dim)]
    if not basis:
        raise FullRank(f"points span all of rank {dim}")
    candidates = sorted(_primitive(v) for v in basis)
    return candidates[0]


def row_echelon_int(mat: Sequence[Sequence[int]]) -> Tuple[List[List[int]], List[int], List[int]]:
    """Fraction-free row echelon form of an integer matrix.

    Returns (echelon rows, pivot columns, pivot values); entries are
    minors of the input, so the later Bareiss divisions in
    rowspace_membership are exact.
    """
    m = _as_int_rows(mat)
    nr = len(m)
    nc = len(m[0]) if nr else 0
    rows: List[List[int]] = []
    piv_cols: List[int] = []
    piv_vals: List[int] = []
    prev = 1
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nr):
            for j in range(nc):
                if j == c:
                    continue
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        rows.append(list(m[r]))
        piv_cols.append(c)
        piv_vals.append(m[r][c])
        prev = m[r][c]
        r += 1
        if r == nr:
            break
    return rows, piv_cols, piv_vals


def rowspace_membership(basis: Sequence[Sequence[int]], vectors: np.ndarray) -> np.ndarray:
    """Exact test of which rows of `vectors` lie in the rational row space.

    `basis` is a small integer matrix (its echelon minors must fit in
    int64, which holds for the +-1 desk-scale matrices used here);
    `vectors` is (T, n) integer.  Vectorized fraction-free elimination:
    each vector is treated as an extra Bareiss row, so every division is
    exact.
    """
    rows, piv_cols, piv_vals = row_echelon_int(basis)
    work = vectors.astype(np.int64, copy=True)
    prev = 1
    for row, c, pv in zip(rows, piv_cols, piv_vals):
        e = np.asarray(row, dtype=np.int64)
        coef = work[:, c].copy()
        work = pv * work - coef[:, None] * e[None, :]
        if prev != 1:
            work //= prev
        prev = pv
    return ~np.any(work, axis=1)
