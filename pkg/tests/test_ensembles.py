import math
from fractions import Fraction as F

import numpy as np
import pytest

from randsym import (BoundViolation, SymmetricSample, bernoulli,
                     cofactor_expansion_check, cofactor_inequality_check,
                     exact_det, exact_rank, gaussian, grow_and_track,
                     near_kernel_vector, remove_pivot_row, sample_symmetric,
                     spectral_summary, subspace_membership_mc)
from randsym.ensembles import (read_matrix_binary, read_matrix_exact,
                               read_matrix_text, write_matrix_binary,
                               write_matrix_exact, write_matrix_text)
from randsym.exactlinalg import exact_rank as rational_rank
from genutil import random_symmetric_int_matrix

BERN = bernoulli()


def exact_sample(rows, noise=None) -> SymmetricSample:
    """Wrap an explicit exact matrix as a sample (fixed part zero)."""
    n = len(rows)
    mat = np.array([[float(x) for x in r] for r in rows])
    z = np.zeros((n, n))
    return SymmetricSample(n=n, fixed=z, noise=noise if noise is not None else mat,
                           matrix=mat, exact=tuple(tuple(r) for r in rows),
                           gamma=10.0, seed=0)


class TestSampling:
    def test_one_by_one(self):
        F1 = np.array([[0.5]])
        s = sample_symmetric(BERN, F1, 1, seed=3)
        assert s.matrix[0, 0] == 0.5 + s.noise[0, 0]
        assert abs(s.noise[0, 0]) == 1.0

    def test_symmetric_structure_and_reproducibility(self):
        a = sample_symmetric(BERN, None, 3, seed=11)
        b = sample_symmetric(BERN, None, 3, seed=11)
        assert (a.matrix == b.matrix).all()
        assert (a.matrix == a.matrix.T).all()
        assert set(np.unique(a.matrix)) <= {-1.0, 1.0}
        assert a.entry_kind == "exact"

    def test_fixed_part_bound(self):
        Fbad = np.zeros((3, 3))
        Fbad[0, 1] = Fbad[1, 0] = 3.0 ** 1.0 + 1
        with pytest.raises(BoundViolation):
            sample_symmetric(BERN, Fbad, 3, seed=1, gamma=1.0)

    def test_continuous_law_floats_only(self):
        s = sample_symmetric(gaussian(), None, 4, seed=2)
        assert s.entry_kind == "float"
        with pytest.raises(ValueError):
            sample_symmetric(gaussian(), None, 4, seed=2, exact=True)


class TestSpectralSummary:
    def test_diagonal(self):
        summ = spectral_summary(np.diag([3.0, -1.0]))
        assert summ.sigma_1 == 3.0 and summ.sigma_n == 1.0
        assert summ.kappa == 3.0
        assert summ.log_abs_det == pytest.approx(math.log(3.0))

    def test_offdiagonal_pair(self):
        summ = spectral_summary(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert summ.eigenvalues.tolist() == pytest.approx([-1.0, 1.0])
        assert summ.sigma_n == pytest.approx(1.0)

    def test_trace_identities(self):
        s = sample_symmetric(BERN, None, 50, seed=4, exact=False)
        summ = spectral_summary(s)
        n = 50
        assert abs(summ.eigenvalues.sum() - np.trace(s.matrix)) <= 1e-9 * n
        assert abs((summ.eigenvalues ** 2).sum() -
                   (s.matrix ** 2).sum()) <= 1e-9 * n * n

    def test_exact_corank(self):
        s = exact_sample([[1, 1], [1, 1]])
        assert spectral_summary(s).corank == 1


class TestExactRank:
    def test_all_ones(self):
        assert exact_rank([[1, 1, 1]] * 3) == 1

    def test_offdiag(self):
        assert exact_rank([[0, 1], [1, 0]]) == 2

    def test_agrees_with_float_rank(self):
        rng = np.random.default_rng(19)
        for i in range(10 ** 4):
            m = rng.integers(0, 2, size=(8, 8)) * 2 - 1
            m = np.triu(m) + np.triu(m, 1).T
            r_exact = rational_rank([[int(x) for x in row] for row in m])
            sv = np.linalg.svd(m.astype(float), compute_uv=False)
            r_float = int(np.sum(sv > 1e-8 * sv[0] * 8))
            assert r_exact == r_float


class TestCofactorExpansion:
    def test_two_by_two(self):
        chk = cofactor_expansion_check([[3, 2], [2, 5]])
        assert chk.equal and chk.lhs == 11 and chk.rhs == 11

    def test_diagonal_reduces(self):
        chk = cofactor_expansion_check([[2, 0, 0], [0, 5, 0], [0, 0, 7]])
        assert chk.equal and chk.lhs == 70

    def test_random_six_by_six(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            rows = random_symmetric_int_matrix(rng, 6)
            chk = cofactor_expansion_check(rows)
            assert chk.equal
            assert chk.lhs == exact_det(rows)

    def test_size_guard(self):
        rng = np.random.default_rng(1)
        with pytest.raises(ValueError):
            cofactor_expansion_check(random_symmetric_int_matrix(rng, 11))


class TestCofactorInequalities:
    def test_vacuous_when_sigma_large(self):
        audit = cofactor_inequality_check(exact_sample([[5, 0], [0, 5]]),
                                          a_exp=2, b_exp=1, gamma=1)
        assert not audit.hypothesis and audit.ok

    def test_planted_near_singular(self):
        eps = F(1, 1000)
        rows = [[1 + (eps if i == j else 0) for j in range(4)] for i in range(4)]
        s = exact_sample(rows)
        audit = cofactor_inequality_check(s, a_exp=1, b_exp=1, gamma=1)
        assert audit.hypothesis
        assert audit.ok, audit.checks

    def test_float_pair_instance(self):
        rows = [[F(1), F(1)], [F(1), F(1) + F(10 ** -6)]]
        s = exact_sample(rows)
        assert spectral_summary(s).sigma_n == pytest.approx(5e-7, rel=1e-2)
        audit = cofactor_inequality_check(s, a_exp=3, b_exp=1, gamma=1)
        assert audit.hypothesis and audit.ok


class TestGrowAndTrack:
    def zero(self, n):
        z = np.zeros((n, n))
        return SymmetricSample(n=n, fixed=z, noise=z, matrix=z,
                               exact=tuple(tuple(0 for _ in range(n))
                                           for _ in range(n)),
                               gamma=1.0, seed=0)

    def test_first_step_bound_two_by_two(self):
        # from the 2x2 zero matrix the new off-diagonal pair is never zero,
        # so the first bordering always jumps by 2; the escape bound is 1/2
        hits = 0
        trials = 2000
        for t in range(trials):
            steps = grow_and_track(self.zero(2), BERN, 1, seed=t)
            hits += steps[0].jumped_by_2
        bound = 1 - math.sqrt(1 / 2) ** 2
        se = math.sqrt(0.25 / trials)
        assert hits / trials >= bound - 3 * se

    def test_full_rank_rejected(self):
        s = exact_sample([[1, 0], [0, 1]])
        with pytest.raises(ValueError):
            grow_and_track(s, BERN, 1, seed=0)

    def test_jump_bound_from_rank_two_start(self):
        # rank-2 start in dimension 6: escape bound 1 - (1/sqrt2)^(6-2)
        v = [1, -1, 1, 1, -1, 1]
        w = [1, 1, -1, 1, 1, -1]
        rows = [[v[i] * v[j] + w[i] * w[j] for j in range(6)] for i in range(6)]
        assert rational_rank(rows) == 2
        base = exact_sample(rows)
        trials = 600
        hits = 0
        for t in range(trials):
            steps = grow_and_track(base, BERN, 1, seed=5000 + t)
            hits += steps[0].jumped_by_2
        bound = 1 - math.sqrt(0.5) ** 4
        se = math.sqrt(max(hits / trials * (1 - hits / trials), 1e-9) / trials)
        assert hits / trials >= bound - 3 * se

    def test_chain_reaches_corank_one(self):
        n = 4
        good = 0
        trials = 300
        for t in range(trials):
            steps = grow_and_track(self.zero(n), BERN, n - 1, seed=t)
            if steps[-1].size == 2 * n - 1 and steps[-1].new_rank == 2 * n - 2:
                good += 1
        assert good / trials >= 0.5


class TestRemovePivotRow:
    def test_diag_with_zero(self):
        assert remove_pivot_row(exact_sample([[1, 0, 0], [0, 1, 0], [0, 0, 0]])) == 0

    def test_all_ones_pair(self):
        assert remove_pivot_row(exact_sample([[1, 1], [1, 1]])) == 0

    def test_random_corank_one(self):
        rng = np.random.default_rng(40)
        for _ in range(10):
            S = random_symmetric_int_matrix(rng, 5)
            if rational_rank(S) != 5:
                continue
            c = [int(x) for x in rng.integers(-3, 4, size=5)]
            ext = [[None] * 6 for _ in range(6)]
            for i in range(5):
                for j in range(5):
                    ext[i][j] = S[i][j]
            for i in range(5):
                ext[i][5] = sum(S[i][j] * c[j] for j in range(5))
                ext[5][i] = ext[i][5]
            ext[5][5] = sum(c[i] * S[i][j] * c[j] for i in range(5) for j in range(5))
            s = exact_sample(ext)
            assert exact_rank(s) == 5
            i = remove_pivot_row(s)
            sub = [[ext[r][c2] for c2 in range(6) if c2 != i]
                   for r in range(6) if r != i]
            assert rational_rank(sub) >= 4

    def test_wrong_rank_rejected(self):
        with pytest.raises(ValueError):
            remove_pivot_row(exact_sample([[1, 0], [0, 1]]))


class TestNearKernel:
    def test_near_diagonal(self):
        nk = near_kernel_vector(np.diag([5.0, 1e-8]))
        assert abs(abs(nk.u[1]) - 1.0) <= 1e-12
        assert nk.residuals.tolist() == pytest.approx([1e-8, 0.0])

    def test_exactly_singular(self):
        nk = near_kernel_vector(np.array([[1.0, 1.0], [1.0, 1.0]]))
        assert np.max(nk.residuals) <= 1e-12

    def test_eigen_residual_identity(self):
        s = sample_symmetric(BERN, None, 100, seed=8, exact=False)
        nk = near_kernel_vector(s)
        lam = abs(nk.lambda_min)
        # residuals are |lambda_min| * |u_i| and their l2 norm is |lambda_min|
        resid = np.sort(np.abs(s.matrix @ nk.u))[::-1]
        expect = np.sort(lam * np.abs(nk.u))[::-1]
        assert np.max(np.abs(resid - expect)) <= 1e-9
        assert np.linalg.norm(nk.residuals) == pytest.approx(lam, abs=1e-9)

    def test_budget_max(self):
        nk = near_kernel_vector(np.diag([5.0, 1e-8]), row_budget=1)
        assert nk.budget_max == 0.0


class TestMembership:
    def test_matches_rank_oracle(self):
        rng = np.random.default_rng(17)
        V = (rng.integers(0, 2, size=(3, 6)) * 2 - 1).tolist()
        U = rng.integers(0, 2, size=(100, 6)) * 2 - 1
        from randsym.exactlinalg import rowspace_membership
        got = rowspace_membership(V, U)
        for row, flag in zip(U, got):
            aug = V + [[int(x) for x in row]]
            assert flag == (rational_rank(aug) == rational_rank(V))

    def test_span_of_one_vector(self):
        res = subspace_membership_mc(BERN, 8, 1, 20000, seed=3)
        # only +-v land in span(v): true frequency 2/2^8
        assert abs(res.freq - 2 / 256) <= 5 * math.sqrt(res.freq * (1 - res.freq) / 20000) + 1e-3
        assert res.freq <= res.bound + 3 * res.se

    def test_bound_formula(self):
        res = subspace_membership_mc(BERN, 8, 5, 100, seed=1, c3=0.5)
        assert res.bound == pytest.approx(math.sqrt(0.5) ** 3)


class TestMatrixIO:
    def test_text_roundtrip(self, tmp_path):
        m = np.array([[1.5, -2.0], [-2.0, 0.25]])
        p = tmp_path / "m.txt"
        write_matrix_text(m, str(p))
        assert (read_matrix_text(str(p)) == m).all()

    def test_binary_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((5, 5))
        p = tmp_path / "m.bin"
        write_matrix_binary(m, str(p))
        assert (read_matrix_binary(str(p)) == m).all()

    def test_exact_roundtrip(self, tmp_path):
        rows = [[F(1, 3), F(-2)], [F(-2), F(7, 5)]]
        p = tmp_path / "m.frac"
        write_matrix_exact(rows, str(p))
        assert read_matrix_exact(str(p)) == rows
