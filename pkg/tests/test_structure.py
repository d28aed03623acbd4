import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from randsym import (Bipartition, DECOUPLING_CONST, Gap, LinearForm, OverlapError,
                     QuadraticForm, RowMatrixSpec, bernoulli, beta_close,
                     bipartition_matrix, build_row_matrix, central_binomial_rho,
                     conditioning_check, decoupling_scan, forward_lo_bound,
                     inverse_lo_search, row_matrix_det, verify_decoupling)

BERN = bernoulli()


def example_spec():
    # rewritten rows {2,3} (0-based), coefficient column {0}, k = 2
    return RowMatrixSpec(n=4, rows=(2, 3), cols_plus=(0,), cols_minus=(), k=2,
                         coeffs={(2, 0): 5, (3, 0): -1})


class TestRowMatrix:
    def test_example_matrix_and_det(self):
        R = build_row_matrix(example_spec())
        want = np.array([[1, 0, 0, 0],
                         [0, 1, 0, 0],
                         [5, 0, 2, 0],
                         [-1, 0, 0, 2]])
        assert (R == want).all()
        assert row_matrix_det(example_spec()) == 4   # k^{|I|}

    def test_empty_rows_identity(self):
        spec = RowMatrixSpec(n=3, rows=(), cols_plus=(), cols_minus=(), k=7, coeffs={})
        assert (build_row_matrix(spec) == np.eye(3, dtype=int)).all()

    def test_overlap_rejected(self):
        with pytest.raises(OverlapError):
            RowMatrixSpec(n=3, rows=(1,), cols_plus=(1,), cols_minus=(), k=2, coeffs={})

    def test_sign_split(self):
        spec = RowMatrixSpec(n=4, rows=(3,), cols_plus=(0,), cols_minus=(1,), k=3,
                             coeffs={(3, 0): 4, (3, 1): 6})
        R = build_row_matrix(spec)
        assert R[3, 0] == 4 and R[3, 1] == -6 and R[3, 3] == 3

    def test_det_invariant_random_specs(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            n = int(rng.integers(2, 13))
            idx = list(rng.permutation(n))
            n_rows = int(rng.integers(1, max(2, n - 1)))
            n_cols = int(rng.integers(1, max(2, min(3, n - n_rows) + 1)))
            rows = tuple(idx[:n_rows])
            cols = idx[n_rows:n_rows + n_cols]
            half = len(cols) // 2
            k = 0
            while k == 0:
                k = int(rng.integers(-6, 7))
            coeffs = {(i, j): int(rng.integers(-9, 10)) for i in rows for j in cols}
            spec = RowMatrixSpec(n=n, rows=rows, cols_plus=tuple(cols[half:]),
                                 cols_minus=tuple(cols[:half]), k=k, coeffs=coeffs)
            assert abs(row_matrix_det(spec)) == abs(k) ** len(rows)

    def test_entry_bound_enforced(self):
        with pytest.raises(ValueError):
            RowMatrixSpec(n=4, rows=(3,), cols_plus=(0,), cols_minus=(), k=2,
                          coeffs={(3, 0): 1000}, bound_exponent=2.0)

    def test_json_loader(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({
            "n": 4, "I": [2, 3], "I0p": [0], "I0pp": [],
            "k": 2, "coeffs": [[2, 0, 5], [3, 0, -1]],
        }))
        spec = RowMatrixSpec.from_json(str(path))
        assert spec == example_spec()


class TestConditioning:
    def test_identity(self):
        assert conditioning_check(np.eye(5), 1.0)

    def test_example_matrix(self):
        assert conditioning_check(build_row_matrix(example_spec()), 2.0)

    def test_zero_matrix(self):
        assert not conditioning_check(np.zeros((3, 3)), 5.0)


class TestBipartition:
    def test_two_by_two(self):
        u = Bipartition.from_indices(2, [0])
        out = bipartition_matrix(((F(7), F(3)), (F(3), F(9))), u)
        assert out == ((F(0), F(3)), (F(3), F(0)))

    def test_empty_side_zeroes(self):
        u = Bipartition.from_indices(2, [])
        out = bipartition_matrix(((1, 2), (2, 1)), u)
        assert out == ((0, 0), (0, 0))

    def test_block_structure(self):
        rng = np.random.default_rng(2)
        a = rng.integers(-5, 6, size=(4, 4))
        a = np.triu(a) + np.triu(a, 1).T
        u = Bipartition.from_indices(4, [0, 1])
        out = np.array(bipartition_matrix(a, u), dtype=int)
        assert (out[:2, :2] == 0).all() and (out[2:, 2:] == 0).all()
        assert (out[:2, 2:] == a[:2, 2:]).all()

    def test_remask_idempotent(self):
        rng = np.random.default_rng(6)
        a = rng.integers(-5, 6, size=(5, 5))
        a = np.triu(a) + np.triu(a, 1).T
        u = Bipartition.random(5, seed=3)
        once = bipartition_matrix(a, u)
        twice = bipartition_matrix(np.array(once, dtype=int), u)
        assert (np.array(once) == np.array(twice)).all()


class TestDecoupling:
    def test_constant_value(self):
        assert DECOUPLING_CONST == pytest.approx(1.7829327e8, rel=1e-6)

    def test_zero_form_holds(self):
        chk = verify_decoupling(QuadraticForm(((0, 0), (0, 0))), BERN, 0.1,
                                Bipartition((True, False)))
        assert chk.rho_quad == 1 and chk.rhs == 1 and chk.holds

    def test_irrational_unit_form_exact(self):
        s = 1 / math.sqrt(12)
        rng = np.random.default_rng(9)
        m = rng.choice([-s, s], size=(4, 4))
        m = np.triu(m, 1)
        m = m + m.T
        form = QuadraticForm(tuple(tuple(row) for row in m))
        chk = verify_decoupling(form, BERN, 0.1, Bipartition.random(4, 17))
        assert chk.holds
        assert isinstance(chk.rhs, F)        # both sides exact counts

    def test_sweep_small_forms(self):
        rng = np.random.default_rng(31)
        for t in range(20):
            n = int(rng.integers(2, 6))
            m = rng.integers(-3, 4, size=(n, n))
            m = np.triu(m, 1)
            m = m + m.T
            form = QuadraticForm(tuple(tuple(F(int(x), 4) for x in row) for row in m))
            u = Bipartition(tuple(bool(b) for b in rng.random(n) < 0.5))
            const, _ = decoupling_scan(form, BERN, F(1, 10), u)
            assert const is not None and const <= 4


class TestInverseSearch:
    def test_arithmetic_progression(self):
        form = LinearForm(tuple(F(i, 100) for i in range(1, 101)))
        rep = inverse_lo_search(form, BERN, F(1, 1000), rank_cap=1,
                                closeness_budget=10, size_cap=301)
        assert rep.gap is not None
        assert rep.gap.generators == (F(1, 100),)
        assert rep.coverage == 100

    def test_constant_coefficients(self):
        rep = inverse_lo_search(LinearForm((1,) * 30), BERN, 0, rank_cap=1,
                                closeness_budget=5, size_cap=9)
        assert rep.gap is not None
        assert rep.gap.generators == (F(1),)
        assert rep.gap.upper == (1,)
        assert rep.coverage == 30

    def test_generic_coefficients_absent(self):
        rng = np.random.default_rng(3)
        coeffs = tuple(float(x) for x in rng.standard_normal(100))
        rep = inverse_lo_search(LinearForm(coeffs), BERN, 1e-6, rank_cap=2,
                                closeness_budget=25, size_cap=50, seed=5)
        assert rep.gap is None
        assert rep.coverage < rep.needed

    def test_soundness_of_reported_cover(self):
        form = LinearForm(tuple(F(3 * i, 7) for i in range(1, 41)))
        rep = inverse_lo_search(form, BERN, F(1, 100), rank_cap=1,
                                closeness_budget=4, size_cap=121)
        assert rep.gap is not None
        for i in rep.covered:
            assert beta_close(rep.gap, form.coefficients[i], F(1, 100)) is not None

    def test_rank2_two_scale_instance(self):
        # coefficients k1 * 1 + k2 * sqrt-free 1/97 mixture: rank-1 cannot
        # cover both scales with a small box, rank-2 can
        coeffs = tuple(F(k) for k in range(1, 7)) + tuple(F(k, 97) for k in range(1, 7))
        rep = inverse_lo_search(LinearForm(coeffs), BERN, 0, rank_cap=2,
                                closeness_budget=1, size_cap=2100)
        assert rep.gap is not None
        assert rep.coverage >= len(coeffs) - 1


class TestForwardBound:
    def test_all_at_one(self):
        q = Gap.symmetric((1,), (1,))
        n = 12
        fb = forward_lo_bound(q, [(1,)] * n, BERN, 0, coefficients=[1] * n)
        assert fb.bound == central_binomial_rho(n)

    def test_empty(self):
        fb = forward_lo_bound(Gap.symmetric((1,), (1,)), [], BERN, 0.5)
        assert fb.bound == 1 and fb.radius == 0

    def test_one_two_three(self):
        q = Gap.symmetric((1,), (3,))
        fb = forward_lo_bound(q, [(1,), (2,), (3,)], BERN, 0,
                              coefficients=[1, 2, 3])
        assert fb.bound == F(1, 4)

    def test_radius_accounts_for_perturbation(self):
        q = Gap.symmetric((1,), (3,))
        fb = forward_lo_bound(q, [(1,), (2,)], BERN, F(1, 10),
                              coefficients=[F(11, 10), F(19, 10)])
        assert fb.radius == F(1, 10) * 2 * 1

    def test_precondition_checked(self):
        q = Gap.symmetric((1,), (3,))
        with pytest.raises(ValueError):
            forward_lo_bound(q, [(1,)], BERN, F(1, 100), coefficients=[F(3, 2)])
