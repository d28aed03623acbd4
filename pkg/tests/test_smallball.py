import math
from fractions import Fraction as F

import numpy as np
import pytest

from randsym import (AtomBlowup, EnumerationTooLarge, LinearForm,
                     QuadraticForm, bernoulli, bilinear_small_ball,
                     central_binomial_rho, gaussian, linear_small_ball_exact,
                     linear_small_ball_mc, linear_window_mass,
                     quadratic_small_ball_exact, quadratic_small_ball_mc,
                     suffix_smallball_factors, truncated_product_bound, uniform3)

BERN = bernoulli()


def brute_force_linear(coeffs, shifts, law, beta):
    """Independent oracle: enumerate every atom-index tuple directly."""
    vals = np.array([0.0])
    masses = np.array([F(1)], dtype=object)
    avals = [float(v) for v in law.values]
    amass = list(law.masses)
    sums = [F(0)]
    masses = [F(1)]
    for a, f in zip(coeffs, shifts):
        new_sums, new_masses = [], []
        for s, m in zip(sums, masses):
            for v, p in zip(law.values, law.masses):
                new_sums.append(s + F(a) * (F(v) + F(f)))
                new_masses.append(m * p)
        sums, masses = new_sums, new_masses
    order = sorted(range(len(sums)), key=lambda i: sums[i])
    sums = [sums[i] for i in order]
    masses = [masses[i] for i in order]
    best = F(0)
    import bisect
    width = 2 * F(beta)
    for j in range(len(sums)):
        r = bisect.bisect_right(sums, sums[j] + width)
        tot = sum(masses[j:r])
        if tot > best:
            best = tot
    return best


class TestLinearExact:
    def test_ones_ten(self):
        est = linear_small_ball_exact(LinearForm((1,) * 10), BERN, 0)
        assert est.rho == F(252, 1024)

    def test_pair_window(self):
        est = linear_small_ball_exact(LinearForm((1, 1)), BERN, 1)
        assert est.rho == F(3, 4)
        assert abs(est.witness_center) == 1

    def test_degenerate_zero_form(self):
        est = linear_small_ball_exact(LinearForm((0, 0, 0)), uniform3(), 5)
        assert est.rho == 1
        assert est.witness_center == 0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            law = BERN if rng.random() < 0.5 else uniform3()
            a = tuple(F(int(rng.integers(-8, 9)), int(rng.integers(1, 5)))
                      for _ in range(n))
            f = tuple(F(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
                      for _ in range(n))
            beta = F(int(rng.integers(0, 5)), 8)
            est = linear_small_ball_exact(LinearForm(a, f), law, beta)
            assert est.rho == brute_force_linear(a, f, law, beta)

    def test_witness_realizes_rho(self):
        rng = np.random.default_rng(5)
        for _ in range(15):
            n = int(rng.integers(1, 7))
            a = tuple(F(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
                      for _ in range(n))
            form = LinearForm(a)
            beta = F(int(rng.integers(0, 3)), 4)
            est = linear_small_ball_exact(form, BERN, beta)
            assert linear_window_mass(form, BERN, est.witness_center, beta) == est.rho

    def test_monotone_in_beta(self):
        form = LinearForm((F(1), F(5, 3), F(-2, 7), 1, 2))
        last = F(0)
        for k in range(8):
            rho = linear_small_ball_exact(form, uniform3(), F(k, 4)).rho
            assert rho >= last
            last = rho

    def test_atom_cap(self):
        # powers of 3 with atoms {-1,0,1}: balanced-ternary sums are all
        # distinct, so the distribution has 3^8 atoms, over any small cap
        with pytest.raises(AtomBlowup):
            linear_small_ball_exact(LinearForm(tuple(3 ** p for p in range(8))),
                                    uniform3(), 0, cap=1000)

    def test_scale_invariance_huge_coefficients(self):
        # rho(c*a, c*beta) == rho(a, beta); a huge c also exercises the
        # big-integer fallback outside the int64 fast path
        base = (F(3), F(5), F(7, 2), F(-1))
        beta = F(1, 2)
        want = linear_small_ball_exact(LinearForm(base), BERN, beta).rho
        c = F(2 ** 70 + 1)
        got = linear_small_ball_exact(LinearForm(tuple(c * a for a in base)),
                                      BERN, c * beta).rho
        assert got == want

    def test_huge_window_covers_everything(self):
        est = linear_small_ball_exact(LinearForm((F(1, 2 ** 40),)), BERN, 10 ** 9)
        assert est.rho == 1


class TestLinearMC:
    def test_converges_to_exact(self):
        est = linear_small_ball_mc(LinearForm((1,) * 10), BERN, 0, 10 ** 5, seed=3)
        assert abs(est.rho - 252 / 1024) <= est.ci_halfwidth

    def test_single_trial(self):
        est = linear_small_ball_mc(LinearForm((1, 2)), BERN, 0.25, 1, seed=0)
        assert est.rho == 1.0

    def test_gaussian_window(self):
        est = linear_small_ball_mc(LinearForm((1,)), gaussian(), 0.5, 10 ** 5, seed=11)
        want = math.erf(0.5 / math.sqrt(2))
        assert abs(est.rho - want) <= est.ci_halfwidth

    def test_deterministic_in_seed(self):
        a = linear_small_ball_mc(LinearForm((1, 1, 1)), BERN, 0.5, 5000, seed=9)
        b = linear_small_ball_mc(LinearForm((1, 1, 1)), BERN, 0.5, 5000, seed=9)
        assert a == b

    def test_dkw_halfwidth_formula(self):
        est = linear_small_ball_mc(LinearForm((1,)), BERN, 0, 400, seed=2)
        assert est.ci_halfwidth == pytest.approx(math.sqrt(math.log(40.0) / 800))


class TestQuadraticExact:
    def test_offdiagonal_pair(self):
        c = 1 / math.sqrt(2)
        form = QuadraticForm(((0, c), (c, 0)))
        est = quadratic_small_ball_exact(form, BERN, 0.1)
        assert est.rho == F(1, 2)

    def test_zero_form(self):
        est = quadratic_small_ball_exact(QuadraticForm(((0, 0), (0, 0))), BERN, 0)
        assert est.rho == 1

    def test_constant_square(self):
        form = QuadraticForm(((1, 0), (0, 0)))
        est = quadratic_small_ball_exact(form, BERN, 0)
        assert est.rho == 1          # x1^2 == 1 on +-1

    def test_enumeration_cap(self):
        form = QuadraticForm(tuple(tuple(F(1) if i == j else F(0) for j in range(9))
                                   for i in range(9)))
        with pytest.raises(EnumerationTooLarge):
            quadratic_small_ball_exact(form, uniform3(), 0, cap=1000)

    def test_mc_matches_exact(self):
        form = QuadraticForm(((0, F(1, 2)), (F(1, 2), 0)), shifts=(F(1, 3), 0))
        exact = quadratic_small_ball_exact(form, BERN, F(1, 4))
        mc = quadratic_small_ball_mc(form, BERN, 0.25, 10 ** 5, seed=6)
        assert abs(mc.rho - float(exact.rho)) <= mc.ci_halfwidth

    def test_matches_brute_force(self):
        # independent oracle: itertools product over outcome tuples,
        # Fraction arithmetic end to end; asymmetric shifts exercise the
        # per-coordinate value tables
        from itertools import product as iproduct
        import bisect
        rng = np.random.default_rng(33)
        for trial in range(12):
            n = int(rng.integers(1, 4))
            law = BERN if trial % 2 == 0 else uniform3()
            m = rng.integers(-3, 4, size=(n, n))
            m = np.triu(m) + np.triu(m, 1).T
            mat = tuple(tuple(F(int(x), 3) for x in row) for row in m)
            shifts = tuple(F(int(rng.integers(-2, 3)), 2) for _ in range(n))
            beta = F(int(rng.integers(0, 3)), 4)
            form = QuadraticForm(mat, shifts=shifts)
            got = quadratic_small_ball_exact(form, law, beta).rho
            outcomes = []
            for xs in iproduct(law.values, repeat=n):
                z = [F(x) + f for x, f in zip(xs, shifts)]
                val = sum(mat[i][j] * z[i] * z[j] for i in range(n) for j in range(n))
                mass = F(1)
                for x in xs:
                    mass *= dict(law.atoms)[x]
                outcomes.append((val, mass))
            outcomes.sort()
            vals = [v for v, _ in outcomes]
            best = F(0)
            for j, (v, _) in enumerate(outcomes):
                r = bisect.bisect_right(vals, v + 2 * beta)
                tot = sum(mass for _, mass in outcomes[j:r])
                best = max(best, tot)
            assert got == best, (trial, got, best)


class TestBilinear:
    def test_single_product(self):
        est = bilinear_small_ball(QuadraticForm(((1,),)), BERN, BERN, 0)
        assert est.rho == F(1, 2)

    def test_zero_matrix(self):
        est = bilinear_small_ball(QuadraticForm(((0, 0), (0, 0))), BERN, BERN, 0)
        assert est.rho == 1

    def test_scaled_identity(self):
        c = 1 / math.sqrt(2)
        est = bilinear_small_ball(QuadraticForm(((c, 0), (0, c))), BERN, BERN, 0)
        assert est.rho == F(1, 2)

    def test_mc_close_to_exact(self):
        form = QuadraticForm(((F(1, 2), F(1, 3)), (F(1, 3), F(-1, 4))))
        exact = bilinear_small_ball(form, BERN, BERN, F(1, 8))
        mc = bilinear_small_ball(form, BERN, BERN, 0.125, method="mc",
                                 trials=10 ** 5, seed=4)
        assert abs(mc.rho - float(exact.rho)) <= mc.ci_halfwidth


class TestTruncatedProducts:
    def test_pair(self):
        assert truncated_product_bound((1, 1), BERN, 0, 2) == F(1, 4)

    def test_single_factor(self):
        assert truncated_product_bound((5,), BERN, 0, 1) == F(1, 2)

    def test_suffix_factors_bounded_when_tail_large(self):
        # u_{n0} >= 1/(2 sqrt(n-1)) and beta < c1/(2 sqrt(n-1)) with c1 = 2:
        # every factor stays <= 1 - c3 = 1/2 (checked, not assumed)
        n = 10
        lim = F(1, 2 * 3)     # 1/(2*sqrt(9))
        u = tuple(F(int(k), 4) for k in range(2, 11))
        assert u[-1] >= lim
        beta = F(1, 4)        # < c1/(2 sqrt(n-1)) = 1/3
        factors = suffix_smallball_factors(u, BERN, beta, len(u))
        assert all(r <= F(1, 2) for r in factors)
        prod = truncated_product_bound(u, BERN, beta, len(u))
        assert prod <= F(1, 2) ** len(u)

    def test_prefix_validation(self):
        with pytest.raises(ValueError):
            truncated_product_bound((1, 2), BERN, 0, 3)


class TestForms:
    def test_symmetry_enforced(self):
        with pytest.raises(ValueError):
            QuadraticForm(((0, 1), (2, 0)))

    def test_normalized_flag(self):
        c = 1 / math.sqrt(2)
        assert QuadraticForm(((0, c), (c, 0))).is_normalized
        assert not QuadraticForm(((0, 1), (1, 0))).is_normalized

    def test_shift_length_checked(self):
        with pytest.raises(ValueError):
            LinearForm((1, 2), shifts=(0,))


class TestScaling:
    def test_elo_constant_range_spot(self):
        for n in (16, 50, 200):
            val = float(central_binomial_rho(n)) * math.sqrt(n)
            assert 0.6 <= val <= 0.8

    def test_matches_exact_engine(self):
        est = linear_small_ball_exact(LinearForm((1,) * 16), BERN, 0)
        assert est.rho == central_binomial_rho(16)
