import math

import numpy as np
import pytest
from scipy.integrate import quad

from osb.errors import DomainError
from osb.families import full_mapping_family, iter_members, symmetric_group
from osb.interpolation import (
    InterpolationParams,
    KFunctionalCurve,
    expected_lp_norm,
    head_tail_bound,
    interpolation_norm,
    interpolation_norm_from_curve,
    k_functional,
    k_functional_mixed,
    mixed_k_curve,
    verify_lp_bounds,
)
from osb.matrices import Matrix
from osb.orderstats import path_values

from oracles import all_mappings, all_permutations, brute_expected_lp, k_functional_oracle


def random_matrix(n, N, seed):
    return Matrix(np.random.default_rng(seed).uniform(0, 1, (n, N)))


class TestKFunctional:
    def test_fractional_example(self):
        assert k_functional([3, 1], 1.5) == 3.5

    def test_saturates_at_l1(self):
        assert k_functional([3, 1], 2) == 4.0
        assert k_functional([3, 1], 100) == 4.0

    def test_zero_weight(self):
        assert k_functional([3, 1], 0) == 0.0

    def test_negative_weight_rejected(self):
        with pytest.raises(DomainError):
            k_functional([1.0], -0.5)

    def test_matches_decomposition_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            n = int(rng.integers(1, 21))
            x = rng.uniform(0, 10, n)
            t = float(rng.uniform(0, n + 2))
            assert k_functional(x, t) == pytest.approx(
                k_functional_oracle(x, t), abs=1e-9)

    def test_concave_and_nondecreasing(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            x = rng.uniform(0, 5, 6)
            t1, t2, t3 = sorted(rng.uniform(0, 8, 3))
            k1, k2, k3 = (k_functional(x, t) for t in (t1, t2, t3))
            assert k1 <= k2 + 1e-12 and k2 <= k3 + 1e-12
            if t3 - t1 > 1e-9:
                lam = (t2 - t1) / (t3 - t1)
                assert k2 >= (1 - lam) * k1 + lam * k3 - 1e-9

    def test_upper_envelope(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            x = rng.uniform(0, 5, 5)
            t = float(rng.uniform(0, 7))
            assert k_functional(x, t) <= min(x.sum(), t * x.max()) + 1e-12

    def test_curve_validation(self):
        with pytest.raises(DomainError):
            KFunctionalCurve(slopes=(1.0, 2.0))  # increasing slopes not concave
        with pytest.raises(DomainError):
            KFunctionalCurve(slopes=())


class TestMixedKFunctional:
    def test_all_ones_is_linear(self):
        a = Matrix.from_rows([[1] * 3] * 3)
        fam = symmetric_group(3)
        for t in (0.5, 1.0, 2.25, 3.0):
            assert k_functional_mixed(a, fam, t) == pytest.approx(t, abs=1e-12)

    def test_two_permutations_example(self):
        a = Matrix.from_rows([[1, 0], [0, 1]])
        assert k_functional_mixed(a, symmetric_group(2), 1.0) == pytest.approx(0.5)

    def test_zero_weight(self):
        a = random_matrix(2, 2, seed=1)
        assert k_functional_mixed(a, symmetric_group(2), 0.0) == 0.0

    def test_equals_average_of_member_curves(self):
        a = random_matrix(3, 2, seed=2)
        fam = full_mapping_family(3, 2)
        for t in (0.4, 1.0, 1.7, 2.5, 3.0):
            direct = np.mean([
                k_functional(path_values(a, g), t) for g in all_mappings(3, 2)
            ])
            assert k_functional_mixed(a, fam, t) == pytest.approx(float(direct), abs=1e-12)

    def test_mc_close_to_exact(self):
        a = random_matrix(3, 3, seed=3)
        fam = full_mapping_family(3, 3)
        exact = k_functional_mixed(a, fam, 1.5)
        approx = k_functional_mixed(a, fam, 1.5, samples=200000, seed=1)
        assert approx == pytest.approx(exact, rel=2e-2)


class TestInterpolationNorm:
    def test_single_coordinate_closed_form(self):
        for p in (1.5, 2.0, 3.0, 5.0):
            for n in (1, 3, 7):
                x = [0.0] * n
                x[min(1, n - 1)] = 2.0
                want = 2.0 * (p / (p - 1)) ** (1 / p)
                got = interpolation_norm(x, p)
                assert abs(got - want) / want <= 1e-8

    def test_zero_vector(self):
        assert interpolation_norm([0, 0, 0], 2.0) == 0.0

    def test_homogeneity(self):
        x = [3, 1, 0.5, 2]
        assert interpolation_norm([2 * v for v in x], 2.5) == pytest.approx(
            2 * interpolation_norm(x, 2.5), rel=1e-12)

    def test_p_validation(self):
        with pytest.raises(DomainError):
            interpolation_norm([1, 2], 1.0)
        with pytest.raises(DomainError):
            interpolation_norm([1, 2], 0.5)

    def test_against_scipy_quadrature(self):
        rng = np.random.default_rng(44)
        for _ in range(10):
            n = int(rng.integers(2, 7))
            x = rng.uniform(0.1, 5, n)
            p = float(rng.choice([1.5, 2.0, 2.5, 4.0]))
            got = interpolation_norm(x, p)
            integrand = lambda t: (k_functional(x, t) / t) ** p
            total, _ = quad(integrand, 0, n, limit=200, points=list(range(1, n + 1)))
            tail = x.sum() ** p * n ** (1 - p) / (p - 1)
            want = (total + tail) ** (1 / p)
            assert got == pytest.approx(want, rel=1e-8)

    def test_params_bookkeeping(self):
        params = InterpolationParams(p=2.0)
        assert params.theta == 0.5 and params.q == 2.0
        assert InterpolationParams(p=1.0).theta == 0.0
        with pytest.raises(DomainError):
            InterpolationParams(p=0.9)


class TestLpExpectation:
    def test_p1_is_entry_mean_identity(self):
        a = random_matrix(3, 4, seed=5)
        fam = full_mapping_family(3, 4)
        got = expected_lp_norm(a, fam, 1.0).value
        assert got == pytest.approx(a.entries.sum() / 4, abs=1e-12)

    def test_sqrt2_example(self):
        a = Matrix.from_rows([[1, 0], [0, 1]])
        got = expected_lp_norm(a, symmetric_group(2), 2.0).value
        assert got == pytest.approx(math.sqrt(2) / 2, abs=1e-15)

    def test_all_ones_gives_root_n(self):
        a = Matrix.from_rows([[1] * 2] * 4)
        fam = full_mapping_family(4, 2)
        for p in (1.0, 2.0, 3.0):
            assert expected_lp_norm(a, fam, p).value == pytest.approx(
                4 ** (1 / p), abs=1e-12)

    def test_matches_brute_oracle(self):
        a = random_matrix(2, 3, seed=6)
        fam = full_mapping_family(2, 3)
        for p in (1.0, 1.5, 2.0, 3.0):
            want = brute_expected_lp(a.entries.tolist(), all_mappings(2, 3), p)
            assert expected_lp_norm(a, fam, p).value == pytest.approx(want, abs=1e-12)

    def test_nonincreasing_in_p(self):
        a = random_matrix(3, 3, seed=7)
        fam = symmetric_group(3)
        values = [expected_lp_norm(a, fam, p).value for p in (1.0, 1.5, 2.0, 3.0, 6.0)]
        assert all(v1 >= v2 - 1e-12 for v1, v2 in zip(values, values[1:]))

    def test_mc_close_to_exact(self):
        a = random_matrix(3, 3, seed=8)
        fam = full_mapping_family(3, 3)
        exact = expected_lp_norm(a, fam, 2.0).value
        r = expected_lp_norm(a, fam, 2.0, samples=100000, seed=2)
        assert abs(r.value - exact) <= 4 * r.stderr

    def test_p_validation(self):
        with pytest.raises(DomainError):
            expected_lp_norm(random_matrix(2, 2, seed=9), symmetric_group(2), 0.5)


class TestHeadTailBound:
    def test_identity_matrix_p1(self):
        assert head_tail_bound(Matrix.from_rows([[1, 0], [0, 1]]), 1.0) == (1.0, 1.0)

    def test_zero_matrix(self):
        assert head_tail_bound(Matrix.zeros(3, 2), 2.0).upper_expr == 0.0

    def test_single_row_has_no_tail(self):
        a = Matrix.from_rows([[4, 2, 1]])
        want = (4 + 2 + 1) / 3
        assert head_tail_bound(a, 3.0).upper_expr == pytest.approx(want)

    def test_head_plus_tail(self):
        a = Matrix.from_rows([[4, 3], [2, 1]])
        got = head_tail_bound(a, 2.0).upper_expr
        assert got == pytest.approx((4 + 3) / 2 + math.sqrt((4 + 1) / 2))


class TestVerifyLpBounds:
    def test_p1_is_exact_equality(self):
        a = random_matrix(3, 2, seed=10)
        reports = verify_lp_bounds(a, full_mapping_family(3, 2), 1.0)
        upper = next(r for r in reports if r.check_id == "thm1.2/upper")
        assert upper.status == "pass" and abs(upper.margin) <= 1e-12

    def test_identity_example_p2(self):
        a = Matrix.from_rows([[1, 0], [0, 1]])
        reports = verify_lp_bounds(a, symmetric_group(2), 2.0)
        upper = next(r for r in reports if r.check_id == "thm1.2/upper")
        assert upper.lhs == pytest.approx(math.sqrt(2) / 2)
        assert upper.rhs == pytest.approx(1.0)
        assert upper.status == "pass"

    def test_zero_matrix_is_vacuous(self):
        reports = verify_lp_bounds(Matrix.zeros(2, 2), symmetric_group(2), 2.0)
        lower = next(r for r in reports if r.check_id == "thm1.2/lower-ratio")
        assert lower.status == "vacuous"

    def test_ratio_is_positive_and_recorded(self):
        a = random_matrix(3, 3, seed=11)
        reports = verify_lp_bounds(a, symmetric_group(3), 1.5)
        lower = next(r for r in reports if r.check_id == "thm1.2/lower-ratio")
        assert lower.status == "pass" and 0 < lower.lhs <= 1.0 + 1e-12
        assert "reference_constant" in lower.extra

    def test_triangle_inequality_for_integrals(self, small_corpus):
        # Minkowski: the norm of the averaged curve never exceeds the average
        # of the per-path norms.  (The average of the plain lp norms is NOT an
        # upper bound at constant 1; the per-path functional exceeds the lp
        # norm by a p-dependent factor, e.g. (p/(p-1))^(1/p) on spikes.)
        for cell in small_corpus:
            fam = full_mapping_family(cell.n, cell.N)
            for mid, a in cell.matrices[:3]:
                curve = mixed_k_curve(a, fam)
                if curve.knots[-1] == 0.0:
                    continue
                for p in (1.5, 2.0, 3.0):
                    mixed = interpolation_norm_from_curve(curve, p)
                    per_path = np.mean([
                        interpolation_norm(path_values(a, g), p)
                        if path_values(a, g).max() > 0 else 0.0
                        for g in iter_members(fam)
                    ])
                    assert mixed <= float(per_path) + 1e-9
