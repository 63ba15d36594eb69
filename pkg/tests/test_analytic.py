import math

import numpy as np
import pytest

from core.analytic import (
    Branch,
    StructuredKind,
    TwoRegionCase,
    Validity,
    bound_gamma,
    bound_general,
    bound_normal,
    bound_table,
    det_structured,
    equal_components_spectrum,
    expected_lambda2_beta,
    lambda2_two_region,
    structured_matrix,
    two_region_matrix,
    two_region_tail_probability,
)
from core.matrices import equal_components_matrix
from core.rng_dist import DistributionSpec, moments
from core.spectra import Lambda2Transform, second_eigenvalue
from utils.errors import ParameterError


class TestBounds:
    def test_normal_first_valid_n(self):
        assert bound_normal(11).value == pytest.approx(209.98214, abs=1e-4)

    def test_normal_n20(self):
        assert bound_normal(20).value == pytest.approx(6.72186, abs=1e-4)

    def test_normal_below_range(self):
        r = bound_normal(10)
        assert r.validity == Validity.PRECONDITION_VIOLATED
        assert r.value == math.inf
        assert not r.valid

    def test_normal_decreasing(self):
        values = [bound_normal(n).value for n in range(11, 200)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_general_constant_vector(self):
        r = bound_general(10, moments(DistributionSpec.constant(1)))
        assert r.valid
        assert r.value == pytest.approx(2.35126, abs=1e-4)

    def test_general_infinite_moment(self):
        # E(u^-8) diverges for the normal law
        r = bound_general(20, moments(DistributionSpec.normal()))
        assert r.validity == Validity.PRECONDITION_VIOLATED

    def test_general_needs_n3(self):
        assert not bound_general(2, moments(DistributionSpec.constant(1))).valid

    @pytest.mark.parametrize('alpha, n', [(2, 7), (4, 5), (0.5, 19)])
    def test_gamma_valid(self, alpha, n):
        r = bound_gamma(n, alpha)
        assert r.valid
        assert 0 < r.value < math.inf

    @pytest.mark.parametrize('alpha, n', [(1, 10), (2, 6), (0.5, 18)])
    def test_gamma_violated(self, alpha, n):
        r = bound_gamma(n, alpha)
        assert r.validity == Validity.PRECONDITION_VIOLATED
        assert 'alpha' in r.reason

    def test_gamma_large_n(self):
        r = bound_gamma(10 ** 6, 0.5)
        assert math.isfinite(r.value)
        assert r.value < 1e-2

    def test_gamma_bad_alpha(self):
        with pytest.raises(ParameterError):
            bound_gamma(10, 0.0)

    def test_table(self):
        rows = bound_table('normal', range(11, 21))
        assert len(rows) == 10
        assert [r.n for r in rows] == list(range(11, 21))
        assert rows[0].value == pytest.approx(209.98214, abs=1e-4)

    def test_table_unknown_kind(self):
        with pytest.raises(ParameterError):
            bound_table('cauchy', [5])

    def test_table_general_needs_moments(self):
        with pytest.raises(ParameterError):
            bound_table('general', [5])


class TestStructuredDeterminants:
    def test_d_small(self):
        assert det_structured(3, 1, 2, StructuredKind.D) == 8

    def test_s_small(self):
        assert det_structured(3, 1, 2, StructuredKind.S) == 2

    def test_equal_entries(self):
        assert det_structured(2.5, 2.5, 6, StructuredKind.D) == 0.0

    @pytest.mark.parametrize('kind', [StructuredKind.D, StructuredKind.S])
    def test_against_numeric_determinant(self, kind, seed):
        for alpha, beta in seed.generator().uniform(-2, 2, size=(100, 2)):
            for n in range(2, 13):
                numeric = np.linalg.det(structured_matrix(alpha, beta, n, kind))
                assert det_structured(alpha, beta, n, kind) == pytest.approx(numeric, rel=1e-8, abs=1e-10)

    def test_s_needs_two(self):
        with pytest.raises(ParameterError):
            det_structured(1, 2, 1, StructuredKind.S)


class TestEqualComponents:
    def test_n4(self):
        s = equal_components_spectrum(4)
        assert s.det == 0.0
        assert s.trace == pytest.approx(1.0)

    def test_n2(self):
        s = equal_components_spectrum(2)
        assert s.det == pytest.approx(-1.0)
        assert s.trace == pytest.approx(0.0)

    @pytest.mark.parametrize('n', range(2, 31))
    def test_against_matrix(self, n):
        m = equal_components_matrix(n).entries
        s = equal_components_spectrum(n)
        assert np.trace(m) == pytest.approx((n - 2) ** 2 / n, rel=1e-9)
        assert np.linalg.det(m) == pytest.approx(((n - 4) / n) ** (n - 1), rel=1e-9, abs=1e-12)
        assert s.trace == pytest.approx(np.trace(m), rel=1e-9)
        assert s.det == pytest.approx(np.linalg.det(m), rel=1e-9, abs=1e-12)
        np.testing.assert_allclose(np.sort(np.linalg.eigvals(m).real), np.sort(s.eigenvalues), atol=1e-9)


class TestTwoRegion:
    def test_half_turn(self):
        assert lambda2_two_region(TwoRegionCase(math.sqrt(2) / 2)) == pytest.approx(-1.0)

    def test_ninth(self):
        assert lambda2_two_region(TwoRegionCase(math.sqrt(6) / 6)) == pytest.approx(-1 / 9)

    def test_zero(self):
        assert lambda2_two_region(TwoRegionCase(0.0)) == 1.0

    def test_minus_branch_flips_sign(self):
        assert lambda2_two_region(TwoRegionCase(0.3, Branch.MINUS)) == \
            pytest.approx(-lambda2_two_region(TwoRegionCase(0.3)))

    def test_v1_out_of_range(self):
        with pytest.raises(ParameterError):
            TwoRegionCase(1.5)

    @pytest.mark.parametrize('branch', list(Branch))
    def test_matches_eigensolve(self, branch):
        for v in np.linspace(-1, 1, 101):
            case = TwoRegionCase(float(v), branch)
            m = two_region_matrix(case)
            np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-12)
            assert second_eigenvalue(m).value.real == pytest.approx(lambda2_two_region(case), abs=1e-10)

    def test_expected_uniform(self):
        assert expected_lambda2_beta(1, 1, Branch.PLUS) == pytest.approx(-1 / 15, abs=1e-12)

    def test_expected_beta_3_1(self):
        assert expected_lambda2_beta(3, 1) == pytest.approx(-13 / 35)

    def test_expected_monte_carlo(self, seed):
        rng = seed.generator()
        for alpha, beta in rng.uniform(0.5, 5.0, size=(5, 2)):
            v = rng.beta(alpha, beta, 1_000_000)
            lam = 8 * v ** 4 - 8 * v ** 2 + 1
            three_se = 3 * lam.std(ddof=1) / math.sqrt(lam.size)
            assert abs(expected_lambda2_beta(alpha, beta) - lam.mean()) < three_se
            assert abs(expected_lambda2_beta(alpha, beta, Branch.MINUS) + lam.mean()) < three_se

    def test_expected_bad_parameters(self):
        with pytest.raises(ParameterError):
            expected_lambda2_beta(0, 1)


class TestTailProbability:
    def test_uniform_closed_form(self):
        p = two_region_tail_probability(1, 1, 1.0)
        assert p == pytest.approx(math.cos(math.pi / 8) - math.cos(3 * math.pi / 8), abs=1e-12)

    def test_trivial_thresholds(self):
        assert two_region_tail_probability(2, 2, 2.0) == 0.0
        assert two_region_tail_probability(2, 2, -0.1) == 1.0
        assert two_region_tail_probability(2, 2, 1.0, transform=Lambda2Transform.MODULUS) == 0.0

    @pytest.mark.parametrize('branch', list(Branch))
    @pytest.mark.parametrize('transform, k', [(Lambda2Transform.DIST_FROM_ONE, 0.7),
                                              (Lambda2Transform.DIST_FROM_ONE, 1.6),
                                              (Lambda2Transform.MODULUS, 0.5)])
    def test_monte_carlo(self, branch, transform, k, seed):
        v = seed.generator().beta(2.0, 3.0, 200_000)
        lam = branch.sign * (8 * v ** 4 - 8 * v ** 2 + 1)
        mc = np.mean(transform.apply(lam) > k)
        exact = two_region_tail_probability(2.0, 3.0, k, branch, transform)
        assert exact == pytest.approx(mc, abs=0.005)

    def test_decreasing_in_k(self):
        ks = np.linspace(0, 2, 41)
        ps = [two_region_tail_probability(3, 1, k) for k in ks]
        assert all(a >= b - 1e-12 for a, b in zip(ps, ps[1:]))
