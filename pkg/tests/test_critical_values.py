import io
import json

import numpy as np
import pytest

from core.critical_values import (
    CriticalValueEstimator,
    CriticalValues,
    Lambda2Sample,
    McConfig,
    critical_value_c1,
    critical_value_c2,
    ecdf,
    establish_critical_values,
    sample_lambda2,
    write_ecdf_csv,
)
from core.matrices import PermutationConstraint
from core.rng_dist import DistributionSpec, SeedSpec
from core.spectra import Lambda2Transform
from utils.errors import ConfigurationError, ParameterError, ParseError, SamplingError


def _sample_from_distances(d) -> Lambda2Sample:
    """lambda_2 = 1 - d puts |lambda_2 - 1| exactly at d"""
    return Lambda2Sample(1.0 - np.asarray(d, dtype=float))


class TestMcConfig:
    def test_n_too_small(self, seed):
        with pytest.raises(ParameterError):
            McConfig(2, 1000, DistributionSpec.normal(), PermutationConstraint.any(), seed)

    def test_N_too_small(self, seed):
        with pytest.raises(ParameterError):
            McConfig(4, 50, DistributionSpec.normal(), PermutationConstraint.any(), seed)


class TestSampling:
    def test_constant_vector_identity_perms(self, seed):
        config = McConfig(4, 100, DistributionSpec.constant(1), PermutationConstraint.identity(), seed)
        sample = sample_lambda2(config)
        assert sample.N == 100
        np.testing.assert_allclose(np.abs(sample.values), 0.0, atol=1e-12)

    def test_inside_unit_disk(self, seed):
        config = McConfig(3, 1000, DistributionSpec.normal(), PermutationConstraint.any(), seed)
        sample = sample_lambda2(config)
        assert np.all(np.abs(sample.values) < 1.0)

    def test_thread_count_does_not_change_sample(self, seed):
        config = McConfig(6, 300, DistributionSpec.normal(), PermutationConstraint.min_cycles(2), seed)
        one = sample_lambda2(config, threads=1).values
        many = sample_lambda2(config, threads=8).values
        assert one.tobytes() == many.tobytes()

    def test_seeds_differ(self):
        dist, perm = DistributionSpec.normal(), PermutationConstraint.any()
        a = sample_lambda2(McConfig(5, 100, dist, perm, SeedSpec(1))).values
        b = sample_lambda2(McConfig(5, 100, dist, perm, SeedSpec(2))).values
        assert not np.array_equal(a, b)

    def test_failed_draw_reports_index(self, seed):
        estimator = CriticalValueEstimator(max_permutation_attempts=1)
        config = McConfig(10, 100, DistributionSpec.normal(), PermutationConstraint.min_cycles(10), seed)
        with pytest.raises(SamplingError) as excinfo:
            estimator.sample_lambda2(config)
        assert excinfo.value.index == 0

    def test_frobenius_distances(self, seed):
        config = McConfig(5, 200, DistributionSpec.normal(), PermutationConstraint.identity(), seed)
        estimator = CriticalValueEstimator()
        d = estimator.sample_frobenius_distances(config)
        np.testing.assert_allclose(estimator.sample_frobenius_distances(config, squared=True), d ** 2)
        assert np.all(d >= 0)


class TestC1:
    def test_hand_enumeration(self):
        r = critical_value_c1(_sample_from_distances(np.arange(10) / 10), 0.25)
        assert r.value == pytest.approx(0.8)
        assert r.achieved == pytest.approx(0.2)
        assert not r.tie

    def test_all_at_one_is_degenerate(self):
        r = critical_value_c1(Lambda2Sample(np.ones(100)), 0.05)
        assert r.value == 0.0
        assert r.degenerate
        assert r.tie

    def test_achieved_within_alpha_for_distinct_values(self):
        r = critical_value_c1(_sample_from_distances(np.linspace(0, 0.99, 100)), 0.5)
        assert r.achieved <= 0.5

    def test_nonincreasing_in_alpha(self, seed):
        config = McConfig(5, 500, DistributionSpec.normal(), PermutationConstraint.min_cycles(2), seed)
        sample = sample_lambda2(config)
        values = [critical_value_c1(sample, a).value for a in np.linspace(0.01, 0.5, 25)]
        assert all(x >= y for x, y in zip(values, values[1:]))

    @pytest.mark.parametrize('alpha', [0.0, 1.0, -0.1])
    def test_bad_alpha(self, alpha):
        with pytest.raises(ParameterError):
            critical_value_c1(_sample_from_distances([0.1, 0.2]), alpha)


class TestC2:
    def test_hand_enumeration(self):
        m = np.arange(10) / 10 + 0.05
        r = critical_value_c2(Lambda2Sample(m), 0.2, c1=0.1)
        assert r.value == pytest.approx(0.15)
        assert r.raw == pytest.approx(0.15)
        assert not r.clamped

    def test_clamped(self):
        r = critical_value_c2(Lambda2Sample(np.full(10, 0.95)), 0.2, c1=0.3)
        assert r.value == pytest.approx(0.7)
        assert r.clamped

    def test_all_on_unit_circle(self):
        r = critical_value_c2(Lambda2Sample(np.tile([1.0, -1.0, 1j], 40)), 0.05, c1=0.0)
        assert r.value == pytest.approx(1.0)
        assert r.achieved == pytest.approx(1.0)
        assert r.degenerate

    def test_nondecreasing_in_alpha(self, seed):
        config = McConfig(5, 500, DistributionSpec.normal(), PermutationConstraint.any(), seed)
        sample = sample_lambda2(config)
        values = [critical_value_c2(sample, a, c1=0.0).value for a in np.linspace(0.01, 0.5, 25)]
        assert all(x <= y for x, y in zip(values, values[1:]))


class TestEcdf:
    def test_single_value(self):
        assert ecdf(Lambda2Sample([0.5]), Lambda2Transform.MODULUS) == [(0.5, 1.0)]

    def test_two_values(self):
        assert ecdf(Lambda2Sample([0.4, 0.2]), Lambda2Transform.MODULUS) == [(0.2, 0.5), (0.4, 1.0)]

    def test_ties_collapse(self):
        points = ecdf(Lambda2Sample([0.3, 0.3, 0.1, 0.3]), Lambda2Transform.MODULUS)
        assert points == [(0.1, 0.25), (0.3, 1.0)]

    def test_empty(self):
        with pytest.raises(ParameterError):
            ecdf(Lambda2Sample([]), Lambda2Transform.MODULUS)

    def test_csv(self):
        buffer = io.StringIO()
        write_ecdf_csv([(0.2, 0.5), (0.4, 1.0)], buffer)
        assert buffer.getvalue() == 'value,cumulative_probability\n0.2,0.5\n0.4,1.0\n'


class TestEstablish:
    def test_regions_disjoint_and_levels(self, seed):
        cv = establish_critical_values(16, 500, DistributionSpec.normal(), 0.05, 0.05, seed)
        assert 0.0 < cv.c1 < 1.0 and 0.0 < cv.c2 < 1.0
        assert cv.c2 <= 1.0 - cv.c1
        assert cv.achieved1 <= 0.05 + 1e-12
        assert cv.c1_constraint == PermutationConstraint.identity()
        assert cv.c2_constraint == PermutationConstraint.any()

    def test_thread_count_does_not_change_result(self, seed):
        args = (16, 300, DistributionSpec.gamma(2, 1), 0.1, 0.1, seed)
        one = CriticalValueEstimator(threads=1).establish(*args)
        many = CriticalValueEstimator(threads=4).establish(*args)
        assert json.dumps(one.to_dict()) == json.dumps(many.to_dict())

    def test_estimate_returns_samples(self, seed):
        cv, nulls = CriticalValueEstimator().estimate(16, 100, DistributionSpec.normal(), 0.05, 0.05, seed)
        assert nulls.c1.N == nulls.c2.N == 100
        assert cv.c1 == critical_value_c1(nulls.c1, 0.05).value

        buffer = io.StringIO()
        nulls.ecdf_csv(buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == 'null,transform,value,cumulative_probability'
        assert lines[-1].startswith('c2,modulus,')

    def test_degenerate_constant_sample(self, seed):
        cv = establish_critical_values(5, 100, DistributionSpec.constant(1), 0.05, 0.05, seed,
                                       c1_constraint=PermutationConstraint.identity(),
                                       c2_constraint=PermutationConstraint.identity())
        assert cv.degenerate
        # M = 0.2 I + 0.16 J, so lambda_2 = 0.2 for every draw
        assert cv.c1 == pytest.approx(0.8)
        assert cv.c2 == pytest.approx(0.2)

    def test_refuses_c1_without_room_for_center_disk(self, seed):
        # n=4 constant vector gives M = J/4, lambda_2 = 0 and c1 = 1
        with pytest.raises(ConfigurationError):
            establish_critical_values(4, 100, DistributionSpec.constant(1), 0.05, 0.05, seed,
                                      c1_constraint=PermutationConstraint.identity())

    def test_refuses_min_cycles_null_that_spreads(self, seed):
        with pytest.raises(ConfigurationError, match="min-cycles:2"):
            establish_critical_values(16, 500, DistributionSpec.normal(), 0.05, 0.05, seed,
                                      c1_constraint=PermutationConstraint.min_cycles(2))

    @pytest.mark.parametrize("n", [16, 64])
    def test_default_null_concentrates_near_one(self, n):
        cv = establish_critical_values(n, 500, DistributionSpec.normal(), 0.05, 0.05, SeedSpec(n))
        assert cv.c1 < 0.1
        assert cv.c2 > 0.5
        assert not cv.clamped


class TestSerialization:
    def test_dict_round_trip(self, make_cv):
        cv = make_cv(n=8, clamped=True, tie2=True)
        assert CriticalValues.from_dict(json.loads(json.dumps(cv.to_dict()))) == cv

    def test_json_fields(self, make_cv):
        data = make_cv().to_dict()
        for key in ('n', 'N', 'dist', 'perm_constraint', 'alpha1', 'alpha2', 'c1', 'c2',
                    'achieved1', 'achieved2', 'clamped', 'seed'):
            assert key in data
        assert data['perm_constraint'] == {'c1': 'identity', 'c2': 'any'}

    def test_malformed(self, make_cv):
        data = make_cv().to_dict()
        del data['c1']
        with pytest.raises(ParseError):
            CriticalValues.from_dict(data)

    def test_sample_csv(self):
        buffer = io.StringIO()
        Lambda2Sample([0.5 + 0.5j]).to_csv(buffer)
        header, row = buffer.getvalue().splitlines()
        assert header == 'index,re,im,modulus,dist_from_one'
        assert row.startswith('0,0.5,0.5,')
