"""
Critical Values - Monte Carlo lambda_2 distributions and the c1/c2 thresholds
Draws random Householder-derived unistochastic matrices in parallel substreams
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import IO, Callable, Dict, List, Optional, Tuple

import numpy as np

from utils.errors import ConfigurationError, MixCheckError, ParameterError, ParseError, SamplingError
from .matrices import (
    DEFAULT_MAX_ATTEMPTS,
    PermutationConstraint,
    frobenius_distance,
    householder,
    random_permutation,
    unistochastic_from,
)
from .rng_dist import DistributionSpec, SeedSpec, sample_iid, to_unit_vector
from .spectra import Lambda2Transform, second_eigenvalue

MIN_PARTITION_COUNT = 3
MIN_SAMPLE_SIZE = 100
DEGENERATE_SPREAD = 1e-12
# rounding guard for ceil((1 - alpha) N) and floor(alpha N)
_INDEX_GUARD = 1e-9

# substream keys separating the two null samples of one seed
C1_STREAM = 0
C2_STREAM = 1


@dataclass(frozen=True)
class McConfig:
    n: int
    N: int
    dist: DistributionSpec
    perm_constraint: PermutationConstraint
    seed: SeedSpec

    def __post_init__(self):
        if self.n < MIN_PARTITION_COUNT:
            raise ParameterError(f"Monte Carlo critical values need n >= {MIN_PARTITION_COUNT}, got n={self.n}")
        if self.N < MIN_SAMPLE_SIZE:
            raise ParameterError(f"Monte Carlo sample size N must be >= {MIN_SAMPLE_SIZE}, got N={self.N}")


@dataclass(frozen=True, eq=False)
class Lambda2Sample:
    values: np.ndarray
    config: Optional[McConfig] = None

    def __post_init__(self):
        object.__setattr__(self, 'values', np.asarray(self.values, dtype=complex))

    @property
    def N(self) -> int:
        return int(self.values.size)

    def transformed(self, transform: Lambda2Transform) -> np.ndarray:
        return transform.apply(self.values)

    def to_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['index', 're', 'im', 'modulus', 'dist_from_one'])
        for i, value in enumerate(self.values):
            writer.writerow([i, repr(float(value.real)), repr(float(value.imag)),
                             repr(float(abs(value))), repr(float(abs(value - 1.0)))])


@dataclass(frozen=True)
class ThresholdResult:
    """One critical value with its realized tail mass"""

    value: float
    achieved: float
    tie: bool
    degenerate: bool
    clamped: bool = False
    raw: Optional[float] = None


@dataclass(frozen=True)
class CriticalValues:
    c1: float
    c2: float
    alpha1: float
    alpha2: float
    achieved1: float
    achieved2: float
    clamped: bool
    n: int
    N: int
    dist: DistributionSpec
    c1_constraint: PermutationConstraint
    c2_constraint: PermutationConstraint
    seed: int
    tie1: bool = False
    tie2: bool = False
    degenerate1: bool = False
    degenerate2: bool = False

    @property
    def degenerate(self) -> bool:
        return self.degenerate1 or self.degenerate2

    def to_dict(self) -> Dict:
        return {
            'n': self.n,
            'N': self.N,
            'dist': str(self.dist),
            'perm_constraint': {'c1': str(self.c1_constraint), 'c2': str(self.c2_constraint)},
            'alpha1': self.alpha1,
            'alpha2': self.alpha2,
            'c1': self.c1,
            'c2': self.c2,
            'achieved1': self.achieved1,
            'achieved2': self.achieved2,
            'clamped': self.clamped,
            'seed': self.seed,
            'flags': {
                'tie1': self.tie1,
                'tie2': self.tie2,
                'degenerate1': self.degenerate1,
                'degenerate2': self.degenerate2,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'CriticalValues':
        try:
            perms = data['perm_constraint']
            if isinstance(perms, str):
                perms = {'c1': perms, 'c2': perms}
            flags = data.get('flags', {})
            return cls(
                c1=float(data['c1']),
                c2=float(data['c2']),
                alpha1=float(data['alpha1']),
                alpha2=float(data['alpha2']),
                achieved1=float(data['achieved1']),
                achieved2=float(data['achieved2']),
                clamped=bool(data['clamped']),
                n=int(data['n']),
                N=int(data['N']),
                dist=DistributionSpec.parse(data['dist']),
                c1_constraint=PermutationConstraint.parse(perms['c1']),
                c2_constraint=PermutationConstraint.parse(perms['c2']),
                seed=int(data['seed']),
                tie1=bool(flags.get('tie1', False)),
                tie2=bool(flags.get('tie2', False)),
                degenerate1=bool(flags.get('degenerate1', False)),
                degenerate2=bool(flags.get('degenerate2', False)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Malformed critical values JSON: {e}") from e


def _check_alpha(alpha: float, name: str) -> None:
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"{name} must lie in (0, 1), got {alpha}")


def _is_degenerate(values: np.ndarray) -> bool:
    return bool(np.ptp(values) <= DEGENERATE_SPREAD)


def critical_value_c1(sample: Lambda2Sample, alpha1: float) -> ThresholdResult:
    """
    c1 from the order statistics of d_i = |lambda_2(M_i) - 1|

    c1 = d_(j), j = min(N, ceil((1 - alpha1) N) + 1), so at most alpha1 of the
    sample lies at or beyond c1 when the d_i are distinct.
    """
    _check_alpha(alpha1, 'alpha1')
    d = np.sort(sample.transformed(Lambda2Transform.DIST_FROM_ONE))
    N = d.size
    j = min(N, math.ceil((1.0 - alpha1) * N - _INDEX_GUARD) + 1)
    c1 = float(d[j - 1])
    achieved = float(np.count_nonzero(d >= c1)) / N
    return ThresholdResult(
        value=c1,
        achieved=achieved,
        tie=achieved > alpha1,
        degenerate=_is_degenerate(d),
    )


def critical_value_c2(sample: Lambda2Sample, alpha2: float, c1: float) -> ThresholdResult:
    """
    c2 from the order statistics of m_i = |lambda_2(M_i)|

    c2 = m_(k), k = max(1, floor(alpha2 N)), then clamped to 1 - c1 so the
    decision regions stay disjoint.
    """
    _check_alpha(alpha2, 'alpha2')
    m = np.sort(sample.transformed(Lambda2Transform.MODULUS))
    N = m.size
    k = max(1, math.floor(alpha2 * N + _INDEX_GUARD))
    raw = float(m[k - 1])
    c2 = min(raw, 1.0 - c1)
    achieved = float(np.count_nonzero(m <= c2)) / N
    return ThresholdResult(
        value=c2,
        achieved=achieved,
        tie=achieved > alpha2,
        degenerate=_is_degenerate(m),
        clamped=raw > 1.0 - c1,
        raw=raw,
    )


def ecdf(sample: Lambda2Sample, transform: Lambda2Transform) -> List[Tuple[float, float]]:
    """Right-continuous empirical CDF of the transformed sample"""
    x = sample.transformed(transform)
    if x.size == 0:
        raise ParameterError("ECDF of an empty sample")
    values, counts = np.unique(x, return_counts=True)
    cumulative = np.cumsum(counts) / x.size
    return [(float(v), float(p)) for v, p in zip(values, cumulative)]


def write_ecdf_csv(points: List[Tuple[float, float]], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['value', 'cumulative_probability'])
    for value, p in points:
        writer.writerow([repr(value), repr(p)])


@dataclass(frozen=True, eq=False)
class NullSamples:
    """The c1 (ergodic null) and c2 (weak-mixing boundary) Monte Carlo samples"""

    c1: Lambda2Sample
    c2: Lambda2Sample

    def to_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['null', 'index', 're', 'im', 'modulus', 'dist_from_one'])
        for label, sample in (('c1', self.c1), ('c2', self.c2)):
            for i, value in enumerate(sample.values):
                writer.writerow([label, i, repr(float(value.real)), repr(float(value.imag)),
                                 repr(float(abs(value))), repr(float(abs(value - 1.0)))])

    def ecdf_csv(self, stream: IO[str]) -> None:
        """ECDF of |lambda_2 - 1| for the c1 sample and of |lambda_2| for the c2 sample"""
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(['null', 'transform', 'value', 'cumulative_probability'])
        for label, sample, transform in (('c1', self.c1, Lambda2Transform.DIST_FROM_ONE),
                                         ('c2', self.c2, Lambda2Transform.MODULUS)):
            for value, p in ecdf(sample, transform):
                writer.writerow([label, transform.value, repr(value), repr(p)])


class CriticalValueEstimator:
    """Runs the Monte Carlo draws behind c1 and c2"""

    def __init__(self, threads: int = 1, max_permutation_attempts: int = DEFAULT_MAX_ATTEMPTS):
        self.logger = logging.getLogger('critical_values')
        self.threads = max(1, int(threads))
        self.max_permutation_attempts = max_permutation_attempts

    def _draw_matrix(self, config: McConfig, index: int):
        u = sample_iid(config.dist, config.n, config.seed.substream(index, 0))
        h = householder(to_unit_vector(u))
        q = random_permutation(config.n, config.perm_constraint, config.seed.substream(index, 1),
                               max_attempts=self.max_permutation_attempts)
        return q, unistochastic_from(q, h)

    def _run(self, config: McConfig, statistic: Callable, dtype) -> np.ndarray:
        def work(index: int):
            try:
                q, m = self._draw_matrix(config, index)
                return statistic(q, m)
            except MixCheckError as e:
                raise SamplingError(f"Monte Carlo draw {index} failed: {e}", index=index) from e

        if self.threads == 1:
            results = [work(i) for i in range(config.N)]
        else:
            # map keeps index order, and each draw owns its substream
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(work, range(config.N)))
        return np.asarray(results, dtype=dtype)

    def sample_lambda2(self, config: McConfig) -> Lambda2Sample:
        self.logger.info(
            f"Sampling {config.N} matrices (n={config.n}, dist={config.dist}, "
            f"perm={config.perm_constraint}, threads={self.threads})"
        )
        values = self._run(config, lambda q, m: second_eigenvalue(m.entries).value, complex)
        values.setflags(write=False)
        return Lambda2Sample(values=values, config=config)

    def sample_frobenius_distances(self, config: McConfig, squared: bool = False) -> np.ndarray:
        """||M_i - Q_i||_F for every draw"""
        distances = self._run(config, lambda q, m: frobenius_distance(m.entries, q), float)
        return distances ** 2 if squared else distances

    def establish(self, n: int, N: int, dist: DistributionSpec, alpha1: float, alpha2: float,
                  seed: SeedSpec,
                  c1_constraint: Optional[PermutationConstraint] = None,
                  c2_constraint: Optional[PermutationConstraint] = None) -> CriticalValues:
        """
        c1 from an ergodic-null sample, c2 from a weak-mixing-boundary sample

        The two samples come from separate substreams of the same seed. The c1
        null defaults to Q = I, whose eigenvalue 1 has full multiplicity, so
        lambda_2 of the perturbed matrix stays next to 1. A uniform min-cycles:2
        draw lets lambda_2 land near any root of unity instead.
        """
        cv, _ = self.estimate(n, N, dist, alpha1, alpha2, seed, c1_constraint, c2_constraint)
        return cv

    def estimate(self, n: int, N: int, dist: DistributionSpec, alpha1: float, alpha2: float,
                 seed: SeedSpec,
                 c1_constraint: Optional[PermutationConstraint] = None,
                 c2_constraint: Optional[PermutationConstraint] = None) -> Tuple[CriticalValues, NullSamples]:
        """Same as establish, also returning the two samples behind it"""
        _check_alpha(alpha1, 'alpha1')
        _check_alpha(alpha2, 'alpha2')
        c1_constraint = c1_constraint or PermutationConstraint.identity()
        c2_constraint = c2_constraint or PermutationConstraint.any()

        sample1 = self.sample_lambda2(McConfig(n, N, dist, c1_constraint, seed.substream(C1_STREAM)))
        sample2 = self.sample_lambda2(McConfig(n, N, dist, c2_constraint, seed.substream(C2_STREAM)))

        r1 = critical_value_c1(sample1, alpha1)
        if not 0.0 < r1.value < 1.0 - DEGENERATE_SPREAD:
            raise ConfigurationError(
                f"c1={r1.value:.6g} leaves no room for the weak-mixing disk; the c1 sample "
                f"({c1_constraint}) does not concentrate lambda_2 near 1"
            )
        r2 = critical_value_c2(sample2, alpha2, r1.value)

        if r1.degenerate or r2.degenerate:
            self.logger.warning("Monte Carlo sample is degenerate (all statistics identical)")
        if r2.clamped:
            self.logger.warning(f"c2 clamped from {r2.raw} to 1 - c1 = {r2.value}")

        self.logger.info(f"c1={r1.value:.6g} (achieved {r1.achieved:.4g}), "
                         f"c2={r2.value:.6g} (achieved {r2.achieved:.4g})")

        cv = CriticalValues(
            c1=r1.value,
            c2=r2.value,
            alpha1=alpha1,
            alpha2=alpha2,
            achieved1=r1.achieved,
            achieved2=r2.achieved,
            clamped=r2.clamped,
            n=n,
            N=N,
            dist=dist,
            c1_constraint=c1_constraint,
            c2_constraint=c2_constraint,
            seed=seed.master_seed,
            tie1=r1.tie,
            tie2=r2.tie,
            degenerate1=r1.degenerate,
            degenerate2=r2.degenerate,
        )
        return cv, NullSamples(c1=sample1, c2=sample2)


def sample_lambda2(config: McConfig, threads: int = 1) -> Lambda2Sample:
    return CriticalValueEstimator(threads=threads).sample_lambda2(config)


def establish_critical_values(n: int, N: int, dist: DistributionSpec, alpha1: float, alpha2: float,
                              seed: SeedSpec,
                              c1_constraint: Optional[PermutationConstraint] = None,
                              c2_constraint: Optional[PermutationConstraint] = None,
                              threads: int = 1) -> CriticalValues:
    return CriticalValueEstimator(threads=threads).establish(
        n, N, dist, alpha1, alpha2, seed, c1_constraint, c2_constraint
    )
