"""
Random variables for the Monte Carlo construction
Distribution specs, seeded substreams, i.i.d. sampling and moment bookkeeping
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np
from scipy.special import betaln, gammaln

from utils.errors import DomainError, ParameterError

logger = logging.getLogger('rng_dist')

UNIT_NORM_TOLERANCE = 1e-12
MAX_ZERO_REDRAWS = 1000


class DistributionKind(str, Enum):
    NORMAL = 'normal'
    GAMMA = 'gamma'
    BETA = 'beta'
    UNIFORM = 'uniform'
    CONSTANT = 'const'


# number of parameters each kind takes in the CLI grammar
_ARITY = {
    DistributionKind.NORMAL: 0,
    DistributionKind.GAMMA: 2,
    DistributionKind.BETA: 2,
    DistributionKind.UNIFORM: 2,
    DistributionKind.CONSTANT: 1,
}


@dataclass(frozen=True)
class DistributionSpec:
    """One of the i.i.d. laws used to build the vector u"""

    kind: DistributionKind
    params: Tuple[float, ...] = ()

    def __post_init__(self):
        kind = DistributionKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'params', tuple(float(p) for p in self.params))

        if len(self.params) != _ARITY[kind]:
            raise ParameterError(
                f"{kind.value} takes {_ARITY[kind]} parameter(s), got {len(self.params)}"
            )
        if any(not math.isfinite(p) for p in self.params):
            raise ParameterError(f"{kind.value} parameters must be finite: {self.params}")

        if kind in (DistributionKind.GAMMA, DistributionKind.BETA):
            a, b = self.params
            if a <= 0 or b <= 0:
                raise ParameterError(f"{kind.value} needs alpha > 0 and beta > 0, got {a}, {b}")
        elif kind == DistributionKind.UNIFORM:
            a, b = self.params
            if not a < b:
                raise ParameterError(f"uniform needs a < b, got {a}, {b}")
        elif kind == DistributionKind.CONSTANT:
            if self.params[0] == 0:
                raise ParameterError("const distribution requires c != 0")

    @classmethod
    def normal(cls) -> 'DistributionSpec':
        return cls(DistributionKind.NORMAL)

    @classmethod
    def gamma(cls, alpha: float, beta: float = 1.0) -> 'DistributionSpec':
        return cls(DistributionKind.GAMMA, (alpha, beta))

    @classmethod
    def beta(cls, alpha: float, beta: float) -> 'DistributionSpec':
        return cls(DistributionKind.BETA, (alpha, beta))

    @classmethod
    def uniform(cls, a: float, b: float) -> 'DistributionSpec':
        return cls(DistributionKind.UNIFORM, (a, b))

    @classmethod
    def constant(cls, c: float) -> 'DistributionSpec':
        return cls(DistributionKind.CONSTANT, (c,))

    @classmethod
    def parse(cls, text: str) -> 'DistributionSpec':
        """
        Parse the CLI grammar

        Args:
            text: One of normal, gamma:A,B, beta:A,B, uniform:A,B, const:C
        """
        name, _, args = text.strip().partition(':')
        try:
            kind = DistributionKind(name.strip().lower())
        except ValueError:
            raise ParameterError(f"Unknown distribution '{name}'")

        params: Tuple[float, ...] = ()
        if args.strip():
            try:
                params = tuple(float(a) for a in args.split(','))
            except ValueError:
                raise ParameterError(f"Non-numeric distribution parameters in '{text}'")
        return cls(kind, params)

    def __str__(self) -> str:
        if not self.params:
            return self.kind.value
        return f"{self.kind.value}:" + ','.join(repr(p) for p in self.params)


@dataclass(frozen=True)
class MomentSet:
    """E(u^4), E(u^8), E(1/u^4), E(1/u^8); math.inf marks a divergent moment"""

    m4: float
    m8: float
    im4: float
    im8: float

    @property
    def all_finite(self) -> bool:
        return all(math.isfinite(m) for m in (self.m4, self.m8, self.im4, self.im8))


@dataclass(frozen=True, eq=False)
class UnitVector:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 1 or entries.size < 2:
            raise DomainError(f"UnitVector needs a 1-D vector of length >= 2, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("UnitVector entries must be finite")
        norm = np.linalg.norm(entries)
        if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            raise DomainError(f"UnitVector norm is {norm!r}, expected 1")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def n(self) -> int:
        return int(self.entries.size)


@dataclass(frozen=True)
class SeedSpec:
    """
    Seed of a reproducible random stream

    (master_seed, stream_index, spawn_key) maps to one numpy SeedSequence, so a
    given draw sees the same numbers no matter which thread computes it.
    """

    master_seed: int
    stream_index: int = 0
    spawn_key: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if int(self.stream_index) < 0:
            raise ParameterError(f"stream_index must be >= 0, got {self.stream_index}")

    def substream(self, *keys: int) -> 'SeedSpec':
        return SeedSpec(self.master_seed, self.stream_index, self.spawn_key + tuple(int(k) for k in keys))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=[int(self.master_seed), int(self.stream_index)],
            spawn_key=self.spawn_key,
        )

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.sequence())


def draw(dist: DistributionSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw `size` nonzero values from dist using an existing generator"""
    kind = dist.kind
    p = dist.params

    def _raw(k: int) -> np.ndarray:
        if kind == DistributionKind.NORMAL:
            return rng.standard_normal(k)
        if kind == DistributionKind.GAMMA:
            return rng.gamma(p[0], p[1], k)
        if kind == DistributionKind.BETA:
            return rng.beta(p[0], p[1], k)
        if kind == DistributionKind.UNIFORM:
            return rng.uniform(p[0], p[1], k)
        return np.full(k, p[0])

    values = _raw(size)
    for _ in range(MAX_ZERO_REDRAWS):
        zeros = np.flatnonzero(values == 0.0)
        if zeros.size == 0:
            return values
        logger.debug(f"Redrawing {zeros.size} exact zero(s) from {dist}")
        values[zeros] = _raw(zeros.size)
    raise ParameterError(f"{dist} keeps producing exact zeros")


def sample_iid(dist: DistributionSpec, n: int, seed: SeedSpec) -> np.ndarray:
    """
    n i.i.d. draws from dist, none exactly zero

    Args:
        dist: Distribution of each u_i
        n: Vector length (>= 2)
        seed: Stream the draws come from

    Returns:
        np.ndarray: Length-n real vector
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    return draw(dist, seed.generator(), n)


def to_unit_vector(u) -> UnitVector:
    """Scale u to Euclidean norm 1"""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("Cannot normalize a vector with non-finite entries")
    scale = np.max(np.abs(u)) if u.size else 0.0
    if scale == 0.0:
        raise DomainError("Cannot normalize the zero vector")
    # pre-scaling keeps the norm from overflowing for large draws
    w = u / scale
    return UnitVector(w / np.linalg.norm(w))


def _gamma_moment(alpha: float, scale: float, k: int) -> float:
    if alpha + k <= 0:
        return math.inf
    return math.exp(k * math.log(scale) + gammaln(alpha + k) - gammaln(alpha))


def _beta_moment(a: float, b: float, k: int) -> float:
    if a + k <= 0:
        return math.inf
    return math.exp(betaln(a + k, b) - betaln(a, b))


def _uniform_moment(a: float, b: float, k: int) -> float:
    if k < 0 and a <= 0.0 <= b:
        return math.inf
    return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))


def moments(dist: DistributionSpec) -> MomentSet:
    """
    Closed-form E(u^4), E(u^8), E(u^-4), E(u^-8)

    Divergent or unknown moments come back as math.inf so the Frobenius bound
    refuses them instead of returning a number that does not hold.
    """
    kind = dist.kind
    p = dist.params

    if kind == DistributionKind.CONSTANT:
        c = p[0]
        return MomentSet(c ** 4, c ** 8, c ** -4, c ** -8)

    if kind == DistributionKind.NORMAL:
        return MomentSet(3.0, 105.0, math.inf, math.inf)

    if kind == DistributionKind.GAMMA:
        a, scale = p
        return MomentSet(*(_gamma_moment(a, scale, k) for k in (4, 8, -4, -8)))

    if kind == DistributionKind.BETA:
        a, b = p
        return MomentSet(*(_beta_moment(a, b, k) for k in (4, 8, -4, -8)))

    if kind == DistributionKind.UNIFORM:
        a, b = p
        return MomentSet(*(_uniform_moment(a, b, k) for k in (4, 8, -4, -8)))

    return MomentSet(math.inf, math.inf, math.inf, math.inf)
