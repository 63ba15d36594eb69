"""
Stirring protocols
Measure-preserving maps with known mixing behaviour, and the one-step simulator
that turns them into transition data
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, Optional

import numpy as np

from utils.errors import ConfigurationError, ParameterError
from .rng_dist import SeedSpec
from .ulam import Domain, PartitionSpec, TransitionData, regions_of, wrap

GOLDEN_ROTATION = (math.sqrt(5.0) - 1.0) / 2.0


class ProtocolKind(str, Enum):
    IDENTITY = 'identity'
    ROTATION = 'rotation'
    CAT = 'cat'
    BAKER = 'baker'


@dataclass(frozen=True)
class ProtocolSpec:
    kind: ProtocolKind
    theta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', ProtocolKind(self.kind))
        if self.kind == ProtocolKind.ROTATION:
            if self.theta is None or not math.isfinite(self.theta):
                raise ParameterError(f"Rotation needs a finite angle, got {self.theta}")
        elif self.theta is not None:
            raise ParameterError(f"{self.kind.value} takes no angle")

    @classmethod
    def identity(cls) -> 'ProtocolSpec':
        return cls(ProtocolKind.IDENTITY)

    @classmethod
    def rotation(cls, theta: float) -> 'ProtocolSpec':
        return cls(ProtocolKind.ROTATION, float(theta))

    @classmethod
    def cat(cls) -> 'ProtocolSpec':
        return cls(ProtocolKind.CAT)

    @classmethod
    def baker(cls) -> 'ProtocolSpec':
        return cls(ProtocolKind.BAKER)

    @classmethod
    def parse(cls, text: str) -> 'ProtocolSpec':
        """
        Parse `identity`, `cat`, `baker`, `rotation:THETA`

        THETA is a decimal, a fraction such as `2/16`, or `golden` for (sqrt(5) - 1) / 2.
        """
        name, _, arg = text.strip().lower().partition(':')
        if name == ProtocolKind.ROTATION.value:
            if arg == 'golden':
                return cls.rotation(GOLDEN_ROTATION)
            try:
                return cls.rotation(float(Fraction(arg)))
            except (ValueError, ZeroDivisionError):
                raise ParameterError(f"Bad rotation angle '{arg}' in '{text}'")
        if arg:
            raise ParameterError(f"Protocol '{name}' takes no argument, got '{text}'")
        try:
            return cls(ProtocolKind(name))
        except ValueError:
            raise ParameterError(f"Unknown protocol '{text}' (identity | rotation:THETA | cat | baker)")

    def __str__(self) -> str:
        if self.kind == ProtocolKind.ROTATION:
            return f"rotation:{self.theta!r}"
        return self.kind.value

    @property
    def domains(self) -> FrozenSet[Domain]:
        """Domains the map is defined on; the identity fits any grid"""
        if self.kind == ProtocolKind.IDENTITY:
            return frozenset(Domain)
        if self.kind == ProtocolKind.ROTATION:
            return frozenset({Domain.UNIT_INTERVAL})
        return frozenset({Domain.UNIT_TORUS_2D})


def apply(spec: ProtocolSpec, points) -> np.ndarray:
    """
    One step of the map on a point or an array of points

    Interval points are scalars or an (m,) array, torus points a pair or an
    (m, 2) array; the result has the input's shape.
    """
    points = np.asarray(points, dtype=float)
    if spec.kind == ProtocolKind.IDENTITY:
        return points.copy()
    if spec.kind == ProtocolKind.ROTATION:
        return wrap(points + spec.theta)

    xy = points.reshape(-1, 2)
    x, y = xy[:, 0], xy[:, 1]
    if spec.kind == ProtocolKind.CAT:
        image = np.column_stack([wrap(x + y), wrap(x + 2.0 * y)])
    else:
        doubled = 2.0 * x
        fold = np.floor(doubled)
        image = np.column_stack([wrap(doubled), (y + fold) / 2.0])
    return image.reshape(points.shape)


def _uniform_in(lo: float, width: float, rng: np.random.Generator, size: int) -> np.ndarray:
    # lo + U * width can round up onto the next cell's edge
    x = lo + rng.random(size) * width
    return np.minimum(x, np.nextafter(lo + width, lo))


class ProtocolSimulator:
    """Seeds points uniformly in every region and maps each once"""

    def __init__(self, threads: int = 1):
        self.logger = logging.getLogger('protocols')
        self.threads = max(1, int(threads))

    def _region_points(self, partition: PartitionSpec, region: int, m: int, seed: SeedSpec) -> np.ndarray:
        rng = seed.substream(region).generator()
        if partition.domain == Domain.UNIT_INTERVAL:
            width = 1.0 / partition.dims[0]
            return _uniform_in(region * width, width, rng, m)

        kx, ky = partition.dims
        row, col = divmod(region, kx)
        x = _uniform_in(col / kx, 1.0 / kx, rng, m)
        y = _uniform_in(row / ky, 1.0 / ky, rng, m)
        return np.column_stack([x, y])

    def simulate(self, spec: ProtocolSpec, partition: PartitionSpec, points_per_region: int,
                 seed: SeedSpec) -> TransitionData:
        if points_per_region < 1:
            raise ParameterError(f"points_per_region must be >= 1, got {points_per_region}")
        if partition.domain not in spec.domains:
            raise ConfigurationError(
                f"Protocol '{spec}' is not defined on the {partition.domain.value} domain"
            )

        self.logger.info(
            f"Simulating {spec} on {partition.domain.value} grid {partition.dims} "
            f"with {points_per_region} points per region"
        )

        def work(region: int) -> np.ndarray:
            start = self._region_points(partition, region, points_per_region, seed)
            ends = regions_of(apply(spec, start), partition)
            return np.column_stack([np.full(points_per_region, region, dtype=np.int64), ends])

        if self.threads == 1:
            blocks = [work(r) for r in range(partition.n)]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                blocks = list(pool.map(work, range(partition.n)))

        return TransitionData(np.vstack(blocks), partition.n)


def simulate(spec: ProtocolSpec, partition: PartitionSpec, points_per_region: int,
             seed: SeedSpec, threads: int = 1) -> TransitionData:
    return ProtocolSimulator(threads=threads).simulate(spec, partition, points_per_region, seed)
