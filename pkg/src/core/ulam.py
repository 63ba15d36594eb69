"""
Ulam's method
Equal-measure grid partitions, transition counting and the empirical stochastic matrix
"""

import csv
import logging
from dataclasses import dataclass
from enum import Enum
from typing import IO, Optional, Tuple, Union

import numpy as np

from utils.errors import ConfigurationError, DataError, ParameterError, ParseError, ShapeError
from .rng_dist import SeedSpec

logger = logging.getLogger('ulam')

TRANSITIONS_HEADER = ['start', 'end']


class Domain(str, Enum):
    UNIT_INTERVAL = 'interval'
    UNIT_TORUS_2D = 'torus'


@dataclass(frozen=True)
class PartitionSpec:
    """
    Uniform grid of half-open cells

    On the torus dims = (kx, ky): kx columns along x, ky rows along y, and the
    cell index is row-major, row * kx + col.
    """

    domain: Domain
    dims: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'domain', Domain(self.domain))
        object.__setattr__(self, 'dims', tuple(int(d) for d in self.dims))
        expected = 1 if self.domain == Domain.UNIT_INTERVAL else 2
        if len(self.dims) != expected:
            raise ParameterError(f"{self.domain.value} partition needs {expected} grid dimension(s), got {self.dims}")
        if any(d < 1 for d in self.dims) or self.n < 2:
            raise ParameterError(f"Grid {self.dims} must have at least 2 cells")

    @classmethod
    def interval(cls, k: int) -> 'PartitionSpec':
        return cls(Domain.UNIT_INTERVAL, (k,))

    @classmethod
    def torus(cls, kx: int, ky: int) -> 'PartitionSpec':
        return cls(Domain.UNIT_TORUS_2D, (kx, ky))

    @classmethod
    def parse(cls, text: str) -> 'PartitionSpec':
        """`16` for the interval, `8x8` for the torus"""
        parts = text.lower().replace('×', 'x').split('x')
        try:
            dims = [int(p) for p in parts]
        except ValueError:
            raise ParameterError(f"Bad grid '{text}' (expected K or KxM)")
        if len(dims) == 1:
            return cls.interval(dims[0])
        if len(dims) == 2:
            return cls.torus(dims[0], dims[1])
        raise ParameterError(f"Bad grid '{text}' (expected K or KxM)")

    @property
    def n(self) -> int:
        return int(np.prod(self.dims))

    @property
    def dimension(self) -> int:
        return len(self.dims)


@dataclass(frozen=True, eq=False)
class TransitionData:
    pairs: np.ndarray
    n: int

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        if self.n < 1:
            raise ParameterError(f"Region count must be positive, got {self.n}")
        bad = np.flatnonzero(np.any((pairs < 0) | (pairs >= self.n), axis=1))
        if bad.size:
            row = int(bad[0])
            raise DataError(
                f"Line {row + 1}: region index out of range [0, {self.n}) in pair {pairs[row].tolist()}",
                row=row + 1,
            )
        pairs.setflags(write=False)
        object.__setattr__(self, 'pairs', pairs)

    def __len__(self) -> int:
        return int(self.pairs.shape[0])

    def relabel(self, perm) -> 'TransitionData':
        """Rename region i to perm[i] in both columns"""
        perm = np.asarray(perm, dtype=np.int64)
        return TransitionData(perm[self.pairs], self.n)

    def to_csv(self, stream: IO[str]) -> None:
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(TRANSITIONS_HEADER)
        writer.writerows(self.pairs.tolist())


@dataclass(frozen=True, eq=False)
class EmpiricalStochasticMatrix:
    entries: np.ndarray
    counts: np.ndarray
    points_per_region: np.ndarray

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


def transition_counts(data: TransitionData) -> np.ndarray:
    """counts[i, j] = number of pairs (i, j)"""
    counts = np.zeros((data.n, data.n), dtype=np.int64)
    if len(data):
        np.add.at(counts, (data.pairs[:, 0], data.pairs[:, 1]), 1)
    return counts


def empirical_matrix(counts) -> EmpiricalStochasticMatrix:
    """
    Row-normalize transition counts

    Raises:
        DataError: a region has no starting points; every region must be sampled
    """
    counts = np.asarray(counts)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise ShapeError(f"Counts must be square, got shape {counts.shape}")
    if np.any(counts < 0):
        raise DataError("Counts must be nonnegative")

    totals = counts.sum(axis=1)
    unsampled = np.flatnonzero(totals == 0)
    if unsampled.size:
        region = int(unsampled[0])
        raise DataError(
            f"Region {region} unsampled: no points start there "
            f"({unsampled.size} unsampled region(s) in total)",
            region=region,
        )

    entries = counts / totals[:, None]
    return EmpiricalStochasticMatrix(
        entries=entries,
        counts=counts.astype(np.int64),
        points_per_region=totals.astype(np.int64),
    )


def load_transitions(source: Union[str, IO[str]], n: int) -> TransitionData:
    """
    Parse a `start,end` CSV of 0-based region indices

    Raises:
        ParseError: header, non-integer or out-of-range value; `row` is the
            1-based data row
    """
    if isinstance(source, str):
        with open(source, newline='') as f:
            return load_transitions(f, n)

    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != TRANSITIONS_HEADER:
        raise ParseError(f"Expected header 'start,end', got {header!r}", row=0)

    pairs = []
    for row_number, row in enumerate(reader, start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 2:
            raise ParseError(f"Row {row_number}: expected 2 columns, got {len(row)}", row=row_number)
        try:
            start, end = int(row[0]), int(row[1])
        except ValueError:
            raise ParseError(f"Row {row_number}: non-integer value in {row!r}", row=row_number)
        if not (0 <= start < n and 0 <= end < n):
            raise ParseError(f"Row {row_number}: region index out of range [0, {n}) in {row!r}", row=row_number)
        pairs.append((start, end))

    logger.debug(f"Loaded {len(pairs)} transitions over {n} regions")
    return TransitionData(np.array(pairs, dtype=np.int64).reshape(-1, 2), n)


def load_counts(source: Union[str, IO[str]], n: Optional[int] = None) -> np.ndarray:
    """Read a pre-aggregated n x n count matrix from CSV"""
    if isinstance(source, str):
        with open(source, newline='') as f:
            return load_counts(f, n)

    rows = []
    for row_number, row in enumerate(csv.reader(source), start=1):
        if not row:
            continue
        try:
            values = [float(cell) for cell in row]
        except ValueError:
            raise ParseError(f"Row {row_number}: non-numeric count in {row!r}", row=row_number)
        if not all(v.is_integer() for v in values):
            raise ParseError(f"Row {row_number}: counts must be whole numbers, got {row!r}", row=row_number)
        rows.append([int(v) for v in values])

    counts = np.array(rows, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
        raise ParseError(f"Count matrix must be square, got shape {counts.shape}")
    if n is not None and counts.shape[0] != n:
        raise ConfigurationError(f"Count matrix has {counts.shape[0]} regions, expected {n}")
    return counts


def wrap(x: np.ndarray) -> np.ndarray:
    x = x - np.floor(x)
    # x - floor(x) rounds up to 1.0 for tiny negative x
    return np.where(x >= 1.0, 0.0, x)


def regions_of(points, spec: PartitionSpec) -> np.ndarray:
    """Vectorized region_of for an (m,) or (m, 2) array of points"""
    points = np.asarray(points, dtype=float)
    if spec.domain == Domain.UNIT_INTERVAL:
        x = wrap(points.reshape(-1))
        return np.minimum((x * spec.dims[0]).astype(np.int64), spec.dims[0] - 1)

    points = points.reshape(-1, 2)
    kx, ky = spec.dims
    col = np.minimum((wrap(points[:, 0]) * kx).astype(np.int64), kx - 1)
    row = np.minimum((wrap(points[:, 1]) * ky).astype(np.int64), ky - 1)
    return row * kx + col


def region_of(point, spec: PartitionSpec) -> int:
    """Row-major index of the grid cell holding point (coordinates wrap mod 1)"""
    return int(regions_of(np.asarray(point, dtype=float).reshape(1, spec.dimension), spec)[0])


def multinomial_transitions(p, points_per_region: int, seed: SeedSpec) -> TransitionData:
    """Transition data whose rows are multinomial draws from a known stochastic matrix"""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    if points_per_region < 1:
        raise ParameterError(f"points_per_region must be >= 1, got {points_per_region}")
    pairs = []
    for i in range(n):
        rng = seed.substream(i).generator()
        row = p[i] / p[i].sum()
        counts = rng.multinomial(points_per_region, row)
        ends = np.repeat(np.arange(n), counts)
        pairs.append(np.column_stack([np.full(ends.size, i), ends]))
    return TransitionData(np.vstack(pairs), n)


def stationarity_defect(p: EmpiricalStochasticMatrix) -> float:
    """max_j |((1/n) 1^T P)_j - 1/n|; zero iff the uniform vector is stationary"""
    n = p.n
    return float(np.max(np.abs(p.entries.sum(axis=0) / n - 1.0 / n)))


def frobenius_error(p_hat, p) -> float:
    p_hat = p_hat.entries if isinstance(p_hat, EmpiricalStochasticMatrix) else np.asarray(p_hat)
    return float(np.linalg.norm(p_hat - np.asarray(p), 'fro'))
