"""
Householder, permutation and unistochastic matrices
Builds M = (Q H) squared entrywise, keeping U = Q H as its witness
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import IO, Optional

import numpy as np

from utils.errors import ParameterError, SamplingError, ShapeError
from .rng_dist import SeedSpec, UnitVector

logger = logging.getLogger('matrices')

DEFAULT_MAX_ATTEMPTS = 100000


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HouseholderMatrix:
    generator: UnitVector
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.generator.n


@dataclass(frozen=True, eq=False)
class PermutationMatrix:
    """Row i of Q has its single 1 in column perm[i]"""

    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        n = perm.size
        if perm.ndim != 1 or n < 1 or not np.array_equal(np.sort(perm), np.arange(n)):
            raise ParameterError(f"Not a permutation of 0..{n - 1}: {perm.tolist()}")
        object.__setattr__(self, 'perm', _frozen(perm))

    @classmethod
    def identity(cls, n: int) -> 'PermutationMatrix':
        return cls(np.arange(n))

    @classmethod
    def shift(cls, n: int, k: int) -> 'PermutationMatrix':
        """Region i goes to region (i + k) mod n"""
        return cls((np.arange(n) + k) % n)

    @property
    def dim(self) -> int:
        return int(self.perm.size)

    @property
    def cycle_count(self) -> int:
        return cycle_count(self.perm)

    def dense(self) -> np.ndarray:
        q = np.zeros((self.dim, self.dim))
        q[np.arange(self.dim), self.perm] = 1.0
        return q

    def apply_rows(self, a: np.ndarray) -> np.ndarray:
        """Q @ a without materializing Q"""
        return a[self.perm, :]


@dataclass(frozen=True, eq=False)
class UnistochasticMatrix:
    entries: np.ndarray
    witness: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def row_sum_deviation(self) -> float:
        return float(np.max(np.abs(self.entries.sum(axis=1) - 1.0)))

    def column_sum_deviation(self) -> float:
        return float(np.max(np.abs(self.entries.sum(axis=0) - 1.0)))


class ConstraintKind(str, Enum):
    ANY = 'any'
    MIN_CYCLES = 'min-cycles'
    IDENTITY = 'identity'


@dataclass(frozen=True)
class PermutationConstraint:
    kind: ConstraintKind = ConstraintKind.ANY
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'kind', ConstraintKind(self.kind))
        if self.kind == ConstraintKind.MIN_CYCLES and self.k < 1:
            raise ParameterError(f"min-cycles needs k >= 1, got {self.k}")

    @classmethod
    def any(cls) -> 'PermutationConstraint':
        return cls(ConstraintKind.ANY)

    @classmethod
    def min_cycles(cls, k: int) -> 'PermutationConstraint':
        return cls(ConstraintKind.MIN_CYCLES, int(k))

    @classmethod
    def identity(cls) -> 'PermutationConstraint':
        return cls(ConstraintKind.IDENTITY)

    @classmethod
    def parse(cls, text: str) -> 'PermutationConstraint':
        name, _, arg = text.strip().lower().partition(':')
        if name == ConstraintKind.ANY.value and not arg:
            return cls.any()
        if name == ConstraintKind.IDENTITY.value and not arg:
            return cls.identity()
        if name == ConstraintKind.MIN_CYCLES.value:
            try:
                return cls.min_cycles(int(arg))
            except ValueError:
                pass
        raise ParameterError(f"Unknown permutation constraint '{text}' (any | min-cycles:K | identity)")

    def __str__(self) -> str:
        if self.kind == ConstraintKind.MIN_CYCLES:
            return f"{self.kind.value}:{self.k}"
        return self.kind.value


def cycle_count(perm: np.ndarray) -> int:
    seen = np.zeros(len(perm), dtype=bool)
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return cycles


def householder(v: UnitVector) -> HouseholderMatrix:
    """H = I - 2 v v^T"""
    e = v.entries
    h = np.eye(v.n) - 2.0 * np.outer(e, e)
    return HouseholderMatrix(generator=v, entries=_frozen(h))


def random_permutation(n: int, constraint: PermutationConstraint, seed: SeedSpec,
                       max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> PermutationMatrix:
    """
    Uniform permutation of n elements subject to a cycle constraint

    MinCycles(k) rejects uniform draws with fewer than k cycles, which keeps
    the result exactly uniform over the constrained set.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if constraint.kind == ConstraintKind.IDENTITY:
        return PermutationMatrix.identity(n)
    if constraint.kind == ConstraintKind.ANY:
        return PermutationMatrix(seed.generator().permutation(n))

    if constraint.k > n:
        raise ParameterError(f"min-cycles:{constraint.k} impossible for n={n}")

    rng = seed.generator()
    for _ in range(max_attempts):
        perm = rng.permutation(n)
        if cycle_count(perm) >= constraint.k:
            return PermutationMatrix(perm)
    raise SamplingError(
        f"No permutation with >= {constraint.k} cycles after {max_attempts} attempts (n={n})"
    )


def unistochastic_from(q: PermutationMatrix, h: HouseholderMatrix) -> UnistochasticMatrix:
    """Entrywise square of Q H"""
    if q.dim != h.dim:
        raise ShapeError(f"Permutation is {q.dim}x{q.dim} but Householder matrix is {h.dim}x{h.dim}")
    u = q.apply_rows(h.entries).copy()
    return UnistochasticMatrix(entries=_frozen(u * u), witness=_frozen(u))


def equal_components_matrix(n: int) -> UnistochasticMatrix:
    """Matrix from u_1 = ... = u_n: witness I - (2/n) ones, entries ((n-4)/n) I + (4/n^2) ones"""
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    w = np.eye(n) - (2.0 / n) * np.ones((n, n))
    return UnistochasticMatrix(entries=_frozen(w * w), witness=_frozen(w))


def frobenius_distance(m: np.ndarray, q: Optional[PermutationMatrix] = None) -> float:
    """||M - Q||_F, with Q = I when omitted"""
    m = np.asarray(m, dtype=float)
    target = np.eye(m.shape[0]) if q is None else q.dense()
    if target.shape != m.shape:
        raise ShapeError(f"Shapes differ: {m.shape} vs {target.shape}")
    return float(np.linalg.norm(m - target, 'fro'))


def save_matrix_csv(entries: np.ndarray, stream: IO[str]) -> None:
    """Row-major CSV with round-trip precision"""
    np.savetxt(stream, np.asarray(entries), delimiter=',', fmt='%.17g')
