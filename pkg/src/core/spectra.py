"""
Spectra of real square matrices
Dense nonsymmetric eigensolve and the second-eigenvalue test statistic
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from utils.errors import DomainError, NumericalError

logger = logging.getLogger('spectra')

ROW_SUM_TOLERANCE = 1e-6
# moduli, then real parts, closer than this count as ties so rounding noise
# in a computed spectrum cannot decide the tie break
TIE_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted by modulus, then real part, then imaginary part (all descending)"""

    eigenvalues: np.ndarray

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)


@dataclass(frozen=True)
class Lambda2:
    value: complex
    modulus: float
    gap: float

    @classmethod
    def from_value(cls, value: complex) -> 'Lambda2':
        value = complex(value)
        modulus = abs(value)
        return cls(value=value, modulus=modulus, gap=1.0 - modulus)

    @property
    def distance_from_one(self) -> float:
        return abs(self.value - 1.0)


class Lambda2Transform(str, Enum):
    DIST_FROM_ONE = 'dist-from-one'
    MODULUS = 'modulus'

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=complex)
        if self == Lambda2Transform.DIST_FROM_ONE:
            return np.abs(values - 1.0)
        return np.abs(values)


def _sort_spectrum(values: np.ndarray) -> np.ndarray:
    order = np.lexsort((-values.imag, -values.real, -np.abs(values)))
    return values[order]


def eigenvalues(a) -> Spectrum:
    """
    All eigenvalues of a real square matrix

    LAPACK geev balances the matrix before the QR iteration.

    Raises:
        DomainError: non-square or non-finite input
        NumericalError: the iteration did not converge
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DomainError(f"Expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("Matrix has non-finite entries")

    try:
        values = scipy.linalg.eig(a, right=False, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NumericalError(
            f"Eigensolver did not converge: {e}",
            diagnostics={'n': a.shape[0], 'frobenius_norm': float(np.linalg.norm(a))},
        ) from e

    return Spectrum(eigenvalues=_sort_spectrum(np.asarray(values, dtype=complex)))


def second_eigenvalue(a) -> Lambda2:
    """
    Largest-modulus eigenvalue left after removing the one nearest 1

    Exactly one eigenvalue is removed, so a repeated eigenvalue 1 comes back
    as lambda_2 = 1. Modulus ties go to the larger real part, then the larger
    imaginary part.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"Expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n < 2:
        raise DomainError(f"lambda_2 needs n >= 2, got n={n}")

    deviation = np.abs(a.sum(axis=1) - 1.0)
    worst = int(np.argmax(deviation))
    if deviation[worst] > ROW_SUM_TOLERANCE:
        raise DomainError(
            f"Not a stochastic matrix: row {worst} sums to {a[worst].sum()!r}"
        )

    values = eigenvalues(a).eigenvalues
    rest = np.delete(values, int(np.argmin(np.abs(values - 1.0))))

    moduli = np.abs(rest)
    tied = rest[moduli >= moduli.max() - TIE_TOLERANCE]
    # conjugate pairs share a real part only up to rounding
    tied = tied[tied.real >= tied.real.max() - TIE_TOLERANCE]
    best = tied[np.argmax(tied.imag)]
    return Lambda2.from_value(best)
