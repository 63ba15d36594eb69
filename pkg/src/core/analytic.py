"""
Closed-form results
Frobenius-norm convergence bounds, structured determinants, the equal-components
spectrum and the two-region case
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.stats import beta as beta_dist

from utils.errors import ParameterError
from .rng_dist import MomentSet
from .spectra import Lambda2Transform


class Validity(str, Enum):
    VALID = 'valid'
    PRECONDITION_VIOLATED = 'precondition-violated'


@dataclass(frozen=True)
class BoundResult:
    """Upper bound on E(||M - I||_F^2); value is inf unless valid"""

    value: float
    n: int
    validity: Validity
    reason: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.validity == Validity.VALID

    @classmethod
    def violated(cls, n: int, reason: str) -> 'BoundResult':
        return cls(math.inf, n, Validity.PRECONDITION_VIOLATED, reason)


def bound_general(n: int, m: MomentSet) -> BoundResult:
    """
    Bound for any i.i.d. law with finite fourth and eighth (inverse) moments

        16n/(n-1)^4 E(u^-8) E(u^8) + 16n/(n-1)^2 E(u^-4) E(u^4)
        + 16n(n-1)/(n-2)^4 E(u^-8) E(u^4)^2
    """
    if n < 3:
        return BoundResult.violated(n, f"needs n >= 3, got {n}")
    if not m.all_finite:
        return BoundResult.violated(n, "a required moment is infinite")

    value = (16 * n / (n - 1) ** 4 * m.im8 * m.m8
             + 16 * n / (n - 1) ** 2 * m.im4 * m.m4
             + 16 * n * (n - 1) / (n - 2) ** 4 * m.im8 * m.m4 ** 2)
    return BoundResult(value, n, Validity.VALID)


def bound_normal(n: int) -> BoundResult:
    """Bound for standard normal u_i, valid for n >= 11"""
    if n < 11:
        return BoundResult.violated(n, f"needs n >= 11, got {n}")
    value = (1680 * n / ((n - 3) * (n - 5) * (n - 7) * (n - 9))
             + 48 * n / ((n - 3) * (n - 5))
             + 144 * n * (n - 1) / ((n - 4) * (n - 6) * (n - 8) * (n - 10)))
    return BoundResult(value, n, Validity.VALID)


def _log_rising(alpha: float, count: int) -> float:
    return sum(math.log(alpha + i) for i in range(count))


def _log_falling_denominator(a: float, count: int) -> float:
    return sum(math.log(a - i) for i in range(1, count + 1))


def bound_gamma(n: int, alpha: float) -> BoundResult:
    """
    Bound for Gamma(alpha, beta) u_i, valid when 8/alpha + 2 < n

    The scale beta cancels; products are summed as logs so large n cannot overflow.
    """
    if alpha <= 0:
        raise ParameterError(f"alpha must be positive, got {alpha}")
    if not 8.0 / alpha + 2.0 < n:
        return BoundResult.violated(n, f"needs 8/alpha + 2 < n, got 8/{alpha} + 2 >= {n}")

    log16 = math.log(16.0)
    a1 = (n - 1) * alpha
    a2 = (n - 2) * alpha
    t1 = log16 + 5 * math.log(n) + _log_rising(alpha, 8) - _log_falling_denominator(a1, 8)
    t2 = log16 + 3 * math.log(n) + _log_rising(alpha, 4) - _log_falling_denominator(a1, 4)
    t3 = (log16 + 5 * math.log(n) + math.log(n - 1) + 2 * _log_rising(alpha, 4)
          - _log_falling_denominator(a2, 8))
    return BoundResult(math.exp(t1) + math.exp(t2) + math.exp(t3), n, Validity.VALID)


class StructuredKind(str, Enum):
    D = 'D'
    S = 'S'


def structured_matrix(alpha: float, beta: float, n: int, kind: StructuredKind) -> np.ndarray:
    """D_n: alpha on the diagonal, beta elsewhere; S_n: D_n with its (0, 0) entry set to beta"""
    kind = StructuredKind(kind)
    d = np.full((n, n), float(beta))
    np.fill_diagonal(d, alpha)
    if kind == StructuredKind.S:
        d[0, 0] = beta
    return d


def det_structured(alpha: float, beta: float, n: int, kind: StructuredKind) -> float:
    """det(D_n) = (alpha - beta)^(n-1) (alpha + (n-1) beta); det(S_n) = (alpha - beta)^(n-1) beta"""
    kind = StructuredKind(kind)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if kind == StructuredKind.S:
        if n < 2:
            raise ParameterError(f"S_n is defined for n >= 2, got {n}")
        return (alpha - beta) ** (n - 1) * beta
    return (alpha - beta) ** (n - 1) * (alpha + (n - 1) * beta)


@dataclass(frozen=True, eq=False)
class EqualComponentsSpectrum:
    det: float
    trace: float
    eigenvalues: np.ndarray


def equal_components_spectrum(n: int) -> EqualComponentsSpectrum:
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    r = (n - 4) / n
    return EqualComponentsSpectrum(
        det=r ** (n - 1),
        trace=(n - 2) ** 2 / n,
        eigenvalues=np.concatenate([[1.0], np.full(n - 1, r)]),
    )


class Branch(str, Enum):
    PLUS = 'plus'    # identity permutation
    MINUS = 'minus'  # swap permutation

    @property
    def sign(self) -> float:
        return 1.0 if self == Branch.PLUS else -1.0


@dataclass(frozen=True)
class TwoRegionCase:
    v1: float
    branch: Branch = Branch.PLUS

    def __post_init__(self):
        object.__setattr__(self, 'branch', Branch(self.branch))
        if not -1.0 <= self.v1 <= 1.0:
            raise ParameterError(f"v1 must lie in [-1, 1], got {self.v1}")


def two_region_matrix(case: TwoRegionCase) -> np.ndarray:
    v2 = case.v1 ** 2
    stay = (1.0 - 2.0 * v2) ** 2
    move = 4.0 * v2 * (1.0 - v2)
    if case.branch == Branch.PLUS:
        return np.array([[stay, move], [move, stay]])
    return np.array([[move, stay], [stay, move]])


def lambda2_two_region(case: TwoRegionCase) -> float:
    v = case.v1
    return case.branch.sign * (8.0 * v ** 4 - 8.0 * v ** 2 + 1.0)


def expected_lambda2_beta(alpha: float, beta: float, branch: Branch = Branch.PLUS) -> float:
    """E(lambda_2) when v1 ~ Beta(alpha, beta)"""
    if alpha <= 0 or beta <= 0:
        raise ParameterError(f"Beta parameters must be positive, got {alpha}, {beta}")
    s = alpha + beta
    fourth = alpha * (alpha + 1) * (alpha + 2) * (alpha + 3) / (s * (s + 1) * (s + 2) * (s + 3))
    second = alpha * (alpha + 1) / (s * (s + 1))
    return Branch(branch).sign * (8.0 * fourth - 8.0 * second + 1.0)


Interval = Tuple[float, float]


def _phase_intervals(k: float, branch: Branch, transform: Lambda2Transform) -> List[Interval]:
    """
    Phases phi in [0, 2 pi] where the event holds, with lambda_2 = sign * cos(phi)

    DistFromOne event: |lambda_2 - 1| > k.  Modulus event: |lambda_2| > k.
    """
    two_pi = 2.0 * math.pi
    if transform == Lambda2Transform.DIST_FROM_ONE:
        if k >= 2.0:
            return []
        if k < 0.0:
            return [(0.0, two_pi)]
        if branch == Branch.PLUS:
            a = math.acos(1.0 - k)
            return [(a, two_pi - a)]
        b = math.acos(k - 1.0)
        return [(0.0, b), (two_pi - b, two_pi)]

    if k >= 1.0:
        return []
    if k < 0.0:
        return [(0.0, two_pi)]
    c = math.acos(k)
    return [(0.0, c), (math.pi - c, math.pi + c), (two_pi - c, two_pi)]


def two_region_tail_probability(alpha: float, beta: float, k: float,
                                branch: Branch = Branch.PLUS,
                                transform: Lambda2Transform = Lambda2Transform.DIST_FROM_ONE) -> float:
    """
    Exact P(|lambda_2 - 1| > k) or P(|lambda_2| > k) for v1 ~ Beta(alpha, beta)

    With v1 = cos(theta), theta in [0, pi/2], lambda_2 = +-cos(4 theta), so each
    phase interval maps to a v1 interval through the decreasing map cos(phi / 4).
    """
    if alpha <= 0 or beta <= 0:
        raise ParameterError(f"Beta parameters must be positive, got {alpha}, {beta}")
    law = beta_dist(alpha, beta)
    total = 0.0
    for lo, hi in _phase_intervals(k, Branch(branch), Lambda2Transform(transform)):
        total += law.cdf(math.cos(lo / 4.0)) - law.cdf(math.cos(hi / 4.0))
    return float(min(1.0, max(0.0, total)))


def bound_table(kind: str, ns: Iterable[int], moments_: Optional[MomentSet] = None,
                alpha: Optional[float] = None) -> List[BoundResult]:
    """Evaluate one bound family over a range of n"""
    rows = []
    for n in ns:
        if kind == 'general':
            if moments_ is None:
                raise ParameterError("general bound needs a distribution's moments")
            rows.append(bound_general(n, moments_))
        elif kind == 'normal':
            rows.append(bound_normal(n))
        elif kind == 'gamma':
            if alpha is None:
                raise ParameterError("gamma bound needs alpha")
            rows.append(bound_gamma(n, alpha))
        else:
            raise ParameterError(f"Unknown bound kind '{kind}' (general | normal | gamma)")
    return rows
