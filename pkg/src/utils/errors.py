"""
Errors - Exception hierarchy shared by every mixcheck module
"""

from typing import Dict, Optional


class MixCheckError(Exception):
    """Root of all mixcheck failures"""


class ParameterError(MixCheckError, ValueError):
    """Invalid distribution, permutation or Monte Carlo parameters"""


class DomainError(MixCheckError, ValueError):
    """Input outside the domain of an operation"""


class ShapeError(MixCheckError, ValueError):
    """Matrix or vector dimensions do not match"""


class ConfigurationError(MixCheckError, ValueError):
    """Inconsistent settings (critical values, domains, region counts)"""


class RateUndefinedError(DomainError):
    """Mixing rate requested for a modulus that does not contract"""


class DataError(MixCheckError, ValueError):
    """Transition data that cannot produce an empirical matrix"""

    def __init__(self, message: str, row: Optional[int] = None, region: Optional[int] = None):
        super().__init__(message)
        self.row = row
        self.region = region


class ParseError(DataError):
    """Malformed input file"""


class NumericalError(MixCheckError, ArithmeticError):
    """Numerical routine failed to converge"""

    def __init__(self, message: str, diagnostics: Optional[Dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SamplingError(MixCheckError):
    """A Monte Carlo draw failed"""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index
