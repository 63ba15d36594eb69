"""
Utility modules
"""

from .config import Config
from .logger import setup_logger, get_logger
from .errors import (
    MixCheckError,
    ParameterError,
    DomainError,
    ShapeError,
    DataError,
    ParseError,
    NumericalError,
    ConfigurationError,
    RateUndefinedError,
    SamplingError,
)

__all__ = [
    'Config',
    'setup_logger',
    'get_logger',
    'MixCheckError',
    'ParameterError',
    'DomainError',
    'ShapeError',
    'DataError',
    'ParseError',
    'NumericalError',
    'ConfigurationError',
    'RateUndefinedError',
    'SamplingError',
]
