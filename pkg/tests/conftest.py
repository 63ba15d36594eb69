"""
Shared fixtures for the mixcheck test suite
"""

import logging
import sys
from pathlib import Path

import pytest

# Add project sources to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.critical_values import CriticalValues
from core.matrices import PermutationConstraint
from core.rng_dist import DistributionSpec, SeedSpec


@pytest.fixture
def seed():
    return SeedSpec(20240611)


@pytest.fixture
def make_cv():
    """Hand-built critical values, no Monte Carlo behind them"""

    def _make(n: int = 4, c1: float = 0.2, c2: float = 0.4, **overrides) -> CriticalValues:
        fields = dict(
            c1=c1,
            c2=c2,
            alpha1=0.05,
            alpha2=0.05,
            achieved1=0.05,
            achieved2=0.05,
            clamped=False,
            n=n,
            N=1000,
            dist=DistributionSpec.normal(),
            c1_constraint=PermutationConstraint.identity(),
            c2_constraint=PermutationConstraint.any(),
            seed=7,
        )
        fields.update(overrides)
        return CriticalValues(**fields)

    return _make


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Keep the user's config file and environment out of every test"""
    monkeypatch.setenv('MIXCHECK_CONFIG', str(tmp_path / 'missing.ini'))
    for key in ('MIXCHECK_THREADS', 'MIXCHECK_EPSILON', 'MIXCHECK_LOG_LEVEL', 'MIXCHECK_LOG_DIR'):
        monkeypatch.delenv(key, raising=False)


@pytest.fixture(autouse=True)
def reset_log_handlers():
    """setup_logger binds sys.stderr once; CliRunner swaps it per invocation"""
    yield
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, '_mixcheck', False)]:
        root.removeHandler(handler)
        handler.close()
