"""
Configuration manager
Reads ~/.config/mixcheck/config.ini, with .env and environment overrides
"""

import configparser
import logging
import os
from pathlib import Path
from typing import Optional

import psutil
from dotenv import load_dotenv

from .errors import ConfigurationError


DEFAULT_CONFIG_PATH = Path.home() / '.config' / 'mixcheck' / 'config.ini'

DEFAULTS = {
    'monte_carlo': {
        'threads': '',
        'max_permutation_attempts': '100000',
    },
    'test': {
        'epsilon': '1e-3',
        'low_count_threshold': '30',
        'rate_model': 'general',
    },
    'logging': {
        'log_level': 'INFO',
        'log_dir': '',
    },
}


class Config:
    """Layered settings: defaults < config.ini < environment"""

    def __init__(self, path: Optional[Path] = None):
        self.logger = logging.getLogger('config')
        load_dotenv()

        env_path = os.environ.get('MIXCHECK_CONFIG')
        self.path = Path(path or env_path or DEFAULT_CONFIG_PATH)

        self.parser = configparser.ConfigParser()
        self.parser.read_dict(DEFAULTS)
        if self.path.exists():
            self.parser.read(self.path)
            self.logger.debug(f"Loaded config from {self.path}")

    def _env_or(self, env_key: str, section: str, key: str) -> str:
        value = os.environ.get(env_key)
        if value is not None and value.strip():
            return value.strip()
        return self.parser.get(section, key).strip()

    @property
    def threads(self) -> int:
        raw = self._env_or('MIXCHECK_THREADS', 'monte_carlo', 'threads')
        if not raw:
            return psutil.cpu_count() or 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigurationError(f"threads must be an integer, got {raw!r}")
        if threads < 1:
            raise ConfigurationError(f"threads must be >= 1, got {threads}")
        return threads

    @property
    def max_permutation_attempts(self) -> int:
        return self.parser.getint('monte_carlo', 'max_permutation_attempts')

    @property
    def epsilon(self) -> float:
        raw = self._env_or('MIXCHECK_EPSILON', 'test', 'epsilon')
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"epsilon must be a number, got {raw!r}")

    @property
    def low_count_threshold(self) -> int:
        return self.parser.getint('test', 'low_count_threshold')

    @property
    def rate_model(self) -> str:
        return self.parser.get('test', 'rate_model').strip().lower()

    @property
    def log_level(self) -> str:
        return self._env_or('MIXCHECK_LOG_LEVEL', 'logging', 'log_level').upper()

    @property
    def log_dir(self) -> Optional[Path]:
        raw = self._env_or('MIXCHECK_LOG_DIR', 'logging', 'log_dir')
        return Path(raw).expanduser() if raw else None
