"""
Logging setup and handlers
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'


def setup_logger(name: str, level: Union[str, int] = 'INFO',
                 log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Configure the root handlers and return the named logger

    Args:
        name: Logger name; also the log file stem when log_dir is set
        level: Level name or number
        log_dir: Optional directory for a <name>.log file

    Returns:
        logging.Logger: The configured logger
    """
    root = logging.getLogger()
    root.setLevel(level)

    # stdout carries JSON/CSV artifacts, so logs go to stderr only
    if not any(getattr(h, '_mixcheck', False) for h in root.handlers):
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(logging.Formatter(LOG_FORMAT))
        console._mixcheck = True
        root.addHandler(console)

        if log_dir:
            log_dir = Path(log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_dir / f'{name}.log')
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
            file_handler._mixcheck = True
            root.addHandler(file_handler)

    return logging.getLogger(name)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
