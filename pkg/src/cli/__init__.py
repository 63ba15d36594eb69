"""
Command-line interface modules
"""

from .commands import cli

__all__ = ['cli']
