#!/usr/bin/env python3
"""
mixcheck - Main entry point
Runs the command-line interface
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from cli import cli


def main():
    """Main entry point"""
    cli(prog_name='mixcheck')


if __name__ == '__main__':
    main()
