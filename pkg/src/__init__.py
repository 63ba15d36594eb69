"""
mixcheck - statistical weak-mixing test for measure-preserving stirring protocols
"""

__version__ = '0.1.0'
