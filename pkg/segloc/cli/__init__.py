"""
SegLoc Project - CLI Module
Argparse application exposing simulate, localize, baseline and bench.
"""

from .app import create_parser, main

__all__ = ["create_parser", "main"]
