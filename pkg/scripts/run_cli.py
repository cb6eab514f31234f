#!/usr/bin/env python3
"""
SegLoc Project - CLI Runner Script
Convenient script to run the segloc command from a source checkout.
"""

import os
import sys

# Add the project root to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from segloc.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
