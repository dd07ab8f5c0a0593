#!/usr/bin/env python3
"""
optomech - two optical cavities sharing one movable mirror.

Command-line entry for stability maps, entanglement sweeps, homodyne
reconstruction and the stochastic cross-check. See `python main.py --help`.
"""

import sys

from optomech.cli import main

if __name__ == "__main__":
    sys.exit(main())
