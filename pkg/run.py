#!/usr/bin/env python3
"""thermo-homog entry point for running from a checkout."""

import sys

from thermo_homogenization.cli import main

if __name__ == '__main__':
    sys.exit(main())
