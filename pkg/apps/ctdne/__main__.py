#!/usr/bin/env python3
"""
Entry point for running the CLI as a module (python -m apps.ctdne)
"""

import sys

from apps.ctdne.cli import main

if __name__ == "__main__":
    sys.exit(main())
