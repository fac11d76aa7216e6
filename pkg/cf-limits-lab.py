#!/usr/bin/env python3
"""cf-limits-lab: entry point."""

import sys

from src.adapters.cli import main

if __name__ == "__main__":
    sys.exit(main())
