#!/usr/bin/env python3

"""Command entry for bidirectional learning experiments."""

import sys

from src.experiment.cli import main

if __name__ == "__main__":
    sys.exit(main())
