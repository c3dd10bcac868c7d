#!/usr/bin/env python3
"""Run the late-power CLI from a source checkout."""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    main()
