#!/usr/bin/env python3
"""
PICG toolkit entry point.

    python picg.py grow --model preset:connected:0.5 --steps 10 --seed 7
    python picg.py validate --model data/connected.picg
"""

import sys
from pathlib import Path


def main():
    # Add src to path for imports
    project_root = Path(__file__).parent
    sys.path.insert(0, str(project_root / 'src'))

    from cli import run_command
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
