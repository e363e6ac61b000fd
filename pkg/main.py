#!/usr/bin/env python3
"""
Main entry point for morse-witten-lab.

Runs the command line interface from a source checkout without installing
the package, e.g. ``python main.py selftest --seed 1``.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def main():
    """Main entry point for running morse-witten-lab."""
    try:
        from morsewitten.cli import main as cli_main
    except ImportError as e:
        print(f"Import error: {e}")
        print("Please install the required dependencies:")
        print("  pip install -r requirements.txt")
        sys.exit(2)
    cli_main()


if __name__ == "__main__":
    main()
