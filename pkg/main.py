"""Entrypoint for the `stickydiscs` command line.

Usage (from the project root):
  python main.py analyze --eps 1 points.csv
  python main.py synth hexagon --s 2 --eps 0.5 --out hexagon.csv
"""

from __future__ import annotations

import sys

from cli import run


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
