#!/usr/bin/env python3
"""Report the generated-vs-handcrafted split for a generated output tree.

Usage: python3 scripts/report_stats.py [outdir] [--json]
The directory must contain a manifest written by a previous generate run.
"""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sfgen.cli import main  # noqa: E402


def run() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="out/newsboard")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args()

    argv = ["stats", "--out", args.outdir]
    if args.json:
        argv.append("--json")
    return main(argv)


if __name__ == "__main__":
    sys.exit(run())
