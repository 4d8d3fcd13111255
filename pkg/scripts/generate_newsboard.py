#!/usr/bin/env python3
"""Generate the newsboard example application into a local directory.

Usage: python3 scripts/generate_newsboard.py [outdir] [--lang NAME] [--force]
Re-run after editing fixtures/newsboard.xml to see regeneration behaviour;
hand-edit a file under sql/ first to see conflict detection.
"""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sfgen import packs  # noqa: E402
from sfgen.cli import main  # noqa: E402


def run() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="out/newsboard")
    parser.add_argument("--lang", default="English")
    parser.add_argument("--force", action="store_true")
    parser.add_argument("--dry-run", action="store_true")
    args = parser.parse_args()

    argv = ["generate",
            "--model", str(ROOT / "fixtures" / "newsboard.xml"),
            "--pack", str(packs.builtin_pack_dir()),
            "--out", args.outdir,
            "--lang", args.lang]
    if args.force:
        argv.append("--force")
    if args.dry_run:
        argv.append("--dry-run")
    return main(argv)


if __name__ == "__main__":
    sys.exit(run())
