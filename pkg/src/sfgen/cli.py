"""Command-line entry point: load -> validate -> generate -> plan -> apply -> stats.

Exit codes: 0 success, 1 validation errors, 2 ownership conflicts, 3 I/O
failure, 4 template/pack errors, 5 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import loader, ownership, packs, stats
from .atl import TemplateRuntimeError
from .loader import Severity
from .xmlsubset import ParseError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFLICT = 2
EXIT_IO = 3
EXIT_TEMPLATE = 4
EXIT_USAGE = 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would sys.exit(2)
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sfgen", description="Model-driven application scaffold generator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a model document")
    p_validate.add_argument("model", help="path to the model XML file")

    p_generate = sub.add_parser("generate", help="generate all artifacts from a model")
    p_generate.add_argument("--model", required=True, help="path to the model XML file")
    p_generate.add_argument("--pack", required=True, help="template pack directory")
    p_generate.add_argument("--out", required=True, help="output directory")
    p_generate.add_argument("--lang", default="", help="language for localized text")
    p_generate.add_argument("--dry-run", action="store_true",
                            help="print the write plan without touching the filesystem")
    p_generate.add_argument("--force", action="store_true",
                            help="overwrite hand-edited ALWAYS files")

    p_stats = sub.add_parser("stats", help="report generated vs handcrafted code")
    p_stats.add_argument("--out", required=True, help="generated output directory")
    p_stats.add_argument("--json", action="store_true", help="machine-readable output")

    p_lint = sub.add_parser("lint", help="advisory checks on a model")
    p_lint.add_argument("--model", required=True, help="path to the model XML file")
    return parser


def _load_model(path: str):
    """Returns (model, diagnostics, exit_code); model is None on hard failure."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        print(f"error E_IO: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None, [], EXIT_IO
    try:
        model, diagnostics = loader.load_model(data)
    except ParseError as exc:
        print(f"error E_PARSE at {exc.line}:{exc.column}: {exc.reason}", file=sys.stderr)
        return None, [], EXIT_VALIDATION
    return model, diagnostics, EXIT_OK


def _print_diagnostics(diagnostics) -> tuple[int, int]:
    errors = warnings = 0
    for diag in diagnostics:
        stream = sys.stderr if diag.severity is Severity.ERROR else sys.stdout
        print(str(diag), file=stream)
        if diag.severity is Severity.ERROR:
            errors += 1
        elif diag.severity is Severity.WARNING:
            warnings += 1
    return errors, warnings


def _cmd_validate(args) -> int:
    model, diagnostics, code = _load_model(args.model)
    if model is None:
        return code
    errors, warnings = _print_diagnostics(diagnostics)
    print(f"{errors} errors, {warnings} warnings")
    return EXIT_VALIDATION if errors else EXIT_OK


def _cmd_generate(args) -> int:
    model, diagnostics, code = _load_model(args.model)
    if model is None:
        return code
    errors, _ = _print_diagnostics(diagnostics)
    if errors:
        print(f"{errors} validation errors; nothing generated", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        pack = packs.load_pack(packs.read_pack_dir(Path(args.pack)))
        artifacts = packs.generate_all(model, pack, packs.GenConfig(lang=args.lang))
    except TemplateRuntimeError as exc:
        print(f"error E_TEMPLATE: {exc}", file=sys.stderr)
        return EXIT_TEMPLATE
    except packs.PackError as exc:
        print(f"error E_PACK: {exc}", file=sys.stderr)
        return EXIT_TEMPLATE

    out_root = Path(args.out)
    existing: dict[str, bytes] = {}
    for artifact in artifacts:
        target = out_root / artifact.path
        if target.exists():
            try:
                existing[artifact.path] = target.read_bytes()
            except OSError as exc:
                print(f"error E_IO: cannot read {target}: {exc.strerror}", file=sys.stderr)
                return EXIT_IO
    try:
        manifest = ownership.load_manifest(out_root)
    except ownership.ManifestError as exc:
        print(f"error E_MANIFEST: {exc}", file=sys.stderr)
        return EXIT_IO

    plan = ownership.plan_writes(artifacts, existing, manifest, force=args.force)
    conflicts = plan.conflicts()

    if args.dry_run:
        for entry in plan.actions:
            print(f"{entry.action.value:<15} {entry.path} ({entry.reason})")
        if conflicts:
            print(f"{len(conflicts)} conflicts; rerun with --force to overwrite",
                  file=sys.stderr)
            return EXIT_CONFLICT
        return EXIT_OK

    if conflicts:
        for entry in conflicts:
            print(f"conflict: {entry.path} ({entry.reason})", file=sys.stderr)
        print(f"{len(conflicts)} conflicts; rerun with --force to overwrite",
              file=sys.stderr)
        return EXIT_CONFLICT

    try:
        new_manifest = ownership.apply_plan(plan, artifacts, out_root)
        ownership.save_manifest(new_manifest, out_root)
    except ownership.IoError as exc:
        print(f"error E_IO: {exc}", file=sys.stderr)
        return EXIT_IO

    counts: dict[str, int] = {}
    for entry in plan.actions:
        counts[entry.action.value] = counts.get(entry.action.value, 0) + 1
    summary = ", ".join(f"{n} {action}" for action, n in sorted(counts.items()))
    print(f"generated {len(artifacts)} artifacts: {summary}")
    return EXIT_OK


def _walk_output(out_root: Path) -> dict[str, bytes]:
    listing: dict[str, bytes] = {}
    for path in sorted(out_root.rglob("*")):
        if path.is_file():
            listing[path.relative_to(out_root).as_posix()] = path.read_bytes()
    return listing


def _cmd_stats(args) -> int:
    out_root = Path(args.out)
    if not out_root.is_dir():
        print(f"error E_IO: output directory not found: {out_root}", file=sys.stderr)
        return EXIT_IO
    try:
        manifest = ownership.load_manifest(out_root)
    except ownership.ManifestError as exc:
        print(f"error E_MANIFEST: {exc}", file=sys.stderr)
        return EXIT_IO
    if manifest is None:
        print(f"error E_IO: no manifest in {out_root}; run generate first", file=sys.stderr)
        return EXIT_IO

    report = stats.compute_report(_walk_output(out_root), manifest)
    if args.json:
        print(json.dumps(dataclasses.asdict(report), indent=2))
    else:
        print(f"{'':<12}{'generated':>12}{'manual':>12}")
        print(f"{'bytes':<12}{report.generatedBytes:>12}{report.manualBytes:>12}")
        print(f"{'bytes %':<12}{report.pctGeneratedBytes:>12}{report.pctManualBytes:>12}")
        print(f"{'files':<12}{report.generatedFiles:>12}{report.manualFiles:>12}")
        print(f"{'files %':<12}{report.pctGeneratedFiles:>12}{report.pctManualFiles:>12}")
    return EXIT_OK


def _cmd_lint(args) -> int:
    model, diagnostics, code = _load_model(args.model)
    if model is None:
        return code
    errors, _ = _print_diagnostics(diagnostics)
    if errors:
        print(f"{errors} validation errors; fix them before linting", file=sys.stderr)
        return EXIT_VALIDATION
    advisories = stats.lint_model(model)
    for advisory in advisories:
        print(f"advice {advisory.code} [{advisory.subject}]: {advisory.message}")
    print(f"{len(advisories)} advisories")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    handlers = {
        "validate": _cmd_validate,
        "generate": _cmd_generate,
        "stats": _cmd_stats,
        "lint": _cmd_lint,
    }
    return handlers[args.command](args)


def entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
