"""Template packs: a manifest plus template files describing which artifacts to
render, at which output paths, with which ownership.

A pack directory holds `pack.json` and the templates it references. Generation
expands each output rule (once per model, or once per active entity), renders
the template and yields deterministic UTF-8 artifacts.
"""

from __future__ import annotations

import json
import posixpath
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from . import atl
from .model import ApplicationModel, Entity
from .ownership import Ownership

_PLACEHOLDER_RE = re.compile(r"\{entity\.([A-Za-z_][A-Za-z0-9_]*)\}")
_BUILTIN_PACKS = Path(__file__).parent / "builtin_packs"


class PackError(Exception):
    pass


class PathCollision(PackError):
    pass


@dataclass(frozen=True)
class OutputRule:
    template: str
    pathPattern: str
    per: str  # "model" | "entity"
    ownership: Ownership
    activeOnly: bool = True
    flags: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class TemplatePack:
    name: str
    version: str
    outputs: tuple[OutputRule, ...]
    templates: Mapping[str, atl.TemplateAst]


@dataclass(frozen=True)
class Artifact:
    path: str
    content: bytes
    ownership: Ownership


@dataclass(frozen=True)
class GenConfig:
    lang: str = ""


def builtin_pack_dir(name: str = "webstack") -> Path:
    """Directory of a pack bundled with the package."""
    return _BUILTIN_PACKS / name


def read_pack_dir(directory: Path) -> dict[str, str]:
    """Flat path -> text listing of a pack directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise PackError(f"pack directory not found: {directory}")
    listing: dict[str, str] = {}
    for path in sorted(directory.rglob("*")):
        if path.is_file():
            listing[path.relative_to(directory).as_posix()] = path.read_text("utf-8")
    return listing


def _check_path_pattern(rule_index: int, rule: OutputRule) -> None:
    pattern = rule.pathPattern
    where = f"output rule #{rule_index} ({pattern!r})"
    if not pattern or pattern.startswith(("/", "\\")) or re.match(r"[A-Za-z]:", pattern):
        raise PackError(f"{where}: path must be relative")
    if ".." in pattern.split("/"):
        raise PackError(f"{where}: path must not escape the output root")
    if rule.per == "model" and _PLACEHOLDER_RE.search(pattern):
        raise PackError(f"{where}: per-model paths cannot use entity placeholders")


def load_pack(listing: Mapping[str, str]) -> TemplatePack:
    """Build a TemplatePack from a directory listing; every referenced template
    is parsed eagerly so bad packs fail before any generation starts."""
    if "pack.json" not in listing:
        raise PackError("pack.json not found in pack directory")
    try:
        manifest = json.loads(listing["pack.json"])
    except ValueError as exc:
        raise PackError(f"pack.json is not valid JSON: {exc}") from exc

    name = manifest.get("name")
    version = manifest.get("version")
    outputs_raw = manifest.get("outputs")
    if not isinstance(name, str) or not isinstance(version, str) \
            or not isinstance(outputs_raw, list):
        raise PackError("pack.json must define 'name', 'version' and 'outputs'")

    rules: list[OutputRule] = []
    for i, raw in enumerate(outputs_raw, start=1):
        try:
            rule = OutputRule(
                template=raw["template"],
                pathPattern=raw["path"],
                per=raw["per"],
                ownership=Ownership(raw["ownership"]),
                activeOnly=bool(raw.get("activeOnly", True)),
                flags=dict(raw.get("flags", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PackError(f"output rule #{i} is malformed: {exc}") from exc
        if rule.per not in ("model", "entity"):
            raise PackError(f"output rule #{i}: 'per' must be 'model' or 'entity'")
        _check_path_pattern(i, rule)
        rules.append(rule)

    templates: dict[str, atl.TemplateAst] = {}
    for rule in rules:
        if rule.template in templates:
            continue
        if rule.template not in listing:
            raise PackError(
                f"output rule for {rule.pathPattern!r} references missing template "
                f"{rule.template!r}")
        try:
            templates[rule.template] = atl.parse_template(listing[rule.template], rule.template)
        except atl.TemplateSyntaxError as exc:
            raise PackError(str(exc)) from exc

    return TemplatePack(name=name, version=version, outputs=tuple(rules), templates=templates)


def _resolve_lang(model: ApplicationModel, config: GenConfig) -> str:
    if config.lang:
        return config.lang
    if model.settings.defaultLanguage:
        return model.settings.defaultLanguage
    return model.languages[0] if model.languages else ""


def _expand_path(pattern: str, entity: Entity) -> str:
    def substitute(match: re.Match) -> str:
        attr = match.group(1)
        value = getattr(entity, attr, None)
        if not isinstance(value, str) or not value:
            raise PackError(
                f"path pattern {pattern!r}: entity attribute {attr!r} is not usable in a path")
        return value

    path = _PLACEHOLDER_RE.sub(substitute, pattern)
    normalized = posixpath.normpath(path)
    if normalized.startswith("..") or normalized.startswith("/"):
        raise PackError(f"expanded path {path!r} escapes the output root")
    return normalized


def expand_output_rule(
    rule: OutputRule, model: ApplicationModel, config: Optional[GenConfig] = None
) -> list[tuple[str, dict[str, atl.Value]]]:
    """(path, render-context) pairs for one rule: a single pair for per-model
    rules, one per (active) entity otherwise."""
    config = config or GenConfig()
    base: dict[str, atl.Value] = {
        "model": atl.wrap(model),
        "lang": _resolve_lang(model, config),
        "flags": dict(rule.flags),
    }
    if rule.per == "model":
        if _PLACEHOLDER_RE.search(rule.pathPattern):
            raise PackError(
                f"per-model path {rule.pathPattern!r} cannot use entity placeholders")
        return [(posixpath.normpath(rule.pathPattern), base)]

    pairs: list[tuple[str, dict[str, atl.Value]]] = []
    seen: dict[str, str] = {}
    for entity in model.entities:
        if rule.activeOnly and not entity.isActive:
            continue
        path = _expand_path(rule.pathPattern, entity)
        if path in seen:
            raise PathCollision(
                f"entities '{seen[path]}' and '{entity.name}' both expand "
                f"{rule.pathPattern!r} to {path!r}")
        seen[path] = entity.name
        context = dict(base)
        context["entity"] = atl.ModelNode(entity, model, entity)
        pairs.append((path, context))
    return pairs


def generate_all(
    model: ApplicationModel, pack: TemplatePack, config: Optional[GenConfig] = None
) -> list[Artifact]:
    """Render every output rule over the model.

    Artifact order is manifest rule order, then entity document order; content
    is deterministic UTF-8 with LF line endings.
    """
    config = config or GenConfig()
    artifacts: list[Artifact] = []
    seen: set[str] = set()
    for rule in pack.outputs:
        ast = pack.templates[rule.template]
        for path, context in expand_output_rule(rule, model, config):
            if path in seen:
                raise PathCollision(f"two output rules produce the same path {path!r}")
            seen.add(path)
            try:
                text = atl.render(ast, context)
            except atl.TemplateRuntimeError as exc:
                exc.args = (f"while rendering {path!r}: {exc}",)
                raise
            text = text.replace("\r\n", "\n")
            artifacts.append(Artifact(path=path, content=text.encode("utf-8"),
                                      ownership=rule.ownership))
    return artifacts
