"""Regeneration safety: file ownership classification, the on-disk manifest of
generation digests, and conflict-aware write planning.

ALWAYS files are regenerated on every run and must not be hand-edited; ONCE
files are scaffolded once and then belong to the developer. The manifest
records the digest each file had when the generator last wrote it, which is
what lets a later run tell "unchanged", "needs regeneration" and "hand-edited"
apart.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Optional, Sequence

if TYPE_CHECKING:
    from .packs import Artifact

MANIFEST_FILENAME = ".sfgen-manifest.json"
MANIFEST_VERSION = 1


class Ownership(Enum):
    ALWAYS = "always"
    ONCE = "once"


class WriteAction(Enum):
    CREATE = "CREATE"
    OVERWRITE = "OVERWRITE"
    SKIP_ONCE = "SKIP_ONCE"
    SKIP_UNCHANGED = "SKIP_UNCHANGED"
    CONFLICT = "CONFLICT"


class IoError(Exception):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    ownership: Ownership
    sha256: str


@dataclass(frozen=True)
class Manifest:
    version: int = MANIFEST_VERSION
    entries: tuple[ManifestEntry, ...] = ()

    def digest_of(self, path: str) -> Optional[str]:
        for entry in self.entries:
            if entry.path == path:
                return entry.sha256
        return None


@dataclass(frozen=True)
class PlanEntry:
    path: str
    action: WriteAction
    reason: str = ""


@dataclass(frozen=True)
class WritePlan:
    actions: tuple[PlanEntry, ...] = ()

    def conflicts(self) -> list[PlanEntry]:
        return [a for a in self.actions if a.action is WriteAction.CONFLICT]


def digest(content: bytes) -> str:
    return hashlib.sha256(content).hexdigest()


def plan_writes(
    artifacts: Sequence["Artifact"],
    existing: Mapping[str, bytes],
    manifest: Optional[Manifest],
    force: bool = False,
) -> WritePlan:
    """Decide the per-file action for one regeneration; pure, writes nothing.

    ONCE files that already exist are always skipped. ALWAYS files are only
    overwritten when the on-disk content is what the generator last wrote
    (digest matches the manifest); anything else is a CONFLICT unless forced.
    """
    actions: list[PlanEntry] = []
    for artifact in artifacts:
        on_disk = existing.get(artifact.path)
        if artifact.ownership is Ownership.ONCE:
            if on_disk is not None:
                actions.append(PlanEntry(artifact.path, WriteAction.SKIP_ONCE,
                                         "scaffolded once; owned by the developer"))
            else:
                actions.append(PlanEntry(artifact.path, WriteAction.CREATE, "new file"))
            continue
        if on_disk is None:
            actions.append(PlanEntry(artifact.path, WriteAction.CREATE, "new file"))
            continue
        recorded = manifest.digest_of(artifact.path) if manifest is not None else None
        if recorded is not None and digest(on_disk) == recorded:
            if on_disk == artifact.content:
                actions.append(PlanEntry(artifact.path, WriteAction.SKIP_UNCHANGED,
                                         "content unchanged"))
            else:
                actions.append(PlanEntry(artifact.path, WriteAction.OVERWRITE,
                                         "regenerated content differs"))
        elif force:
            actions.append(PlanEntry(artifact.path, WriteAction.OVERWRITE, "forced"))
        else:
            reason = ("file was modified after the last generation"
                      if recorded is not None else "file is not covered by the manifest")
            actions.append(PlanEntry(artifact.path, WriteAction.CONFLICT, reason))
    return WritePlan(tuple(actions))


def _atomic_write(target: Path, content: bytes) -> None:
    tmp = target.with_name(f".tmp-{target.name}")
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(content)
        os.replace(tmp, target)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoError(str(target), exc.strerror or str(exc)) from exc


def apply_plan(plan: WritePlan, artifacts: Sequence["Artifact"], out_root: Path) -> Manifest:
    """Execute a conflict-free plan under `out_root` and return the new manifest.

    Writes are atomic per file (temp file + rename). ONCE entries keep the
    digest of whatever is on disk, so user-edited scaffolds stay recognizable.
    """
    if plan.conflicts():
        raise ValueError("plan contains conflicts; resolve them or use force")

    by_path = {a.path: a for a in artifacts}
    for entry in plan.actions:
        if entry.action in (WriteAction.CREATE, WriteAction.OVERWRITE):
            _atomic_write(out_root / entry.path, by_path[entry.path].content)

    manifest_entries: list[ManifestEntry] = []
    for artifact in artifacts:
        if artifact.ownership is Ownership.ONCE:
            try:
                on_disk = (out_root / artifact.path).read_bytes()
            except OSError as exc:
                raise IoError(artifact.path, exc.strerror or str(exc)) from exc
            sha = digest(on_disk)
        else:
            sha = digest(artifact.content)
        manifest_entries.append(ManifestEntry(artifact.path, artifact.ownership, sha))
    manifest_entries.sort(key=lambda e: e.path)
    return Manifest(entries=tuple(manifest_entries))


def manifest_to_json(manifest: Manifest) -> str:
    payload = {
        "version": manifest.version,
        "entries": [
            {"path": e.path, "ownership": e.ownership.value, "sha256": e.sha256}
            for e in manifest.entries
        ],
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def manifest_from_json(text: str) -> Manifest:
    try:
        payload = json.loads(text)
        entries = tuple(
            ManifestEntry(e["path"], Ownership(e["ownership"]), e["sha256"])
            for e in payload["entries"]
        )
        return Manifest(version=int(payload["version"]), entries=entries)
    except (ValueError, KeyError, TypeError) as exc:
        raise ManifestError(f"malformed manifest: {exc}") from exc


def save_manifest(manifest: Manifest, out_root: Path) -> None:
    _atomic_write(out_root / MANIFEST_FILENAME, manifest_to_json(manifest).encode("utf-8"))


def load_manifest(out_root: Path) -> Optional[Manifest]:
    path = out_root / MANIFEST_FILENAME
    if not path.exists():
        return None
    return manifest_from_json(path.read_text("utf-8"))
