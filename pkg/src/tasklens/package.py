"""Reading model packages: a directory or gzip tar with fixed member names.

Required members: manifest.json, graph.json. Optional: code_map.json, src/**.
Parsing never mutates input bytes; the original member bytes are kept so the
workspace can persist a package verbatim.
"""

from __future__ import annotations

import io
import json
import tarfile
from dataclasses import dataclass, field
from pathlib import Path

from . import ir
from .codemap import CodeMap, SourceTree, code_map_from_json, normalize_source_path
from .errors import (
    GraphValidationError,
    MissingMember,
    PackageError,
    PathRejected,
    SchemaError,
)

GRAPH_MEMBER = "graph.json"
MANIFEST_MEMBER = "manifest.json"
CODE_MAP_MEMBER = "code_map.json"
SRC_PREFIX = "src/"

MAX_MEMBERS = 100_000
MAX_TOTAL_BYTES = 1 << 30  # decompression cap


@dataclass(frozen=True)
class Manifest:
    name: str
    created_at: str
    attributes: dict = field(default_factory=dict)

    @property
    def pool_window(self) -> int:
        window = self.attributes.get("pool_window", 4)
        return window if isinstance(window, int) and window > 0 else 4

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "created_at": self.created_at,
            "attributes": dict(self.attributes),
        }


@dataclass(frozen=True)
class ParsedPackage:
    graph: ir.ModelGraph
    manifest: Manifest
    code_map: CodeMap
    source: SourceTree
    members: dict[str, bytes]  # original bytes, keyed by member path


def _decode_json(member: str, data: bytes) -> object:
    try:
        return json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{member}#", f"invalid JSON: {exc}") from None


def _scoped(member: str, exc: SchemaError) -> SchemaError:
    pointer = exc.pointer if exc.pointer.startswith(f"{member}#") else f"{member}#{exc.pointer}"
    return SchemaError(pointer, exc.reason)


def manifest_from_json(doc: object) -> Manifest:
    if not isinstance(doc, dict):
        raise SchemaError("", f"expected object, got {type(doc).__name__}")
    name = doc.get("name")
    created = doc.get("created_at")
    if not isinstance(name, str):
        raise SchemaError("/name", "expected string")
    if not isinstance(created, str):
        raise SchemaError("/created_at", "expected string")
    attributes = doc.get("attributes", {})
    if not isinstance(attributes, dict):
        raise SchemaError("/attributes", "expected object")
    return Manifest(name=name, created_at=created, attributes=attributes)


def _members_from_dir(path: Path) -> dict[str, bytes]:
    members: dict[str, bytes] = {}
    for name in (MANIFEST_MEMBER, GRAPH_MEMBER, CODE_MAP_MEMBER):
        candidate = path / name
        if candidate.is_file():
            members[name] = candidate.read_bytes()
    src_root = path / "src"
    if src_root.is_dir():
        for file in sorted(src_root.rglob("*")):
            if file.is_file() and not file.is_symlink():
                rel = file.relative_to(src_root).as_posix()
                members[SRC_PREFIX + rel] = file.read_bytes()
    return members


def _members_from_tar(data: bytes) -> dict[str, bytes]:
    members: dict[str, bytes] = {}
    total = 0
    try:
        with tarfile.open(fileobj=io.BytesIO(data), mode="r:*") as tar:
            count = 0
            for info in tar:
                count += 1
                if count > MAX_MEMBERS:
                    raise PackageError("archive has too many members")
                name = info.name
                if name.startswith("./"):
                    name = name[2:]
                if info.isdir() or not name:
                    continue
                # hardening: no links, devices, absolute paths, or traversal
                if not info.isreg():
                    raise PackageError(f"archive member {info.name!r} is not a regular file")
                if name.startswith("/") or any(part == ".." for part in name.split("/")):
                    raise PackageError(f"archive member escapes package root: {info.name!r}")
                total += info.size
                if total > MAX_TOTAL_BYTES:
                    raise PackageError("archive expands beyond the size cap")
                stream = tar.extractfile(info)
                if stream is None:
                    continue
                members[name] = stream.read()
    except tarfile.TarError as exc:
        raise PackageError(f"unreadable archive: {exc}") from None
    return members


def _filter_relevant(members: dict[str, bytes]) -> dict[str, bytes]:
    keep: dict[str, bytes] = {}
    for name, data in members.items():
        if name in (MANIFEST_MEMBER, GRAPH_MEMBER, CODE_MAP_MEMBER):
            keep[name] = data
        elif name.startswith(SRC_PREFIX):
            keep[name] = data
    return keep


def parse_package_members(members: dict[str, bytes]) -> ParsedPackage:
    members = _filter_relevant(members)
    for required in (MANIFEST_MEMBER, GRAPH_MEMBER):
        if required not in members:
            raise MissingMember(required)

    try:
        manifest = manifest_from_json(_decode_json(MANIFEST_MEMBER, members[MANIFEST_MEMBER]))
    except SchemaError as exc:
        raise _scoped(MANIFEST_MEMBER, exc) from None
    try:
        graph = ir.graph_from_json(_decode_json(GRAPH_MEMBER, members[GRAPH_MEMBER]))
    except SchemaError as exc:
        raise _scoped(GRAPH_MEMBER, exc) from None

    violations = ir.validate_graph(graph)
    if violations:
        raise GraphValidationError(violations)

    code_map = CodeMap()
    if CODE_MAP_MEMBER in members:
        try:
            code_map = code_map_from_json(_decode_json(CODE_MAP_MEMBER, members[CODE_MAP_MEMBER]))
        except SchemaError as exc:
            raise _scoped(CODE_MAP_MEMBER, exc) from None

    files: dict[str, bytes] = {}
    for name, data in members.items():
        if name.startswith(SRC_PREFIX):
            try:
                rel = normalize_source_path(name[len(SRC_PREFIX):])
            except PathRejected as exc:
                raise PackageError(str(exc)) from None
            files[rel] = data
    source = SourceTree(files=files)

    return ParsedPackage(
        graph=graph, manifest=manifest, code_map=code_map, source=source, members=members
    )


def parse_package_bytes(data: bytes) -> ParsedPackage:
    """Parse a gzip tar archive given as bytes."""
    return parse_package_members(_members_from_tar(data))


def parse_package(path: str | Path) -> ParsedPackage:
    """Parse a package from a directory or a .tgz/.tar.gz file."""
    path = Path(path)
    if path.is_dir():
        return parse_package_members(_members_from_dir(path))
    if path.is_file():
        return parse_package_bytes(path.read_bytes())
    raise MissingMember(str(path))


def load_model(path: str | Path) -> ParsedPackage:
    """Parse a package and fill omitted task work counts."""
    pkg = parse_package(path)
    graph = ir.derive_task_work(pkg.graph, pool_window=pkg.manifest.pool_window)
    return ParsedPackage(
        graph=graph,
        manifest=pkg.manifest,
        code_map=pkg.code_map,
        source=pkg.source,
        members=pkg.members,
    )
