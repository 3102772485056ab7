"""Task-to-source mapping and read-only source serving.

Call stacks are stored as index lists into a deduplicated location table;
``task_map[task_id]`` lists indices innermost call first.
"""

from __future__ import annotations

import posixpath
from dataclasses import dataclass, field

from .errors import NotFound, PathRejected, SchemaError, TooLarge

SNIPPET_LIMIT = 400
WHOLE_FILE_LIMIT = 2 * 1024 * 1024  # bytes; larger files require a window


@dataclass(frozen=True)
class CodeLocation:
    file: str
    line: int
    snippet: str

    def to_json(self) -> dict:
        return {"file": self.file, "line": self.line, "snippet": self.snippet}


@dataclass(frozen=True)
class CodeMap:
    locations: tuple[CodeLocation, ...] = ()
    task_map: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "locations": [loc.to_json() for loc in self.locations],
            "task_map": {str(k): list(v) for k, v in sorted(self.task_map.items())},
        }


def normalize_source_path(file: str) -> str:
    """Normalize a path relative to src/; reject anything that escapes it."""
    if not file or file.startswith(("/", "\\")) or "\\" in file:
        raise PathRejected(f"illegal source path: {file!r}")
    norm = posixpath.normpath(file)
    if norm.startswith("..") or norm == "." or any(p == ".." for p in norm.split("/")):
        raise PathRejected(f"path escapes source tree: {file!r}")
    return norm


def code_map_from_json(doc: object) -> CodeMap:
    """Parse code_map.json; raises SchemaError with a JSON pointer."""
    if not isinstance(doc, dict):
        raise SchemaError("", f"expected object, got {type(doc).__name__}")
    raw_locs = doc.get("locations", [])
    if not isinstance(raw_locs, list):
        raise SchemaError("/locations", "expected list")
    locations: list[CodeLocation] = []
    for i, entry in enumerate(raw_locs):
        ptr = f"/locations/{i}"
        if not isinstance(entry, dict):
            raise SchemaError(ptr, "expected object")
        file = entry.get("file")
        line = entry.get("line")
        snippet = entry.get("snippet", "")
        if not isinstance(file, str):
            raise SchemaError(f"{ptr}/file", "expected string")
        if not isinstance(line, int) or isinstance(line, bool) or line <= 0:
            raise SchemaError(f"{ptr}/line", "expected positive integer")
        if not isinstance(snippet, str):
            raise SchemaError(f"{ptr}/snippet", "expected string")
        try:
            file = normalize_source_path(file)
        except PathRejected as exc:
            raise SchemaError(f"{ptr}/file", str(exc)) from None
        locations.append(CodeLocation(file=file, line=line, snippet=snippet[:SNIPPET_LIMIT]))

    raw_map = doc.get("task_map", {})
    if not isinstance(raw_map, dict):
        raise SchemaError("/task_map", "expected object")
    task_map: dict[int, tuple[int, ...]] = {}
    for key, idxs in raw_map.items():
        ptr = f"/task_map/{key}"
        try:
            task_id = int(key)
        except ValueError:
            raise SchemaError(ptr, "key must be a task id") from None
        if not isinstance(idxs, list):
            raise SchemaError(ptr, "expected list of location indices")
        for j, idx in enumerate(idxs):
            if not isinstance(idx, int) or isinstance(idx, bool) or not 0 <= idx < len(locations):
                raise SchemaError(f"{ptr}/{j}", f"location index out of range: {idx!r}")
        task_map[task_id] = tuple(idxs)
    return CodeMap(locations=tuple(locations), task_map=task_map)


def locations_for_task(cm: CodeMap, task_id: int) -> list[CodeLocation]:
    """Call-stack locations for a task, innermost first; [] when unmapped."""
    return [cm.locations[i] for i in cm.task_map.get(task_id, ())]


@dataclass(frozen=True)
class SourceTree:
    """Read-only file map: normalized relative path → bytes."""

    files: dict[str, bytes] = field(default_factory=dict)

    def list_files(self) -> list[str]:
        return sorted(self.files)


@dataclass(frozen=True)
class SourceSlice:
    file: str
    text: str
    start_line: int
    end_line: int
    total_lines: int

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "text": self.text,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "total_lines": self.total_lines,
        }


def read_source(
    tree: SourceTree, file: str, line_window: tuple[int, int] | None = None
) -> SourceSlice:
    """Serve file text (or a 1-based inclusive line window) plus line count.

    Never writes. Whole files above WHOLE_FILE_LIMIT are refused unless a
    window is given.
    """
    norm = normalize_source_path(file)
    if norm not in tree.files:
        raise NotFound(f"no such source file: {file!r}")
    data = tree.files[norm]
    if line_window is None and len(data) > WHOLE_FILE_LIMIT:
        raise TooLarge(f"{file!r} is {len(data)} bytes; request a line window")
    text = data.decode("utf-8", errors="replace")
    lines = text.splitlines(keepends=True)
    total = len(lines)
    if line_window is None:
        return SourceSlice(norm, text, 1, max(total, 1), total)
    start, end = line_window
    start = max(1, min(start, max(total, 1)))
    end = max(start, min(end, max(total, 1)))
    return SourceSlice(norm, "".join(lines[start - 1 : end]), start, end, total)
