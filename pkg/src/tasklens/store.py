"""Workspace persistence: models, named analyses, sharing, forking.

Layout on disk:

    data/
      models/
        {model_id}/
          record.json
          manifest.json
          graph.json
          code_map.json        (optional)
          src/...              (optional)
      analyses/
        {analysis_id}.json

Every record write goes through a temp file in the destination directory
followed by os.replace, so a crash never leaves a half-written JSON file
behind.  Model uploads stage the whole directory and rename it into place.
"""

from __future__ import annotations

import errno
import hmac
import json
import os
import secrets
import shutil
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .errors import Forbidden, NotFound, StorageFull, StoreError
from .ir import ModelGraph, derive_task_work, graph_hash
from .optimize import OptimizationSelection
from .package import (
    CODE_MAP_MEMBER,
    GRAPH_MEMBER,
    MANIFEST_MEMBER,
    SRC_PREFIX,
    ParsedPackage,
    parse_package,
    parse_package_bytes,
    parse_package_members,
)

# Crockford base32, the usual ULID alphabet: sortable and case-unambiguous.
_ID_ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"
_TOKEN_ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"

MODEL_ID_LENGTH = 26
SHARE_TOKEN_LENGTH = 22

_id_lock = threading.Lock()
_last_id = ""


def _encode_base32(value: int, width: int) -> str:
    chars = []
    for _ in range(width):
        chars.append(_ID_ALPHABET[value & 0x1F])
        value >>= 5
    return "".join(reversed(chars))


def new_sortable_id() -> str:
    """26-char id: 48-bit ms timestamp then 80 random bits, Crockford base32.

    Lexicographic order matches creation order; a process-wide monotonic
    bump covers same-millisecond collisions.
    """
    global _last_id
    with _id_lock:
        ts = int(time.time() * 1000) & (1 << 48) - 1
        rand = secrets.randbits(80)
        candidate = _encode_base32(ts, 10) + _encode_base32(rand, 16)
        if candidate <= _last_id:
            # same millisecond and unlucky randomness: bump the previous id
            bumped = int(_last_id[10:].translate(_DECODE_32), 32) + 1
            candidate = _last_id[:10] + _encode_base32(bumped, 16)
        _last_id = candidate
        return candidate


_DECODE_32 = str.maketrans(_ID_ALPHABET, "0123456789abcdefghijklmnopqrstuv")


def new_share_token() -> str:
    return "".join(secrets.choice(_TOKEN_ALPHABET) for _ in range(SHARE_TOKEN_LENGTH))


@dataclass(frozen=True)
class ModelRecord:
    model_id: str
    name: str
    owner: str
    created_at: str
    graph_hash: str
    shared_with: tuple[str, ...] = ()
    link_sharing: bool = False
    share_token: str = ""

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "name": self.name,
            "owner": self.owner,
            "created_at": self.created_at,
            "graph_hash": self.graph_hash,
            "shared_with": list(self.shared_with),
            "link_sharing": self.link_sharing,
            "share_token": self.share_token,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ModelRecord":
        return cls(
            model_id=doc["model_id"],
            name=doc["name"],
            owner=doc["owner"],
            created_at=doc["created_at"],
            graph_hash=doc["graph_hash"],
            shared_with=tuple(doc.get("shared_with", ())),
            link_sharing=bool(doc.get("link_sharing", False)),
            share_token=doc.get("share_token", ""),
        )

    def share_url(self, analysis_id: str | None = None) -> str:
        url = f"/m/{self.model_id}"
        params = []
        if analysis_id:
            params.append(f"analysis={analysis_id}")
        if self.link_sharing:
            params.append(f"t={self.share_token}")
        if params:
            url += "?" + "&".join(params)
        return url


@dataclass(frozen=True)
class Analysis:
    analysis_id: str
    model_id: str
    name: str
    author: str
    created_at: str
    selection: OptimizationSelection
    parent_analysis_id: str | None = None

    def to_json(self) -> dict:
        doc = {
            "analysis_id": self.analysis_id,
            "model_id": self.model_id,
            "name": self.name,
            "author": self.author,
            "created_at": self.created_at,
            "selection": self.selection.to_json(),
        }
        if self.parent_analysis_id is not None:
            doc["parent_analysis_id"] = self.parent_analysis_id
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Analysis":
        return cls(
            analysis_id=doc["analysis_id"],
            model_id=doc["model_id"],
            name=doc["name"],
            author=doc["author"],
            created_at=doc["created_at"],
            selection=OptimizationSelection.from_json(doc["selection"]),
            parent_analysis_id=doc.get("parent_analysis_id"),
        )


def check_access(record: ModelRecord, user: str | None, token: str | None = None) -> bool:
    """True when the caller may read the model.

    Owner and explicitly shared users always pass.  A link token only
    counts while link sharing is enabled, compared in constant time.
    """
    if user is not None and user == record.owner:
        return True
    if user is not None and user in record.shared_with:
        return True
    if record.link_sharing and token is not None and record.share_token:
        return hmac.compare_digest(token, record.share_token)
    return False


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _wrap_oserror(exc: OSError) -> StoreError:
    if exc.errno == errno.ENOSPC:
        return StorageFull(f"data directory out of space: {exc}")
    return StoreError(str(exc))


class Workspace:
    """Disk-backed model and analysis store.

    A single lock serializes writers; readers go straight to the in-memory
    index, which is rebuilt from disk on startup so restarts lose nothing.
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.models_dir = self.data_dir / "models"
        self.analyses_dir = self.data_dir / "analyses"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self.analyses_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: dict[str, ModelRecord] = {}
        self._analyses: dict[str, Analysis] = {}
        self._graphs: dict[str, ModelGraph] = {}
        self._packages: dict[str, ParsedPackage] = {}
        self._load_index()

    # -- index ---------------------------------------------------------

    def _load_index(self) -> None:
        for record_path in sorted(self.models_dir.glob("*/record.json")):
            with open(record_path, "rb") as fh:
                record = ModelRecord.from_json(json.load(fh))
            self._records[record.model_id] = record
        for path in sorted(self.analyses_dir.glob("*.json")):
            with open(path, "rb") as fh:
                analysis = Analysis.from_json(json.load(fh))
            self._analyses[analysis.analysis_id] = analysis

    def _write_json(self, path: Path, doc: dict) -> None:
        tmp = path.parent / f".{path.name}.{os.getpid()}.tmp"
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
            os.replace(tmp, path)
        except OSError as exc:
            if tmp.exists():
                tmp.unlink()
            raise _wrap_oserror(exc) from exc

    # -- models --------------------------------------------------------

    def store_model(
        self,
        package: bytes | str | Path | ParsedPackage,
        owner: str,
        name: str | None = None,
    ) -> tuple[ModelRecord, bool]:
        """Persist an uploaded package.  Returns (record, was_duplicate).

        Re-uploading a graph the owner already stored is a no-op that
        hands back the existing record with the duplicate flag set.
        """
        parsed = self._coerce_package(package)
        digest = graph_hash(parsed.graph)
        with self._lock:
            for record in self._records.values():
                if record.owner == owner and record.graph_hash == digest:
                    return record, True
            model_id = new_sortable_id()
            record = ModelRecord(
                model_id=model_id,
                name=name or parsed.manifest.name,
                owner=owner,
                created_at=_utc_now(),
                graph_hash=digest,
                share_token=new_share_token(),
            )
            self._write_model_dir(model_id, parsed, record)
            self._records[model_id] = record
            self._packages[model_id] = parsed
            return record, False

    def _coerce_package(self, package) -> ParsedPackage:
        if isinstance(package, ParsedPackage):
            return package
        if isinstance(package, bytes):
            return parse_package_bytes(package)
        return parse_package(Path(package))

    def _write_model_dir(self, model_id: str, parsed: ParsedPackage, record: ModelRecord) -> None:
        staging = self.models_dir / f".staging-{model_id}"
        final = self.models_dir / model_id
        try:
            staging.mkdir(parents=True)
            for member, data in sorted(parsed.members.items()):
                dest = staging / member
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_bytes(data)
            with open(staging / "record.json", "w", encoding="utf-8") as fh:
                json.dump(record.to_json(), fh, indent=2, sort_keys=True)
                fh.write("\n")
            os.replace(staging, final)
        except OSError as exc:
            shutil.rmtree(staging, ignore_errors=True)
            raise _wrap_oserror(exc) from exc

    def get_record(self, model_id: str) -> ModelRecord:
        record = self._records.get(model_id)
        if record is None:
            raise NotFound(f"unknown model {model_id!r}")
        return record

    def list_models(self, user: str) -> list[ModelRecord]:
        """Models the user owns or was explicitly shared, oldest first."""
        visible = [
            r
            for r in self._records.values()
            if r.owner == user or user in r.shared_with
        ]
        return sorted(visible, key=lambda r: r.model_id)

    def require_access(
        self, model_id: str, user: str | None, token: str | None = None
    ) -> ModelRecord:
        """Record if the caller can read it; NotFound otherwise.

        Invisible and nonexistent models are indistinguishable on purpose.
        """
        record = self._records.get(model_id)
        if record is None or not check_access(record, user, token):
            raise NotFound(f"unknown model {model_id!r}")
        return record

    def share(
        self,
        model_id: str,
        caller: str,
        users: Iterable[str] | None = None,
        link_sharing: bool | None = None,
    ) -> ModelRecord:
        """Owner-only: replace the shared-user set and/or toggle the link.

        Enabling link sharing mints a fresh token every time so a leaked
        URL dies the moment the owner cycles the toggle.
        """
        with self._lock:
            record = self.get_record(model_id)
            if caller != record.owner:
                raise Forbidden(f"only the owner may share model {model_id!r}")
            updated = record
            if users is not None:
                cleaned = tuple(sorted({u for u in users if u and u != record.owner}))
                updated = replace(updated, shared_with=cleaned)
            if link_sharing is not None and link_sharing != updated.link_sharing:
                token = new_share_token() if link_sharing else updated.share_token
                updated = replace(updated, link_sharing=link_sharing, share_token=token)
            if updated != record:
                self._write_json(self.models_dir / model_id / "record.json", updated.to_json())
                self._records[model_id] = updated
            return updated

    # -- parsed content ------------------------------------------------

    def model_package(self, model_id: str) -> ParsedPackage:
        parsed = self._packages.get(model_id)
        if parsed is not None:
            return parsed
        self.get_record(model_id)
        model_dir = self.models_dir / model_id
        members: dict[str, bytes] = {}
        for path in model_dir.rglob("*"):
            if not path.is_file() or path.name == "record.json":
                continue
            members[path.relative_to(model_dir).as_posix()] = path.read_bytes()
        parsed = parse_package_members(members)
        with self._lock:
            self._packages.setdefault(model_id, parsed)
        return self._packages[model_id]

    def model_graph(self, model_id: str) -> ModelGraph:
        """Parsed graph with derived work estimates, cached per model."""
        graph = self._graphs.get(model_id)
        if graph is not None:
            return graph
        parsed = self.model_package(model_id)
        graph = derive_task_work(parsed.graph, pool_window=parsed.manifest.pool_window)
        with self._lock:
            self._graphs.setdefault(model_id, graph)
        return self._graphs[model_id]

    # -- analyses ------------------------------------------------------

    def save_analysis(
        self,
        model_id: str,
        name: str,
        selection: OptimizationSelection,
        author: str,
        parent_analysis_id: str | None = None,
    ) -> Analysis:
        with self._lock:
            self.get_record(model_id)
            analysis = Analysis(
                analysis_id=new_sortable_id(),
                model_id=model_id,
                name=name,
                author=author,
                created_at=_utc_now(),
                selection=selection,
                parent_analysis_id=parent_analysis_id,
            )
            self._write_json(
                self.analyses_dir / f"{analysis.analysis_id}.json", analysis.to_json()
            )
            self._analyses[analysis.analysis_id] = analysis
            return analysis

    def fork_analysis(self, analysis_id: str, author: str, name: str | None = None) -> Analysis:
        """New analysis copying the parent's selection; the original stays put."""
        parent = self.get_analysis(analysis_id)
        return self.save_analysis(
            model_id=parent.model_id,
            name=name or parent.name,
            selection=parent.selection,
            author=author,
            parent_analysis_id=parent.analysis_id,
        )

    def get_analysis(self, analysis_id: str) -> Analysis:
        analysis = self._analyses.get(analysis_id)
        if analysis is None:
            raise NotFound(f"unknown analysis {analysis_id!r}")
        return analysis

    def list_analyses(self, model_id: str) -> list[Analysis]:
        self.get_record(model_id)
        rows = [a for a in self._analyses.values() if a.model_id == model_id]
        return sorted(rows, key=lambda a: a.analysis_id)
