import io
import json
import tarfile

import pytest

from _graphgen import chain_graph
from tasklens import fixtures, ir, package
from tasklens.errors import (
    GraphValidationError,
    MissingMember,
    PackageError,
    SchemaError,
)

MANIFEST = json.dumps({"name": "m", "created_at": "2026-01-01T00:00:00Z"}).encode()


def make_tar(members, mode="w:gz"):
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode=mode) as tar:
        for name, data in members.items():
            info = tarfile.TarInfo(name)
            info.size = len(data)
            tar.addfile(info, io.BytesIO(data))
    return buf.getvalue()


def minimal_members(**extra):
    g = chain_graph(["conv2d", "elementwise"])
    members = {
        "manifest.json": MANIFEST,
        "graph.json": ir.serialize_graph(g),
    }
    members.update(extra)
    return members


def test_parse_fixture_package(unet_package_bytes, unet):
    parsed = package.parse_package_bytes(unet_package_bytes)
    assert len(parsed.graph.tasks) == len(unet.tasks)
    assert parsed.manifest.name == "unet"
    assert parsed.manifest.pool_window == 4
    assert parsed.code_map.task_map
    assert parsed.source.list_files() == [
        "export.py", "model/blocks.py", "model/unet.py",
    ]
    for required in ("manifest.json", "graph.json", "code_map.json"):
        assert required in parsed.members


def test_directory_and_tar_forms_agree(tmp_path, unet_package_bytes):
    members = fixtures.package_members("unet")
    root = tmp_path / "pkg"
    for name, data in members.items():
        target = root / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    from_dir = package.parse_package(root)
    from_tar = package.parse_package_bytes(unet_package_bytes)
    assert ir.graph_hash(from_dir.graph) == ir.graph_hash(from_tar.graph)
    assert from_dir.source.files == from_tar.source.files
    assert from_dir.code_map == from_tar.code_map


def test_member_bytes_preserved_verbatim():
    members = minimal_members()
    parsed = package.parse_package_bytes(make_tar(members))
    assert parsed.members["graph.json"] == members["graph.json"]
    assert parsed.members["manifest.json"] == members["manifest.json"]


def test_missing_required_members():
    with pytest.raises(MissingMember, match="manifest.json"):
        package.parse_package_bytes(make_tar({"graph.json": b"{}"}))
    with pytest.raises(MissingMember, match="graph.json"):
        package.parse_package_bytes(make_tar({"manifest.json": MANIFEST}))


def test_unrelated_members_ignored():
    members = minimal_members(**{"README.txt": b"hello", "build/junk.o": b"\x00"})
    parsed = package.parse_package_bytes(make_tar(members))
    assert "README.txt" not in parsed.members
    assert "build/junk.o" not in parsed.members


def test_dot_slash_prefix_stripped():
    members = {"./" + k: v for k, v in minimal_members().items()}
    parsed = package.parse_package_bytes(make_tar(members))
    assert "graph.json" in parsed.members


def test_plain_tar_accepted():
    parsed = package.parse_package_bytes(make_tar(minimal_members(), mode="w"))
    assert parsed.manifest.name == "m"


def test_invalid_manifest_json_points_at_member():
    members = minimal_members()
    members["manifest.json"] = b"{not json"
    with pytest.raises(SchemaError) as exc:
        package.parse_package_bytes(make_tar(members))
    assert exc.value.pointer.startswith("manifest.json#")


def test_bad_graph_schema_points_at_member():
    members = minimal_members()
    members["graph.json"] = json.dumps({"schema_version": 1}).encode()
    with pytest.raises(SchemaError) as exc:
        package.parse_package_bytes(make_tar(members))
    assert exc.value.pointer.startswith("graph.json#")


def test_invalid_graph_rejected_with_violations():
    g = chain_graph(["conv2d", "elementwise"])
    doc = json.loads(ir.serialize_graph(g))
    doc["tasks"][1]["inputs"] = ["no-such-tensor"]
    members = minimal_members()
    members["graph.json"] = json.dumps(doc).encode()
    with pytest.raises(GraphValidationError) as exc:
        package.parse_package_bytes(make_tar(members))
    assert any(v.code == "dangling-tensor" for v in exc.value.violations)


def test_manifest_field_types_checked():
    members = minimal_members()
    members["manifest.json"] = json.dumps({"name": 3, "created_at": "x"}).encode()
    with pytest.raises(SchemaError) as exc:
        package.parse_package_bytes(make_tar(members))
    assert exc.value.pointer == "manifest.json#/name"


def test_pool_window_defaults_and_bounds():
    m = package.manifest_from_json(
        {"name": "a", "created_at": "t", "attributes": {"pool_window": 9}}
    )
    assert m.pool_window == 9
    m = package.manifest_from_json({"name": "a", "created_at": "t"})
    assert m.pool_window == 4
    m = package.manifest_from_json(
        {"name": "a", "created_at": "t", "attributes": {"pool_window": -2}}
    )
    assert m.pool_window == 4


# archive hardening


def test_absolute_member_path_rejected():
    members = minimal_members()
    members["/etc/passwd"] = b"root"
    with pytest.raises(PackageError, match="escapes"):
        package.parse_package_bytes(make_tar(members))


def test_traversal_member_path_rejected():
    members = minimal_members()
    members["src/../../escape.py"] = b"x"
    with pytest.raises(PackageError, match="escapes"):
        package.parse_package_bytes(make_tar(members))


def test_symlink_member_rejected():
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w:gz") as tar:
        for name, data in minimal_members().items():
            info = tarfile.TarInfo(name)
            info.size = len(data)
            tar.addfile(info, io.BytesIO(data))
        link = tarfile.TarInfo("src/evil.py")
        link.type = tarfile.SYMTYPE
        link.linkname = "/etc/passwd"
        tar.addfile(link)
    with pytest.raises(PackageError, match="not a regular file"):
        package.parse_package_bytes(buf.getvalue())


def test_member_count_cap(monkeypatch):
    monkeypatch.setattr(package, "MAX_MEMBERS", 2)
    members = minimal_members(**{"src/a.py": b"1", "src/b.py": b"2"})
    with pytest.raises(PackageError, match="too many members"):
        package.parse_package_bytes(make_tar(members))


def test_total_size_cap(monkeypatch):
    monkeypatch.setattr(package, "MAX_TOTAL_BYTES", 64)
    members = minimal_members(**{"src/big.py": b"x" * 200})
    with pytest.raises(PackageError, match="size cap"):
        package.parse_package_bytes(make_tar(members))


def test_garbage_bytes_rejected():
    with pytest.raises(PackageError, match="unreadable archive"):
        package.parse_package_bytes(b"this is not a tarball at all")


def test_bad_source_path_inside_archive():
    # backslashes pass tar checks but fail source normalization
    members = minimal_members(**{"src/a\\b.py": b"x"})
    with pytest.raises(PackageError, match="illegal source path"):
        package.parse_package_bytes(make_tar(members))


def test_missing_path_raises_missing_member(tmp_path):
    with pytest.raises(MissingMember):
        package.parse_package(tmp_path / "nope.tgz")


def test_load_model_derives_work(tmp_path):
    members = fixtures.package_members("unet")
    doc = json.loads(members["graph.json"])
    stripped = {t["id"]: t.pop("macs") for t in doc["tasks"]}
    members["graph.json"] = json.dumps(doc).encode()
    path = tmp_path / "stripped.tgz"
    fixtures.write_package(path, members)
    loaded = package.load_model(path)
    derived = {t.id: t.macs for t in loaded.graph.tasks}
    assert derived == stripped  # derivation reproduces the generator's counts
