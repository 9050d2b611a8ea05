"""Repository export and import as a single-file bundle.

A bundle is a ZIP archive with stored (uncompressed) entries:

    manifest.json           format version, HEAD, branch table, object list
    objects/<id>            loose-object preimage, one entry per object
    annotations/<id>        annotation records for one commit

Entries are written in sorted name order with a pinned timestamp so that
exporting the same repository twice yields byte-identical archives.
Import re-hashes every object and cross-checks the manifest before a
single byte lands in the destination.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import zipfile
import zlib

from ..clock import parse_rfc3339
from ..errors import CorruptBundle, Unsupported
from .objects import deserialize_object, is_object_id
from .repo import Repository, _atomic_write, _unescape_annotation, validate_branch_name

FORMAT_VERSION = 1

_PINNED_DATE = (1980, 1, 1, 0, 0, 0)


def export_bundle(repo: Repository) -> bytes:
    objects = {}
    objects_dir = os.path.join(repo.root, "objects")
    for shard in sorted(os.listdir(objects_dir)):
        shard_dir = os.path.join(objects_dir, shard)
        if len(shard) != 2 or not os.path.isdir(shard_dir):
            continue
        for rest in sorted(os.listdir(shard_dir)):
            oid = shard + rest
            if not is_object_id(oid):
                continue
            kind, content = repo._read_object(oid)
            objects[oid] = kind.encode() + b" " + str(len(content)).encode() + b"\x00" + content

    annotations = {}
    annotations_dir = os.path.join(repo.root, "annotations")
    if os.path.isdir(annotations_dir):
        for name in sorted(os.listdir(annotations_dir)):
            path = os.path.join(annotations_dir, name)
            if is_object_id(name) and os.path.isfile(path):
                with open(path, "rb") as fh:
                    annotations[name] = fh.read()

    mode, value = repo.head()
    manifest = {
        "format_version": FORMAT_VERSION,
        "head": {"mode": mode, "value": value},
        "branches": repo.branches(),
        "objects": sorted(objects),
    }
    manifest_bytes = (
        json.dumps(manifest, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"
    ).encode()

    entries = [("manifest.json", manifest_bytes)]
    entries += [(f"annotations/{oid}", data) for oid, data in sorted(annotations.items())]
    entries += [(f"objects/{oid}", data) for oid, data in sorted(objects.items())]
    entries.sort(key=lambda pair: pair[0])

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, data in entries:
            info = zipfile.ZipInfo(name, date_time=_PINNED_DATE)
            info.compress_type = zipfile.ZIP_STORED
            info.create_system = 3
            info.external_attr = 0o100644 << 16
            zf.writestr(info, data)
    return buf.getvalue()


def write_bundle(repo: Repository, path: str) -> None:
    data = export_bundle(repo)
    _atomic_write(path, data)


def import_bundle(data: bytes, dest_root: str) -> Repository:
    if not data:
        raise Unsupported("empty bundle")
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise Unsupported(f"not a bundle archive: {exc}") from None

    with zf:
        names = zf.namelist()
        if "manifest.json" not in names:
            raise Unsupported("bundle has no manifest")
        try:
            manifest = json.loads(zf.read("manifest.json").decode())
        except (ValueError, UnicodeDecodeError) as exc:
            raise CorruptBundle(f"manifest unreadable: {exc}") from None
        if not isinstance(manifest, dict):
            raise CorruptBundle("manifest is not an object")
        version = manifest.get("format_version")
        if version != FORMAT_VERSION:
            raise Unsupported(f"unsupported bundle format_version: {version!r}")

        objects = {}
        annotations = {}
        for name in names:
            if name == "manifest.json":
                continue
            prefix, _, oid = name.partition("/")
            if prefix == "objects" and is_object_id(oid):
                objects[oid] = zf.read(name)
            elif prefix == "annotations" and is_object_id(oid):
                annotations[oid] = zf.read(name)
            else:
                raise CorruptBundle(f"unexpected bundle entry: {name}")

    if sorted(objects) != manifest.get("objects"):
        raise CorruptBundle("manifest object list does not match archive contents")

    parsed = {}
    for oid, preimage in sorted(objects.items()):
        if hashlib.sha1(preimage).hexdigest() != oid:
            raise CorruptBundle(f"object {oid} fails digest check")
        nul = preimage.find(b"\x00")
        if nul < 0:
            raise CorruptBundle(f"object {oid} lacks header terminator")
        kind, _, length = preimage[:nul].partition(b" ")
        content = preimage[nul + 1 :]
        if length != str(len(content)).encode():
            raise CorruptBundle(f"object {oid} has wrong length header")
        try:
            parsed[oid] = deserialize_object(kind.decode(), content)
        except Exception as exc:
            raise CorruptBundle(f"object {oid} malformed: {exc}") from None

    commit_ids = {oid for oid, obj in parsed.items() if getattr(obj, "kind", "") == "commit"}

    branches = manifest.get("branches")
    if not isinstance(branches, dict):
        raise CorruptBundle("manifest branch table malformed")
    for name, target in branches.items():
        try:
            validate_branch_name(name)
        except Exception as exc:
            raise CorruptBundle(f"bundle branch name invalid: {exc}") from None
        if target not in commit_ids:
            raise CorruptBundle(f"branch {name!r} points outside the bundle: {target}")

    head = manifest.get("head")
    if not isinstance(head, dict) or head.get("mode") not in ("branch", "detached"):
        raise CorruptBundle("manifest HEAD malformed")
    if head["mode"] == "branch":
        try:
            validate_branch_name(head["value"])
        except Exception as exc:
            raise CorruptBundle(f"bundle HEAD invalid: {exc}") from None
    elif head["value"] not in commit_ids:
        raise CorruptBundle(f"HEAD points outside the bundle: {head['value']}")

    for oid, records in sorted(annotations.items()):
        if oid not in commit_ids:
            raise CorruptBundle(f"annotations for unknown commit: {oid}")
        try:
            text = records.decode()
        except UnicodeDecodeError as exc:
            raise CorruptBundle(f"annotations for {oid} undecodable: {exc}") from None
        for line in text.split("\n"):
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise CorruptBundle(f"annotation record malformed for {oid}")
            try:
                parse_rfc3339(fields[0])
                _unescape_annotation(fields[1])
                _unescape_annotation(fields[2])
            except Exception as exc:
                raise CorruptBundle(f"annotation record malformed for {oid}: {exc}") from None

    repo = Repository.init(dest_root)
    for oid, preimage in objects.items():
        path = repo._object_path(oid)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        _atomic_write(path, zlib.compress(preimage))
    for name, target in sorted(branches.items()):
        ref_path = os.path.join(repo.root, "refs", "heads", *name.split("/"))
        os.makedirs(os.path.dirname(ref_path), exist_ok=True)
        _atomic_write(ref_path, target.encode() + b"\n")
    if head["mode"] == "branch":
        repo.set_head_branch(head["value"])
    else:
        repo.set_head_detached(head["value"])
    for oid, records in annotations.items():
        _atomic_write(os.path.join(repo.root, "annotations", oid), records)
    return repo


def read_bundle(path: str, dest_root: str) -> Repository:
    with open(path, "rb") as fh:
        return import_bundle(fh.read(), dest_root)
