"""On-disk repository: loose objects, branches, HEAD, annotations.

Layout mirrors a bare Git repository closely enough that stock tooling
can walk the history::

    <root>/objects/ab/cdef...   zlib-compressed loose objects
    <root>/refs/heads/<name>    40 hex digits + newline
    <root>/HEAD                 "ref: refs/heads/<name>" or detached id
    <root>/annotations/<id>     tab-separated annotation records

History is append-only: branch updates must be fast-forward and exactly
one root commit (no parents) may ever exist.
"""

from __future__ import annotations

import os
import zlib
from dataclasses import dataclass, replace

from ..clock import Timestamp, parse_rfc3339
from ..errors import AlreadyExists, InvalidInput, InvalidName, IntegrityError, NotFound, RepoError
from .objects import (
    Blob,
    StateCommit,
    Tree,
    deserialize_object,
    hash_object,
    is_object_id,
    serialize_object,
)

_BRANCH_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-/")


def validate_branch_name(name: str) -> None:
    if not name or len(name) > 250:
        raise InvalidName(f"branch name length out of range: {name!r}")
    if not set(name) <= _BRANCH_CHARS:
        raise InvalidName(f"branch name has invalid characters: {name!r}")
    if name.startswith("/") or name.endswith("/") or "//" in name:
        raise InvalidName(f"branch name has empty path segment: {name!r}")
    for segment in name.split("/"):
        # Reject "." / ".." and other dot-leading segments outright: ref
        # names become file paths, so traversal must be impossible.
        if segment.startswith("."):
            raise InvalidName(f"branch name segment starts with '.': {name!r}")
        if segment.endswith(".lock"):
            raise InvalidName(f"branch name segment ends with '.lock': {name!r}")


def _escape_annotation(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape_annotation(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is None:
                raise InvalidInput(f"bad escape in annotation: \\{nxt}")
            out.append(mapped)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class Annotation:
    timestamp: Timestamp
    author: str
    text: str


class Repository:
    """A provenance store rooted at a directory."""

    def __init__(self, root: str):
        self.root = os.path.abspath(root)

    # -- lifecycle -----------------------------------------------------

    @classmethod
    def init(cls, root: str) -> "Repository":
        root = os.path.abspath(root)
        head_path = os.path.join(root, "HEAD")
        if os.path.exists(head_path):
            raise AlreadyExists(f"repository already exists at {root}")
        os.makedirs(os.path.join(root, "objects"), exist_ok=True)
        os.makedirs(os.path.join(root, "refs", "heads"), exist_ok=True)
        os.makedirs(os.path.join(root, "annotations"), exist_ok=True)
        _atomic_write(head_path, b"ref: refs/heads/main\n")
        return cls(root)

    @classmethod
    def open(cls, root: str) -> "Repository":
        root = os.path.abspath(root)
        if not os.path.isfile(os.path.join(root, "HEAD")):
            raise NotFound(f"no repository at {root}")
        return cls(root)

    # -- objects -------------------------------------------------------

    def _object_path(self, oid: str) -> str:
        return os.path.join(self.root, "objects", oid[:2], oid[2:])

    def put_object(self, obj) -> str:
        kind, content = serialize_object(obj)
        oid = hash_object(kind, content)
        path = self._object_path(oid)
        if not os.path.exists(path):
            os.makedirs(os.path.dirname(path), exist_ok=True)
            preimage = kind.encode() + b" " + str(len(content)).encode() + b"\x00" + content
            _atomic_write(path, zlib.compress(preimage))
        return oid

    def has_object(self, oid: str) -> bool:
        return is_object_id(oid) and os.path.exists(self._object_path(oid))

    def _read_object(self, oid: str) -> tuple[str, bytes]:
        if not is_object_id(oid):
            raise InvalidInput(f"malformed object id: {oid!r}")
        path = self._object_path(oid)
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except FileNotFoundError:
            raise NotFound(f"object not found: {oid}") from None
        try:
            preimage = zlib.decompress(raw)
        except zlib.error as exc:
            raise IntegrityError(f"object {oid} is not valid zlib data: {exc}") from None
        nul = preimage.find(b"\x00")
        if nul < 0:
            raise IntegrityError(f"object {oid} lacks header terminator")
        kind, _, length = preimage[:nul].partition(b" ")
        content = preimage[nul + 1 :]
        if length != str(len(content)).encode():
            raise IntegrityError(f"object {oid} has wrong length header")
        actual = hash_object(kind.decode(), content)
        if actual != oid:
            raise IntegrityError(f"object {oid} stored under wrong id (hashes to {actual})")
        return kind.decode(), content

    def get_object(self, oid: str):
        kind, content = self._read_object(oid)
        return deserialize_object(kind, content)

    def get_blob(self, oid: str) -> Blob:
        obj = self.get_object(oid)
        if not isinstance(obj, Blob):
            raise InvalidInput(f"object {oid} is not a blob")
        return obj

    def get_tree(self, oid: str) -> Tree:
        obj = self.get_object(oid)
        if not isinstance(obj, Tree):
            raise InvalidInput(f"object {oid} is not a tree")
        return obj

    def get_commit(self, oid: str) -> StateCommit:
        obj = self.get_object(oid)
        if not isinstance(obj, StateCommit):
            raise InvalidInput(f"object {oid} is not a commit")
        return replace(obj, id=oid)

    # -- commits -------------------------------------------------------

    def _has_any_commit(self) -> bool:
        if self.branches():
            return True
        objects_dir = os.path.join(self.root, "objects")
        for shard in sorted(os.listdir(objects_dir)):
            shard_dir = os.path.join(objects_dir, shard)
            if len(shard) != 2 or not os.path.isdir(shard_dir):
                continue
            for rest in os.listdir(shard_dir):
                with open(os.path.join(shard_dir, rest), "rb") as fh:
                    # Header fits well within one decompressed block.
                    head = zlib.decompressobj().decompress(fh.read(128), 16)
                if head.startswith(b"commit"):
                    return True
        return False

    def commit(
        self,
        tree: str,
        parents,
        author: str,
        timestamp: Timestamp,
        message: str,
        state_kind: str,
    ) -> str:
        parents = tuple(parents)
        self.get_tree(tree)
        for parent in parents:
            self.get_commit(parent)
        if not parents and self._has_any_commit():
            raise RepoError("a root commit already exists; new commits need a parent")
        commit = StateCommit(
            tree=tree,
            parents=parents,
            author=author,
            timestamp=timestamp,
            message=message,
            state_kind=state_kind,
        )
        return self.put_object(commit)

    # -- refs ----------------------------------------------------------

    def _branch_path(self, name: str) -> str:
        validate_branch_name(name)
        return os.path.join(self.root, "refs", "heads", *name.split("/"))

    def branches(self) -> dict[str, str]:
        heads = os.path.join(self.root, "refs", "heads")
        found = {}
        for dirpath, _dirnames, filenames in os.walk(heads):
            for filename in filenames:
                path = os.path.join(dirpath, filename)
                name = os.path.relpath(path, heads).replace(os.sep, "/")
                found[name] = _read_ref_file(path, name)
        return dict(sorted(found.items()))

    def branch_target(self, name: str) -> str:
        path = self._branch_path(name)
        if not os.path.isfile(path):
            raise NotFound(f"no branch named {name!r}")
        return _read_ref_file(path, name)

    def create_branch(self, name: str, target: str) -> None:
        path = self._branch_path(name)
        if os.path.exists(path):
            raise AlreadyExists(f"branch already exists: {name!r}")
        self.get_commit(target)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        _atomic_write(path, target.encode() + b"\n")

    def update_ref(self, name: str, target: str) -> None:
        """Move a branch forward. Creation is allowed; rewinds are not."""
        path = self._branch_path(name)
        self.get_commit(target)
        if os.path.isfile(path):
            old = _read_ref_file(path, name)
            if old != target and old not in self._ancestors(target):
                raise RepoError(f"non-fast-forward update of {name!r} refused")
        else:
            os.makedirs(os.path.dirname(path), exist_ok=True)
        _atomic_write(path, target.encode() + b"\n")

    def _ancestors(self, start: str) -> set[str]:
        seen = set()
        stack = [start]
        while stack:
            oid = stack.pop()
            if oid in seen:
                continue
            seen.add(oid)
            stack.extend(self.get_commit(oid).parents)
        return seen

    # -- HEAD ----------------------------------------------------------

    def head(self) -> tuple[str, str]:
        """Return ("branch", name) or ("detached", commit id)."""
        with open(os.path.join(self.root, "HEAD"), "rb") as fh:
            raw = fh.read().decode().rstrip("\n")
        if raw.startswith("ref: refs/heads/"):
            return "branch", raw[len("ref: refs/heads/") :]
        if is_object_id(raw):
            return "detached", raw
        raise IntegrityError(f"HEAD is malformed: {raw!r}")

    def resolve_head(self) -> str | None:
        mode, value = self.head()
        if mode == "detached":
            return value
        try:
            return self.branch_target(value)
        except NotFound:
            return None

    def set_head_branch(self, name: str) -> None:
        validate_branch_name(name)
        _atomic_write(os.path.join(self.root, "HEAD"), f"ref: refs/heads/{name}\n".encode())

    def set_head_detached(self, oid: str) -> None:
        self.get_commit(oid)
        _atomic_write(os.path.join(self.root, "HEAD"), oid.encode() + b"\n")

    def resolve_ref(self, ref: str) -> str:
        """Resolve a branch name, "HEAD", or full commit id to a commit id."""
        if ref == "HEAD":
            oid = self.resolve_head()
            if oid is None:
                raise NotFound("HEAD points at a branch with no commits")
            return oid
        if is_object_id(ref):
            self.get_commit(ref)
            return ref
        return self.branch_target(ref)

    # -- history -------------------------------------------------------

    def log(self, start=None) -> list[StateCommit]:
        """Commits in topological order, children before parents.

        Ties (commits whose relative order the graph does not fix) break
        by timestamp descending, then id ascending.
        """
        import heapq

        if start is None:
            roots = set(self.branches().values())
            mode, value = self.head()
            if mode == "detached":
                roots.add(value)
        elif isinstance(start, str):
            roots = {self.resolve_ref(start)}
        else:
            roots = {self.resolve_ref(ref) for ref in start}

        commits = {}
        stack = list(roots)
        while stack:
            oid = stack.pop()
            if oid in commits:
                continue
            commit = self.get_commit(oid)
            commits[oid] = commit
            stack.extend(commit.parents)

        pending_children = {oid: 0 for oid in commits}
        for commit in commits.values():
            for parent in set(commit.parents):
                pending_children[parent] += 1

        heap = [
            (-commit.timestamp.seconds, oid)
            for oid, commit in commits.items()
            if pending_children[oid] == 0
        ]
        heapq.heapify(heap)
        out = []
        while heap:
            _, oid = heapq.heappop(heap)
            commit = commits[oid]
            out.append(commit)
            for parent in set(commit.parents):
                pending_children[parent] -= 1
                if pending_children[parent] == 0:
                    heapq.heappush(heap, (-commits[parent].timestamp.seconds, parent))
        if len(out) != len(commits):
            raise IntegrityError("history contains a cycle")
        return out

    # -- annotations ---------------------------------------------------

    def annotate(self, oid: str, author: str, text: str, timestamp: Timestamp) -> Annotation:
        self.get_commit(oid)
        if not author or "\t" in author or "\n" in author or "\r" in author:
            raise InvalidInput(f"annotation author malformed: {author!r}")
        record = "\t".join(
            [timestamp.rfc3339(), _escape_annotation(author), _escape_annotation(text)]
        )
        path = os.path.join(self.root, "annotations", oid)
        with open(path, "a", encoding="utf-8", newline="") as fh:
            fh.write(record + "\n")
        return Annotation(timestamp=timestamp, author=author, text=text)

    def get_annotations(self, oid: str) -> list[Annotation]:
        self.get_commit(oid)
        path = os.path.join(self.root, "annotations", oid)
        if not os.path.isfile(path):
            return []
        out = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for line in fh.read().split("\n"):
                if not line:
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise IntegrityError(f"annotation record malformed for {oid}")
                out.append(
                    Annotation(
                        timestamp=parse_rfc3339(fields[0]),
                        author=_unescape_annotation(fields[1]),
                        text=_unescape_annotation(fields[2]),
                    )
                )
        return out

    # -- integrity -----------------------------------------------------

    def verify(self) -> list[str]:
        """Check the store end to end; return human-readable findings."""
        findings = []
        objects_dir = os.path.join(self.root, "objects")
        commits = {}
        trees = {}
        blob_ids = set()
        for shard in sorted(os.listdir(objects_dir)):
            shard_dir = os.path.join(objects_dir, shard)
            if not os.path.isdir(shard_dir):
                findings.append(f"stray file in objects/: {shard}")
                continue
            for rest in sorted(os.listdir(shard_dir)):
                oid = shard + rest
                if not is_object_id(oid):
                    findings.append(f"stray file in objects/: {shard}/{rest}")
                    continue
                try:
                    kind, content = self._read_object(oid)
                    obj = deserialize_object(kind, content)
                except Exception as exc:
                    findings.append(f"object {oid} unreadable: {exc}")
                    continue
                if isinstance(obj, StateCommit):
                    commits[oid] = replace(obj, id=oid)
                elif isinstance(obj, Tree):
                    trees[oid] = obj
                else:
                    blob_ids.add(oid)

        for oid, tree in trees.items():
            for entry in tree.entries:
                if entry.kind == "blob" and entry.oid not in blob_ids:
                    findings.append(f"tree {oid} references missing blob {entry.oid}")
                elif entry.kind == "tree" and entry.oid not in trees:
                    findings.append(f"tree {oid} references missing tree {entry.oid}")

        roots = []
        for oid, commit in commits.items():
            if commit.tree not in trees:
                findings.append(f"commit {oid} references missing tree {commit.tree}")
            for parent in commit.parents:
                if parent not in commits:
                    findings.append(f"commit {oid} references missing parent {parent}")
            if not commit.parents:
                roots.append(oid)
        if not commits:
            findings.append("repository has no commits")
        elif len(roots) != 1:
            findings.append(f"expected exactly one root commit, found {len(roots)}")

        reachable = set()
        seeds = []
        for name, target in self.branches().items():
            if target not in commits:
                findings.append(f"branch {name} points at missing commit {target}")
            else:
                seeds.append(target)
        try:
            mode, value = self.head()
        except IntegrityError as exc:
            findings.append(str(exc))
        else:
            if mode == "detached":
                if value not in commits:
                    findings.append(f"HEAD points at missing commit {value}")
                else:
                    seeds.append(value)
            elif commits and not os.path.isfile(self._branch_path(value)):
                findings.append(f"HEAD points at missing branch {value!r}")
        stack = list(seeds)
        while stack:
            oid = stack.pop()
            if oid in reachable or oid not in commits:
                continue
            reachable.add(oid)
            stack.extend(commits[oid].parents)
        for oid in sorted(commits):
            if oid not in reachable:
                findings.append(f"commit {oid} is unreachable from any branch or HEAD")

        annotations_dir = os.path.join(self.root, "annotations")
        if os.path.isdir(annotations_dir):
            for name in sorted(os.listdir(annotations_dir)):
                if not is_object_id(name) or name not in commits:
                    findings.append(f"annotation file for unknown commit: {name}")
                    continue
                try:
                    self.get_annotations(name)
                except Exception as exc:
                    findings.append(f"annotations for {name} unreadable: {exc}")
        return findings


def _read_ref_file(path: str, name: str) -> str:
    with open(path, "rb") as fh:
        raw = fh.read()
    value = raw.decode().rstrip("\n")
    if not is_object_id(value):
        raise IntegrityError(f"ref {name!r} is malformed")
    return value


def _atomic_write(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
