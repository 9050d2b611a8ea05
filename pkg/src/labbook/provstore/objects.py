"""Content-addressed object model: blobs, trees, state commits.

Object identity is the SHA-1 of the loose-object preimage
``b"<kind> <byte-length>\\0" + content``, hex-encoded. Trees use the
stock binary entry layout (``<mode> <name>\\0<20-byte id>``) with mode
100644 for blobs and 40000 for subtrees, so an on-disk repository can be
inspected with ordinary Git tooling. Commits are text records; the state
kind rides as a ``Kind:`` trailer at the end of the message body so it
survives round-trips without extra headers.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from ..clock import Timestamp, parse_tz_string
from ..errors import InvalidInput

OBJECT_KINDS = ("blob", "tree", "commit")

COMMIT_KINDS = frozenset(
    {
        "session_start",
        "measurement_added",
        "measurement_removed",
        "camera_moved",
        "mindmap_update",
        "notes_update",
        "redo",
    }
)

MAX_PARENTS = 2

_OBJECT_ID_RE = re.compile(r"^[0-9a-f]{40}$")
_AUTHOR_LINE_RE = re.compile(r"^(author|committer) (.*) <(.*)> (\d+) ([+-]\d{4})$")

_TREE_MODES = {b"100644": "blob", b"40000": "tree"}
_KIND_MODES = {"blob": b"100644", "tree": b"40000"}


def is_object_id(value) -> bool:
    return isinstance(value, str) and _OBJECT_ID_RE.match(value) is not None


def hash_object(kind: str, content: bytes) -> str:
    """SHA-1 of the loose-object preimage, hex-encoded."""
    if kind not in OBJECT_KINDS:
        raise InvalidInput(f"unknown object kind: {kind!r}")
    preimage = kind.encode() + b" " + str(len(content)).encode() + b"\x00" + content
    return hashlib.sha1(preimage).hexdigest()


@dataclass(frozen=True)
class Blob:
    data: bytes

    kind = "blob"

    def serialize(self) -> bytes:
        return self.data


@dataclass(frozen=True)
class TreeEntry:
    name: str
    kind: str  # "blob" | "tree"
    oid: str


@dataclass(frozen=True)
class Tree:
    entries: tuple[TreeEntry, ...]

    kind = "tree"

    def serialize(self) -> bytes:
        validate_tree_entries(self.entries)
        out = bytearray()
        for entry in self.entries:
            out += _KIND_MODES[entry.kind] + b" " + entry.name.encode() + b"\x00"
            out += bytes.fromhex(entry.oid)
        return bytes(out)

    def get(self, name: str) -> TreeEntry | None:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None


def validate_tree_entries(entries) -> None:
    """Enforce canonical form: unique, non-empty, separator-free names in
    bytewise-ascending order, referencing well-formed ids."""
    previous = None
    seen = set()
    for entry in entries:
        if entry.kind not in _KIND_MODES:
            raise InvalidInput(f"tree entry kind must be blob or tree: {entry.kind!r}")
        if not entry.name:
            raise InvalidInput("tree entry name is empty")
        if "/" in entry.name or "\\" in entry.name or "\x00" in entry.name:
            raise InvalidInput(f"tree entry name contains separator: {entry.name!r}")
        if not is_object_id(entry.oid):
            raise InvalidInput(f"tree entry id malformed: {entry.oid!r}")
        name_bytes = entry.name.encode()
        if name_bytes in seen:
            raise InvalidInput(f"duplicate tree entry: {entry.name!r}")
        if previous is not None and name_bytes < previous:
            raise InvalidInput("tree entries not sorted bytewise by name")
        seen.add(name_bytes)
        previous = name_bytes


def parse_tree(content: bytes) -> Tree:
    entries = []
    pos = 0
    while pos < len(content):
        space = content.find(b" ", pos)
        nul = content.find(b"\x00", pos)
        if space < 0 or nul < 0 or nul < space or nul + 21 > len(content):
            raise InvalidInput("malformed tree entry")
        mode = content[pos:space]
        if mode not in _TREE_MODES:
            raise InvalidInput(f"unsupported tree entry mode: {mode!r}")
        name = content[space + 1 : nul].decode()
        oid = content[nul + 1 : nul + 21].hex()
        entries.append(TreeEntry(name=name, kind=_TREE_MODES[mode], oid=oid))
        pos = nul + 21
    tree = Tree(entries=tuple(entries))
    validate_tree_entries(tree.entries)
    return tree


@dataclass(frozen=True)
class StateCommit:
    tree: str
    parents: tuple[str, ...]
    author: str
    timestamp: Timestamp
    message: str
    state_kind: str
    id: str = field(default="", compare=False)

    kind = "commit"

    def serialize(self) -> bytes:
        validate_commit_fields(self)
        ident = f"{self.author} <> {self.timestamp.seconds} {self.timestamp.tz_string()}"
        lines = [f"tree {self.tree}"]
        lines += [f"parent {p}" for p in self.parents]
        lines.append(f"author {ident}")
        lines.append(f"committer {ident}")
        lines.append("")
        body = serialize_message(self.message, self.state_kind)
        return ("\n".join(lines) + "\n" + body).encode()


def validate_commit_fields(commit: StateCommit) -> None:
    if not is_object_id(commit.tree):
        raise InvalidInput(f"commit tree id malformed: {commit.tree!r}")
    if len(commit.parents) > MAX_PARENTS:
        raise InvalidInput(f"too many parents: {len(commit.parents)}")
    for parent in commit.parents:
        if not is_object_id(parent):
            raise InvalidInput(f"parent id malformed: {parent!r}")
    if commit.state_kind not in COMMIT_KINDS:
        raise InvalidInput(f"unknown commit kind: {commit.state_kind!r}")
    if "\n" in commit.author or "<" in commit.author or ">" in commit.author:
        raise InvalidInput(f"author contains reserved characters: {commit.author!r}")


def serialize_message(message: str, state_kind: str) -> str:
    trailer = f"Kind: {state_kind}\n"
    if message:
        return message + "\n\n" + trailer
    return trailer


def parse_message(body: str) -> tuple[str, str]:
    """Split a serialized message body into (message, state kind)."""
    lines = body.splitlines(keepends=True)
    if not lines or not lines[-1].startswith("Kind: "):
        raise InvalidInput("commit message lacks Kind trailer")
    state_kind = lines[-1][len("Kind: ") :].rstrip("\n")
    if state_kind not in COMMIT_KINDS:
        raise InvalidInput(f"unknown commit kind: {state_kind!r}")
    rest = "".join(lines[:-1])
    if rest == "":
        return "", state_kind
    if not rest.endswith("\n\n"):
        raise InvalidInput("malformed commit message body")
    return rest[:-2], state_kind


def parse_commit(content: bytes) -> StateCommit:
    text = content.decode()
    head, sep, body = text.partition("\n\n")
    if not sep:
        raise InvalidInput("commit lacks message separator")
    tree = None
    parents = []
    author = None
    timestamp = None
    for line in head.split("\n"):
        if line.startswith("tree "):
            tree = line[5:]
        elif line.startswith("parent "):
            parents.append(line[7:])
        elif line.startswith(("author ", "committer ")):
            match = _AUTHOR_LINE_RE.match(line)
            if not match:
                raise InvalidInput(f"malformed identity line: {line!r}")
            if line.startswith("author "):
                author = match.group(2)
                timestamp = Timestamp(int(match.group(4)), parse_tz_string(match.group(5)))
        else:
            raise InvalidInput(f"unknown commit header: {line!r}")
    if tree is None or author is None or timestamp is None:
        raise InvalidInput("commit missing required headers")
    message, state_kind = parse_message(body)
    commit = StateCommit(
        tree=tree,
        parents=tuple(parents),
        author=author,
        timestamp=timestamp,
        message=message,
        state_kind=state_kind,
    )
    validate_commit_fields(commit)
    return commit


def serialize_object(obj) -> tuple[str, bytes]:
    """Return (kind, canonical bytes) for a Blob, Tree or StateCommit."""
    if isinstance(obj, (Blob, Tree, StateCommit)):
        return obj.kind, obj.serialize()
    raise InvalidInput(f"not a storable object: {type(obj).__name__}")


def deserialize_object(kind: str, content: bytes):
    if kind == "blob":
        return Blob(data=content)
    if kind == "tree":
        return parse_tree(content)
    if kind == "commit":
        return parse_commit(content)
    raise InvalidInput(f"unknown object kind: {kind!r}")
