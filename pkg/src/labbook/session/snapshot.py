"""Snapshot schema: the five files that make up one captured tool state.

A snapshot stores, per commit::

    camera.json         {"orientation": [w,x,y,z], "position": [x,y,z]}
    measurements.json   ordered list of measurement objects
    mindmap.json        {"nodes": [...], "edges": [...]}
    notes.md            raw UTF-8 text
    screenshot.png      PNG bytes

JSON files are written in canonical form (sorted keys, no insignificant
whitespace, UTF-8, line-feed terminated) so identical states hash to
identical tree ids. Validators normalize every number to float before
hashing; this keeps parse/serialize round-trips byte-stable.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass

from ..errors import InvalidSnapshot
from ..provstore.objects import Blob, Tree, TreeEntry, hash_object, is_object_id
from ..provstore.repo import Repository

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
MAX_SCREENSHOT_BYTES = 4 * 1024 * 1024

# 1x1 gray pixel; the screenshot of a freshly created repository.
EMPTY_PNG = (
    b"\x89PNG\r\n\x1a\n\x00\x00\x00\rIHDR\x00\x00\x00\x01\x00\x00\x00\x01"
    b"\x08\x02\x00\x00\x00\x90wS\xde\x00\x00\x00\x0cIDATx\xdachhh\x00\x00"
    b"\x03\x04\x01\x81u.\x01\xbc\x00\x00\x00\x00IEND\xaeB`\x82"
)

MEASUREMENT_KINDS = ("location_marker", "distance", "strike_dip")

SNAPSHOT_FILES = ("camera.json", "measurements.json", "mindmap.json", "notes.md", "screenshot.png")


def canonical_json(value) -> bytes:
    text = json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return (text + "\n").encode()


def _as_float(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidSnapshot(f"{what} is not a number: {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise InvalidSnapshot(f"{what} is not finite: {value!r}")
    return out


def _as_floats(value, count: int, what: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != count:
        raise InvalidSnapshot(f"{what} must be a list of {count} numbers")
    return [_as_float(v, what) for v in value]


def _as_text(value, what: str, max_len: int = 1 << 20) -> str:
    if not isinstance(value, str):
        raise InvalidSnapshot(f"{what} is not a string: {value!r}")
    if len(value) > max_len:
        raise InvalidSnapshot(f"{what} too long ({len(value)} > {max_len})")
    return value


def _require_keys(obj, keys: frozenset, what: str) -> None:
    if not isinstance(obj, dict):
        raise InvalidSnapshot(f"{what} is not an object")
    if set(obj) != keys:
        raise InvalidSnapshot(f"{what} keys must be exactly {sorted(keys)}, got {sorted(obj)}")


_CAMERA_KEYS = frozenset({"position", "orientation"})


def validate_camera(obj) -> dict:
    _require_keys(obj, _CAMERA_KEYS, "camera")
    position = _as_floats(obj["position"], 3, "camera position")
    orientation = _as_floats(obj["orientation"], 4, "camera orientation")
    norm = math.sqrt(sum(c * c for c in orientation))
    if abs(norm - 1.0) > 1e-9:
        raise InvalidSnapshot(f"camera orientation is not a unit quaternion (|q|={norm})")
    return {"orientation": orientation, "position": position}


def default_camera() -> dict:
    return {"orientation": [1.0, 0.0, 0.0, 0.0], "position": [0.0, 0.0, 0.0]}


_ID_OK = frozenset("0123456789ABCDEFGHJKMNPQRSTVWXYZabcdefghijklmnopqrstuvwxyz-_.")

_MEASUREMENT_KEYS = {
    "location_marker": frozenset({"id", "kind", "label", "p"}),
    "distance": frozenset({"a", "b", "id", "kind", "length_m"}),
    "strike_dip": frozenset(
        {"dip_deg", "dip_direction_deg", "id", "kind", "p1", "p2", "p3", "strike_deg"}
    ),
}


def _angle_gap(a: float, b: float) -> float:
    gap = abs(a - b) % 360.0
    return min(gap, 360.0 - gap)


def validate_measurement(obj, require_id: bool = True) -> dict:
    if not isinstance(obj, dict):
        raise InvalidSnapshot("measurement is not an object")
    kind = obj.get("kind")
    if kind not in MEASUREMENT_KINDS:
        raise InvalidSnapshot(f"unknown measurement kind: {kind!r}")
    expected = _MEASUREMENT_KEYS[kind]
    if not require_id:
        # Ids are issued server-side; an inbound delta must not carry one.
        expected = expected - {"id"}
    _require_keys(obj, expected, f"{kind} measurement")
    out = {"kind": kind}
    if require_id:
        mid = _as_text(obj["id"], "measurement id", 128)
        if not mid or not set(mid) <= _ID_OK:
            raise InvalidSnapshot(f"measurement id malformed: {mid!r}")
        out["id"] = mid
    if kind == "location_marker":
        out["label"] = _as_text(obj["label"], "marker label", 4096)
        out["p"] = _as_floats(obj["p"], 3, "marker point")
    elif kind == "distance":
        a = _as_floats(obj["a"], 3, "distance endpoint")
        b = _as_floats(obj["b"], 3, "distance endpoint")
        length = _as_float(obj["length_m"], "distance length")
        actual = math.dist(a, b)
        if length < 0.0 or abs(length - actual) > 1e-9 * max(1.0, actual):
            raise InvalidSnapshot(f"distance length {length} does not match endpoints ({actual})")
        out["a"], out["b"], out["length_m"] = a, b, length
    else:
        for key in ("p1", "p2", "p3"):
            out[key] = _as_floats(obj[key], 3, f"plane point {key}")
        dip = _as_float(obj["dip_deg"], "dip")
        strike = _as_float(obj["strike_deg"], "strike")
        direction = _as_float(obj["dip_direction_deg"], "dip direction")
        if not 0.0 <= dip <= 90.0:
            raise InvalidSnapshot(f"dip out of range: {dip}")
        if not 0.0 <= strike < 360.0 or not 0.0 <= direction < 360.0:
            raise InvalidSnapshot("strike and dip direction must be in [0, 360)")
        if dip >= 1e-9 and _angle_gap(strike + 90.0, direction) > 1e-9:
            raise InvalidSnapshot("dip direction must equal strike + 90 degrees")
        out["dip_deg"], out["strike_deg"], out["dip_direction_deg"] = dip, strike, direction
    return out


def validate_measurements(value) -> list[dict]:
    if not isinstance(value, (list, tuple)):
        raise InvalidSnapshot("measurements must be a list")
    out = []
    seen = set()
    for item in value:
        measurement = validate_measurement(item, require_id=True)
        if measurement["id"] in seen:
            raise InvalidSnapshot(f"duplicate measurement id: {measurement['id']!r}")
        seen.add(measurement["id"])
        out.append(measurement)
    return out


_MINDMAP_KEYS = frozenset({"edges", "nodes"})
_STATE_NODE_KEYS = frozenset({"commit", "kind", "node_id", "position", "text"})
_LABEL_NODE_KEYS = frozenset({"kind", "node_id", "position", "text"})


def validate_mindmap(obj, commit_exists=None) -> dict:
    """Validate and normalize a mind map.

    ``commit_exists`` is an optional predicate; when given, every state
    node's commit reference must satisfy it.
    """
    _require_keys(obj, _MINDMAP_KEYS, "mind map")
    if not isinstance(obj["nodes"], (list, tuple)) or not isinstance(obj["edges"], (list, tuple)):
        raise InvalidSnapshot("mind map nodes and edges must be lists")
    nodes = []
    ids = set()
    for raw in obj["nodes"]:
        if not isinstance(raw, dict):
            raise InvalidSnapshot("mind map node is not an object")
        kind = raw.get("kind")
        if kind == "state":
            _require_keys(raw, _STATE_NODE_KEYS, "state node")
        elif kind == "label":
            _require_keys(raw, _LABEL_NODE_KEYS, "label node")
        else:
            raise InvalidSnapshot(f"unknown mind map node kind: {kind!r}")
        node_id = _as_text(raw["node_id"], "node id", 128)
        if not node_id:
            raise InvalidSnapshot("mind map node id is empty")
        if node_id in ids:
            raise InvalidSnapshot(f"duplicate mind map node id: {node_id!r}")
        ids.add(node_id)
        node = {
            "kind": kind,
            "node_id": node_id,
            "position": _as_floats(raw["position"], 2, "node position"),
            "text": _as_text(raw["text"], "node text", 1 << 16),
        }
        if kind == "state":
            commit = raw["commit"]
            if not is_object_id(commit):
                raise InvalidSnapshot(f"state node commit id malformed: {commit!r}")
            if commit_exists is not None and not commit_exists(commit):
                raise InvalidSnapshot(f"state node references unknown commit: {commit}")
            node["commit"] = commit
        nodes.append(node)
    edges = []
    for raw in obj["edges"]:
        if not isinstance(raw, (list, tuple)) or len(raw) != 3:
            raise InvalidSnapshot("mind map edge must be [from, to, label]")
        src = _as_text(raw[0], "edge endpoint", 128)
        dst = _as_text(raw[1], "edge endpoint", 128)
        label = _as_text(raw[2], "edge label", 4096)
        if src not in ids or dst not in ids:
            raise InvalidSnapshot(f"mind map edge references unknown node: {src!r} -> {dst!r}")
        edges.append([src, dst, label])
    return {"edges": edges, "nodes": nodes}


def empty_mindmap() -> dict:
    return {"edges": [], "nodes": []}


def validate_notes(value) -> str:
    return _as_text(value, "notes", 1 << 22)


def validate_screenshot(data) -> bytes:
    if not isinstance(data, (bytes, bytearray)):
        raise InvalidSnapshot("screenshot is not bytes")
    data = bytes(data)
    if not data.startswith(PNG_MAGIC):
        raise InvalidSnapshot("screenshot is not a PNG")
    if len(data) > MAX_SCREENSHOT_BYTES:
        raise InvalidSnapshot(f"screenshot too large ({len(data)} bytes)")
    return data


@dataclass(frozen=True)
class Snapshot:
    """One captured tool state. Treat instances as immutable."""

    measurements: tuple
    camera: dict
    screenshot: bytes
    mindmap: dict
    notes: str

    def entries(self) -> dict[str, bytes]:
        return {
            "camera.json": canonical_json(self.camera),
            "measurements.json": canonical_json(list(self.measurements)),
            "mindmap.json": canonical_json(self.mindmap),
            "notes.md": self.notes.encode(),
            "screenshot.png": self.screenshot,
        }

    def measurement_ids(self) -> list[str]:
        return [m["id"] for m in self.measurements]


def make_snapshot(measurements, camera, screenshot, mindmap, notes, commit_exists=None) -> Snapshot:
    return Snapshot(
        measurements=tuple(validate_measurements(measurements)),
        camera=validate_camera(camera),
        screenshot=validate_screenshot(screenshot),
        mindmap=validate_mindmap(mindmap, commit_exists),
        notes=validate_notes(notes),
    )


def default_snapshot() -> Snapshot:
    return Snapshot(
        measurements=(),
        camera=default_camera(),
        screenshot=EMPTY_PNG,
        mindmap=empty_mindmap(),
        notes="",
    )


def tree_id(snapshot: Snapshot) -> str:
    """Tree id the snapshot would get if stored, computed locally."""
    entries = tuple(
        TreeEntry(name=name, kind="blob", oid=hash_object("blob", data))
        for name, data in sorted(snapshot.entries().items())
    )
    return hash_object("tree", Tree(entries=entries).serialize())


def store_snapshot(repo: Repository, snapshot: Snapshot) -> str:
    entries = tuple(
        TreeEntry(name=name, kind="blob", oid=repo.put_object(Blob(data=data)))
        for name, data in sorted(snapshot.entries().items())
    )
    return repo.put_object(Tree(entries=entries))


def load_snapshot(repo: Repository, tree_oid: str) -> Snapshot:
    tree = repo.get_tree(tree_oid)
    names = tuple(entry.name for entry in tree.entries)
    if names != SNAPSHOT_FILES:
        raise InvalidSnapshot(f"tree {tree_oid} is not a snapshot (entries: {names})")
    raw = {entry.name: repo.get_blob(entry.oid).data for entry in tree.entries}
    try:
        return make_snapshot(
            measurements=json.loads(raw["measurements.json"]),
            camera=json.loads(raw["camera.json"]),
            screenshot=raw["screenshot.png"],
            mindmap=json.loads(raw["mindmap.json"]),
            notes=raw["notes.md"].decode(),
        )
    except (ValueError, UnicodeDecodeError) as exc:
        raise InvalidSnapshot(f"snapshot files in {tree_oid} malformed: {exc}") from None


def snapshot_to_wire(snapshot: Snapshot) -> dict:
    return {
        "camera": snapshot.camera,
        "measurements": list(snapshot.measurements),
        "mindmap": snapshot.mindmap,
        "notes": snapshot.notes,
        "screenshot_b64": base64.b64encode(snapshot.screenshot).decode(),
    }


def snapshot_from_wire(obj, commit_exists=None) -> Snapshot:
    if not isinstance(obj, dict):
        raise InvalidSnapshot("snapshot payload is not an object")
    expected = {"camera", "measurements", "mindmap", "notes", "screenshot_b64"}
    if set(obj) != expected:
        raise InvalidSnapshot(f"snapshot payload keys must be {sorted(expected)}")
    screenshot = decode_screenshot_b64(obj["screenshot_b64"])
    return make_snapshot(
        measurements=obj["measurements"],
        camera=obj["camera"],
        screenshot=screenshot,
        mindmap=obj["mindmap"],
        notes=obj["notes"],
        commit_exists=commit_exists,
    )


def decode_screenshot_b64(value) -> bytes:
    if not isinstance(value, str):
        raise InvalidSnapshot("screenshot_b64 is not a string")
    if len(value) > (MAX_SCREENSHOT_BYTES // 3 + 1) * 4 + 8:
        raise InvalidSnapshot("screenshot_b64 too large")
    try:
        return base64.b64decode(value.encode("ascii"), validate=True)
    except Exception as exc:
        raise InvalidSnapshot(f"screenshot_b64 is not valid base64: {exc}") from None
