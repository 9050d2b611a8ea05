"""Session engine and snapshot schema."""

from .engine import RecordResult, Session
from .snapshot import (
    EMPTY_PNG,
    MAX_SCREENSHOT_BYTES,
    Snapshot,
    canonical_json,
    default_snapshot,
    load_snapshot,
    make_snapshot,
    snapshot_from_wire,
    snapshot_to_wire,
    store_snapshot,
    tree_id,
)

__all__ = [
    "EMPTY_PNG",
    "MAX_SCREENSHOT_BYTES",
    "RecordResult",
    "Session",
    "Snapshot",
    "canonical_json",
    "default_snapshot",
    "load_snapshot",
    "make_snapshot",
    "snapshot_from_wire",
    "snapshot_to_wire",
    "store_snapshot",
    "tree_id",
]
