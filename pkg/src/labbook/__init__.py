"""Provenance lab book for interactive measurement sessions.

Every interaction is recorded as a content-addressed state commit in a
repository layout that standard git tooling can read. Sessions can be
annotated, branched, restored, organized into a mind map, exported to
verified bundles, and analyzed.
"""

from ._version import __version__
from .clock import FixedClock, SystemClock, Timestamp
from .errors import (
    AlreadyExists,
    CorruptBundle,
    DegenerateGeometry,
    Inapplicable,
    IntegrityError,
    InvalidInput,
    InvalidName,
    InvalidSnapshot,
    LabbookError,
    NoClient,
    NotFound,
    ProtocolError,
    RepoError,
    ScriptError,
    Unsupported,
)
from .provstore.repo import Repository
from .session.engine import Session

__all__ = [
    "__version__",
    "AlreadyExists",
    "CorruptBundle",
    "DegenerateGeometry",
    "FixedClock",
    "Inapplicable",
    "IntegrityError",
    "InvalidInput",
    "InvalidName",
    "InvalidSnapshot",
    "LabbookError",
    "NoClient",
    "NotFound",
    "ProtocolError",
    "RepoError",
    "Repository",
    "ScriptError",
    "Session",
    "SystemClock",
    "Timestamp",
    "Unsupported",
]
