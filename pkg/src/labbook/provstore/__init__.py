"""Content-addressed provenance store."""

from .bundle import export_bundle, import_bundle, read_bundle, write_bundle
from .objects import (
    COMMIT_KINDS,
    Blob,
    StateCommit,
    Tree,
    TreeEntry,
    hash_object,
    is_object_id,
)
from .repo import Annotation, Repository, validate_branch_name

__all__ = [
    "Annotation",
    "Blob",
    "COMMIT_KINDS",
    "Repository",
    "StateCommit",
    "Tree",
    "TreeEntry",
    "export_bundle",
    "hash_object",
    "import_bundle",
    "is_object_id",
    "read_bundle",
    "validate_branch_name",
    "write_bundle",
]
