"""Session engine: turns live tool interactions into commits.

One Session wraps one repository. Every mutation happens under a single
lock, giving the serialized-command-queue behavior the wire protocol and
HTTP API both rely on. The engine owns measurement id minting so that
redo can re-apply a delta under a fresh id, deterministically when a
fixed clock is injected.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, replace

from ..clock import SystemClock, Timestamp
from ..errors import Inapplicable, InvalidInput, NotFound, RepoError
from ..provstore.objects import StateCommit
from ..provstore.repo import Annotation, Repository
from .snapshot import (
    Snapshot,
    canonical_json,
    default_snapshot,
    load_snapshot,
    store_snapshot,
    validate_camera,
    validate_measurement,
    validate_mindmap,
    validate_notes,
    validate_screenshot,
)

_B32 = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"

_KIND_WORDS = {
    "location_marker": "marker",
    "distance": "distance",
    "strike_dip": "strike/dip",
}


def _encode_measurement_id(ms: int, entropy: int) -> str:
    value = ((ms & ((1 << 48) - 1)) << 80) | (entropy & ((1 << 80) - 1))
    return "".join(_B32[(value >> shift) & 31] for shift in range(125, -1, -5))


@dataclass(frozen=True)
class RecordResult:
    commit: StateCommit
    measurement_id: str | None


class Session:
    """Live editing session over one provenance repository."""

    def __init__(self, repo: Repository, author: str, clock=None):
        self.repo = repo
        self.author = author
        self.clock = clock if clock is not None else SystemClock()
        self._lock = threading.RLock()
        self._entropy = 0
        self._snapshot = self._load_head_snapshot()

    @classmethod
    def start(cls, path: str, author: str = "operator", clock=None) -> "Session":
        """Open the repository at ``path``, creating it when absent."""
        clock = clock if clock is not None else SystemClock()
        if os.path.isfile(path):
            raise RepoError(f"repository path is a file: {path}")
        if os.path.isfile(os.path.join(path, "HEAD")):
            repo = Repository.open(path)
            findings = repo.verify()
            if findings == ["repository has no commits"]:
                cls._create_root(repo, author, clock)
            elif findings:
                raise RepoError(f"repository fails verification: {findings[0]}")
        else:
            repo = Repository.init(path)
            cls._create_root(repo, author, clock)
        return cls(repo, author, clock)

    @staticmethod
    def _create_root(repo: Repository, author: str, clock) -> None:
        tree = store_snapshot(repo, default_snapshot())
        oid = repo.commit(tree, (), author, clock.now(), "Session started", "session_start")
        repo.update_ref("main", oid)
        repo.set_head_branch("main")

    def _load_head_snapshot(self) -> Snapshot:
        return load_snapshot(self.repo, self.head_commit().tree)

    # -- queries ---------------------------------------------------------

    def head_commit(self) -> StateCommit:
        oid = self.repo.resolve_head()
        if oid is None:
            raise RepoError("HEAD points at a branch with no commits")
        return self.repo.get_commit(oid)

    def snapshot(self) -> Snapshot:
        with self._lock:
            return self._snapshot

    def log(self) -> list[StateCommit]:
        return self.repo.log()

    def _is_commit(self, oid: str) -> bool:
        try:
            self.repo.get_commit(oid)
            return True
        except Exception:
            return False

    # -- id minting --------------------------------------------------------

    def _mint_id(self) -> str:
        ms = self.clock.now().seconds * 1000
        self._entropy += 1
        return _encode_measurement_id(ms, self._entropy)

    # -- commit plumbing ---------------------------------------------------

    def _next_branch_name(self) -> str:
        existing = self.repo.branches()
        n = 1
        while f"branch-{n}" in existing:
            n += 1
        return f"branch-{n}"

    def _commit_snapshot(self, snapshot: Snapshot, message: str, state_kind: str) -> StateCommit:
        parent = self.repo.resolve_head()
        if parent is None:
            raise RepoError("HEAD points at a branch with no commits")
        tree = store_snapshot(self.repo, snapshot)
        oid = self.repo.commit(tree, (parent,), self.author, self.clock.now(), message, state_kind)
        mode, value = self.repo.head()
        if mode == "branch":
            self.repo.update_ref(value, oid)
        else:
            # Committing off a detached HEAD opens a fresh numbered branch
            # so the new history stays reachable.
            name = self._next_branch_name()
            self.repo.create_branch(name, oid)
            self.repo.set_head_branch(name)
        self._snapshot = snapshot
        return self.repo.get_commit(oid)

    # -- interactions -----------------------------------------------------

    def record_interaction(self, event) -> RecordResult:
        """Record an add/remove/bookmark event as one new commit."""
        if not isinstance(event, dict):
            raise InvalidInput("event is not an object")
        action = event.get("action")
        expected_keys = {
            "add": {"action", "measurement", "camera", "screenshot"},
            "remove": {"action", "id", "camera", "screenshot"},
            "bookmark": {"action", "camera", "screenshot"},
        }.get(action)
        if expected_keys is None:
            raise InvalidInput(f"unknown event action: {action!r}")
        if set(event) != expected_keys:
            raise InvalidInput(f"{action} event keys must be {sorted(expected_keys)}")
        camera = validate_camera(event["camera"])
        screenshot = validate_screenshot(event["screenshot"])

        with self._lock:
            current = self._snapshot
            if action == "add":
                body = validate_measurement(event["measurement"], require_id=False)
                mid = self._mint_id()
                measurement = dict(body, id=mid)
                snapshot = replace(
                    current,
                    measurements=current.measurements + (measurement,),
                    camera=camera,
                    screenshot=screenshot,
                )
                word = _KIND_WORDS[measurement["kind"]]
                commit = self._commit_snapshot(snapshot, f"Added {word} {mid}", "measurement_added")
                return RecordResult(commit=commit, measurement_id=mid)
            if action == "remove":
                mid = event["id"]
                if not isinstance(mid, str):
                    raise InvalidInput("remove event id is not a string")
                kept = tuple(m for m in current.measurements if m["id"] != mid)
                if len(kept) == len(current.measurements):
                    raise InvalidInput(f"no measurement with id {mid!r} to remove")
                removed = next(m for m in current.measurements if m["id"] == mid)
                snapshot = replace(current, measurements=kept, camera=camera, screenshot=screenshot)
                word = _KIND_WORDS[removed["kind"]]
                commit = self._commit_snapshot(
                    snapshot, f"Removed {word} {mid}", "measurement_removed"
                )
                return RecordResult(commit=commit, measurement_id=mid)
            snapshot = replace(current, camera=camera, screenshot=screenshot)
            commit = self._commit_snapshot(snapshot, "Bookmarked view", "camera_moved")
            return RecordResult(commit=commit, measurement_id=None)

    def restore(self, ref: str) -> Snapshot:
        """Move HEAD to a commit and return its snapshot for the client.

        HEAD re-attaches when the commit is some branch tip (preferring
        the current branch, then main, then the alphabetically first);
        otherwise it detaches. No commit is created.
        """
        with self._lock:
            oid = self.repo.resolve_ref(ref)
            commit = self.repo.get_commit(oid)
            snapshot = load_snapshot(self.repo, commit.tree)
            tips = sorted(name for name, target in self.repo.branches().items() if target == oid)
            mode, value = self.repo.head()
            if mode == "branch" and value in tips:
                pass
            elif "main" in tips:
                self.repo.set_head_branch("main")
            elif tips:
                self.repo.set_head_branch(tips[0])
            else:
                self.repo.set_head_detached(oid)
            self._snapshot = snapshot
            return snapshot

    def redo(self, ref: str) -> RecordResult:
        """Re-apply the measurement delta of an earlier commit at HEAD."""
        with self._lock:
            oid = self.repo.resolve_ref(ref)
            source = self.repo.get_commit(oid)
            if source.state_kind not in ("measurement_added", "measurement_removed"):
                raise Inapplicable(f"commit kind {source.state_kind} has no redoable delta")
            if not source.parents:
                raise Inapplicable("root commit has no delta")
            parent = self.repo.get_commit(source.parents[0])
            after = load_snapshot(self.repo, source.tree)
            before = load_snapshot(self.repo, parent.tree)
            before_ids = set(before.measurement_ids())
            after_ids = set(after.measurement_ids())
            current = self._snapshot

            if source.state_kind == "measurement_added":
                added = [m for m in after.measurements if m["id"] not in before_ids]
                if len(added) != 1:
                    raise Inapplicable("commit does not add exactly one measurement")
                mid = self._mint_id()
                measurement = dict(added[0], id=mid)
                snapshot = replace(current, measurements=current.measurements + (measurement,))
                word = _KIND_WORDS[measurement["kind"]]
                message = f"Redid add of {word} as {mid} from {oid[:12]}"
                commit = self._commit_snapshot(snapshot, message, "redo")
                return RecordResult(commit=commit, measurement_id=mid)

            removed = [m for m in before.measurements if m["id"] not in after_ids]
            if len(removed) != 1:
                raise Inapplicable("commit does not remove exactly one measurement")
            mid = removed[0]["id"]
            kept = tuple(m for m in current.measurements if m["id"] != mid)
            if len(kept) == len(current.measurements):
                raise Inapplicable(f"measurement {mid!r} is not present to remove")
            snapshot = replace(current, measurements=kept)
            word = _KIND_WORDS[removed[0]["kind"]]
            message = f"Redid removal of {word} {mid} from {oid[:12]}"
            commit = self._commit_snapshot(snapshot, message, "redo")
            return RecordResult(commit=commit, measurement_id=mid)

    # -- mind map and notes -------------------------------------------------

    def save_mindmap(self, mindmap) -> StateCommit | None:
        """Commit a changed mind map; identical content is a no-op."""
        with self._lock:
            normalized = validate_mindmap(mindmap, commit_exists=self._is_commit)
            if canonical_json(normalized) == canonical_json(self._snapshot.mindmap):
                return None
            snapshot = replace(self._snapshot, mindmap=normalized)
            return self._commit_snapshot(snapshot, "Updated mind map", "mindmap_update")

    def save_notes(self, text) -> StateCommit | None:
        """Commit changed notes text; identical content is a no-op."""
        with self._lock:
            normalized = validate_notes(text)
            if normalized.encode() == self._snapshot.notes.encode():
                return None
            snapshot = replace(self._snapshot, notes=normalized)
            return self._commit_snapshot(snapshot, "Updated notes", "notes_update")

    # -- annotations --------------------------------------------------------

    def annotate_state(self, ref: str, text: str, author: str | None = None) -> Annotation:
        with self._lock:
            oid = self.repo.resolve_ref(ref)
            if not isinstance(text, str) or len(text) > (1 << 20):
                raise InvalidInput("annotation text must be a string under 1 MiB")
            who = self.author if author is None else author
            if not who or "\t" in who or "\n" in who or "\r" in who:
                raise InvalidInput(f"annotation author malformed: {who!r}")
            return self.repo.annotate(oid, who, text, self.clock.now())
