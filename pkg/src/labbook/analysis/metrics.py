"""Per-repository usage metrics.

Counts are computed over the full commit graph (every branch plus a
detached HEAD), deduplicated by commit id:

    mindmap_saves               mind-map update commits
    mindmap_states_final        state nodes in HEAD's mind map
    mindmap_states_cumulative   distinct (node id, commit) state
                                references across all mind-map updates
    measurement_interactions    adds + removals + redos that changed
                                the measurement list
    annotated_states            commits carrying at least one annotation
    annotation_chars            total characters of annotation text
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

from ..errors import InvalidInput, RepoError
from ..provstore.repo import Repository


@dataclass(frozen=True)
class UsageMetrics:
    mindmap_saves: int
    mindmap_states_final: int
    mindmap_states_cumulative: int
    measurement_interactions: int
    annotated_states: int
    annotation_chars: int

    def as_dict(self) -> dict:
        return {
            "mindmap_saves": self.mindmap_saves,
            "mindmap_states_final": self.mindmap_states_final,
            "mindmap_states_cumulative": self.mindmap_states_cumulative,
            "measurement_interactions": self.measurement_interactions,
            "annotated_states": self.annotated_states,
            "annotation_chars": self.annotation_chars,
        }


def _mindmap_of(repo: Repository, commit) -> dict:
    entry = repo.get_tree(commit.tree).get("mindmap.json")
    if entry is None:
        raise RepoError(f"commit {commit.id} has no mind map entry")
    return json.loads(repo.get_blob(entry.oid).data.decode())


def _measurements_entry(repo: Repository, commit) -> str:
    entry = repo.get_tree(commit.tree).get("measurements.json")
    if entry is None:
        raise RepoError(f"commit {commit.id} has no measurements entry")
    return entry.oid


def repo_metrics(repo: Repository) -> UsageMetrics:
    findings = repo.verify()
    if findings:
        raise RepoError(f"repository fails verification: {findings[0]}")

    commits = repo.log()
    by_id = {commit.id: commit for commit in commits}

    mindmap_saves = 0
    cumulative: set[tuple[str, str]] = set()
    interactions = 0
    annotated = 0
    chars = 0
    for commit in commits:
        if commit.state_kind == "mindmap_update":
            mindmap_saves += 1
            for node in _mindmap_of(repo, commit)["nodes"]:
                if node.get("kind") == "state":
                    cumulative.add((node["node_id"], node["commit"]))
        elif commit.state_kind in ("measurement_added", "measurement_removed"):
            interactions += 1
        elif commit.state_kind == "redo" and commit.parents:
            parent = by_id.get(commit.parents[0]) or repo.get_commit(commit.parents[0])
            if _measurements_entry(repo, commit) != _measurements_entry(repo, parent):
                interactions += 1
        annotations = repo.get_annotations(commit.id)
        if annotations:
            annotated += 1
            chars += sum(len(annotation.text) for annotation in annotations)

    head = repo.resolve_head()
    final = 0
    if head is not None:
        for node in _mindmap_of(repo, by_id.get(head) or repo.get_commit(head))["nodes"]:
            if node.get("kind") == "state":
                final += 1

    return UsageMetrics(
        mindmap_saves=mindmap_saves,
        mindmap_states_final=final,
        mindmap_states_cumulative=len(cumulative),
        measurement_interactions=interactions,
        annotated_states=annotated,
        annotation_chars=chars,
    )


@dataclass(frozen=True)
class MetricsRow:
    participant_id: str
    group: str
    repo_path: str
    metrics: UsageMetrics


def read_metrics_csv(path: str) -> list[MetricsRow]:
    """Read ``participant_id,group,repo_path`` rows and load each repo."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or (lineno == 1 and record[0].strip() == "participant_id"):
                continue
            if len(record) != 3:
                raise InvalidInput(f"{path}:{lineno}: expected 3 fields, got {len(record)}")
            repo_path = record[2].strip()
            metrics = repo_metrics(Repository.open(repo_path))
            rows.append(
                MetricsRow(
                    participant_id=record[0].strip(),
                    group=record[1].strip(),
                    repo_path=repo_path,
                    metrics=metrics,
                )
            )
    if not rows:
        raise InvalidInput(f"{path}: no rows found")
    return rows
