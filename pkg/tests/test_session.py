"""Session engine: recording, branching, restore, redo, saves."""

import random

import pytest

from conftest import bookmark_event, distance_event, marker_event, remove_event
from labbook.clock import FixedClock
from labbook.errors import Inapplicable, InvalidInput, NotFound, RepoError
from labbook.provstore.repo import Repository
from labbook.session.engine import Session
from labbook.session.snapshot import EMPTY_PNG, default_camera, tree_id

ID_ALPHABET = set("0123456789ABCDEFGHJKMNPQRSTVWXYZ")


def test_start_creates_root_on_main(session):
    head = session.head_commit()
    assert head.state_kind == "session_start"
    assert head.parents == ()
    assert session.repo.head() == ("branch", "main")
    assert session.repo.branches() == {"main": head.id}


def test_start_reopens_existing_repo(tmp_path):
    first = Session.start(tmp_path / "repo", clock=FixedClock())
    first.record_interaction(marker_event([1, 2, 3]))
    again = Session.start(tmp_path / "repo", clock=FixedClock(start=1_800_000_000))
    assert len(again.log()) == 2
    assert again.head_commit().id == first.head_commit().id


def test_start_adopts_empty_initialized_store(tmp_path):
    Repository.init(tmp_path / "repo")
    session = Session.start(tmp_path / "repo", clock=FixedClock())
    assert session.head_commit().state_kind == "session_start"


def test_start_rejects_file_path(tmp_path):
    target = tmp_path / "file"
    target.write_text("not a repo")
    with pytest.raises(RepoError):
        Session.start(target, clock=FixedClock())


def test_start_rejects_corrupt_repo(tmp_path):
    session = Session.start(tmp_path / "repo", clock=FixedClock())
    head = session.head_commit().id
    victim = session.repo._object_path(head)
    import os

    os.unlink(victim)
    with pytest.raises(RepoError):
        Session.start(tmp_path / "repo", clock=FixedClock())


def test_add_marker_commit(session):
    result = session.record_interaction(marker_event([1, 2, 3], label="crest"))
    assert result.commit.state_kind == "measurement_added"
    assert result.commit.message == f"Added marker {result.measurement_id}"
    assert session.snapshot().measurement_ids() == [result.measurement_id]


def test_minted_ids_are_sortable_and_well_formed(session):
    ids = [
        session.record_interaction(marker_event([i, 0, 0])).measurement_id for i in range(5)
    ]
    assert all(len(mid) == 26 for mid in ids)
    assert all(set(mid) <= ID_ALPHABET for mid in ids)
    assert ids == sorted(ids)
    assert len(set(ids)) == 5


def test_remove_commit(session):
    added = session.record_interaction(marker_event([1, 2, 3]))
    removed = session.record_interaction(remove_event(added.measurement_id))
    assert removed.commit.state_kind == "measurement_removed"
    assert removed.measurement_id == added.measurement_id
    assert session.snapshot().measurements == ()


def test_remove_unknown_id(session):
    with pytest.raises(InvalidInput):
        session.record_interaction(remove_event("NOPE"))


def test_bookmark_commit(session):
    camera = {"position": [5.0, 6.0, 7.0], "orientation": [0.0, 0.0, 1.0, 0.0]}
    result = session.record_interaction(bookmark_event(camera=camera))
    assert result.commit.state_kind == "camera_moved"
    assert result.measurement_id is None
    assert session.snapshot().camera == camera


def test_event_key_sets_are_strict(session):
    event = marker_event([1, 2, 3])
    event["typo"] = 1
    with pytest.raises(InvalidInput):
        session.record_interaction(event)
    with pytest.raises(InvalidInput):
        session.record_interaction({"action": "warp"})


def test_commits_advance_main(session):
    first = session.record_interaction(marker_event([1, 2, 3]))
    second = session.record_interaction(bookmark_event())
    assert session.repo.branches()["main"] == second.commit.id
    assert second.commit.parents == (first.commit.id,)


def test_restore_to_inner_commit_detaches(session):
    root = session.head_commit().id
    session.record_interaction(marker_event([1, 2, 3]))
    session.record_interaction(bookmark_event())
    snap = session.restore(root)
    assert snap.measurements == ()
    assert session.repo.head() == ("detached", root)
    # restoring creates no commit
    assert len(session.log()) == 3


def test_restore_to_tip_reattaches(session):
    session.record_interaction(marker_event([1, 2, 3]))
    tip = session.head_commit().id
    session.restore(session.log()[-1].id)
    session.restore(tip)
    assert session.repo.head() == ("branch", "main")


def test_record_after_restore_auto_branches(session):
    root = session.head_commit().id
    session.record_interaction(marker_event([1, 2, 3]))
    session.restore(root)
    result = session.record_interaction(marker_event([9, 9, 9]))
    branches = session.repo.branches()
    assert branches["branch-1"] == result.commit.id
    assert session.repo.head() == ("branch", "branch-1")
    assert result.commit.parents == (root,)


def test_auto_branch_numbers_increment(session):
    root = session.head_commit().id
    session.record_interaction(marker_event([1, 1, 1]))
    session.restore(root)
    session.record_interaction(marker_event([2, 2, 2]))
    session.restore(root)
    session.record_interaction(marker_event([3, 3, 3]))
    names = set(session.repo.branches())
    assert {"main", "branch-1", "branch-2"} <= names


def test_restore_to_main_tip_stays_on_main(session):
    # restoring to the tip of the current branch re-attaches, no branch
    root = session.head_commit().id
    session.restore(root)
    session.record_interaction(marker_event([1, 1, 1]))
    assert session.repo.head() == ("branch", "main")
    assert "branch-1" not in session.repo.branches()


def test_restore_prefers_current_branch_tip(session):
    root = session.head_commit().id
    session.record_interaction(marker_event([0, 0, 0]))  # main moves ahead
    session.restore(root)
    result = session.record_interaction(marker_event([1, 1, 1]))  # branch-1
    tip = result.commit.id
    session.repo.create_branch("aardvark", tip)  # alphabetically before branch-1
    session.restore(tip)
    assert session.repo.head() == ("branch", "branch-1")


def test_restore_prefers_main_over_other_tips(session):
    root = session.head_commit().id
    # make another branch whose tip is the root as well
    session.repo.create_branch("alpha", root)
    session.restore(root)
    assert session.repo.head() == ("branch", "main") or session.repo.branches()["main"] != root
    session.record_interaction(marker_event([1, 1, 1]))
    session.restore(root)
    # root is tip of alpha only now; main moved ahead
    assert session.repo.head() == ("branch", "alpha")


def test_restore_unknown_ref(session):
    with pytest.raises(NotFound):
        session.restore("f" * 40)


def test_save_mindmap_commits_and_deduplicates(session):
    added = session.record_interaction(marker_event([1, 2, 3]))
    mm = {
        "nodes": [
            {
                "node_id": "n1",
                "kind": "state",
                "commit": added.commit.id,
                "position": [10.0, 20.0],
                "text": "first",
            }
        ],
        "edges": [],
    }
    commit = session.save_mindmap(mm)
    assert commit is not None and commit.state_kind == "mindmap_update"
    assert session.save_mindmap(mm) is None
    assert len(session.log()) == 3


def test_save_mindmap_rejects_unknown_commit(session):
    mm = {
        "nodes": [
            {
                "node_id": "n1",
                "kind": "state",
                "commit": "9" * 40,
                "position": [0.0, 0.0],
                "text": "",
            }
        ],
        "edges": [],
    }
    with pytest.raises(InvalidInput):
        session.save_mindmap(mm)


def test_save_notes_commits_and_deduplicates(session):
    commit = session.save_notes("observations\n")
    assert commit is not None and commit.state_kind == "notes_update"
    assert session.save_notes("observations\n") is None
    assert session.snapshot().notes == "observations\n"


def test_notes_survive_restore_round_trip(session):
    session.save_notes("keep me")
    keeper = session.head_commit().id
    session.record_interaction(marker_event([1, 2, 3]))
    session.restore(keeper)
    assert session.snapshot().notes == "keep me"


def test_redo_add_mints_fresh_id(session):
    added = session.record_interaction(marker_event([1, 2, 3], label="ore"))
    session.record_interaction(remove_event(added.measurement_id))
    redone = session.redo(added.commit.id)
    assert redone.commit.state_kind == "redo"
    assert redone.measurement_id != added.measurement_id
    markers = session.snapshot().measurements
    assert len(markers) == 1
    assert markers[0]["label"] == "ore"
    assert markers[0]["id"] == redone.measurement_id


def test_redo_remove_reapplies(session):
    added = session.record_interaction(marker_event([1, 2, 3]))
    removal = session.record_interaction(remove_event(added.measurement_id))
    redone_add = session.redo(added.commit.id)
    # now redo the removal: the original id is gone, the re-added one differs
    with pytest.raises(Inapplicable):
        session.redo(removal.commit.id)
    # removing the re-minted measurement directly still works
    session.record_interaction(remove_event(redone_add.measurement_id))
    assert session.snapshot().measurements == ()


def test_redo_remove_when_present(session):
    added = session.record_interaction(marker_event([1, 2, 3]))
    bookmark = session.record_interaction(bookmark_event())
    removal = session.record_interaction(remove_event(added.measurement_id))
    session.restore(bookmark.commit.id)
    redone = session.redo(removal.commit.id)
    assert redone.commit.state_kind == "redo"
    assert redone.measurement_id == added.measurement_id
    assert session.snapshot().measurements == ()


def test_redo_rejects_non_measurement_commits(session):
    bookmark = session.record_interaction(bookmark_event())
    with pytest.raises(Inapplicable):
        session.redo(bookmark.commit.id)
    with pytest.raises(Inapplicable):
        session.redo(session.log()[-1].id)  # root


def test_redo_keeps_current_camera(session):
    added = session.record_interaction(marker_event([1, 2, 3]))
    session.record_interaction(remove_event(added.measurement_id))
    camera = {"position": [9.0, 9.0, 9.0], "orientation": [0.0, 1.0, 0.0, 0.0]}
    session.record_interaction(bookmark_event(camera=camera))
    session.redo(added.commit.id)
    assert session.snapshot().camera == camera


def test_annotate_state(session):
    target = session.head_commit().id
    note = session.annotate_state(target, "looks faulted", author="reviewer")
    assert note.text == "looks faulted"
    stored = session.repo.get_annotations(target)
    assert [a.text for a in stored] == ["looks faulted"]


def test_annotate_rejects_oversize(session):
    with pytest.raises(InvalidInput):
        session.annotate_state("HEAD", "x" * (1024 * 1024 + 1))


def test_replay_determinism(tmp_path):
    def run(path):
        session = Session.start(path, clock=FixedClock())
        a = session.record_interaction(marker_event([1, 2, 3]))
        session.record_interaction(distance_event([0, 0, 0], [3, 4, 0]))
        session.record_interaction(remove_event(a.measurement_id))
        session.record_interaction(bookmark_event())
        session.save_notes("replayed")
        return [c.id for c in session.log()]

    assert run(tmp_path / "one") == run(tmp_path / "two")


def test_randomized_session_restore_soundness(tmp_path):
    """Every commit's snapshot re-serializes to exactly its tree id."""
    rng = random.Random(1234)
    session = Session.start(tmp_path / "repo", clock=FixedClock())
    live = []
    for _ in range(40):
        roll = rng.random()
        if roll < 0.45 or not live:
            result = session.record_interaction(
                marker_event([rng.uniform(-9, 9) for _ in range(3)])
            )
            live.append(result.measurement_id)
        elif roll < 0.65:
            mid = live.pop(rng.randrange(len(live)))
            session.record_interaction(remove_event(mid))
        elif roll < 0.8:
            session.record_interaction(bookmark_event())
        else:
            target = rng.choice(session.log()).id
            session.restore(target)
            live = list(session.snapshot().measurement_ids())
    for commit in session.log():
        snap = session.restore(commit.id)
        assert tree_id(snap) == commit.tree
        live = list(snap.measurement_ids())


def test_verify_clean_after_session(session):
    session.record_interaction(marker_event([1, 2, 3]))
    session.save_notes("x")
    assert session.repo.verify() == []
