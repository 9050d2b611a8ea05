"""Repository behavior: refs, log ordering, annotations, verify."""

import os

import pytest
from pathlib import Path

from labbook.clock import FixedClock, Timestamp
from labbook.errors import (
    AlreadyExists,
    IntegrityError,
    InvalidInput,
    InvalidName,
    NotFound,
    RepoError,
)
from labbook.provstore.objects import Blob, StateCommit, Tree, TreeEntry
from labbook.provstore.repo import Repository, validate_branch_name


def make_repo(tmp_path, name="r"):
    return Repository.init(tmp_path / name)


def put_snapshot_tree(repo, text=b""):
    blob_id = repo.put_object(Blob(text))
    tree = Tree(entries=(TreeEntry("notes.md", "blob", blob_id),))
    return repo.put_object(tree)


def add_commit(repo, tree, parents, secs, kind="camera_moved", message="Bookmarked view"):
    return repo.commit(
        tree=tree,
        parents=parents,
        author="op",
        timestamp=Timestamp(secs, 0),
        message=message,
        state_kind=kind,
    )


@pytest.fixture
def chain(tmp_path):
    """Linear chain of 5 commits on main."""
    repo = make_repo(tmp_path)
    tree = put_snapshot_tree(repo)
    ids = []
    parent = ()
    for i in range(5):
        kind = "session_start" if i == 0 else "camera_moved"
        oid = add_commit(repo, tree, parent, 1700000000 + i, kind=kind)
        ids.append(oid)
        parent = (oid,)
    repo.create_branch("main", ids[-1])
    repo.set_head_branch("main")
    return repo, ids


def test_init_creates_layout(tmp_path):
    repo = make_repo(tmp_path)
    assert (Path(repo.root) / "HEAD").read_bytes() == b"ref: refs/heads/main\n"
    assert (Path(repo.root) / "objects").is_dir()
    assert (Path(repo.root) / "refs" / "heads").is_dir()


def test_init_refuses_existing_repo(tmp_path):
    make_repo(tmp_path)
    with pytest.raises(AlreadyExists):
        make_repo(tmp_path)


def test_open_missing_path(tmp_path):
    with pytest.raises(NotFound):
        Repository.open(tmp_path / "nope")


def test_open_non_repo_dir(tmp_path):
    os.makedirs(tmp_path / "plain")
    with pytest.raises(NotFound):
        Repository.open(tmp_path / "plain")


def test_put_get_blob(tmp_path):
    repo = make_repo(tmp_path)
    oid = repo.put_object(Blob(b"content"))
    assert repo.get_blob(oid).data == b"content"


def test_put_is_idempotent(tmp_path):
    repo = make_repo(tmp_path)
    a = repo.put_object(Blob(b"x"))
    b = repo.put_object(Blob(b"x"))
    assert a == b


def test_get_missing_object(tmp_path):
    repo = make_repo(tmp_path)
    with pytest.raises(NotFound):
        repo.get_blob("0" * 40)


def test_corrupt_object_detected(tmp_path):
    repo = make_repo(tmp_path)
    oid = repo.put_object(Blob(b"precious"))
    path = Path(repo.root) / "objects" / oid[:2] / oid[2:]
    path.write_bytes(b"garbage that is not zlib")
    with pytest.raises(IntegrityError):
        repo.get_blob(oid)


def test_single_root_enforced(chain):
    repo, ids = chain
    tree = put_snapshot_tree(repo, b"other")
    with pytest.raises(RepoError):
        add_commit(repo, tree, (), 1700000100, kind="session_start")


def test_commit_requires_existing_parent(tmp_path):
    repo = make_repo(tmp_path)
    tree = put_snapshot_tree(repo)
    with pytest.raises(NotFound):
        add_commit(repo, tree, ("9" * 40,), 1700000000)


def test_log_linear_chain(chain):
    repo, ids = chain
    logged = [c.id for c in repo.log()]
    assert logged == list(reversed(ids))


def test_log_from_branch_tip_excludes_other_branch(chain):
    repo, ids = chain
    tree = put_snapshot_tree(repo, b"branchy")
    other = add_commit(repo, tree, (ids[0],), 1700000050)
    repo.create_branch("side", other)
    main_view = {c.id for c in repo.log(ids[-1])}
    assert other not in main_view
    side_view = {c.id for c in repo.log(other)}
    assert side_view == {ids[0], other}


def test_log_orders_children_before_parents(chain):
    repo, ids = chain
    logged = [c.id for c in repo.log()]
    position = {oid: i for i, oid in enumerate(logged)}
    for commit in repo.log():
        for parent in commit.parents:
            assert position[commit.id] < position[parent]


def test_log_breaks_timestamp_ties_by_id(tmp_path):
    repo = make_repo(tmp_path)
    tree = put_snapshot_tree(repo)
    root = add_commit(repo, tree, (), 1700000000, kind="session_start")
    t_a = put_snapshot_tree(repo, b"a")
    t_b = put_snapshot_tree(repo, b"b")
    a = add_commit(repo, t_a, (root,), 1700000777)
    b = add_commit(repo, t_b, (root,), 1700000777)
    repo.create_branch("main", a)
    repo.create_branch("side", b)
    logged = [c.id for c in repo.log()]
    assert logged == [min(a, b), max(a, b), root][:2] + [root]


def test_branches_and_create(chain):
    repo, ids = chain
    repo.create_branch("alt", ids[2])
    assert repo.branches() == {"main": ids[-1], "alt": ids[2]}
    with pytest.raises(AlreadyExists):
        repo.create_branch("alt", ids[2])
    with pytest.raises(NotFound):
        repo.create_branch("ghost", "3" * 40)


def test_update_ref_fast_forward_only(chain):
    repo, ids = chain
    with pytest.raises(RepoError):
        repo.update_ref("main", ids[1])
    tree = put_snapshot_tree(repo, b"new")
    new = add_commit(repo, tree, (ids[-1],), 1700000200)
    repo.update_ref("main", new)
    assert repo.branches()["main"] == new


def test_head_modes(chain):
    repo, ids = chain
    assert repo.head() == ("branch", "main")
    assert repo.resolve_head() == ids[-1]
    repo.set_head_detached(ids[1])
    assert repo.head() == ("detached", ids[1])
    assert repo.resolve_head() == ids[1]
    repo.set_head_branch("main")
    assert repo.resolve_head() == ids[-1]


def test_head_persists_across_reopen(chain):
    repo, ids = chain
    repo.set_head_detached(ids[2])
    reopened = Repository.open(repo.root)
    assert reopened.head() == ("detached", ids[2])


def test_resolve_ref_forms(chain):
    repo, ids = chain
    assert repo.resolve_ref("HEAD") == ids[-1]
    assert repo.resolve_ref("main") == ids[-1]
    assert repo.resolve_ref(ids[3]) == ids[3]
    with pytest.raises(NotFound):
        repo.resolve_ref("no-such-branch")
    with pytest.raises(NotFound):
        repo.resolve_ref("f" * 40)


@pytest.mark.parametrize(
    "name",
    ["main", "branch-1", "field/day2", "a.b", "UPPER_case-9"],
)
def test_valid_branch_names(name):
    validate_branch_name(name)


@pytest.mark.parametrize(
    "name",
    [
        "",
        ".hidden",
        "a/.hidden",
        "a//b",
        "a/",
        "/a",
        "name.lock",
        "a/name.lock/b",
        "sp ace",
        "tab\tname",
        "col:on",
        "que?ry",
        "star*",
        "brack[et",
        "back\\slash",
        "tilde~1",
        "caret^",
        "..",
        "a/../b",
        "at@{brace",
        "nl\nname",
    ],
)
def test_invalid_branch_names(name):
    with pytest.raises(InvalidName):
        validate_branch_name(name)


# -- annotations -------------------------------------------------------------


def test_annotation_round_trip(chain):
    repo, ids = chain
    note = repo.annotate(ids[0], "alice", "tab\there\nand newline \\ backslash \r cr", Timestamp(1700000300, 60))
    got = repo.get_annotations(ids[0])
    assert got == [note]
    assert got[0].text == "tab\there\nand newline \\ backslash \r cr"
    assert got[0].author == "alice"


def test_annotations_append_in_order(chain):
    repo, ids = chain
    repo.annotate(ids[1], "a", "first", Timestamp(1700000301, 0))
    repo.annotate(ids[1], "b", "second", Timestamp(1700000302, 0))
    texts = [a.text for a in repo.get_annotations(ids[1])]
    assert texts == ["first", "second"]


def test_annotate_unknown_commit(chain):
    repo, _ = chain
    with pytest.raises(NotFound):
        repo.annotate("e" * 40, "a", "x", Timestamp(1700000300, 0))


def test_annotation_file_format(chain):
    repo, ids = chain
    repo.annotate(ids[0], "alice", "line\nbreak", Timestamp(1700000300, 0))
    raw = (Path(repo.root) / "annotations" / ids[0]).read_text(encoding="utf-8")
    assert raw.endswith("\n")
    record = raw.splitlines()[0]
    stamp, author, text = record.split("\t")
    assert author == "alice"
    assert "\\n" in text and "\n" not in text


def test_annotations_missing_are_empty(chain):
    repo, ids = chain
    assert repo.get_annotations(ids[4]) == []


# -- verify -------------------------------------------------------------------


def test_verify_healthy_repo(chain):
    repo, _ = chain
    assert repo.verify() == []


def test_verify_detects_dangling_parent(chain):
    repo, ids = chain
    victim = ids[2]
    path = Path(repo.root) / "objects" / victim[:2] / victim[2:]
    path.unlink()
    findings = repo.verify()
    assert findings
    assert any(victim in f for f in findings)


def test_verify_detects_missing_ref_target(chain):
    repo, _ = chain
    (Path(repo.root) / "refs" / "heads" / "ghost").write_text("a" * 40 + "\n")
    findings = repo.verify()
    assert any("ghost" in f for f in findings)


def test_verify_detects_unreachable_commit(chain):
    repo, ids = chain
    tree = put_snapshot_tree(repo, b"lost")
    add_commit(repo, tree, (ids[0],), 1700000400)
    findings = repo.verify()
    assert any("unreachable" in f for f in findings)


def test_verify_detects_second_root(chain):
    repo, ids = chain
    tree = put_snapshot_tree(repo, b"second root")
    commit = StateCommit(
        tree=tree,
        parents=(),
        author="op",
        timestamp=Timestamp(1700000500, 0),
        message="Session started",
        state_kind="session_start",
    )
    kind, content = commit.kind, commit.serialize()
    from labbook.provstore.objects import hash_object

    oid = hash_object(kind, content)
    import zlib

    bucket = Path(repo.root) / "objects" / oid[:2]
    bucket.mkdir(exist_ok=True)
    header = f"commit {len(content)}".encode() + b"\x00"
    (bucket / oid[2:]).write_bytes(zlib.compress(header + content))
    repo.create_branch("rogue", oid)
    findings = repo.verify()
    assert any("root" in f for f in findings)


def test_verify_detects_malformed_head(chain):
    repo, _ = chain
    (Path(repo.root) / "HEAD").write_text("ref: refs/heads/does-not-exist\n")
    findings = repo.verify()
    assert findings


def test_verify_detects_orphan_annotation(chain):
    repo, _ = chain
    ann = Path(repo.root) / "annotations"
    ann.mkdir(exist_ok=True)
    (ann / ("d" * 40)).write_text("2023-11-14T22:13:20Z\ta\tx\n")
    findings = repo.verify()
    assert any("annotation" in f for f in findings)


def test_verify_reports_empty_repo(tmp_path):
    repo = make_repo(tmp_path)
    assert repo.verify() == ["repository has no commits"]


def test_verify_detects_stray_file(chain):
    repo, _ = chain
    (Path(repo.root) / "objects" / "stray.tmp").write_text("junk")
    findings = repo.verify()
    assert any("stray" in f for f in findings)
