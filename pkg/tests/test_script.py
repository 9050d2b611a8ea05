"""Session script parsing and execution against a live server."""

import pytest

from labbook.clock import FixedClock
from labbook.errors import ScriptError
from labbook.protocol.httpapi import HttpApi
from labbook.protocol.server import ProvenanceService, ToolServer
from labbook.vftsim.client import SimulatorClient
from labbook.vftsim.scenes import load_scene
from labbook.vftsim.script import parse_script, parse_script_file, run_script


def test_parse_skips_comments_and_blanks():
    steps = parse_script(
        """
        # survey day one
        marker 1 2 3 crest   # trailing comment

        bookmark
        """
    )
    assert [s.verb for s in steps] == ["marker", "bookmark"]
    assert steps[0].lineno == 3
    assert steps[0].floats == (1.0, 2.0, 3.0)
    assert steps[0].text == "crest"
    assert steps[1].lineno == 5


def test_parse_marker_label_default_and_multiword():
    steps = parse_script("marker 0 0 0\nmarker 1 1 1 toe of slope\n")
    assert steps[0].text == "marker"
    assert steps[1].text == "toe of slope"


def test_parse_distance_and_strikedip_floats():
    steps = parse_script("distance 0 0 0 3 4 0\nstrikedip 0 0 0 1 0 1 0 1 0\n")
    assert steps[0].floats == (0.0, 0.0, 0.0, 3.0, 4.0, 0.0)
    assert len(steps[1].floats) == 9


def test_parse_unknown_verb_names_line():
    with pytest.raises(ScriptError, match="line 2") as err:
        parse_script("bookmark\nfly 1 2 3\n")
    assert "fly" in str(err.value)


def test_parse_arity_error():
    with pytest.raises(ScriptError, match="line 1"):
        parse_script("distance 1 2 3\n")
    with pytest.raises(ScriptError, match="line 1"):
        parse_script("bookmark now\n")


def test_parse_bad_float():
    with pytest.raises(ScriptError, match="not a number"):
        parse_script("marker 1 two 3\n")


def test_parse_bad_sleep():
    with pytest.raises(ScriptError, match="sleep"):
        parse_script("sleep 1.5\n")
    with pytest.raises(ScriptError, match="sleep"):
        parse_script("sleep soon\n")


def test_parse_empty_script():
    assert parse_script("") == []
    assert parse_script("# only comments\n\n") == []


def test_parse_script_file_missing(tmp_path):
    with pytest.raises(ScriptError, match="no script file"):
        parse_script_file(str(tmp_path / "absent.txt"))


def test_parse_script_file_round_trip(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("camera 0 -10 5 1 0 0 0\nmarker 1 2 3\n", encoding="utf-8")
    steps = parse_script_file(str(path))
    assert [s.verb for s in steps] == ["camera", "marker"]


@pytest.fixture
def live(tmp_path):
    service = ProvenanceService(tmp_path / "repo", author="sim", clock=FixedClock())
    tool = ToolServer(service, host="127.0.0.1", port=0)
    http = HttpApi(service, host="127.0.0.1", port=0)
    tool.start()
    http.start()
    client = SimulatorClient(
        "127.0.0.1",
        tool.port,
        scene=load_scene("ramp"),
        http_base=f"http://127.0.0.1:{http.port}",
    )
    client.connect()
    client.bind_repo("load")
    yield service, client
    client.close()
    http.stop()
    tool.stop()


def test_run_commits_once_per_committing_step(live):
    service, client = live
    script = "\n".join(
        [
            "camera 0 -15 6 1 0 0 0",  # no commit
            "marker 1 0 0 a",
            "marker 2 0 0 b",
            "marker 3 0 0 c",
            "distance 1 0 0 2 0 0",
            "strikedip 0 0 0 1 0 1 0 1 0",
            "bookmark",
            "remove @1",
            "marker 4 0 0 d",
            "marker 5 0 0 e",
            "bookmark",
        ]
    )
    transcript = run_script(client, parse_script(script))
    assert len(transcript.committed) == 10
    assert len(set(transcript.commit_ids())) == 10
    # seven adds minus one removal
    assert len(client.measurements()) == 6
    log_ids = {c.id for c in service.session.log()}
    assert set(transcript.commit_ids()) <= log_ids


def test_run_resolves_id_references(live):
    service, client = live
    transcript = run_script(
        client,
        parse_script("marker 1 0 0 a\nmarker 2 0 0 b\nremove @2\n"),
    )
    assert transcript.minted_ids[0] in {m["id"] for m in client.measurements()}
    assert transcript.minted_ids[1] not in {m["id"] for m in client.measurements()}


def test_run_id_reference_out_of_range(live):
    _, client = live
    with pytest.raises(ScriptError, match="out of range"):
        run_script(client, parse_script("marker 1 0 0\nremove @7\n"))


def test_run_bad_reference_token(live):
    _, client = live
    with pytest.raises(ScriptError, match="bad id reference"):
        run_script(client, parse_script("marker 1 0 0\nremove @one\n"))


def test_run_restore_reference(live):
    service, client = live
    transcript = run_script(
        client,
        parse_script("marker 1 0 0 a\nmarker 2 0 0 b\nrestore @1\nmarker 9 9 9 c\n"),
    )
    # after restoring to the first marker's commit only that marker remains,
    # then one more lands on a fresh branch
    assert len(client.measurements()) == 2
    assert "branch-1" in service.session.repo.branches()


def test_run_sleep_uses_injected_clock(live):
    _, client = live
    naps = []
    run_script(client, parse_script("sleep 250\n"), sleep=naps.append)
    assert naps == [0.25]


def test_run_empty(live):
    _, client = live
    transcript = run_script(client, [])
    assert transcript.committed == []
