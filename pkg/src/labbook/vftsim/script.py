"""Line-oriented session scripts for the simulator.

Format: UTF-8 text, ``#`` starts a comment, blank lines are skipped.
Verbs::

    marker x y z [label ...]
    distance x1 y1 z1 x2 y2 z2
    strikedip x1 y1 z1 x2 y2 z2 x3 y3 z3
    remove <id-ref>
    camera px py pz qw qx qy qz
    bookmark
    restore <commit-ref>
    sleep <milliseconds>

``<id-ref>`` is a literal measurement id or ``@n``, the id minted by
the n-th id-bearing ack so far (1-based). ``<commit-ref>`` is a commit
id, branch name, ``HEAD``, or ``@n``, the commit of the n-th ack.
The whole script is parsed before anything runs; errors name the line.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..errors import ScriptError
from .client import SimulatorClient

_ARITY = {
    "marker": (3, None),
    "distance": (6, 6),
    "strikedip": (9, 9),
    "remove": (1, 1),
    "camera": (7, 7),
    "bookmark": (0, 0),
    "restore": (1, 1),
    "sleep": (1, 1),
}

_FLOAT_ARGS = {"marker": 3, "distance": 6, "strikedip": 9, "camera": 7}


@dataclass(frozen=True)
class Step:
    lineno: int
    verb: str
    floats: tuple
    text: str = ""


def parse_script(text: str) -> list[Step]:
    steps = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        verb = tokens[0]
        args = tokens[1:]
        if verb not in _ARITY:
            raise ScriptError(f"line {lineno}: unknown verb {verb!r}")
        lo, hi = _ARITY[verb]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ScriptError(f"line {lineno}: {verb} takes {lo} argument(s), got {len(args)}")
        n_floats = _FLOAT_ARGS.get(verb, 0)
        floats = []
        for token in args[:n_floats]:
            try:
                floats.append(float(token))
            except ValueError:
                raise ScriptError(f"line {lineno}: not a number: {token!r}") from None
        if verb == "sleep":
            if not args[0].isdigit():
                raise ScriptError(f"line {lineno}: sleep takes whole milliseconds, got {args[0]!r}")
            text_arg = args[0]
        elif verb in ("remove", "restore"):
            text_arg = args[0]
        elif verb == "marker":
            text_arg = " ".join(args[3:]) or "marker"
        else:
            text_arg = ""
        steps.append(Step(lineno=lineno, verb=verb, floats=tuple(floats), text=text_arg))
    return steps


def parse_script_file(path: str) -> list[Step]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_script(fh.read())
    except FileNotFoundError:
        raise ScriptError(f"no script file at {path}") from None


@dataclass
class Transcript:
    """Everything that went over the wire while a script ran."""

    frames: list = field(default_factory=list)
    committed: list = field(default_factory=list)
    minted_ids: list = field(default_factory=list)

    def commit_ids(self) -> list[str]:
        return [ack["commit"] for ack in self.committed]


def run_script(client: SimulatorClient, steps: list[Step], sleep=time.sleep) -> Transcript:
    """Execute parsed steps against a connected, repo-bound client."""
    transcript = Transcript(frames=client.transcript)

    def record(ack_commit: str, measurement_id: str | None) -> None:
        transcript.committed.append({"commit": ack_commit, "measurement_id": measurement_id})
        if measurement_id is not None:
            transcript.minted_ids.append(measurement_id)

    def resolve_id(step: Step) -> str:
        ref = step.text
        if ref.startswith("@"):
            try:
                index = int(ref[1:])
            except ValueError:
                raise ScriptError(f"line {step.lineno}: bad id reference {ref!r}") from None
            if not 1 <= index <= len(transcript.minted_ids):
                raise ScriptError(f"line {step.lineno}: {ref} is out of range")
            return transcript.minted_ids[index - 1]
        return ref

    def resolve_commit(step: Step) -> str:
        ref = step.text
        if ref.startswith("@"):
            try:
                index = int(ref[1:])
            except ValueError:
                raise ScriptError(f"line {step.lineno}: bad commit reference {ref!r}") from None
            if not 1 <= index <= len(transcript.committed):
                raise ScriptError(f"line {step.lineno}: {ref} is out of range")
            return transcript.committed[index - 1]["commit"]
        return ref

    for step in steps:
        if step.verb == "marker":
            commit, mid = client.place_marker(step.floats, label=step.text)
            record(commit, mid)
        elif step.verb == "distance":
            commit, mid = client.add_distance(step.floats[:3], step.floats[3:])
            record(commit, mid)
        elif step.verb == "strikedip":
            commit, mid = client.add_strike_dip(step.floats[:3], step.floats[3:6], step.floats[6:])
            record(commit, mid)
        elif step.verb == "remove":
            commit = client.remove_measurement(resolve_id(step))
            record(commit, None)
        elif step.verb == "camera":
            client.set_camera(step.floats[:3], step.floats[3:])
        elif step.verb == "bookmark":
            commit = client.bookmark_view()
            record(commit, None)
        elif step.verb == "restore":
            client.trigger_restore(resolve_commit(step))
        elif step.verb == "sleep":
            sleep(int(step.text) / 1000.0)
    return transcript
