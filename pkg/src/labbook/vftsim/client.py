"""Reference visualization client.

Maintains the local tool state (measurements, camera, mind map copy,
notes copy), renders deterministic screenshots, and speaks the line
protocol to a provenance server. Local state is kept in the same
normalized form the server commits, so re-serializing it after any
exchange hashes to the server's tree id.
"""

from __future__ import annotations

import base64
import json
import math
import socket
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import replace

from ..errors import InvalidInput, InvalidSnapshot, NotFound, ProtocolError
from ..session.snapshot import (
    Snapshot,
    snapshot_from_wire,
    tree_id,
    validate_camera,
    validate_measurement,
)
from ..protocol.frames import Frame, LineSocket, decode_frame
from .geometry import strike_dip
from .render import render_screenshot
from .scenes import Scene


def _point(value, what: str) -> list[float]:
    try:
        x, y, z = value
        point = [float(x), float(y), float(z)]
    except (TypeError, ValueError):
        raise InvalidInput(f"{what} is not a 3-D point: {value!r}") from None
    if not all(math.isfinite(c) for c in point):
        raise InvalidInput(f"{what} has non-finite coordinate: {value!r}")
    return point


def measure_distance(a, b) -> float:
    """Euclidean distance in meters."""
    return math.dist(_point(a, "endpoint"), _point(b, "endpoint"))


class SimulatorClient:
    """One tool connection to a provenance server."""

    def __init__(
        self,
        host: str,
        port: int,
        scene: Scene,
        client_name: str = "sim",
        http_base: str | None = None,
        timeout: float = 30.0,
    ):
        self.host = host
        self.port = port
        self.scene = scene
        self.client_name = client_name
        self.http_base = http_base.rstrip("/") if http_base else None
        self.timeout = timeout
        self.snap: Snapshot | None = None
        self.server_commit: str | None = None
        self.transcript: list[dict] = []
        self._sock: LineSocket | None = None
        self._seq = 0

    # -- wire plumbing ---------------------------------------------------

    def connect(self) -> dict:
        raw = socket.create_connection((self.host, self.port), timeout=self.timeout)
        self._sock = LineSocket(raw)
        reply = self._request("hello", {"name": self.client_name}, expect="hello_ok")
        return reply

    def close(self) -> None:
        if self._sock is None:
            return
        try:
            self._send("bye", {})
        except OSError:
            pass
        self._sock.close()
        self._sock = None

    def _send(self, type_: str, payload: dict) -> None:
        if self._sock is None:
            raise ProtocolError("NOT_CONNECTED", "client is not connected")
        self._seq += 1
        frame = Frame(type=type_, seq=self._seq, payload=payload)
        self.transcript.append({"dir": "send", "type": type_, "seq": frame.seq, "payload": payload})
        self._sock.write_frame(frame)

    def _read_frame(self) -> Frame:
        line = self._sock.read_line()
        if line is None:
            raise ProtocolError("CLOSED", "server closed the connection")
        frame = decode_frame(line)
        self.transcript.append(
            {"dir": "recv", "type": frame.type, "seq": frame.seq, "payload": frame.payload}
        )
        return frame

    def _handle_push(self, frame: Frame) -> None:
        self._apply_wire_snapshot(frame.payload.get("snapshot"))
        commit = frame.payload.get("commit")
        if isinstance(commit, str):
            self.server_commit = commit

    def _request(self, type_: str, payload: dict, expect: str) -> dict:
        self._send(type_, payload)
        while True:
            frame = self._read_frame()
            if frame.type == "error":
                raise ProtocolError(
                    frame.payload.get("code", "ERROR"), frame.payload.get("message", "")
                )
            if frame.type in ("restore", "redo_apply"):
                self._handle_push(frame)
                if expect in ("restore", "redo_apply") and frame.type == expect:
                    return frame.payload
                continue
            if frame.type == expect:
                return frame.payload
            raise ProtocolError("UNEXPECTED", f"expected {expect}, got {frame.type}")

    def wait_for_push(self, timeout: float | None = None) -> str:
        """Block until the server pushes a restore/redo_apply; apply it."""
        if timeout is not None:
            self._sock._sock.settimeout(timeout)
        try:
            while True:
                frame = self._read_frame()
                if frame.type in ("restore", "redo_apply"):
                    self._handle_push(frame)
                    return frame.type
                if frame.type == "error":
                    raise ProtocolError(
                        frame.payload.get("code", "ERROR"), frame.payload.get("message", "")
                    )
        finally:
            if timeout is not None:
                self._sock._sock.settimeout(self.timeout)

    # -- repo binding -------------------------------------------------------

    def bind_repo(self, mode: str = "load") -> str:
        """Bind this connection to the server's repository.

        mode "create" expects a fresh repository; "load" resumes at the
        persisted HEAD. Returns the HEAD commit id after resync.
        """
        if mode not in ("create", "load"):
            raise InvalidInput(f"bind mode must be create or load: {mode!r}")
        payload = self._request(f"{mode}_repo", {}, expect="restore")
        return payload["commit"]

    # -- local state ----------------------------------------------------------

    def _apply_wire_snapshot(self, wire) -> None:
        try:
            self.snap = snapshot_from_wire(wire)
        except InvalidInput as exc:
            raise InvalidSnapshot(str(exc)) from None

    def apply_snapshot(self, wire) -> None:
        """Replace local state wholesale from a wire-form snapshot."""
        self._apply_wire_snapshot(wire)

    def measurements(self) -> list[dict]:
        self._require_state()
        return list(self.snap.measurements)

    def local_tree_id(self) -> str:
        self._require_state()
        return tree_id(self.snap)

    def _require_state(self) -> None:
        if self.snap is None:
            raise ProtocolError("NOT_BOUND", "no repository bound yet")

    def set_camera(self, position, orientation) -> None:
        self._require_state()
        camera = validate_camera({"position": list(position), "orientation": list(orientation)})
        self.snap = replace(self.snap, camera=camera)

    # -- interactions ---------------------------------------------------------

    def _render(self, measurements) -> bytes:
        return render_screenshot(self.scene.name, measurements, self.snap.camera)

    def _send_event(self, frame_type: str, payload_extra: dict, measurements_after, pending_render) -> dict:
        png = self._render(pending_render)
        payload = dict(
            payload_extra,
            camera=self.snap.camera,
            screenshot_b64=base64.b64encode(png).decode(),
        )
        ack = self._request(frame_type, payload, expect="committed")
        self.snap = replace(self.snap, measurements=tuple(measurements_after(ack)), screenshot=png)
        self.server_commit = ack["commit"]
        return ack

    def _add(self, measurement: dict) -> tuple[str, str]:
        self._require_state()
        body = validate_measurement(measurement, require_id=False)
        pending = list(self.snap.measurements) + [body]

        def after(ack):
            return list(self.snap.measurements) + [dict(body, id=ack["measurement_id"])]

        ack = self._send_event(
            "event", {"action": "add", "measurement": body}, after, pending_render=pending
        )
        return ack["commit"], ack["measurement_id"]

    def place_marker(self, p, label: str = "marker") -> tuple[str, str]:
        return self._add({"kind": "location_marker", "label": str(label), "p": _point(p, "marker")})

    def add_distance(self, a, b) -> tuple[str, str]:
        pa, pb = _point(a, "endpoint"), _point(b, "endpoint")
        return self._add(
            {"kind": "distance", "a": pa, "b": pb, "length_m": math.dist(pa, pb)}
        )

    def add_strike_dip(self, p1, p2, p3) -> tuple[str, str]:
        result = strike_dip(p1, p2, p3)
        return self._add(
            {
                "kind": "strike_dip",
                "p1": _point(p1, "plane point"),
                "p2": _point(p2, "plane point"),
                "p3": _point(p3, "plane point"),
                "strike_deg": result.strike_deg,
                "dip_deg": result.dip_deg,
                "dip_direction_deg": result.dip_direction_deg,
            }
        )

    def remove_measurement(self, measurement_id: str) -> str:
        self._require_state()
        kept = [m for m in self.snap.measurements if m["id"] != measurement_id]
        if len(kept) == len(self.snap.measurements):
            raise NotFound(f"no measurement with id {measurement_id!r}")

        def after(_ack):
            return kept

        ack = self._send_event(
            "event", {"action": "remove", "id": measurement_id}, after, pending_render=kept
        )
        return ack["commit"]

    def bookmark_view(self) -> str:
        self._require_state()
        current = list(self.snap.measurements)

        def after(_ack):
            return current

        ack = self._send_event("view_bookmark", {}, after, pending_render=current)
        return ack["commit"]

    # -- HTTP side channel ------------------------------------------------------

    def trigger_restore(self, ref: str, timeout: float = 10.0) -> str:
        """Ask the server (over HTTP) to restore, then apply the push."""
        if self.http_base is None:
            raise InvalidInput("restore requires the HTTP endpoint (http_base not set)")
        url = f"{self.http_base}/api/v1/restore/{urllib.parse.quote(ref, safe='')}"
        request = urllib.request.Request(url, method="POST", data=b"")
        try:
            with urllib.request.urlopen(request, timeout=timeout) as response:
                json.loads(response.read().decode())
        except urllib.error.HTTPError as exc:
            detail = exc.read().decode(errors="replace")
            try:
                code = json.loads(detail)["error"]["code"]
                message = json.loads(detail)["error"]["message"]
            except Exception:
                code, message = "HTTP_ERROR", detail
            raise ProtocolError(code, message) from None
        self.wait_for_push(timeout=timeout)
        return self.server_commit
