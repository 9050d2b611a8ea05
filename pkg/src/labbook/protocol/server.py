"""Tool-link server: accepts visualization clients over TCP.

The server wraps exactly one repository session. A connection walks a
three-state machine: it must open with ``hello``, then bind the
repository with ``create_repo`` or ``load_repo`` (answered by a
``restore`` frame carrying the HEAD snapshot, which doubles as the
resync point), and only then may send interaction events. One tool
client may be bound at a time; a second binder is refused with BUSY.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading

from .._version import __version__
from ..errors import Inapplicable, InvalidInput, LabbookError, NoClient, NotFound, ProtocolError
from ..session.engine import RecordResult, Session
from ..session.snapshot import Snapshot, decode_screenshot_b64, snapshot_to_wire
from .frames import DEFAULT_TOOL_PORT, Frame, LineSocket, decode_frame

log = logging.getLogger("labbook.protocol")


class EventBus:
    """Fan-out of change notifications to any number of subscribers."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.Queue] = []

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: dict) -> None:
        with self._lock:
            subscribers = list(self._subscribers)
        for q in subscribers:
            q.put(event)


class _ToolClient:
    def __init__(self, name: str, line_sock: LineSocket, seq_alloc):
        self.name = name
        self._line_sock = line_sock
        self._seq_alloc = seq_alloc

    def send(self, type_: str, payload: dict) -> None:
        self._line_sock.write_frame(Frame(type=type_, seq=self._seq_alloc(), payload=payload))


class ProvenanceService:
    """Shared core between the tool link and the HTTP API.

    All mutations run on the session's internal lock; this layer adds
    tool-client bookkeeping and change notification.
    """

    def __init__(self, repo_path: str, author: str = "operator", clock=None):
        self.session = Session.start(repo_path, author, clock)
        self.events = EventBus()
        self._slot_lock = threading.Lock()
        self._tool_client: _ToolClient | None = None

    # -- tool client slot ---------------------------------------------

    def claim_tool_slot(self, client: _ToolClient) -> bool:
        with self._slot_lock:
            if self._tool_client is not None:
                return False
            self._tool_client = client
            return True

    def release_tool_slot(self, client: _ToolClient) -> None:
        with self._slot_lock:
            if self._tool_client is client:
                self._tool_client = None

    def tool_client(self) -> _ToolClient | None:
        with self._slot_lock:
            return self._tool_client

    def _push(self, type_: str, payload: dict) -> None:
        client = self.tool_client()
        if client is None:
            return
        try:
            client.send(type_, payload)
        except OSError:
            self.release_tool_slot(client)

    # -- mutations ------------------------------------------------------

    def record_event(self, event: dict) -> RecordResult:
        result = self.session.record_interaction(event)
        self._publish_commit(result.commit)
        return result

    def ui_restore(self, ref: str) -> str:
        oid = self.session.repo.resolve_ref(ref)
        client = self.tool_client()
        if client is None:
            raise NoClient("no visualization client is connected")
        snapshot = self.session.restore(oid)
        try:
            client.send("restore", _restore_payload(oid, snapshot))
        except OSError:
            self.release_tool_slot(client)
            raise NoClient("visualization client connection lost") from None
        self.events.publish({"event": "restore", "commit": oid})
        return oid

    def ui_redo(self, ref: str) -> RecordResult:
        result = self.session.redo(ref)
        self._push(
            "redo_apply",
            {
                "commit": result.commit.id,
                "measurement_id": result.measurement_id,
                "snapshot": snapshot_to_wire(self.session.snapshot()),
            },
        )
        self._publish_commit(result.commit)
        return result

    def annotate(self, ref: str, text: str, author: str | None = None):
        oid = self.session.repo.resolve_ref(ref)
        annotation = self.session.annotate_state(oid, text, author)
        self.events.publish({"event": "annotation", "commit": oid})
        return annotation

    def put_mindmap(self, mindmap) -> str | None:
        commit = self.session.save_mindmap(mindmap)
        if commit is None:
            return None
        self._publish_commit(commit)
        return commit.id

    def put_notes(self, text) -> str | None:
        commit = self.session.save_notes(text)
        if commit is None:
            return None
        self._publish_commit(commit)
        return commit.id

    def export(self) -> bytes:
        from ..provstore.bundle import export_bundle

        return export_bundle(self.session.repo)

    def _publish_commit(self, commit) -> None:
        self.events.publish(
            {"event": "commit", "commit": commit.id, "kind": commit.state_kind}
        )


def _restore_payload(oid: str, snapshot: Snapshot) -> dict:
    return {"commit": oid, "snapshot": snapshot_to_wire(snapshot)}


def _event_from_payload(payload: dict, bookmark: bool = False) -> dict:
    if not isinstance(payload, dict):
        raise InvalidInput("event payload is not an object")
    if bookmark:
        expected = {"camera", "screenshot_b64"}
        if set(payload) != expected:
            raise InvalidInput(f"view_bookmark payload keys must be {sorted(expected)}")
        action = "bookmark"
    else:
        action = payload.get("action")
        if action == "add":
            expected = {"action", "measurement", "camera", "screenshot_b64"}
        elif action == "remove":
            expected = {"action", "id", "camera", "screenshot_b64"}
        else:
            raise InvalidInput(f"unknown event action: {action!r}")
        if set(payload) != expected:
            raise InvalidInput(f"{action} event payload keys must be {sorted(expected)}")
    event = {
        "action": action,
        "camera": payload["camera"],
        "screenshot": decode_screenshot_b64(payload["screenshot_b64"]),
    }
    if action == "add":
        event["measurement"] = payload["measurement"]
    elif action == "remove":
        event["id"] = payload["id"]
    return event


class ToolServer:
    """Threaded TCP acceptor for the line-framed tool protocol."""

    def __init__(self, service: ProvenanceService, host: str = "127.0.0.1", port: int = DEFAULT_TOOL_PORT):
        self.service = service
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(16)
        self.host, self.port = self._listener.getsockname()[:2]
        self._threads: list[threading.Thread] = []
        self._conns: set[LineSocket] = set()
        self._lock = threading.Lock()
        self._stopping = False
        self._accept_thread: threading.Thread | None = None

    def start(self) -> None:
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def stop(self) -> None:
        self._stopping = True
        # shutdown unblocks the thread parked in accept(); close alone does not
        try:
            self._listener.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self._listener.close()
        except OSError:
            pass
        with self._lock:
            conns = list(self._conns)
        for conn in conns:
            conn.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)
        for thread in self._threads:
            thread.join(timeout=5)

    def _accept_loop(self) -> None:
        while not self._stopping:
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            thread = threading.Thread(target=self._run_connection, args=(sock,), daemon=True)
            with self._lock:
                self._threads.append(thread)
            thread.start()

    def _run_connection(self, sock: socket.socket) -> None:
        line_sock = LineSocket(sock)
        with self._lock:
            self._conns.add(line_sock)
        out_seq_lock = threading.Lock()
        out_seq = [0]

        def next_seq() -> int:
            with out_seq_lock:
                out_seq[0] += 1
                return out_seq[0]

        def send(type_: str, payload: dict) -> bool:
            try:
                line_sock.write_frame(Frame(type=type_, seq=next_seq(), payload=payload))
                return True
            except OSError:
                return False

        def send_error(code: str, message: str) -> bool:
            return send("error", {"code": code, "message": message})

        state = "hello"
        last_seq: int | None = None
        client: _ToolClient | None = None
        try:
            while True:
                try:
                    line = line_sock.read_line()
                except ProtocolError as exc:
                    send_error(exc.code, str(exc))
                    return
                except OSError:
                    return
                if line is None:
                    return
                try:
                    frame = decode_frame(line)
                except ProtocolError as exc:
                    if not send_error(exc.code, str(exc)):
                        return
                    if state == "hello":
                        return
                    continue
                if last_seq is not None and frame.seq <= last_seq:
                    if not send_error("BAD_SEQ", f"seq {frame.seq} not above {last_seq}"):
                        return
                    if state == "hello":
                        return
                    continue
                last_seq = frame.seq

                if frame.type == "bye":
                    return

                if state == "hello":
                    name = frame.payload.get("name") if frame.type == "hello" else None
                    if (
                        frame.type != "hello"
                        or set(frame.payload) != {"name"}
                        or not isinstance(name, str)
                        or not 1 <= len(name) <= 128
                    ):
                        send_error("BAD_HANDSHAKE", "first frame must be hello{name}")
                        return
                    if not send("hello_ok", {"server_version": __version__}):
                        return
                    state = "repo"
                    continue

                if frame.type == "hello":
                    if not send_error("BAD_STATE", "hello already completed"):
                        return
                    continue

                if state == "repo":
                    if frame.type in ("create_repo", "load_repo"):
                        if frame.payload != {}:
                            if not send_error("BAD_REQUEST", f"{frame.type} payload must be empty"):
                                return
                            continue
                        if frame.type == "create_repo" and len(self.service.session.log()) > 1:
                            if not send_error("EXISTS", "repository already has history"):
                                return
                            continue
                        candidate = _ToolClient("tool", line_sock, next_seq)
                        if not self.service.claim_tool_slot(candidate):
                            send_error("BUSY", "another visualization client is connected")
                            return
                        client = candidate
                        session = self.service.session
                        head = session.head_commit()
                        if not send("restore", _restore_payload(head.id, session.snapshot())):
                            return
                        state = "active"
                        continue
                    if frame.type in ("event", "view_bookmark"):
                        if not send_error("NO_REPO", "bind a repository first"):
                            return
                        continue
                    if not send_error("UNKNOWN_TYPE", f"unknown frame type: {frame.type!r}"):
                        return
                    continue

                # state == "active"
                if frame.type in ("event", "view_bookmark"):
                    try:
                        event = _event_from_payload(frame.payload, frame.type == "view_bookmark")
                        result = self.service.record_event(event)
                    except InvalidInput as exc:
                        if not send_error("BAD_EVENT", str(exc)):
                            return
                        continue
                    except NotFound as exc:
                        if not send_error("NOT_FOUND", str(exc)):
                            return
                        continue
                    except Inapplicable as exc:
                        if not send_error("INAPPLICABLE", str(exc)):
                            return
                        continue
                    except LabbookError as exc:
                        if not send_error(exc.code, str(exc)):
                            return
                        continue
                    except Exception as exc:
                        log.exception("internal error handling event frame")
                        if not send_error("INTERNAL", f"internal error: {exc}"):
                            return
                        continue
                    ack = {"commit": result.commit.id, "measurement_id": result.measurement_id}
                    if not send("committed", ack):
                        return
                    continue
                if frame.type in ("create_repo", "load_repo"):
                    if not send_error("BAD_STATE", "repository already bound"):
                        return
                    continue
                if not send_error("UNKNOWN_TYPE", f"unknown frame type: {frame.type!r}"):
                    return
        finally:
            if client is not None:
                self.service.release_tool_slot(client)
            with self._lock:
                self._conns.discard(line_sock)
            line_sock.close()
