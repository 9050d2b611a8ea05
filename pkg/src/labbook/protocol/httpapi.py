"""HTTP API consumed by the web UI.

All endpoints live under ``/api/v1`` and speak JSON, except the
screenshot (PNG), the export (ZIP download) and the live event stream
(``text/event-stream``). Domain errors map onto 400/404/409; responses
carry permissive CORS headers so a separately served UI can talk to the
API during development. An optional static directory is served for
everything outside ``/api``.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import os
import queue
import threading
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import (
    AlreadyExists,
    CorruptBundle,
    Inapplicable,
    InvalidInput,
    InvalidName,
    LabbookError,
    NoClient,
    NotFound,
    RepoError,
    Unsupported,
)
from ..session.snapshot import load_snapshot
from .server import ProvenanceService

log = logging.getLogger("labbook.http")

DEFAULT_HTTP_PORT = 7342
MAX_BODY_BYTES = 32 * 1024 * 1024

_STATUS_BY_ERROR = (
    (NotFound, 404),
    (InvalidName, 400),
    (InvalidInput, 400),
    (Unsupported, 400),
    (CorruptBundle, 400),
    (NoClient, 409),
    (Inapplicable, 409),
    (AlreadyExists, 409),
    (RepoError, 409),
)


def _error_status(exc: Exception) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 500


def _commit_node(service: ProvenanceService, commit) -> dict:
    return {
        "id": commit.id,
        "kind": commit.state_kind,
        "message": commit.message,
        "author": commit.author,
        "timestamp": commit.timestamp.rfc3339(),
        "parents": list(commit.parents),
        "annotation_count": len(service.session.repo.get_annotations(commit.id)),
        "screenshot_url": f"/api/v1/commits/{commit.id}/screenshot",
    }


def graph_model(service: ProvenanceService) -> dict:
    session = service.session
    commits = session.log()
    nodes = [_commit_node(service, c) for c in commits]
    edges = [[c.id, parent] for c in commits for parent in c.parents]
    mode, value = session.repo.head()
    return {
        "nodes": nodes,
        "edges": edges,
        "refs": session.repo.branches(),
        "head": {"mode": mode, "value": value, "commit": session.repo.resolve_head()},
    }


def commit_detail(service: ProvenanceService, oid: str) -> dict:
    session = service.session
    commit = session.repo.get_commit(session.repo.resolve_ref(oid))
    snapshot = load_snapshot(session.repo, commit.tree)
    detail = _commit_node(service, commit)
    detail["tree"] = commit.tree
    detail["annotations"] = [
        {"author": a.author, "text": a.text, "timestamp": a.timestamp.rfc3339()}
        for a in session.repo.get_annotations(commit.id)
    ]
    detail["snapshot"] = {
        "camera": snapshot.camera,
        "measurements": list(snapshot.measurements),
        "mindmap": snapshot.mindmap,
        "notes": snapshot.notes,
    }
    return detail


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    service: ProvenanceService
    ui_dir: str | None

    # -- plumbing -------------------------------------------------------

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")

    def _send_bytes(self, status: int, content_type: str, body: bytes, extra=()) -> None:
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in extra:
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        body = (json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n").encode()
        self._send_bytes(status, "application/json; charset=utf-8", body)

    def _send_domain_error(self, exc: Exception) -> None:
        status = _error_status(exc)
        code = exc.code if isinstance(exc, LabbookError) else "INTERNAL"
        if status == 500:
            log.exception("internal error serving %s", self.path)
        self._send_json(status, {"error": {"code": code, "message": str(exc)}})

    def _error(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"error": {"code": code, "message": message}})

    def _read_body(self) -> bytes:
        length = self.headers.get("Content-Length")
        try:
            n = int(length) if length is not None else 0
        except ValueError:
            raise InvalidInput(f"bad Content-Length: {length!r}") from None
        if n < 0 or n > MAX_BODY_BYTES:
            raise InvalidInput(f"request body too large ({n} bytes)")
        return self.rfile.read(n) if n else b""

    def _json_body(self):
        body = self._read_body()
        try:
            return json.loads(body.decode())
        except (ValueError, UnicodeDecodeError) as exc:
            raise InvalidInput(f"request body is not valid JSON: {exc}") from None

    def _route(self) -> tuple[str, list[str]]:
        path = urllib.parse.urlsplit(self.path).path
        parts = [urllib.parse.unquote(p) for p in path.split("/") if p]
        return path, parts

    # -- methods ----------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self._cors()
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        try:
            path, parts = self._route()
            if parts[:2] != ["api", "v1"]:
                self._serve_static(path)
                return
            rest = parts[2:]
            if rest == ["graph"]:
                self._send_json(200, graph_model(self.service))
            elif rest == ["mindmap"]:
                self._send_json(200, self.service.session.snapshot().mindmap)
            elif rest == ["notes"]:
                self._send_json(200, {"text": self.service.session.snapshot().notes})
            elif rest == ["events"]:
                self._serve_events()
            elif len(rest) == 2 and rest[0] == "commits":
                self._send_json(200, commit_detail(self.service, rest[1]))
            elif len(rest) == 3 and rest[0] == "commits" and rest[2] == "screenshot":
                session = self.service.session
                commit = session.repo.get_commit(session.repo.resolve_ref(rest[1]))
                snapshot = load_snapshot(session.repo, commit.tree)
                self._send_bytes(200, "image/png", snapshot.screenshot)
            else:
                self._error(404, "NOT_FOUND", f"no such endpoint: {path}")
        except Exception as exc:
            self._send_domain_error(exc)

    def do_POST(self):
        try:
            path, parts = self._route()
            rest = parts[2:] if parts[:2] == ["api", "v1"] else None
            if rest == ["export"]:
                data = self.service.export()
                self._send_bytes(
                    200,
                    "application/zip",
                    data,
                    extra=[("Content-Disposition", 'attachment; filename="labbook-export.zip"')],
                )
            elif rest is not None and len(rest) == 2 and rest[0] == "restore":
                oid = self.service.ui_restore(rest[1])
                self._send_json(200, {"commit": oid})
            elif rest is not None and len(rest) == 2 and rest[0] == "redo":
                result = self.service.ui_redo(rest[1])
                self._send_json(
                    200,
                    {"commit": result.commit.id, "measurement_id": result.measurement_id},
                )
            elif (
                rest is not None
                and len(rest) == 3
                and rest[0] == "commits"
                and rest[2] == "annotations"
            ):
                body = self._json_body()
                if not isinstance(body, dict) or set(body) != {"author", "text"}:
                    raise InvalidInput("annotation body must be {author, text}")
                author, text = body["author"], body["text"]
                if not isinstance(author, str) or not author:
                    raise InvalidInput("annotation author must be a non-empty string")
                if not isinstance(text, str):
                    raise InvalidInput("annotation text must be a string")
                annotation = self.service.annotate(rest[1], text, author)
                self._send_json(
                    201,
                    {
                        "author": annotation.author,
                        "text": annotation.text,
                        "timestamp": annotation.timestamp.rfc3339(),
                    },
                )
            else:
                self._error(404, "NOT_FOUND", f"no such endpoint: {path}")
        except Exception as exc:
            self._send_domain_error(exc)

    def do_PUT(self):
        try:
            path, parts = self._route()
            rest = parts[2:] if parts[:2] == ["api", "v1"] else None
            if rest == ["mindmap"]:
                commit_id = self.service.put_mindmap(self._json_body())
                self._send_json(200, {"commit": commit_id})
            elif rest == ["notes"]:
                body = self._json_body()
                if not isinstance(body, dict) or set(body) != {"text"}:
                    raise InvalidInput("notes body must be {text}")
                commit_id = self.service.put_notes(body["text"])
                self._send_json(200, {"commit": commit_id})
            else:
                self._error(404, "NOT_FOUND", f"no such endpoint: {path}")
        except Exception as exc:
            self._send_domain_error(exc)

    # -- event stream ----------------------------------------------------

    def _serve_events(self) -> None:
        q = self.service.events.subscribe()
        try:
            self.send_response(200)
            self._cors()
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-store")
            self.end_headers()
            self.wfile.write(b"retry: 2000\n\n")
            self.wfile.flush()
            while True:
                try:
                    event = q.get(timeout=15)
                except queue.Empty:
                    self.wfile.write(b": keep-alive\n\n")
                    self.wfile.flush()
                    continue
                data = json.dumps(event, sort_keys=True, ensure_ascii=False)
                self.wfile.write(f"event: change\ndata: {data}\n\n".encode())
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, OSError):
            pass
        finally:
            self.service.events.unsubscribe(q)
            self.close_connection = True

    # -- static UI ---------------------------------------------------------

    def _serve_static(self, path: str) -> None:
        if self.ui_dir is None:
            self._error(404, "NOT_FOUND", f"no such endpoint: {path}")
            return
        relative = path.lstrip("/") or "index.html"
        root = os.path.abspath(self.ui_dir)
        target = os.path.abspath(os.path.join(root, *relative.split("/")))
        if os.path.commonpath([root, target]) != root:
            self._error(404, "NOT_FOUND", "path outside UI directory")
            return
        if os.path.isdir(target):
            target = os.path.join(target, "index.html")
        if not os.path.isfile(target):
            self._error(404, "NOT_FOUND", f"no such file: {path}")
            return
        content_type = mimetypes.guess_type(target)[0] or "application/octet-stream"
        with open(target, "rb") as fh:
            body = fh.read()
        self._send_bytes(200, content_type, body, extra=[("Cache-Control", "no-store")])


class HttpApi:
    """Threaded HTTP server bound to one ProvenanceService."""

    def __init__(
        self,
        service: ProvenanceService,
        host: str = "127.0.0.1",
        port: int = DEFAULT_HTTP_PORT,
        ui_dir: str | None = None,
    ):
        handler = type("BoundHandler", (_Handler,), {"service": service, "ui_dir": ui_dir})
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._httpd.daemon_threads = True
        self._httpd.block_on_close = False
        self.host, self.port = self._httpd.server_address[:2]
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        # Short poll keeps stop() snappy; the default 0.5s stalls every shutdown.
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.05), daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
