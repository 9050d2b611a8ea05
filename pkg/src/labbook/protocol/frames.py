"""Wire frames for the tool link.

One frame per line: a UTF-8 JSON object ``{"v": 1, "type": ..., "seq":
..., "payload": {...}}`` terminated by a line feed, at most 8 MiB
including the terminator. Frames are serialized in canonical JSON form
so a scripted exchange is byte-reproducible.
"""

from __future__ import annotations

import json
import socket
from dataclasses import dataclass

from ..errors import ProtocolError

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 8 * 1024 * 1024
DEFAULT_TOOL_PORT = 7341

CLIENT_TYPES = ("hello", "create_repo", "load_repo", "event", "view_bookmark", "bye")
SERVER_TYPES = ("hello_ok", "restore", "redo_apply", "committed", "error")


@dataclass(frozen=True)
class Frame:
    type: str
    seq: int
    payload: dict
    v: int = PROTOCOL_VERSION


def encode_frame(frame: Frame) -> bytes:
    body = {"payload": frame.payload, "seq": frame.seq, "type": frame.type, "v": frame.v}
    line = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()
    if len(line) + 1 > MAX_FRAME_BYTES:
        raise ProtocolError("OVERSIZE", f"frame of {len(line) + 1} bytes exceeds limit")
    return line + b"\n"


def decode_frame(line: bytes) -> Frame:
    try:
        obj = json.loads(line.decode())
    except (ValueError, UnicodeDecodeError) as exc:
        raise ProtocolError("BAD_FRAME", f"frame is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or set(obj) != {"v", "type", "seq", "payload"}:
        raise ProtocolError("BAD_FRAME", "frame keys must be exactly v, type, seq, payload")
    if obj["v"] != PROTOCOL_VERSION:
        raise ProtocolError("BAD_FRAME", f"unsupported protocol version: {obj['v']!r}")
    if not isinstance(obj["type"], str):
        raise ProtocolError("BAD_FRAME", "frame type is not a string")
    if isinstance(obj["seq"], bool) or not isinstance(obj["seq"], int) or obj["seq"] < 0:
        raise ProtocolError("BAD_FRAME", "frame seq is not a non-negative integer")
    if not isinstance(obj["payload"], dict):
        raise ProtocolError("BAD_FRAME", "frame payload is not an object")
    return Frame(type=obj["type"], seq=obj["seq"], payload=obj["payload"])


class LineSocket:
    """Blocking line-framed transport over a stream socket.

    Reading enforces the frame size cap; writing is locked so multiple
    threads (ack path and server-initiated pushes) can interleave whole
    frames safely.
    """

    def __init__(self, sock, max_frame: int = MAX_FRAME_BYTES):
        import threading

        self._sock = sock
        self._buffer = bytearray()
        self._max_frame = max_frame
        self._write_lock = threading.Lock()
        self._eof = False

    def read_line(self) -> bytes | None:
        """Next line without its terminator, or None at end of stream."""
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = bytes(self._buffer[:newline])
                del self._buffer[: newline + 1]
                return line
            if len(self._buffer) >= self._max_frame:
                raise ProtocolError("OVERSIZE", "frame exceeds size limit")
            if self._eof:
                if self._buffer:
                    line = bytes(self._buffer)
                    self._buffer.clear()
                    return line
                return None
            chunk = self._sock.recv(65536)
            if not chunk:
                self._eof = True
            else:
                self._buffer += chunk

    def write_frame(self, frame: Frame) -> None:
        data = encode_frame(frame)
        with self._write_lock:
            self._sock.sendall(data)

    def close(self) -> None:
        # shutdown first so a thread blocked in recv wakes with EOF
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass
