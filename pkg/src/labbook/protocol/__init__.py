"""Tool-link wire protocol and UI-facing HTTP API."""

from .config import Config, resolve_config
from .frames import (
    DEFAULT_TOOL_PORT,
    MAX_FRAME_BYTES,
    PROTOCOL_VERSION,
    Frame,
    LineSocket,
    decode_frame,
    encode_frame,
)
from .httpapi import DEFAULT_HTTP_PORT, HttpApi
from .server import EventBus, ProvenanceService, ToolServer

__all__ = [
    "Config",
    "DEFAULT_HTTP_PORT",
    "DEFAULT_TOOL_PORT",
    "EventBus",
    "Frame",
    "HttpApi",
    "LineSocket",
    "MAX_FRAME_BYTES",
    "PROTOCOL_VERSION",
    "ProvenanceService",
    "ToolServer",
    "decode_frame",
    "encode_frame",
    "resolve_config",
]
