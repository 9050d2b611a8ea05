"""Timestamps and injectable clocks.

Commits and annotations store an integer of UTC seconds plus a UTC offset
in minutes. All time observation goes through a clock object so sessions
can be replayed deterministically under a fixed clock.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import InvalidInput

# One day in minutes; offsets at or beyond this are nonsensical.
_MAX_OFFSET = 24 * 60


@dataclass(frozen=True)
class Timestamp:
    seconds: int
    offset_minutes: int = 0

    def __post_init__(self):
        if not -_MAX_OFFSET < self.offset_minutes < _MAX_OFFSET:
            raise InvalidInput(f"UTC offset out of range: {self.offset_minutes}")

    def tz_string(self) -> str:
        """Offset as +HHMM / -HHMM."""
        sign = "-" if self.offset_minutes < 0 else "+"
        mins = abs(self.offset_minutes)
        return f"{sign}{mins // 60:02d}{mins % 60:02d}"

    def rfc3339(self) -> str:
        tz = timezone(timedelta(minutes=self.offset_minutes))
        text = datetime.fromtimestamp(self.seconds, tz).isoformat()
        # Canonical "Z" for UTC keeps annotation records byte-stable.
        return text[:-6] + "Z" if text.endswith("+00:00") else text


def parse_tz_string(tz: str) -> int:
    """Parse +HHMM / -HHMM into offset minutes."""
    if len(tz) != 5 or tz[0] not in "+-" or not tz[1:].isdigit():
        raise InvalidInput(f"bad timezone field: {tz!r}")
    minutes = int(tz[1:3]) * 60 + int(tz[3:5])
    return -minutes if tz[0] == "-" else minutes


def parse_rfc3339(text: str) -> Timestamp:
    if not isinstance(text, str):
        raise InvalidInput("timestamp is not a string")
    candidate = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        dt = datetime.fromisoformat(candidate)
    except ValueError as exc:
        raise InvalidInput(f"bad timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        raise InvalidInput(f"timestamp lacks UTC offset: {text!r}")
    offset = int(dt.utcoffset().total_seconds()) // 60
    return Timestamp(int(dt.timestamp()), offset)


class SystemClock:
    """Wall clock; reports UTC."""

    def now(self) -> Timestamp:
        return Timestamp(int(time.time()), 0)


class FixedClock:
    """Deterministic clock for replayable sessions.

    Each observation advances time by ``step`` seconds so consecutive
    commits get distinct, reproducible timestamps.
    """

    def __init__(self, start: int = 1_700_000_000, step: int = 1):
        self._next = start
        self._step = step
        self._lock = threading.Lock()

    def now(self) -> Timestamp:
        with self._lock:
            ts = Timestamp(self._next, 0)
            self._next += self._step
            return ts
