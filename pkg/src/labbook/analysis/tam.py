"""Acceptance-questionnaire scoring.

A response is twelve items on a 1..7 agreement scale. Items 1-6 form
the usefulness scale, items 7-12 the ease-of-use scale; each scale maps
linearly onto 0..100 via (mean - 1) / 6 * 100.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass

from ..errors import InvalidInput

ITEM_COUNT = 12
SCALE_MIN, SCALE_MAX = 1, 7


@dataclass(frozen=True)
class TamScores:
    pu: float
    peou: float


def _validate_items(items) -> list[int]:
    if not isinstance(items, (list, tuple)) or len(items) != ITEM_COUNT:
        raise InvalidInput(f"a response has exactly {ITEM_COUNT} items")
    out = []
    for index, item in enumerate(items, start=1):
        if isinstance(item, bool) or not isinstance(item, int):
            raise InvalidInput(f"item {index} is not an integer: {item!r}")
        if not SCALE_MIN <= item <= SCALE_MAX:
            raise InvalidInput(f"item {index} out of range {SCALE_MIN}..{SCALE_MAX}: {item}")
        out.append(item)
    return out


def _scale(items) -> float:
    return (statistics.fmean(items) - 1.0) / 6.0 * 100.0


def score_tam(items) -> TamScores:
    """Score one 12-item response into (pu, peou), each 0..100."""
    values = _validate_items(items)
    return TamScores(pu=_scale(values[:6]), peou=_scale(values[6:]))


@dataclass(frozen=True)
class TamRow:
    participant_id: str
    group: str
    scores: TamScores


def read_tam_csv(path: str) -> list[TamRow]:
    """Read ``participant_id,group,item1..item12`` rows; header optional."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or (lineno == 1 and record[0].strip() == "participant_id"):
                continue
            if len(record) != 2 + ITEM_COUNT:
                raise InvalidInput(
                    f"{path}:{lineno}: expected {2 + ITEM_COUNT} fields, got {len(record)}"
                )
            try:
                items = [int(field.strip()) for field in record[2:]]
            except ValueError as exc:
                raise InvalidInput(f"{path}:{lineno}: {exc}") from None
            try:
                scores = score_tam(items)
            except InvalidInput as exc:
                raise InvalidInput(f"{path}:{lineno}: {exc}") from None
            rows.append(
                TamRow(participant_id=record[0].strip(), group=record[1].strip(), scores=scores)
            )
    if not rows:
        raise InvalidInput(f"{path}: no responses found")
    return rows
