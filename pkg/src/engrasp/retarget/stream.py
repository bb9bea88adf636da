"""Streaming retarget loop with timestamp ordering and dedup."""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import StreamError
from ..hand.model import FINGER_ORDER
from .mapping import ControlVector, HumanHandFrame, retarget_frame


@dataclass(frozen=True)
class RetargetResult:
    timestamp: int
    u: ControlVector
    unchanged: bool


class StreamProcessor:
    """Feeds frames through retargeting, one at a time.

    Frames whose timestamp does not advance past the last accepted one
    are dropped (counted in ``dropped``). A result is flagged
    ``unchanged`` when its pulse vector equals the previous output.
    """

    def __init__(self, tables: dict):
        self.tables = tables
        self.dropped = 0
        self._last_ts: int | None = None
        self._last_u: tuple[int, ...] | None = None

    def process(self, frame: HumanHandFrame) -> RetargetResult | None:
        if self._last_ts is not None and frame.timestamp <= self._last_ts:
            self.dropped += 1
            return None
        u = retarget_frame(self.tables, frame)
        unchanged = u.u == self._last_u
        self._last_ts = frame.timestamp
        self._last_u = u.u
        return RetargetResult(timestamp=frame.timestamp, u=u, unchanged=unchanged)


def process_stream(tables: dict, frames):
    """Yield a RetargetResult per in-order frame; out-of-order ones drop."""
    proc = StreamProcessor(tables)
    for frame in frames:
        result = proc.process(frame)
        if result is not None:
            yield result


def frame_from_record(record: dict) -> HumanHandFrame:
    try:
        return HumanHandFrame(
            timestamp=record["t"],
            thumb=record["thumb"],
            index=record["index"],
            middle=record["middle"],
            ring=record["ring"],
            pinky=record["pinky"],
            thumb_yaw=record["thumb_yaw"],
            thumb_roll=record["thumb_roll"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StreamError(f"bad frame record: {exc}") from exc


def frame_to_record(frame: HumanHandFrame) -> dict:
    record = {"t": frame.timestamp}
    for fname in FINGER_ORDER:
        record[fname] = [float(v) for v in getattr(frame, fname)]
    record["thumb_yaw"] = frame.thumb_yaw
    record["thumb_roll"] = frame.thumb_roll
    return record


def read_frames(fh):
    """Parse a JSONL frame stream from a file-like object."""
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamError(f"line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise StreamError(f"line {lineno}: expected an object")
        yield frame_from_record(record)


def result_to_record(result: RetargetResult) -> dict:
    return {
        "t": result.timestamp,
        "u": result.u.as_list(),
        "unchanged": result.unchanged,
    }


def write_results(results, fh) -> int:
    """Serialize results as JSONL; returns the number written."""
    n = 0
    for result in results:
        fh.write(json.dumps(result_to_record(result), separators=(",", ":")))
        fh.write("\n")
        n += 1
    return n
