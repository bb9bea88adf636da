"""Human-to-robot hand retargeting."""

from .calibration import (
    SCHEMA,
    CalibrationTable,
    load_calibration,
    record_calibration,
    save_calibration,
)
from .mapping import (
    CHANNEL_DIMS,
    ControlVector,
    HumanHandFrame,
    nearest_posture,
    retarget_frame,
)
from .stream import (
    RetargetResult,
    StreamProcessor,
    frame_from_record,
    frame_to_record,
    process_stream,
    read_frames,
    result_to_record,
    write_results,
)

__all__ = [
    "CHANNEL_DIMS",
    "SCHEMA",
    "CalibrationTable",
    "ControlVector",
    "HumanHandFrame",
    "RetargetResult",
    "StreamProcessor",
    "frame_from_record",
    "frame_to_record",
    "load_calibration",
    "nearest_posture",
    "process_stream",
    "read_frames",
    "record_calibration",
    "result_to_record",
    "retarget_frame",
    "save_calibration",
    "write_results",
]
