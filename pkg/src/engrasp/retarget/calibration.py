"""Calibration tables pairing robot pulses with human postures."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import yaml

from ..errors import CalibrationError, InvalidInput
from ..hand.model import CHANNEL_ORDER, HandModel
from .mapping import CHANNEL_DIMS, HumanHandFrame

SCHEMA = "engrasp-calibration/1"


@dataclass(frozen=True)
class CalibrationTable:
    """Recorded (pulse, posture) pairs for one channel.

    Pulses are strictly increasing integers; postures are a (K, D) float
    array where D is fixed per channel (3 for flexion, 1 for the thumb
    yaw and roll axes).
    """

    channel: str
    pulses: np.ndarray
    postures: np.ndarray

    def __post_init__(self):
        if self.channel not in CHANNEL_DIMS:
            raise InvalidInput(f"unknown channel {self.channel!r}")
        pulses = np.asarray(self.pulses, dtype=np.int64)
        postures = np.asarray(self.postures, dtype=np.float64)
        if pulses.ndim != 1 or pulses.shape[0] == 0:
            raise CalibrationError(f"channel {self.channel!r}: empty table")
        if np.any(np.diff(pulses) <= 0):
            raise CalibrationError(
                f"channel {self.channel!r}: pulses must be strictly increasing"
            )
        want = CHANNEL_DIMS[self.channel]
        if postures.shape != (pulses.shape[0], want):
            raise CalibrationError(
                f"channel {self.channel!r}: postures must be "
                f"({pulses.shape[0]}, {want}), got {postures.shape}"
            )
        if not np.all(np.isfinite(postures)):
            raise CalibrationError(f"channel {self.channel!r}: non-finite posture")
        pulses.setflags(write=False)
        postures.setflags(write=False)
        object.__setattr__(self, "pulses", pulses)
        object.__setattr__(self, "postures", postures)

    def __len__(self) -> int:
        return int(self.pulses.shape[0])

    def validate_against(self, model: HandModel) -> "CalibrationTable":
        lo, hi = model.channel(self.channel).pulse_range
        bad = (self.pulses < lo) | (self.pulses > hi)
        if np.any(bad):
            worst = int(self.pulses[np.argmax(bad)])
            raise CalibrationError(
                f"channel {self.channel!r}: pulse {worst} outside [{lo}, {hi}]"
            )
        return self


def record_calibration(samples) -> dict[str, CalibrationTable]:
    """Build per-channel tables from a stream of (pulse, frame) samples.

    Every sample contributes to all seven channels. Repeated pulses are
    averaged; tables come out sorted by pulse.
    """
    by_pulse: dict[int, list[HumanHandFrame]] = {}
    for pulse, frame in samples:
        by_pulse.setdefault(int(pulse), []).append(frame)
    if not by_pulse:
        raise CalibrationError("calibration stream is empty")

    pulses = sorted(by_pulse)
    tables = {}
    for channel in CHANNEL_ORDER:
        postures = np.array(
            [
                np.mean([f.posture_for(channel) for f in by_pulse[p]], axis=0)
                for p in pulses
            ]
        )
        tables[channel] = CalibrationTable(
            channel=channel, pulses=np.array(pulses), postures=postures
        )
    return tables


def save_calibration(tables: dict[str, CalibrationTable], path) -> None:
    missing = [c for c in CHANNEL_ORDER if c not in tables]
    if missing:
        raise CalibrationError(f"missing tables for channels: {missing}")
    doc = {
        "schema": SCHEMA,
        "channels": {
            name: {
                "pulses": [int(p) for p in tables[name].pulses],
                "postures": [[float(v) for v in row] for row in tables[name].postures],
            }
            for name in CHANNEL_ORDER
        },
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=True)
    os.replace(tmp, path)


def load_calibration(path) -> dict[str, CalibrationTable]:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise CalibrationError(f"{path}: not an {SCHEMA} document")
    channels = doc.get("channels")
    if not isinstance(channels, dict):
        raise CalibrationError(f"{path}: missing channels map")
    tables = {}
    for name in CHANNEL_ORDER:
        entry = channels.get(name)
        if not isinstance(entry, dict):
            raise CalibrationError(f"{path}: missing table for channel {name!r}")
        try:
            tables[name] = CalibrationTable(
                channel=name,
                pulses=np.asarray(entry["pulses"]),
                postures=np.asarray(entry["postures"], dtype=np.float64),
            )
        except (KeyError, ValueError) as exc:
            raise CalibrationError(f"{path}: bad table for {name!r}: {exc}") from exc
    return tables
