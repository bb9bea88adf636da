"""Human-to-robot posture mapping.

Each of the seven actuation channels owns a calibration table of
(pulse, posture) pairs recorded from a human operator. A live hand frame
is mapped channel by channel to the pulse of its nearest recorded
posture (plain Euclidean distance, ties to the smallest index), and the
seven pulses are assembled into one control vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, InvalidInput, InvalidPulse
from ..hand.model import CHANNEL_ORDER, FINGER_ORDER, FLEXION_CHANNELS, HandModel

# Posture dimensionality per channel: three flexion angles per finger,
# one scalar for each extra thumb axis.
CHANNEL_DIMS = {name: 3 for name in FLEXION_CHANNELS}
CHANNEL_DIMS["thumb_yaw"] = 1
CHANNEL_DIMS["thumb_roll"] = 1


@dataclass(frozen=True)
class HumanHandFrame:
    """One measured human hand posture with a monotonic timestamp."""

    timestamp: int  # nanoseconds
    thumb: np.ndarray
    index: np.ndarray
    middle: np.ndarray
    ring: np.ndarray
    pinky: np.ndarray
    thumb_yaw: float
    thumb_roll: float

    def __post_init__(self):
        for fname in FINGER_ORDER:
            vec = np.asarray(getattr(self, fname), dtype=np.float64)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise InvalidInput(
                    f"finger {fname!r}: need three finite flexion angles"
                )
            vec.setflags(write=False)
            object.__setattr__(self, fname, vec)
        for aname in ("thumb_yaw", "thumb_roll"):
            value = float(getattr(self, aname))
            if not np.isfinite(value):
                raise InvalidInput(f"{aname} must be finite")
            object.__setattr__(self, aname, value)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    def posture_for(self, channel: str) -> np.ndarray:
        """The slice of this frame that a given channel matches against."""
        if channel in FLEXION_CHANNELS:
            return getattr(self, FINGER_ORDER[FLEXION_CHANNELS.index(channel)])
        if channel == "thumb_yaw":
            return np.array([self.thumb_yaw])
        if channel == "thumb_roll":
            return np.array([self.thumb_roll])
        raise InvalidInput(f"unknown channel {channel!r}")


@dataclass(frozen=True)
class ControlVector:
    """Seven integer pulses in fixed channel order."""

    u: tuple[int, ...]

    def __post_init__(self):
        if len(self.u) != 7:
            raise InvalidInput(f"control vector needs 7 pulses, got {len(self.u)}")
        object.__setattr__(self, "u", tuple(int(v) for v in self.u))

    def as_list(self) -> list[int]:
        return list(self.u)

    def validate_against(self, model: HandModel) -> "ControlVector":
        for channel, pulse in zip(model.channels, self.u):
            lo, hi = channel.pulse_range
            if not (lo <= pulse <= hi):
                raise InvalidPulse(
                    f"channel {channel.name}: pulse {pulse} outside [{lo}, {hi}]"
                )
        return self


def nearest_posture(table, theta) -> tuple[int, int]:
    """Index and pulse of the calibration entry nearest to ``theta``.

    Distance is unweighted Euclidean over the raw angles; exact ties go
    to the smallest index so results are order-stable.
    """
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.shape != (table.postures.shape[1],):
        raise InvalidInput(
            f"posture dimension {theta.shape[0]} does not match table "
            f"{table.channel!r} (expected {table.postures.shape[1]})"
        )
    diffs = table.postures - theta
    k = int(np.argmin(np.einsum("ij,ij->i", diffs, diffs)))
    return k, int(table.pulses[k])


def retarget_frame(tables: dict, frame: HumanHandFrame) -> ControlVector:
    """Map one human frame to the 7-channel pulse vector."""
    pulses = []
    for channel in CHANNEL_ORDER:
        table = tables.get(channel)
        if table is None:
            raise ConfigError(f"no calibration table for channel {channel!r}")
        _, pulse = nearest_posture(table, frame.posture_for(channel))
        pulses.append(pulse)
    return ControlVector(u=tuple(pulses))
