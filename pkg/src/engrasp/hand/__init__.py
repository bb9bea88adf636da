"""Hand kinematics: model, actuation channels, description files."""

from .description import load_hand, pose_from_fields, pose_to_fields
from .model import (
    CHANNEL_ORDER,
    FINGER_ORDER,
    FLEXION_CHANNELS,
    Channel,
    Coupling,
    Finger,
    HandModel,
    Joint,
    JointConfig,
    Link,
    actuate,
    forward_kinematics,
    link_centers,
    posed_link_meshes,
)

__all__ = [
    "CHANNEL_ORDER",
    "FINGER_ORDER",
    "FLEXION_CHANNELS",
    "Channel",
    "Coupling",
    "Finger",
    "HandModel",
    "Joint",
    "JointConfig",
    "Link",
    "actuate",
    "forward_kinematics",
    "link_centers",
    "load_hand",
    "posed_link_meshes",
    "pose_from_fields",
    "pose_to_fields",
]
