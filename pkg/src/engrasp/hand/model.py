"""Kinematic model of the underactuated five-finger hand.

The hand is a tree of links rooted at the palm, connected by revolute
joints. Seven integer-pulse channels actuate it: five finger flexion
channels (thumb, index, middle, ring, pinky) and two extra thumb axes
(yaw, roll). One channel drives several coupled joints at fixed
radians-per-pulse ratios, which is what makes the hand underactuated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidConfig, InvalidInput, InvalidPulse
from ..geometry.mesh import TriMesh
from ..geometry.pose import Pose

FINGER_ORDER = ("thumb", "index", "middle", "ring", "pinky")
CHANNEL_ORDER = (
    "thumb_flex",
    "index_flex",
    "middle_flex",
    "ring_flex",
    "pinky_flex",
    "thumb_yaw",
    "thumb_roll",
)
# Flexion channel i drives finger FINGER_ORDER[i].
FLEXION_CHANNELS = CHANNEL_ORDER[:5]


@dataclass(frozen=True)
class Link:
    """A rigid body. ``mesh`` is in the link's local frame; links without
    a mesh are massless connectors that never collide or contact."""

    name: str
    mesh: TriMesh | None = None


@dataclass(frozen=True)
class Joint:
    """Revolute joint. The child link frame is
    parent ∘ origin ∘ rotation(axis, angle)."""

    name: str
    parent_link: str
    child_link: str
    origin: Pose
    axis: np.ndarray
    limits: tuple[float, float]

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=np.float64)
        if axis.shape != (3,) or not np.all(np.isfinite(axis)):
            raise InvalidInput(f"joint {self.name}: axis must be a finite 3-vector")
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            raise InvalidInput(f"joint {self.name}: axis must be nonzero")
        axis = axis / norm
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if not (lo <= 0.0 <= hi):
            raise InvalidInput(
                f"joint {self.name}: limit interval [{lo}, {hi}] must contain 0"
            )
        object.__setattr__(self, "limits", (lo, hi))

    def clamp(self, angle: float) -> float:
        lo, hi = self.limits
        return min(max(float(angle), lo), hi)


@dataclass(frozen=True)
class Finger:
    """An ordered joint chain from knuckle to tip plus its link names."""

    name: str
    joints: tuple[str, ...]
    links: tuple[str, ...]


@dataclass(frozen=True)
class Coupling:
    joint: str
    ratio: float  # radians per pulse


@dataclass(frozen=True)
class Channel:
    """One motor: an integer pulse range and the joints it drives."""

    name: str
    pulse_range: tuple[int, int]
    couplings: tuple[Coupling, ...]

    def __post_init__(self):
        lo, hi = int(self.pulse_range[0]), int(self.pulse_range[1])
        if lo >= hi:
            raise InvalidInput(
                f"channel {self.name}: pulse range [{lo}, {hi}] is empty"
            )
        object.__setattr__(self, "pulse_range", (lo, hi))
        object.__setattr__(self, "couplings", tuple(self.couplings))


@dataclass(frozen=True)
class HandModel:
    """Immutable hand description: links, joints, fingers, channels."""

    name: str
    palm_link: str
    links: dict[str, Link]
    joints: dict[str, Joint]
    fingers: dict[str, Finger]
    channels: tuple[Channel, ...]
    joint_order: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.palm_link not in self.links:
            raise InvalidConfig(f"palm link {self.palm_link!r} not among links")
        if self.links[self.palm_link].mesh is None:
            raise InvalidConfig("palm link must carry a mesh")
        self._validate_tree()
        self._validate_fingers()
        self._validate_channels()
        object.__setattr__(self, "joint_order", self._topological_joints())

    def _validate_tree(self):
        child_of: dict[str, str] = {}
        for j in self.joints.values():
            for link in (j.parent_link, j.child_link):
                if link not in self.links:
                    raise InvalidConfig(f"joint {j.name}: unknown link {link!r}")
            if j.child_link == self.palm_link:
                raise InvalidConfig(f"joint {j.name}: palm cannot be a child link")
            if j.child_link in child_of:
                raise InvalidConfig(
                    f"link {j.child_link!r} has two parent joints"
                )
            child_of[j.child_link] = j.name
        for name in self.links:
            if name != self.palm_link and name not in child_of:
                raise InvalidConfig(f"link {name!r} is not connected to the palm")
        # Walk each link up to the root; a repeat visit means a cycle.
        parent_link = {j.child_link: j.parent_link for j in self.joints.values()}
        for name in self.links:
            seen = set()
            cur = name
            while cur != self.palm_link:
                if cur in seen:
                    raise InvalidConfig(f"kinematic cycle through link {cur!r}")
                seen.add(cur)
                cur = parent_link[cur]

    def _validate_fingers(self):
        if tuple(self.fingers.keys()) != FINGER_ORDER:
            raise InvalidConfig(
                f"fingers must be exactly {list(FINGER_ORDER)} in order, "
                f"got {list(self.fingers.keys())}"
            )
        for finger in self.fingers.values():
            if not finger.joints:
                raise InvalidConfig(f"finger {finger.name}: no joints")
            prev_child = None
            for jname in finger.joints:
                joint = self.joints.get(jname)
                if joint is None:
                    raise InvalidConfig(
                        f"finger {finger.name}: unknown joint {jname!r}"
                    )
                if prev_child is not None and joint.parent_link != prev_child:
                    raise InvalidConfig(
                        f"finger {finger.name}: joints do not form a chain at {jname!r}"
                    )
                prev_child = joint.child_link
            for lname in finger.links:
                if lname not in self.links:
                    raise InvalidConfig(
                        f"finger {finger.name}: unknown link {lname!r}"
                    )

    def _validate_channels(self):
        names = tuple(c.name for c in self.channels)
        if names != CHANNEL_ORDER:
            raise InvalidConfig(
                f"channels must be exactly {list(CHANNEL_ORDER)} in order, "
                f"got {list(names)}"
            )
        driven: dict[str, str] = {}
        for channel in self.channels:
            if not channel.couplings:
                raise InvalidConfig(f"channel {channel.name}: no coupled joints")
            for c in channel.couplings:
                if c.joint not in self.joints:
                    raise InvalidConfig(
                        f"channel {channel.name}: unknown joint {c.joint!r}"
                    )
                if c.ratio == 0.0 or not np.isfinite(c.ratio):
                    raise InvalidConfig(
                        f"channel {channel.name}: coupling ratio for "
                        f"{c.joint!r} must be finite and nonzero"
                    )
                if c.joint in driven:
                    raise InvalidConfig(
                        f"joint {c.joint!r} driven by both "
                        f"{driven[c.joint]!r} and {channel.name!r}"
                    )
                driven[c.joint] = channel.name
        # A flexion channel may only drive joints of its own finger, so
        # the closing loop can flex one finger without moving another.
        for i, cname in enumerate(FLEXION_CHANNELS):
            finger = self.fingers[FINGER_ORDER[i]]
            for c in self.channels[i].couplings:
                if c.joint not in finger.joints:
                    raise InvalidConfig(
                        f"channel {cname}: joint {c.joint!r} is not part of "
                        f"finger {finger.name!r}"
                    )

    def _topological_joints(self) -> tuple[str, ...]:
        """Joints ordered so every parent link is posed before its children."""
        by_parent: dict[str, list[str]] = {}
        for jname, j in self.joints.items():
            by_parent.setdefault(j.parent_link, []).append(jname)
        order: list[str] = []
        frontier = [self.palm_link]
        while frontier:
            link = frontier.pop(0)
            for jname in by_parent.get(link, ()):
                order.append(jname)
                frontier.append(self.joints[jname].child_link)
        return tuple(order)

    def flexion_channel(self, finger_name: str) -> Channel:
        return self.channels[FINGER_ORDER.index(finger_name)]

    def channel(self, name: str) -> Channel:
        return self.channels[CHANNEL_ORDER.index(name)]

    def mesh_links(self) -> tuple[str, ...]:
        """Names of links that carry geometry, in deterministic order."""
        return tuple(name for name, link in self.links.items() if link.mesh is not None)

    def __repr__(self) -> str:
        return (
            f"HandModel({self.name!r}, {len(self.links)} links, "
            f"{len(self.joints)} joints)"
        )


class JointConfig:
    """Joint angles for every joint of one model; unnamed joints are 0.

    Construction validates names and limits; ``actuate`` is the clamping
    path, explicit construction is the strict one.
    """

    __slots__ = ("_angles",)

    def __init__(self, model: HandModel, angles=None):
        values = {name: 0.0 for name in model.joints}
        if angles is not None:
            for name, angle in dict(angles).items():
                joint = model.joints.get(name)
                if joint is None:
                    raise InvalidConfig(f"unknown joint {name!r}")
                angle = float(angle)
                lo, hi = joint.limits
                if not (lo <= angle <= hi):
                    raise InvalidConfig(
                        f"joint {name!r}: angle {angle} outside limits [{lo}, {hi}]"
                    )
                values[name] = angle
        self._angles = values

    def angle(self, joint_name: str) -> float:
        try:
            return self._angles[joint_name]
        except KeyError:
            raise InvalidConfig(f"unknown joint {joint_name!r}") from None

    def as_dict(self) -> dict[str, float]:
        return dict(self._angles)

    def __eq__(self, other) -> bool:
        return isinstance(other, JointConfig) and self._angles == other._angles

    def __repr__(self) -> str:
        nonzero = {k: round(v, 4) for k, v in self._angles.items() if v != 0.0}
        return f"JointConfig({nonzero})"


def actuate(model: HandModel, u) -> JointConfig:
    """Map a 7-channel pulse vector to joint angles.

    Each driven joint gets ratio × (pulse − p_min), clamped into its
    limit interval (the physical stall). Pulses outside a channel's
    range are user error and raise instead.
    """
    u = np.asarray(u)
    if u.shape != (7,):
        raise InvalidInput(f"expected a 7-channel pulse vector, got shape {u.shape}")
    if not np.all(np.equal(np.mod(u, 1), 0)):
        raise InvalidInput("pulses must be integers")
    angles: dict[str, float] = {}
    for channel, pulse in zip(model.channels, u):
        pulse = int(pulse)
        lo, hi = channel.pulse_range
        if not (lo <= pulse <= hi):
            raise InvalidPulse(
                f"channel {channel.name}: pulse {pulse} outside range [{lo}, {hi}]"
            )
        offset = pulse - lo
        for c in channel.couplings:
            angles[c.joint] = model.joints[c.joint].clamp(c.ratio * offset)
    config = JointConfig(model)
    config._angles.update(angles)
    return config


def forward_kinematics(model: HandModel, config: JointConfig,
                       base: Pose | None = None) -> dict[str, Pose]:
    """World pose of every link; the palm is placed at ``base``."""
    if base is None:
        base = Pose.identity()
    poses: dict[str, Pose] = {model.palm_link: base}
    for jname in model.joint_order:
        joint = model.joints[jname]
        angle = config.angle(jname)
        local = Pose.from_axis_angle(joint.axis, angle)
        poses[joint.child_link] = poses[joint.parent_link].compose(
            joint.origin.compose(local)
        )
    return poses


def link_centers(model: HandModel, poses: dict[str, Pose]) -> dict[str, np.ndarray]:
    """World-frame centroid of each meshed link's local vertices."""
    centers: dict[str, np.ndarray] = {}
    for name in model.mesh_links():
        mesh = model.links[name].mesh
        centers[name] = poses[name].apply(mesh.vertex_centroid())
    return centers


def posed_link_meshes(model: HandModel, poses: dict[str, Pose]) -> dict[str, TriMesh]:
    """World-frame mesh of every link that carries geometry."""
    return {
        name: model.links[name].mesh.transformed(poses[name])
        for name in model.mesh_links()
    }
