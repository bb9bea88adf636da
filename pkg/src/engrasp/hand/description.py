"""Hand description files.

A hand is declared in a YAML document with schema ``engrasp-hand/1``:
palm link, links (with optional mesh file references), revolute joints,
five fingers, and the seven actuation channels. Mesh paths are resolved
relative to the description file so a hand directory can be moved as a
unit.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import yaml

from ..errors import InvalidConfig
from ..geometry.meshio import load_mesh
from ..geometry.pose import Pose
from .model import Channel, Coupling, Finger, HandModel, Joint, Link

SCHEMA = "engrasp-hand/1"


def pose_from_fields(fields: dict, where: str) -> Pose:
    """Build a pose from {translation, rpy | quaternion} mapping fields.

    ``rpy`` is extrinsic roll-pitch-yaw about fixed x, y, z axes.
    """
    if not isinstance(fields, dict):
        raise InvalidConfig(f"{where}: origin must be a mapping")
    translation = fields.get("translation", (0.0, 0.0, 0.0))
    if "quaternion" in fields and "rpy" in fields:
        raise InvalidConfig(f"{where}: give either rpy or quaternion, not both")
    if "quaternion" in fields:
        return Pose(fields["quaternion"], translation)
    rpy = fields.get("rpy", (0.0, 0.0, 0.0))
    try:
        roll, pitch, yaw = (float(v) for v in rpy)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{where}: rpy must be three numbers") from None
    rz = Pose.from_axis_angle((0.0, 0.0, 1.0), yaw)
    ry = Pose.from_axis_angle((0.0, 1.0, 0.0), pitch)
    rx = Pose.from_axis_angle((1.0, 0.0, 0.0), roll)
    rot = rz.compose(ry).compose(rx)
    return Pose(rot.quaternion, translation)


def pose_to_fields(pose: Pose) -> dict:
    """Inverse of :func:`pose_from_fields`, quaternion form."""
    return {
        "quaternion": [float(v) for v in pose.quaternion],
        "translation": [float(v) for v in pose.translation],
    }


def _require(mapping: dict, key: str, where: str):
    if not isinstance(mapping, dict) or key not in mapping:
        raise InvalidConfig(f"{where}: missing required field {key!r}")
    return mapping[key]


def load_hand(path) -> HandModel:
    """Load and validate a hand description, resolving mesh references."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise InvalidConfig(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidConfig(f"{path}: expected a mapping document")
    schema = doc.get("schema")
    if schema != SCHEMA:
        raise InvalidConfig(
            f"{path}: unsupported hand description schema {schema!r} "
            f"(expected {SCHEMA!r})"
        )
    base_dir = path.parent

    links: dict[str, Link] = {}
    for entry in _require(doc, "links", str(path)):
        name = _require(entry, "name", f"{path}: link")
        mesh_ref = entry.get("mesh")
        mesh = None
        if mesh_ref is not None:
            mesh = load_mesh(base_dir / mesh_ref)
        if name in links:
            raise InvalidConfig(f"{path}: duplicate link {name!r}")
        links[name] = Link(name=name, mesh=mesh)

    joints: dict[str, Joint] = {}
    for entry in _require(doc, "joints", str(path)):
        name = _require(entry, "name", f"{path}: joint")
        where = f"{path}: joint {name!r}"
        if name in joints:
            raise InvalidConfig(f"{path}: duplicate joint {name!r}")
        limits = _require(entry, "limits", where)
        if not (isinstance(limits, (list, tuple)) and len(limits) == 2):
            raise InvalidConfig(f"{where}: limits must be [lo, hi]")
        joints[name] = Joint(
            name=name,
            parent_link=_require(entry, "parent", where),
            child_link=_require(entry, "child", where),
            origin=pose_from_fields(entry.get("origin", {}), where),
            axis=_require(entry, "axis", where),
            limits=(float(limits[0]), float(limits[1])),
        )

    fingers: dict[str, Finger] = {}
    for entry in _require(doc, "fingers", str(path)):
        name = _require(entry, "name", f"{path}: finger")
        fingers[name] = Finger(
            name=name,
            joints=tuple(_require(entry, "joints", f"{path}: finger {name!r}")),
            links=tuple(_require(entry, "links", f"{path}: finger {name!r}")),
        )

    channels = []
    for entry in _require(doc, "channels", str(path)):
        name = _require(entry, "name", f"{path}: channel")
        where = f"{path}: channel {name!r}"
        pulse_range = _require(entry, "pulse_range", where)
        couplings = tuple(
            Coupling(
                joint=_require(c, "joint", where),
                ratio=float(_require(c, "ratio", where)),
            )
            for c in _require(entry, "couplings", where)
        )
        channels.append(
            Channel(name=name, pulse_range=tuple(pulse_range), couplings=couplings)
        )

    try:
        return HandModel(
            name=str(doc.get("name", path.stem)),
            palm_link=_require(doc, "palm", str(path)),
            links=links,
            joints=joints,
            fingers=fingers,
            channels=tuple(channels),
        )
    except InvalidConfig as exc:
        raise InvalidConfig(f"{path}: {exc}") from exc
