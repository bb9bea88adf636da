"""Synthetic desk-scale fixtures: a five-finger hand and a box object.

The hand is deliberately simple (box links, two-phalanx fingers, an
opposing thumb with yaw and roll axes) but exercises every modeled
feature: meshless connector links, coupled joints, per-channel pulse
ranges, and joint limits. Dimensions are chosen so that closing around
the fixture box from any face produces an enveloping cage.

Everything here is deterministic: building the same fixture twice gives
byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np
import yaml

from .geometry.mesh import TriMesh
from .geometry.meshio import save_stl
from .hand.description import SCHEMA as HAND_SCHEMA
from .hand.description import pose_from_fields
from .hand.model import Channel, Coupling, Finger, HandModel, Joint, Link
from .retarget.mapping import HumanHandFrame
from .retarget.stream import frame_to_record

OBJECT_SIZE = 0.05  # cube edge, meters

# Knuckles sit 2 mm outside the palm footprint so the zero pose is
# self-collision free (phalanx boxes begin 2 mm past their joint).
PALM_SIZE = (0.08, 0.09, 0.02)
KNUCKLE_X = 0.042
FINGER_Y = {"index": 0.036, "middle": 0.016, "ring": -0.016, "pinky": -0.036}

PROX_LEN, PROX_HALF_Y, PROX_HALF_Z = 0.046, 0.008, 0.006
DIST_LEN, DIST_HALF_Y, DIST_HALF_Z = 0.036, 0.007, 0.005
PIP_OFFSET = 0.05

THUMB_PROX_LEN, THUMB_PROX_HALF_Y, THUMB_PROX_HALF_Z = 0.056, 0.006, 0.007
THUMB_DIST_LEN, THUMB_DIST_HALF_Y, THUMB_DIST_HALF_Z = 0.042, 0.006, 0.006
THUMB_IP_OFFSET = 0.06

MCP_RATIO = 0.0015   # rad per pulse
PIP_RATIO = 0.0012
THUMB_AXIS_RATIO = 0.0005
PULSE_RANGE = (0, 1200)
FLEX_LIMIT = (0.0, 1.8)
THUMB_AXIS_LIMIT = (-0.6, 0.6)

# Human-side synthetic postures: angles recorded "from the glove" at a
# given pulse. Linear and injective, so nearest-posture lookup is exact.
CAL_PULSES = tuple(range(0, 1300, 100))


def box_mesh(size, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with outward-facing triangles.

    ``size`` is a scalar edge length or per-axis (sx, sy, sz).
    """
    if np.isscalar(size):
        size = (size, size, size)
    sx, sy, sz = (float(v) / 2.0 for v in size)
    cx, cy, cz = (float(v) for v in center)
    vertices = np.array([
        [cx - sx, cy - sy, cz - sz],
        [cx + sx, cy - sy, cz - sz],
        [cx + sx, cy + sy, cz - sz],
        [cx - sx, cy + sy, cz - sz],
        [cx - sx, cy - sy, cz + sz],
        [cx + sx, cy - sy, cz + sz],
        [cx + sx, cy + sy, cz + sz],
        [cx - sx, cy + sy, cz + sz],
    ])
    triangles = np.array([
        [0, 2, 1], [0, 3, 2],  # bottom, -z
        [4, 5, 6], [4, 6, 7],  # top, +z
        [0, 1, 5], [0, 5, 4],  # front, -y
        [2, 3, 7], [2, 7, 6],  # back, +y
        [0, 4, 7], [0, 7, 3],  # left, -x
        [1, 2, 6], [1, 6, 5],  # right, +x
    ], dtype=np.int32)
    return TriMesh(vertices, triangles)


def fixture_object(size: float = OBJECT_SIZE) -> TriMesh:
    return box_mesh((size, size, size))


def _palm_mesh() -> TriMesh:
    # Contact face at local z=0; the body hangs behind it.
    sx, sy, sz = PALM_SIZE
    return box_mesh((sx, sy, sz), center=(0.0, 0.0, -sz / 2.0))


def _phalanx_mesh(length, half_y, half_z) -> TriMesh:
    # Extends along +x from just past the joint so adjacent phalanges
    # never touch at zero flexion.
    return box_mesh((length, 2 * half_y, 2 * half_z),
                    center=(0.002 + length / 2.0, 0.0, 0.0))


def _origin(translation, rpy=(0.0, 0.0, 0.0)):
    return pose_from_fields({"translation": list(translation),
                             "rpy": list(rpy)}, "fixture")


def fixture_hand() -> HandModel:
    """In-memory hand model; mirror of the files written by write_fixtures."""
    links = {"palm": Link("palm", _palm_mesh())}
    joints = {}
    fingers = {}

    prox = _phalanx_mesh(PROX_LEN, PROX_HALF_Y, PROX_HALF_Z)
    dist = _phalanx_mesh(DIST_LEN, DIST_HALF_Y, DIST_HALF_Z)
    for name in ("index", "middle", "ring", "pinky"):
        links[f"{name}_prox"] = Link(f"{name}_prox", prox)
        links[f"{name}_dist"] = Link(f"{name}_dist", dist)
        joints[f"{name}_mcp"] = Joint(
            name=f"{name}_mcp", parent_link="palm", child_link=f"{name}_prox",
            origin=_origin((KNUCKLE_X, FINGER_Y[name], 0.0)),
            axis=(0.0, -1.0, 0.0), limits=FLEX_LIMIT,
        )
        joints[f"{name}_pip"] = Joint(
            name=f"{name}_pip", parent_link=f"{name}_prox",
            child_link=f"{name}_dist",
            origin=_origin((PIP_OFFSET, 0.0, 0.0)),
            axis=(0.0, -1.0, 0.0), limits=FLEX_LIMIT,
        )
        fingers[name] = Finger(
            name=name,
            joints=(f"{name}_mcp", f"{name}_pip"),
            links=(f"{name}_prox", f"{name}_dist"),
        )

    # Thumb: yaw and roll connectors, then two phalanges. The mount is
    # turned half a turn so the thumb opposes the fingers.
    links["thumb_mount"] = Link("thumb_mount")
    links["thumb_carpal"] = Link("thumb_carpal")
    links["thumb_prox"] = Link(
        "thumb_prox",
        _phalanx_mesh(THUMB_PROX_LEN, THUMB_PROX_HALF_Y, THUMB_PROX_HALF_Z))
    links["thumb_dist"] = Link(
        "thumb_dist",
        _phalanx_mesh(THUMB_DIST_LEN, THUMB_DIST_HALF_Y, THUMB_DIST_HALF_Z))
    joints["thumb_yaw_joint"] = Joint(
        name="thumb_yaw_joint", parent_link="palm", child_link="thumb_mount",
        origin=_origin((-KNUCKLE_X, 0.0, 0.0), rpy=(0.0, 0.0, math.pi)),
        axis=(0.0, 0.0, 1.0), limits=THUMB_AXIS_LIMIT,
    )
    joints["thumb_roll_joint"] = Joint(
        name="thumb_roll_joint", parent_link="thumb_mount",
        child_link="thumb_carpal", origin=_origin((0.0, 0.0, 0.0)),
        axis=(1.0, 0.0, 0.0), limits=THUMB_AXIS_LIMIT,
    )
    joints["thumb_mcp"] = Joint(
        name="thumb_mcp", parent_link="thumb_carpal", child_link="thumb_prox",
        origin=_origin((0.0, 0.0, 0.0)),
        axis=(0.0, -1.0, 0.0), limits=FLEX_LIMIT,
    )
    joints["thumb_ip"] = Joint(
        name="thumb_ip", parent_link="thumb_prox", child_link="thumb_dist",
        origin=_origin((THUMB_IP_OFFSET, 0.0, 0.0)),
        axis=(0.0, -1.0, 0.0), limits=FLEX_LIMIT,
    )
    thumb = Finger(
        name="thumb",
        joints=("thumb_yaw_joint", "thumb_roll_joint", "thumb_mcp", "thumb_ip"),
        links=("thumb_mount", "thumb_carpal", "thumb_prox", "thumb_dist"),
    )
    fingers = {"thumb": thumb, **fingers}

    channels = [
        Channel("thumb_flex", PULSE_RANGE,
                (Coupling("thumb_mcp", MCP_RATIO),
                 Coupling("thumb_ip", PIP_RATIO))),
    ]
    for name in ("index", "middle", "ring", "pinky"):
        channels.append(Channel(f"{name}_flex", PULSE_RANGE,
                                (Coupling(f"{name}_mcp", MCP_RATIO),
                                 Coupling(f"{name}_pip", PIP_RATIO))))
    channels.append(Channel("thumb_yaw", PULSE_RANGE,
                            (Coupling("thumb_yaw_joint", THUMB_AXIS_RATIO),)))
    channels.append(Channel("thumb_roll", PULSE_RANGE,
                            (Coupling("thumb_roll_joint", THUMB_AXIS_RATIO),)))

    return HandModel(name="fixture-hand", palm_link="palm", links=links,
                     joints=joints, fingers=fingers, channels=tuple(channels))


def _posture_at(pulse: int) -> dict:
    """Synthetic human posture paired with a robot pulse."""
    flex = [MCP_RATIO * pulse, PIP_RATIO * pulse, 0.5 * MCP_RATIO * pulse]
    return {
        "thumb": list(flex),
        "index": list(flex),
        "middle": list(flex),
        "ring": list(flex),
        "pinky": list(flex),
        "thumb_yaw": THUMB_AXIS_RATIO * pulse,
        "thumb_roll": THUMB_AXIS_RATIO * pulse,
    }


def calibration_samples() -> list[tuple[int, HumanHandFrame]]:
    """One (pulse, frame) pair per calibration stop."""
    samples = []
    for i, pulse in enumerate(CAL_PULSES):
        fields = _posture_at(pulse)
        samples.append((pulse, HumanHandFrame(timestamp=(i + 1) * 10_000_000,
                                              **fields)))
    return samples


def stream_frames(n: int = 30) -> list[HumanHandFrame]:
    """A clean motion replay: strictly increasing t, pulse ramp 0 to max."""
    if n < 2:
        raise ValueError("need at least 2 frames")
    frames = []
    for i in range(n):
        pulse = round(PULSE_RANGE[1] * i / (n - 1))
        fields = _posture_at(pulse)
        frames.append(HumanHandFrame(timestamp=(i + 1) * 10_000_000, **fields))
    return frames


def _hand_doc() -> dict:
    """The YAML form of fixture_hand, with shared mesh files."""
    model = fixture_hand()
    mesh_file = {
        "palm": "meshes/palm.stl",
        "thumb_prox": "meshes/thumb_prox.stl",
        "thumb_dist": "meshes/thumb_dist.stl",
    }
    for name in ("index", "middle", "ring", "pinky"):
        mesh_file[f"{name}_prox"] = "meshes/finger_prox.stl"
        mesh_file[f"{name}_dist"] = "meshes/finger_dist.stl"

    links = []
    for name in model.links:
        entry = {"name": name}
        if name in mesh_file:
            entry["mesh"] = mesh_file[name]
        links.append(entry)

    joints = []
    for name, joint in model.joints.items():
        entry = {
            "name": name,
            "parent": joint.parent_link,
            "child": joint.child_link,
            "axis": [float(v) for v in joint.axis],
            "limits": [joint.limits[0], joint.limits[1]],
            "origin": {"translation": [float(v) for v in joint.origin.translation]},
        }
        if name == "thumb_yaw_joint":
            entry["origin"]["rpy"] = [0.0, 0.0, math.pi]
        joints.append(entry)

    fingers = [
        {"name": f.name, "joints": list(f.joints), "links": list(f.links)}
        for f in model.fingers.values()
    ]
    channels = [
        {
            "name": c.name,
            "pulse_range": [c.pulse_range[0], c.pulse_range[1]],
            "couplings": [{"joint": cc.joint, "ratio": cc.ratio}
                          for cc in c.couplings],
        }
        for c in model.channels
    ]
    return {
        "schema": HAND_SCHEMA,
        "name": model.name,
        "palm": model.palm_link,
        "links": links,
        "joints": joints,
        "fingers": fingers,
        "channels": channels,
    }


RUN_SCHEMA = "engrasp-run/1"


def _run_config_doc() -> dict:
    """The all-sections run config shipped with the fixtures."""
    return {
        "schema": RUN_SCHEMA,
        "generate": {
            "object": "../object/box.stl",
            "hand": "../hand/hand.yaml",
            "out": "out/templates.json",
            "n": 200,
            "seed": 1,
            "step": 0.005,
            "delta": 0.002,
            "standoff": 0.002,
            "spin": 4,
        },
        "export": {
            "templates": "out/templates.json",
            "hand": "../hand/hand.yaml",
            "out_dir": "out/scenes",
        },
        "calibrate": {
            "hand": "../hand/hand.yaml",
            "in": "../streams/calibration.jsonl",
            "out": "out/calibration.yaml",
        },
        "retarget": {
            "calibration": "out/calibration.yaml",
            "in": "../streams/frames.jsonl",
            "out": "out/pulses.jsonl",
        },
        "eval": {
            "templates": "out/templates.json",
            "hand": "../hand/hand.yaml",
            "out": "out/report.json",
            "table": "out/report.txt",
            "sigma_t": 0.002,
            "sigma_r": 0.05,
            "trials": 20,
            "seed": 7,
        },
    }


def write_fixtures(root) -> dict[str, Path]:
    """Write the full fixture tree; returns the paths of interest."""
    root = Path(root)
    (root / "hand" / "meshes").mkdir(parents=True, exist_ok=True)
    (root / "object").mkdir(parents=True, exist_ok=True)
    (root / "streams").mkdir(parents=True, exist_ok=True)
    (root / "configs").mkdir(parents=True, exist_ok=True)

    save_stl(_palm_mesh(), root / "hand" / "meshes" / "palm.stl")
    save_stl(_phalanx_mesh(PROX_LEN, PROX_HALF_Y, PROX_HALF_Z),
             root / "hand" / "meshes" / "finger_prox.stl")
    save_stl(_phalanx_mesh(DIST_LEN, DIST_HALF_Y, DIST_HALF_Z),
             root / "hand" / "meshes" / "finger_dist.stl")
    save_stl(_phalanx_mesh(THUMB_PROX_LEN, THUMB_PROX_HALF_Y, THUMB_PROX_HALF_Z),
             root / "hand" / "meshes" / "thumb_prox.stl")
    save_stl(_phalanx_mesh(THUMB_DIST_LEN, THUMB_DIST_HALF_Y, THUMB_DIST_HALF_Z),
             root / "hand" / "meshes" / "thumb_dist.stl")
    save_stl(fixture_object(), root / "object" / "box.stl")

    hand_path = root / "hand" / "hand.yaml"
    _write_yaml(_hand_doc(), hand_path)

    cal_path = root / "streams" / "calibration.jsonl"
    with open(cal_path, "w", encoding="utf-8") as fh:
        for pulse, frame in calibration_samples():
            record = {"pulse": pulse, **frame_to_record(frame)}
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    frames_path = root / "streams" / "frames.jsonl"
    with open(frames_path, "w", encoding="utf-8") as fh:
        for frame in stream_frames():
            fh.write(json.dumps(frame_to_record(frame),
                                separators=(",", ":")) + "\n")

    config_path = root / "configs" / "fixture.yaml"
    _write_yaml(_run_config_doc(), config_path)

    return {
        "hand": hand_path,
        "object": root / "object" / "box.stl",
        "calibration_stream": cal_path,
        "frames": frames_path,
        "config": config_path,
    }


def _write_yaml(doc: dict, path: Path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
    os.replace(tmp, path)
