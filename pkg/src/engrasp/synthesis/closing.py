"""Quasi-static kinematic finger closing.

Each finger flexes in fixed angle increments along its actuation
channel's coupling ratios until the first mesh intersection with the
object or the environment, or until its joints clamp at their limits.
The last collision-free increment is kept, so no emitted state ever
penetrates. No dynamics are involved: contact is purely geometric,
which keeps the whole pipeline deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidInput, InvalidStart
from ..geometry import _kernels
from ..geometry._kernels import build_bvh, single_leaf_bvh
from ..geometry.mesh import TriMesh
from ..geometry.pose import Pose
from ..hand.model import FINGER_ORDER, HandModel, JointConfig

OBJECT_COLLISION = "object-collision"
ENVIRONMENT_COLLISION = "environment-collision"
JOINT_LIMIT = "joint-limit"

DEFAULT_STEP = 0.005  # radians of lead-joint flexion per increment


class GraspState:
    """Result of closing all fingers from one palm base pose.

    ``contacts`` maps every meshed link to (touching, min distance to the
    object); ``stopped`` records why each finger stopped closing.
    """

    __slots__ = ("base", "config", "contacts", "stopped")

    def __init__(self, base: Pose, config: JointConfig,
                 contacts: dict[str, tuple[bool, float]], stopped: dict[str, str]):
        self.base = base
        self.config = config
        self.contacts = contacts
        self.stopped = stopped

    def __repr__(self) -> str:
        touching = sorted(name for name, (flag, _) in self.contacts.items() if flag)
        return f"GraspState(touching={touching}, stopped={self.stopped})"


class _Obstacle:
    """A static collision body: BVH plus its root bounds for quick reject."""

    __slots__ = ("bvh", "lo", "hi")

    def __init__(self, bvh):
        self.bvh = bvh
        self.lo = bvh.bounds_min[0]
        self.hi = bvh.bounds_max[0]


def _overlaps(alo, ahi, blo, bhi) -> bool:
    return (
        alo[0] <= bhi[0] and blo[0] <= ahi[0]
        and alo[1] <= bhi[1] and blo[1] <= ahi[1]
        and alo[2] <= bhi[2] and blo[2] <= ahi[2]
    )


class _FingerChain:
    """Precomputed kinematics of one finger for the closing loop."""

    __slots__ = ("joints", "origins", "root_link", "link_slots", "link_tris")

    def __init__(self, model: HandModel, finger_name: str):
        finger = model.fingers[finger_name]
        self.joints = [model.joints[j] for j in finger.joints]
        self.origins = [j.origin for j in self.joints]
        self.root_link = self.joints[0].parent_link
        # Meshed links hanging off the chain: map child link -> chain depth.
        depth_of = {j.child_link: k for k, j in enumerate(self.joints)}
        self.link_slots = []
        self.link_tris = []
        for lname in finger.links:
            mesh = model.links[lname].mesh
            if mesh is None or lname not in depth_of:
                continue
            self.link_slots.append((lname, depth_of[lname]))
            self.link_tris.append(np.ascontiguousarray(mesh.triangle_coords()))


def _axis_rotations(axis, theta: np.ndarray) -> np.ndarray:
    """Rotation matrices (K, 3, 3) about one axis for a vector of angles."""
    ax = np.asarray(axis, dtype=np.float64)
    cross = np.array([
        [0.0, -ax[2], ax[1]],
        [ax[2], 0.0, -ax[0]],
        [-ax[1], ax[0], 0.0],
    ])
    s = np.sin(theta)[:, None, None]
    c = np.cos(theta)[:, None, None]
    return c * np.eye(3) + s * cross + (1.0 - c) * np.outer(ax, ax)


def _aabb_mask(lo: np.ndarray, hi: np.ndarray, obs: _Obstacle) -> np.ndarray:
    """Per-row AABB overlap of a moving link against one static obstacle."""
    return (lo <= obs.hi).all(axis=1) & (obs.lo <= hi).all(axis=1)


def close_fingers(model: HandModel, base: Pose, object_mesh: TriMesh,
                  environment=(), step: float = DEFAULT_STEP) -> GraspState:
    """Close all fingers around a world-frame object from one base pose.

    Fingers flex one at a time in a fixed order (thumb, index, middle,
    ring, pinky); earlier fingers hold their final angles while later
    ones close, and fingers block each other the same way the static
    environment does. Stopping against the object has priority over
    stopping against the environment when both happen within one
    increment.
    """
    if step <= 0:
        raise InvalidInput(f"step must be positive, got {step}")
    if not isinstance(object_mesh, TriMesh):
        raise InvalidInput("object must be a TriMesh")

    from ..hand.model import forward_kinematics, posed_link_meshes

    object_bvh = _Obstacle(build_bvh(object_mesh.triangle_coords()))
    env_bvhs = [_Obstacle(build_bvh(m.triangle_coords())) for m in environment]

    angles = {name: 0.0 for name in model.joints}
    config0 = JointConfig(model)
    poses0 = forward_kinematics(model, config0, base)
    palm_mesh = model.links[model.palm_link].mesh.transformed(poses0[model.palm_link])
    palm_bvh = _Obstacle(build_bvh(palm_mesh.triangle_coords()))
    for obs in env_bvhs:
        if _overlaps(palm_bvh.lo, palm_bvh.hi, obs.lo, obs.hi) and \
                _kernels.soup_intersects(palm_bvh.bvh, obs.bvh):
            raise InvalidStart("palm intersects the environment at the base pose")

    stopped: dict[str, str] = {}
    finger_links: dict[str, set] = {
        f: set(model.fingers[f].links) for f in FINGER_ORDER
    }

    for fname in FINGER_ORDER:
        chain = _FingerChain(model, fname)
        channel = model.flexion_channel(fname)
        couplings = channel.couplings
        lead_scale = abs(couplings[0].ratio)
        cjoints = [model.joints[c.joint] for c in couplings]

        # Static obstacles for this finger: the object, the environment,
        # and every meshed link outside the finger at its current angles.
        poses_now = forward_kinematics(model, JointConfig(model, angles), base)
        hand_obs = []
        for lname, mesh in posed_link_meshes(model, poses_now).items():
            if lname in finger_links[fname]:
                continue
            hand_obs.append(_Obstacle(build_bvh(mesh.triangle_coords())))
        obstacles = env_bvhs + hand_obs

        root_pose = poses_now[chain.root_link]

        # Candidate schedule: row k holds this finger's joint angles after
        # k closing increments. The whole trajectory is fixed up front
        # (collisions only decide where it stops), so chain kinematics
        # are batched over every row at once. The schedule always ends
        # with a saturated row equal to its predecessor, which is the
        # joint-limit stop.
        n_steps = 1
        for c, joint in zip(couplings, cjoints):
            lo, hi = joint.limits
            t_sat = (hi if c.ratio > 0 else lo) / c.ratio
            n_steps = max(n_steps, math.ceil(t_sat * lead_scale / step))
        rows = n_steps + 2  # row 0 plus one row past saturation
        t = np.arange(rows, dtype=np.float64) * step / lead_scale
        schedule = np.empty((rows, len(couplings)))
        for j, (c, joint) in enumerate(zip(couplings, cjoints)):
            lo, hi = joint.limits
            schedule[:, j] = np.clip(c.ratio * t, lo, hi)

        # Batched forward kinematics: world rotation and translation of
        # every chain frame for every schedule row. Chain joints not
        # driven by the channel (thumb yaw and roll) are frozen at their
        # current angles and folded into the static joint origins.
        col_of = {c.joint: j for j, c in enumerate(couplings)}
        rot = np.broadcast_to(root_pose.rotation_matrix(), (rows, 3, 3))
        pos = np.broadcast_to(root_pose.translation, (rows, 3))
        depth_rot, depth_pos = [], []
        for joint, origin in zip(chain.joints, chain.origins):
            col = col_of.get(joint.name)
            if col is None:
                origin = origin.compose(
                    Pose.from_axis_angle(joint.axis, angles[joint.name]))
            pos = np.einsum("kab,b->ka", rot, origin.translation) + pos
            rot = np.einsum("kab,bc->kac", rot, origin.rotation_matrix())
            if col is not None:
                rot = np.einsum("kab,kbc->kac", rot,
                                _axis_rotations(joint.axis, schedule[:, col]))
            depth_rot.append(rot)
            depth_pos.append(pos)

        link_world, obj_masks, obs_masks = [], [], []
        for (lname, depth), tris in zip(chain.link_slots, chain.link_tris):
            world = np.einsum("kab,mvb->kmva", depth_rot[depth], tris)
            world += depth_pos[depth][:, None, None, :]
            world = np.ascontiguousarray(world)
            lo = world.min(axis=(1, 2))
            hi = world.max(axis=(1, 2))
            link_world.append(world)
            obj_masks.append(_aabb_mask(lo, hi, object_bvh))
            obs_masks.append([_aabb_mask(lo, hi, obs) for obs in obstacles])

        def check(k):
            """(object_hit, env_hit) at schedule row k; object first."""
            cache: dict[int, object] = {}
            for i in range(len(link_world)):
                if obj_masks[i][k]:
                    cache[i] = single_leaf_bvh(link_world[i][k])
                    if _kernels.soup_intersects(cache[i], object_bvh.bvh):
                        return True, False
            for i in range(len(link_world)):
                for o, obs in enumerate(obstacles):
                    if obs_masks[i][o][k]:
                        if i not in cache:
                            cache[i] = single_leaf_bvh(link_world[i][k])
                        if _kernels.soup_intersects(cache[i], obs.bvh):
                            return False, True
            return False, False

        obj_hit, env_hit = check(0)
        if obj_hit or env_hit:
            stopped[fname] = OBJECT_COLLISION if obj_hit else ENVIRONMENT_COLLISION
            continue

        k = 0
        while True:
            k += 1
            if np.array_equal(schedule[k], schedule[k - 1]):
                stopped[fname] = JOINT_LIMIT
                break
            obj_hit, env_hit = check(k)
            if obj_hit:
                stopped[fname] = OBJECT_COLLISION
                break
            if env_hit:
                stopped[fname] = ENVIRONMENT_COLLISION
                break
        for j, c in enumerate(couplings):
            angles[c.joint] = float(schedule[k - 1, j])

    config = JointConfig(model, angles)
    poses = forward_kinematics(model, config, base)
    contacts: dict[str, tuple[bool, float]] = {}
    for lname, mesh in posed_link_meshes(model, poses).items():
        link_bvh = build_bvh(mesh.triangle_coords())
        dist = float(_kernels.soup_min_distance(link_bvh, object_bvh.bvh))
        contacts[lname] = (dist == 0.0, dist)
    return GraspState(base=base, config=config, contacts=contacts, stopped=stopped)
