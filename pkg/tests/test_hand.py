"""Hand model: FK against a homogeneous-matrix oracle, actuation, loading."""

import math

import numpy as np
import pytest
import yaml

from engrasp.errors import InvalidConfig, InvalidInput, InvalidPulse
from engrasp.fixtures import (
    FLEX_LIMIT,
    MCP_RATIO,
    PIP_RATIO,
    PULSE_RANGE,
    box_mesh,
    fixture_hand,
)
from engrasp.hand.description import load_hand, pose_from_fields, pose_to_fields
from engrasp.hand.model import (
    CHANNEL_ORDER,
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
from engrasp.geometry.pose import Pose


def rodrigues(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def hom(rot3, t):
    m = np.eye(4)
    m[:3, :3] = rot3
    m[:3, 3] = t
    return m


def fk_oracle(model, config, base=None):
    """Independent FK: plain 4x4 chains, no Pose arithmetic."""
    mats = {model.palm_link: np.eye(4) if base is None else base.to_matrix()}
    for jname in model.joint_order:
        j = model.joints[jname]
        origin = j.origin.to_matrix()
        local = hom(rodrigues(j.axis, config.angle(jname)), (0, 0, 0))
        mats[j.child_link] = mats[j.parent_link] @ origin @ local
    return mats


class TestForwardKinematics:
    def test_matches_matrix_oracle_at_zero(self, hand):
        poses = forward_kinematics(hand, JointConfig(hand))
        mats = fk_oracle(hand, JointConfig(hand))
        for name, pose in poses.items():
            assert np.allclose(pose.to_matrix(), mats[name], atol=1e-12)

    def test_matches_matrix_oracle_random_configs(self, hand):
        rng = np.random.default_rng(31)
        for _ in range(25):
            angles = {}
            for jname, joint in hand.joints.items():
                lo, hi = joint.limits
                angles[jname] = float(rng.uniform(lo, hi))
            config = JointConfig(hand, angles)
            base = Pose.from_axis_angle(rng.normal(size=3) + 1e-3,
                                        rng.uniform(-math.pi, math.pi),
                                        rng.uniform(-0.3, 0.3, size=3))
            poses = forward_kinematics(hand, config, base)
            mats = fk_oracle(hand, config, base)
            for name, pose in poses.items():
                assert np.allclose(pose.to_matrix(), mats[name], atol=1e-9)

    def test_every_link_is_posed(self, hand):
        poses = forward_kinematics(hand, JointConfig(hand))
        assert set(poses) == set(hand.links)

    def test_base_moves_all_links_rigidly(self, hand):
        config = JointConfig(hand, {"index_mcp": 0.5, "index_pip": 0.4})
        base = Pose.from_axis_angle((0, 0, 1), 1.1, (0.2, -0.1, 0.05))
        at_origin = forward_kinematics(hand, config)
        moved = forward_kinematics(hand, config, base)
        for name in hand.links:
            expected = base.compose(at_origin[name])
            assert moved[name].approx_equal(expected, tol=1e-12)

    def test_quarter_turn_geometry(self, hand):
        # rotating index_mcp by -pi/2 about its -y axis swings the
        # proximal link from +x toward -z... sign convention check
        config = JointConfig(hand, {"index_mcp": math.pi / 2})
        poses = forward_kinematics(hand, config)
        joint = hand.joints["index_mcp"]
        knuckle = poses[joint.parent_link].compose(joint.origin)
        tip_dir = poses["index_prox"].rotate((1.0, 0.0, 0.0))
        # axis (0,-1,0), +pi/2: +x maps to +z, curling toward the object
        expected = knuckle.rotate((0.0, 0.0, 1.0))
        assert np.allclose(tip_dir, expected, atol=1e-12)


class TestJointConfig:
    def test_defaults_to_zero(self, hand):
        config = JointConfig(hand)
        assert all(config.angle(j) == 0.0 for j in hand.joints)

    def test_unknown_joint_rejected(self, hand):
        with pytest.raises(InvalidConfig):
            JointConfig(hand, {"elbow": 0.1})
        with pytest.raises(InvalidConfig):
            JointConfig(hand).angle("elbow")

    def test_out_of_limit_rejected(self, hand):
        lo, hi = hand.joints["index_mcp"].limits
        with pytest.raises(InvalidConfig):
            JointConfig(hand, {"index_mcp": hi + 0.1})

    def test_equality(self, hand):
        a = JointConfig(hand, {"index_mcp": 0.3})
        b = JointConfig(hand, {"index_mcp": 0.3})
        c = JointConfig(hand, {"index_mcp": 0.4})
        assert a == b
        assert a != c
        assert a.as_dict() == b.as_dict()


class TestActuate:
    def test_linear_mapping(self, hand):
        u = [0, 400, 0, 0, 0, 0, 0]
        config = actuate(hand, u)
        assert config.angle("index_mcp") == pytest.approx(MCP_RATIO * 400)
        assert config.angle("index_pip") == pytest.approx(PIP_RATIO * 400)
        assert config.angle("middle_mcp") == 0.0

    def test_channel_order_positions(self, hand):
        # channel i of the pulse vector drives finger FINGER_ORDER[i]
        for idx, channel_name in enumerate(CHANNEL_ORDER):
            u = [0] * 7
            u[idx] = 100
            config = actuate(hand, u)
            channel = hand.channel(channel_name)
            for c in channel.couplings:
                assert config.angle(c.joint) == pytest.approx(
                    c.ratio * 100), channel_name

    def test_clamps_at_joint_limit(self, hand):
        # max pulse drives index mcp to exactly its upper limit
        u = [0, PULSE_RANGE[1], 0, 0, 0, 0, 0]
        config = actuate(hand, u)
        assert config.angle("index_mcp") == pytest.approx(FLEX_LIMIT[1])

    def test_out_of_range_pulse_raises(self, hand):
        with pytest.raises(InvalidPulse):
            actuate(hand, [0, PULSE_RANGE[1] + 1, 0, 0, 0, 0, 0])
        with pytest.raises(InvalidPulse):
            actuate(hand, [0, -1, 0, 0, 0, 0, 0])

    def test_non_integer_pulse_raises(self, hand):
        with pytest.raises(InvalidInput):
            actuate(hand, [0, 0.5, 0, 0, 0, 0, 0])
        with pytest.raises(InvalidInput):
            actuate(hand, [0, 0, 0])

    def test_zero_vector_is_rest(self, hand):
        config = actuate(hand, [0] * 7)
        assert config == JointConfig(hand)


class TestModelValidation:
    FINGERS = ("thumb", "index", "middle", "ring", "pinky")

    def _minimal(self, **overrides):
        # one flexion joint per finger plus two thumb-axis joints,
        # each driven by exactly one channel
        mesh = box_mesh(0.01)
        links = {"palm": Link("palm", mesh)}
        joints = {}
        for name in self.FINGERS:
            links[f"{name}_l"] = Link(f"{name}_l", mesh)
            joints[f"{name}_j"] = Joint(
                f"{name}_j", "palm", f"{name}_l", Pose.identity(),
                (0, 0, 1), (-1.0, 1.0))
        for extra in ("yaw", "roll"):
            links[f"t_{extra}"] = Link(f"t_{extra}")
            joints[f"t_{extra}_j"] = Joint(
                f"t_{extra}_j", "palm", f"t_{extra}", Pose.identity(),
                (1, 0, 0), (-1.0, 1.0))
        fingers = {
            name: Finger(name, (f"{name}_j",), (f"{name}_l",))
            for name in self.FINGERS
        }
        channels = tuple(
            Channel(f"{name}_flex", (0, 100), (Coupling(f"{name}_j", 0.01),))
            for name in self.FINGERS
        ) + (
            Channel("thumb_yaw", (0, 100), (Coupling("t_yaw_j", 0.01),)),
            Channel("thumb_roll", (0, 100), (Coupling("t_roll_j", 0.01),)),
        )
        kw = dict(name="m", palm_link="palm", links=links, joints=joints,
                  fingers=fingers, channels=channels)
        kw.update(overrides)
        return kw

    def _model(self, **overrides):
        return HandModel(**self._minimal(**overrides))

    def test_minimal_valid(self):
        model = self._model()
        assert len(model.joint_order) == 7
        assert model.mesh_links() == (
            "palm", "thumb_l", "index_l", "middle_l", "ring_l", "pinky_l")

    def test_missing_palm(self):
        with pytest.raises(InvalidConfig):
            self._model(palm_link="nope")

    def test_meshless_palm(self):
        kw = self._minimal()
        kw["links"]["palm"] = Link("palm", None)
        with pytest.raises(InvalidConfig):
            HandModel(**kw)

    def test_unknown_joint_link(self):
        kw = self._minimal()
        kw["joints"]["bad"] = Joint("bad", "palm", "ghost", Pose.identity(),
                                    (0, 0, 1), (-1.0, 1.0))
        with pytest.raises(InvalidConfig):
            HandModel(**kw)

    def test_disconnected_link(self):
        kw = self._minimal()
        kw["links"]["orphan"] = Link("orphan", box_mesh(0.01))
        with pytest.raises(InvalidConfig):
            HandModel(**kw)

    def test_wrong_finger_set(self):
        fingers = {"thumb": Finger("thumb", ("thumb_j",), ("thumb_l",))}
        with pytest.raises(InvalidConfig):
            self._model(fingers=fingers)

    def test_wrong_channel_names(self):
        kw = self._minimal()
        kw["channels"] = tuple(
            Channel(f"motor_{i}", (0, 100), c.couplings)
            for i, c in enumerate(kw["channels"])
        )
        with pytest.raises(InvalidConfig):
            HandModel(**kw)

    def test_joint_driven_by_two_channels(self):
        kw = self._minimal()
        kw["channels"] = kw["channels"][:6] + (
            Channel("thumb_roll", (0, 100), (Coupling("t_yaw_j", 0.01),)),)
        with pytest.raises(InvalidConfig):
            HandModel(**kw)

    def test_flexion_channel_confined_to_its_finger(self):
        # swap thumb and index couplings: each drives the other's finger
        kw = self._minimal()
        kw["channels"] = (
            Channel("thumb_flex", (0, 100), (Coupling("index_j", 0.01),)),
            Channel("index_flex", (0, 100), (Coupling("thumb_j", 0.01),)),
        ) + kw["channels"][2:]
        with pytest.raises(InvalidConfig):
            HandModel(**kw)

    def test_joint_axis_validation(self):
        with pytest.raises(InvalidInput):
            Joint("j", "a", "b", Pose.identity(), (0, 0, 0), (-1, 1))
        with pytest.raises(InvalidInput):
            Joint("j", "a", "b", Pose.identity(), (0, 0, 1), (0.5, 1.0))

    def test_empty_pulse_range(self):
        with pytest.raises(InvalidInput):
            Channel("thumb_flex", (10, 10), (Coupling("j", 0.01),))


class TestFixtureHand:
    def test_structure(self, hand):
        assert tuple(c.name for c in hand.channels) == CHANNEL_ORDER
        assert set(hand.fingers) == {"thumb", "index", "middle",
                                     "ring", "pinky"}
        assert hand.links[hand.palm_link].mesh is not None

    def test_rest_pose_is_collision_free(self, hand):
        from engrasp.geometry.collision import mesh_intersects
        poses = forward_kinematics(hand, JointConfig(hand))
        meshes = posed_link_meshes(hand, poses)
        names = sorted(meshes)
        adjacent = {(j.parent_link, j.child_link) for j in hand.joints.values()}
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if (a, b) in adjacent or (b, a) in adjacent:
                    continue
                assert not mesh_intersects(meshes[a], meshes[b]), (a, b)

    def test_link_centers_match_mesh_centroids(self, hand):
        config = actuate(hand, [300, 200, 100, 0, 0, 50, 25])
        poses = forward_kinematics(hand, config)
        centers = link_centers(hand, poses)
        meshes = posed_link_meshes(hand, poses)
        for name, center in centers.items():
            assert np.allclose(center, meshes[name].vertex_centroid(),
                               atol=1e-12)


class TestDescriptionFiles:
    def test_round_trip_from_disk(self, hand, fixture_tree):
        loaded = load_hand(fixture_tree / "hand" / "hand.yaml")
        assert tuple(c.name for c in loaded.channels) == CHANNEL_ORDER
        assert set(loaded.joints) == set(hand.joints)
        assert set(loaded.links) == set(hand.links)
        # STL stores float32 vertices: FK agrees to that precision
        config_a = actuate(hand, [600, 500, 400, 300, 200, 100, 50])
        config_b = actuate(loaded, [600, 500, 400, 300, 200, 100, 50])
        pa = forward_kinematics(hand, config_a)
        pb = forward_kinematics(loaded, config_b)
        for name in hand.links:
            assert pa[name].approx_equal(pb[name], tol=1e-6)

    def test_pose_fields_round_trip(self):
        p = Pose.from_axis_angle((1, 2, 3), 0.8, (0.1, 0.2, 0.3))
        q = pose_from_fields(pose_to_fields(p), "test")
        assert p.approx_equal(q, tol=1e-12)

    def test_rpy_is_extrinsic_xyz(self):
        fields = {"rpy": [0.3, -0.2, 0.9]}
        p = pose_from_fields(fields, "test")
        want = (rodrigues((0, 0, 1), 0.9)
                @ rodrigues((0, 1, 0), -0.2)
                @ rodrigues((1, 0, 0), 0.3))
        assert np.allclose(p.rotation_matrix(), want, atol=1e-12)

    def test_rejects_bad_schema(self, tmp_path):
        path = tmp_path / "h.yaml"
        path.write_text("schema: wrong/1\n")
        with pytest.raises(InvalidConfig):
            load_hand(path)

    def test_rejects_missing_fields(self, tmp_path):
        path = tmp_path / "h.yaml"
        path.write_text("schema: engrasp-hand/1\nlinks: []\n")
        with pytest.raises(InvalidConfig):
            load_hand(path)

    def test_rejects_both_rpy_and_quaternion(self):
        with pytest.raises(InvalidConfig):
            pose_from_fields({"rpy": [0, 0, 0],
                              "quaternion": [1, 0, 0, 0]}, "test")

    def test_rejects_duplicate_links(self, fixture_tree):
        doc = yaml.safe_load(
            (fixture_tree / "hand" / "hand.yaml").read_text())
        doc["links"].append(dict(doc["links"][0]))
        # written next to the original so mesh references still resolve
        path = fixture_tree / "hand" / "dup.yaml"
        path.write_text(yaml.safe_dump(doc))
        with pytest.raises(InvalidConfig):
            load_hand(path)

    def test_mesh_paths_resolve_relative_to_file(self, tmp_path, fixture_tree):
        # copy the yaml only; meshes stay behind, so loading must fail
        content = (fixture_tree / "hand" / "hand.yaml").read_text()
        path = tmp_path / "h.yaml"
        path.write_text(content)
        with pytest.raises(OSError):
            load_hand(path)
