"""Cage survival under rigid pose perturbation.

Models calibration drift between the taught template and the real part:
the hand stays frozen in the template configuration while the object is
perturbed by a random rigid motion, and the caging condition is
rechecked from scratch. Every trial derives its own RNG from
(master seed, trial index), so results never depend on execution order
or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, InvalidTemplate
from ..geometry import _kernels
from ..geometry._kernels import build_bvh, single_leaf_bvh
from ..geometry.mesh import TriMesh
from ..geometry.pose import Pose
from ..hand.model import (
    HandModel,
    JointConfig,
    forward_kinematics,
    link_centers,
    posed_link_meshes,
)
from ..synthesis.pipeline import DEFAULT_DELTA, evaluate_grasp
from ..templates.store import AffordanceTemplate


@dataclass(frozen=True)
class PerturbationSpec:
    """Isotropic Gaussian translation plus uniform-axis Gaussian-angle
    rotation, applied to the object pose about its center."""

    sigma_t: float = 0.0   # meters
    sigma_r: float = 0.0   # radians
    trials: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.sigma_t < 0 or self.sigma_r < 0:
            raise InvalidInput("perturbation sigmas must be >= 0")
        if self.trials < 1:
            raise InvalidInput(f"trials must be >= 1, got {self.trials}")

    def as_dict(self) -> dict:
        return {"sigma_t": self.sigma_t, "sigma_r": self.sigma_r,
                "trials": self.trials, "seed": self.seed}


def trial_perturbation(spec: PerturbationSpec, g, index: int) -> Pose:
    """The rigid motion applied to the object in one trial.

    Rotation acts about g, then the whole object translates, so the
    perturbed center is exactly g + t.
    """
    rng = np.random.default_rng([spec.seed, index])
    t = rng.normal(size=3) * spec.sigma_t
    axis = rng.normal(size=3)
    norm = float(np.linalg.norm(axis))
    axis = axis / norm if norm > 1e-12 else np.array([0.0, 0.0, 1.0])
    angle = float(rng.normal()) * spec.sigma_r
    rot = Pose.from_axis_angle(axis, angle).rotation_matrix()
    g = np.asarray(g, dtype=np.float64)
    return Pose.from_rotation(rot, g + t - rot @ g)


@dataclass(frozen=True)
class TrialOutcome:
    caged: bool
    moment_arm: np.ndarray  # c - g', lever arm of the rechecked contact set


def run_perturbation_trials(template: AffordanceTemplate, object_mesh: TriMesh,
                            model: HandModel, spec: PerturbationSpec,
                            delta: float = DEFAULT_DELTA) -> list[TrialOutcome]:
    """Recheck the cage against a perturbed object, once per trial.

    The hand is frozen at the template configuration; the contact set is
    rebuilt per trial from link-to-object distances (palm always in),
    mirroring the synthesis rule. Raises InvalidTemplate when the
    template does not cage the object at the nominal pose.
    """
    g = object_mesh.volume_centroid()
    config = JointConfig(model, template.config)
    poses = forward_kinematics(model, config, template.base)
    centers = link_centers(model, poses)
    meshes = posed_link_meshes(model, poses)
    link_tris = {name: mesh.triangle_coords() for name, mesh in meshes.items()}
    object_bvh = build_bvh(object_mesh.triangle_coords())
    obj_lo, obj_hi = object_mesh.aabb()

    nominal = _recheck(model, centers, link_tris, object_bvh, obj_lo, obj_hi,
                       Pose.identity(), g, delta)
    if not nominal.caged:
        raise InvalidTemplate(
            f"template {template.id} does not cage the object at the "
            f"nominal pose"
        )

    outcomes = []
    for i in range(spec.trials):
        perturbation = trial_perturbation(spec, g, i)
        g_moved = perturbation.apply(g)
        outcomes.append(_recheck(model, centers, link_tris, object_bvh,
                                 obj_lo, obj_hi, perturbation, g_moved, delta))
    return outcomes


def perturb_and_recheck(template: AffordanceTemplate, object_mesh: TriMesh,
                        model: HandModel, spec: PerturbationSpec,
                        delta: float = DEFAULT_DELTA) -> float:
    """Fraction of perturbation trials in which the cage holds."""
    outcomes = run_perturbation_trials(template, object_mesh, model, spec,
                                       delta=delta)
    return sum(1 for o in outcomes if o.caged) / len(outcomes)


def _recheck(model, centers, link_tris, object_bvh, obj_lo, obj_hi,
             perturbation: Pose, g_moved, delta: float) -> TrialOutcome:
    """Contact set and caging verdict against one perturbed object pose.

    Distances are measured in the object's frame: moving the object by P
    is the same as moving every link by P^-1, which keeps the object BVH
    reusable across trials.
    """
    inverse = perturbation.inverse()
    points = [centers[model.palm_link]]
    for name in model.mesh_links():
        if name == model.palm_link:
            continue
        moved = inverse.apply(link_tris[name])
        if _box_gap_sq(moved, obj_lo, obj_hi) > delta * delta:
            continue
        moved = np.ascontiguousarray(moved)
        dist = _kernels.soup_min_distance(single_leaf_bvh(moved), object_bvh)
        if dist <= delta:
            points.append(centers[name])
    result = evaluate_grasp(np.array(points), g_moved)
    if result.hull.is_degenerate:
        c = np.mean(points, axis=0)
    else:
        c = result.hull.vertex_centroid()
    return TrialOutcome(caged=result.caged, moment_arm=c - g_moved)


def _box_gap_sq(tris, lo, hi) -> float:
    """Squared AABB gap between a triangle soup and a box; 0 if overlapping."""
    tlo = tris.min(axis=(0, 1))
    thi = tris.max(axis=(0, 1))
    gap = np.maximum(0.0, np.maximum(lo - thi, tlo - hi))
    return float(gap @ gap)
