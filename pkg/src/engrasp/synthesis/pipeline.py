"""End-to-end grasp synthesis.

Samples palm placements, closes the fingers, collects the contact set,
tests the caging condition (object center of mass inside the convex hull
of contact-link centers), and scores survivors by the hull-centering
metric. Output is sorted best-first and is deterministic for a fixed
seed, independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, InvalidStart
from ..geometry import _kernels
from ..geometry._kernels import build_bvh
from ..geometry.hull import ConvexHull, convex_hull
from ..geometry.mesh import TriMesh
from ..geometry.pose import Pose
from ..hand.model import (
    HandModel,
    forward_kinematics,
    link_centers,
    posed_link_meshes,
)
from ..templates.store import AffordanceTemplate
from .closing import DEFAULT_STEP, GraspState, close_fingers
from .sampling import SamplingRegion, sample_palm_poses

DEFAULT_DELTA = 0.002  # contact distance threshold, meters


@dataclass(frozen=True)
class SynthesisParams:
    n: int = 100
    seed: int = 0
    step: float = DEFAULT_STEP
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInput(f"n must be >= 0, got {self.n}")
        if self.step <= 0:
            raise InvalidInput(f"step must be positive, got {self.step}")
        if self.delta < 0:
            raise InvalidInput(f"delta must be >= 0, got {self.delta}")

    def as_dict(self) -> dict:
        return {"n": self.n, "seed": self.seed, "step": self.step,
                "delta": self.delta}


@dataclass(frozen=True)
class GraspEvaluation:
    caged: bool
    d_h: float
    hull: ConvexHull


def contact_set(model: HandModel, state: GraspState,
                delta: float = DEFAULT_DELTA) -> list[tuple[str, np.ndarray]]:
    """Contact-link centers: the palm plus every link within delta.

    The palm is always part of the contact set; the grasp topology
    assumes the object rests against it.
    """
    poses = forward_kinematics(model, state.config, state.base)
    centers = link_centers(model, poses)
    out = [(model.palm_link, centers[model.palm_link])]
    for name in model.mesh_links():
        if name == model.palm_link:
            continue
        _, dist = state.contacts[name]
        if dist <= delta:
            out.append((name, centers[name]))
    return out


def evaluate_grasp(contacts, g) -> GraspEvaluation:
    """Caging verdict and centering score for one contact set.

    ``contacts`` is an (N, 3) array of contact-link centers (or a list of
    (name, point) pairs). Caged means g lies inside their convex hull;
    d_h is the distance from the hull's vertex centroid to g. Degenerate
    hulls cage nothing; their d_h falls back to the mean of the raw
    points so the score is still reportable.
    """
    points = _contact_points(contacts)
    if len(points) == 0:
        raise InvalidInput("contact set is empty")
    g = np.asarray(g, dtype=np.float64)
    hull = convex_hull(points)
    if hull.is_degenerate:
        d_h = float(np.linalg.norm(points.mean(axis=0) - g))
        return GraspEvaluation(caged=False, d_h=d_h, hull=hull)
    caged = hull.contains(g)
    d_h = float(np.linalg.norm(hull.vertex_centroid() - g))
    return GraspEvaluation(caged=caged, d_h=d_h, hull=hull)


def _contact_points(contacts) -> np.ndarray:
    if isinstance(contacts, np.ndarray):
        return np.atleast_2d(np.asarray(contacts, dtype=np.float64))
    points = []
    for item in contacts:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], str):
            points.append(np.asarray(item[1], dtype=np.float64))
        else:
            points.append(np.asarray(item, dtype=np.float64))
    return np.array(points, dtype=np.float64).reshape(-1, 3)


def _evaluate_sample(model: HandModel, region: SamplingRegion, g: np.ndarray,
                     params: SynthesisParams, index: int, base: Pose):
    """One sample of the pipeline; returns a template record or None."""
    palm_mesh = model.links[model.palm_link].mesh.transformed(
        forward_kinematics(model, _zero_config(model), base)[model.palm_link]
    )
    palm_bvh = build_bvh(palm_mesh.triangle_coords())
    object_bvh = build_bvh(region.target.triangle_coords())
    if _kernels.soup_intersects(palm_bvh, object_bvh):
        return None
    try:
        state = close_fingers(model, base, region.target,
                              environment=region.environment, step=params.step)
    except InvalidStart:
        return None
    contacts = contact_set(model, state, delta=params.delta)
    result = evaluate_grasp(contacts, g)
    if not result.caged:
        return None
    if _any_penetration(model, state, region):
        return None
    return AffordanceTemplate(
        id=f"at-{index:04d}",
        object_path="",
        object_hash=region.target.content_hash(),
        base=state.base,
        config=state.config.as_dict(),
        contacts=tuple((name, np.asarray(p, dtype=np.float64)) for name, p in contacts),
        hull_vertices=np.asarray(result.hull.vertices, dtype=np.float64),
        d_h=result.d_h,
    )


def _zero_config(model: HandModel):
    from ..hand.model import JointConfig

    return JointConfig(model)


def _any_penetration(model: HandModel, state: GraspState,
                     region: SamplingRegion) -> bool:
    """Defensive final check that an emitted state touches nothing."""
    poses = forward_kinematics(model, state.config, state.base)
    object_bvh = build_bvh(region.target.triangle_coords())
    env_bvhs = [build_bvh(m.triangle_coords()) for m in region.environment]
    for mesh in posed_link_meshes(model, poses).values():
        link_bvh = build_bvh(mesh.triangle_coords())
        if _kernels.soup_intersects(link_bvh, object_bvh):
            return True
        for env in env_bvhs:
            if _kernels.soup_intersects(link_bvh, env):
                return True
    return False


def _evaluate_batch(model, region, g, params, batch):
    return [
        (index, _evaluate_sample(model, region, g, params, index, base))
        for index, base in batch
    ]


def synthesize(model: HandModel, region: SamplingRegion,
               params: SynthesisParams | None = None,
               jobs: int = 1) -> list[AffordanceTemplate]:
    """Run the full pipeline and return caged templates, best first.

    Results are sorted by (d_h, id) ascending and are identical for a
    fixed seed regardless of ``jobs``: samples are merged back in sample
    order, and every sample is evaluated independently.
    """
    if params is None:
        params = SynthesisParams()
    if params.n == 0:
        return []
    g = region.target.volume_centroid()
    bases = sample_palm_poses(region, params.n, params.seed)
    indexed = list(enumerate(bases))

    if jobs <= 1 or len(indexed) <= 1:
        results = _evaluate_batch(model, region, g, params, indexed)
    else:
        jobs = min(jobs, len(indexed))
        chunk = math.ceil(len(indexed) / jobs)
        batches = [indexed[i:i + chunk] for i in range(0, len(indexed), chunk)]
        results = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_evaluate_batch, model, region, g, params, batch)
                for batch in batches
            ]
            for future in futures:
                results.extend(future.result())

    results.sort(key=lambda item: item[0])  # sample order, regardless of jobs
    templates = [t for _, t in results if t is not None]
    templates.sort(key=lambda t: (t.d_h, t.id))
    return templates
