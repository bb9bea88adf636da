"""Affordance template records, sets, ranking colors, and persistence.

A template is one validated enveloping grasp: hand base pose, joint
configuration, contact-link centers, their hull, and the centering score
d_h. Sets serialize to a versioned JSON document whose bytes depend only
on the content (no timestamps, stable key order, shortest round-trip
float text), so identical runs produce identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..errors import (
    HashMismatchError,
    IntegrityError,
    InvalidInput,
    VersionError,
)
from ..geometry.hull import convex_hull
from ..geometry.meshio import load_mesh
from ..geometry.pose import Pose, apply_map, frame_map

SCHEMA = "engrasp-templates/1"
D_H_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AffordanceTemplate:
    """One stored grasp: everything needed to replay and re-verify it."""

    id: str
    object_path: str
    object_hash: str
    base: Pose
    config: dict[str, float]
    contacts: tuple[tuple[str, np.ndarray], ...]
    hull_vertices: np.ndarray
    d_h: float
    score_norm: float | None = None
    color: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.d_h < 0:
            raise InvalidInput(f"template {self.id}: d_h must be >= 0")
        if (self.score_norm is None) != (self.color is None):
            raise InvalidInput(
                f"template {self.id}: score and color must be set together"
            )

    def contact_points(self) -> np.ndarray:
        return np.array([p for _, p in self.contacts], dtype=np.float64)


@dataclass(frozen=True)
class TemplateSet:
    """Templates for one object plus generation provenance."""

    templates: tuple[AffordanceTemplate, ...]
    g: np.ndarray
    object_path: str
    object_hash: str
    params: dict

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(self.templates))
        g = np.asarray(self.g, dtype=np.float64)
        if g.shape != (3,):
            raise InvalidInput(f"g must be a 3-vector, got shape {g.shape}")
        object.__setattr__(self, "g", g)
        ids = [t.id for t in self.templates]
        if len(set(ids)) != len(ids):
            raise InvalidInput("template ids must be unique")
        for t in self.templates:
            if t.object_hash != self.object_hash:
                raise InvalidInput(
                    f"template {t.id} references a different object hash"
                )

    def __len__(self) -> int:
        return len(self.templates)


def build_set(templates, g, object_path: str, object_hash: str,
              params: dict) -> TemplateSet:
    """Assemble a set, stamping the shared object reference on each row."""
    stamped = tuple(
        replace(t, object_path=object_path, object_hash=object_hash)
        for t in templates
    )
    return TemplateSet(templates=stamped, g=g, object_path=object_path,
                       object_hash=object_hash, params=dict(params))


def normalize_and_color(tset: TemplateSet) -> TemplateSet:
    """Attach normalized scores and the red-to-blue quality gradient.

    The best (smallest d_h) template maps to pure red (1, 0, 0), the
    worst to pure blue (0, 0, 1); a single template or an all-equal set
    is red. Green stays 0 throughout.
    """
    if len(tset) == 0:
        raise InvalidInput("cannot normalize an empty template set")
    values = np.array([t.d_h for t in tset.templates])
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    colored = []
    for t in tset.templates:
        s = 0.0 if span == 0.0 else (t.d_h - lo) / span
        colored.append(replace(t, score_norm=s, color=(1.0 - s, 0.0, s)))
    return replace(tset, templates=tuple(colored))


def map_templates(tset: TemplateSet, base_sim: Pose, base_vis: Pose) -> TemplateSet:
    """Re-express every template in the visualization frame.

    The mapping is the rigid transform taking the simulation-frame base
    pose to the visualization-frame one; applying it to base poses,
    contact points, hull vertices, and g leaves d_h and the caged
    verdicts unchanged.
    """
    mapping = frame_map(base_sim, base_vis)
    mapped = []
    for t in tset.templates:
        mapped.append(
            replace(
                t,
                base=apply_map(mapping, t.base),
                contacts=tuple(
                    (name, mapping.apply(p)) for name, p in t.contacts
                ),
                hull_vertices=mapping.apply(t.hull_vertices),
            )
        )
    return replace(tset, templates=tuple(mapped), g=mapping.apply(tset.g))


def _f(value: float) -> float:
    """Normalize floats for serialization (exact round-trip via repr)."""
    return float(value)


def _template_to_doc(t: AffordanceTemplate) -> dict:
    doc = {
        "id": t.id,
        "base": {
            "quaternion": [_f(v) for v in t.base.quaternion],
            "translation": [_f(v) for v in t.base.translation],
        },
        "config": {name: _f(a) for name, a in sorted(t.config.items())},
        "contacts": [[name, [_f(v) for v in p]] for name, p in t.contacts],
        "hull_vertices": [[_f(v) for v in row] for row in t.hull_vertices],
        "d_h": _f(t.d_h),
    }
    if t.score_norm is not None:
        doc["score_norm"] = _f(t.score_norm)
        doc["color"] = [_f(v) for v in t.color]
    return doc


def _template_from_doc(doc: dict, object_path: str, object_hash: str,
                       where: str) -> AffordanceTemplate:
    try:
        base = Pose(doc["base"]["quaternion"], doc["base"]["translation"])
        color = doc.get("color")
        return AffordanceTemplate(
            id=doc["id"],
            object_path=object_path,
            object_hash=object_hash,
            base=base,
            config={str(k): float(v) for k, v in doc["config"].items()},
            contacts=tuple(
                (str(name), np.asarray(p, dtype=np.float64))
                for name, p in doc["contacts"]
            ),
            hull_vertices=np.asarray(doc["hull_vertices"], dtype=np.float64),
            d_h=float(doc["d_h"]),
            score_norm=(None if "score_norm" not in doc
                        else float(doc["score_norm"])),
            color=None if color is None else tuple(float(v) for v in color),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"{where}: malformed template record: {exc}") from exc


def save(tset: TemplateSet, path) -> None:
    """Write a set atomically; identical sets produce identical bytes."""
    path = Path(path)
    doc = {
        "schema": SCHEMA,
        "object": {"path": tset.object_path, "hash": tset.object_hash},
        "g": [_f(v) for v in tset.g],
        "params": tset.params,
        "templates": [_template_to_doc(t) for t in tset.templates],
    }
    text = json.dumps(doc, indent=2, allow_nan=False)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.write("\n")
    os.replace(tmp, path)


def load(path, strict: bool = False) -> TemplateSet:
    """Read a set back, verifying schema, d_h integrity, and optionally
    the referenced object mesh's content hash (``strict``)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema" not in doc:
        raise IntegrityError(f"{path}: missing schema marker")
    if doc["schema"] != SCHEMA:
        raise VersionError(
            f"{path}: unsupported schema {doc['schema']!r} (expected {SCHEMA!r})"
        )
    try:
        object_path = str(doc["object"]["path"])
        object_hash = str(doc["object"]["hash"])
        g = np.asarray(doc["g"], dtype=np.float64)
        params = dict(doc["params"])
        rows = doc["templates"]
    except (KeyError, TypeError, ValueError) as exc:
        raise IntegrityError(f"{path}: malformed document: {exc}") from exc

    templates = tuple(
        _template_from_doc(row, object_path, object_hash, str(path))
        for row in rows
    )
    tset = TemplateSet(templates=templates, g=g, object_path=object_path,
                       object_hash=object_hash, params=params)
    for t in templates:
        _check_d_h(t, g, str(path))
    if strict:
        _check_object_hash(tset, path)
    return tset


def _check_d_h(t: AffordanceTemplate, g: np.ndarray, where: str) -> None:
    """Stored d_h must match a fresh evaluation of the stored contacts."""
    points = t.contact_points()
    hull = convex_hull(points)
    if hull.is_degenerate:
        c = points.mean(axis=0)
    else:
        c = hull.vertex_centroid()
    fresh = float(np.linalg.norm(c - g))
    if abs(fresh - t.d_h) > D_H_TOLERANCE:
        raise IntegrityError(
            f"{where}: template {t.id}: stored d_h {t.d_h} does not match "
            f"re-evaluated value {fresh}"
        )


def _check_object_hash(tset: TemplateSet, path: Path) -> None:
    if not tset.object_path:
        raise HashMismatchError(
            f"{path}: strict load requires an object path in the document"
        )
    mesh_path = Path(tset.object_path)
    if not mesh_path.is_absolute():
        mesh_path = path.parent / mesh_path
    mesh = load_mesh(mesh_path)
    if mesh.content_hash() != tset.object_hash:
        raise HashMismatchError(
            f"{path}: object mesh {mesh_path} hash {mesh.content_hash()} "
            f"does not match stored {tset.object_hash}"
        )
