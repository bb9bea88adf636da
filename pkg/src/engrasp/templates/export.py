"""Colored scene export for operator review.

Writes one binary PLY per template: the object in neutral gray plus the
full hand posed at the template's base and configuration, every hand
vertex tinted with the template's quality color. A JSON index ties the
files back to ids, scores, and d_h so a viewer can sort and overlay.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from ..errors import InvalidInput
from ..geometry.mesh import TriMesh
from ..geometry.meshio import save_ply
from ..hand.model import HandModel, JointConfig, forward_kinematics, posed_link_meshes
from .store import AffordanceTemplate, TemplateSet

INDEX_SCHEMA = "engrasp-export/1"
OBJECT_GRAY = (0.7, 0.7, 0.7)


def scene_mesh(template: AffordanceTemplate, model: HandModel,
               object_mesh: TriMesh) -> TriMesh:
    """Combined object + posed hand mesh with per-vertex colors."""
    if template.color is None:
        raise InvalidInput(
            f"template {template.id} has no color; run normalize_and_color first"
        )
    config = JointConfig(model, template.config)
    poses = forward_kinematics(model, config, template.base)
    posed = posed_link_meshes(model, poses)
    parts = [(object_mesh, OBJECT_GRAY)]
    for name in model.mesh_links():
        parts.append((posed[name], template.color))
    return _concatenate(parts)


def _concatenate(parts) -> TriMesh:
    vertices = []
    triangles = []
    colors = []
    offset = 0
    for mesh, color in parts:
        vertices.append(mesh.vertices)
        triangles.append(mesh.triangles + offset)
        colors.append(np.tile(np.asarray(color, dtype=np.float64),
                              (mesh.n_vertices, 1)))
        offset += mesh.n_vertices
    return TriMesh(
        np.vstack(vertices),
        np.vstack(triangles).astype(np.int32),
        np.vstack(colors),
    )


def export_scene(tset: TemplateSet, model: HandModel, object_mesh: TriMesh,
                 out_dir) -> list[Path]:
    """Write per-template PLY scenes and the index; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    index_rows = []
    for t in tset.templates:
        mesh = scene_mesh(t, model, object_mesh)
        ply_path = out_dir / f"{t.id}.ply"
        save_ply(mesh, ply_path)
        written.append(ply_path)
        index_rows.append(
            {
                "id": t.id,
                "file": ply_path.name,
                "d_h": float(t.d_h),
                "score_norm": float(t.score_norm),
                "color": [float(v) for v in t.color],
            }
        )
    index = {
        "schema": INDEX_SCHEMA,
        "object": {"path": tset.object_path, "hash": tset.object_hash},
        "files": index_rows,
    }
    index_path = out_dir / "index.json"
    tmp = index_path.with_name(index_path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=2, allow_nan=False)
        fh.write("\n")
    os.replace(tmp, index_path)
    written.append(index_path)
    return written
