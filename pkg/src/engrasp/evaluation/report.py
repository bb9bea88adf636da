"""Trial reports: per-template survival, moments, and rank correlation."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput
from ..geometry.mesh import TriMesh
from ..hand.model import HandModel
from ..synthesis.pipeline import DEFAULT_DELTA
from ..templates.store import TemplateSet
from .moments import default_force, moment_about
from .perturb import PerturbationSpec, run_perturbation_trials

SCHEMA = "engrasp-report/1"


@dataclass(frozen=True)
class TrialRow:
    template_id: str
    d_h: float
    survival: float
    mean_moment: float


@dataclass(frozen=True)
class TrialReport:
    rows: tuple[TrialRow, ...]
    spearman: float | None  # d_h vs survival; None when ranks are degenerate
    spec: PerturbationSpec
    force: tuple[float, float, float]

    def __post_init__(self):
        for row in self.rows:
            if not (0.0 <= row.survival <= 1.0):
                raise InvalidInput(
                    f"row {row.template_id}: survival {row.survival} not in [0,1]"
                )


def spearman_rank(x, y) -> float | None:
    """Spearman correlation via Pearson on average-tie ranks.

    Returns None when either side has zero rank variance (fewer than two
    samples, or all values tied), where the coefficient is undefined.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInput("spearman_rank needs two equal-length vectors")
    if x.shape[0] < 2:
        return None
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    sx = rx.std()
    sy = ry.std()
    if sx == 0.0 or sy == 0.0:
        return None
    return float(np.mean((rx - rx.mean()) * (ry - ry.mean())) / (sx * sy))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    n = values.shape[0]
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0  # 1-based, ties averaged
        i = j + 1
    return ranks


def _template_row(template, object_mesh, model, spec, delta, force) -> TrialRow:
    outcomes = run_perturbation_trials(template, object_mesh, model, spec,
                                       delta=delta)
    g = object_mesh.volume_centroid()
    survival = sum(1 for o in outcomes if o.caged) / len(outcomes)
    moments = [moment_about(g + o.moment_arm, g, force) for o in outcomes]
    return TrialRow(template_id=template.id, d_h=template.d_h,
                    survival=survival, mean_moment=float(np.mean(moments)))


def run_trials(tset: TemplateSet, object_mesh: TriMesh, model: HandModel,
               spec: PerturbationSpec, force=None, jobs: int = 1) -> TrialReport:
    """Perturbation trials for every template in a set.

    Rows keep the set's order (best d_h first). The force defaults to
    10 N along the object's longest bounding-box axis. Per-trial seeds
    are derived from (spec.seed, trial index), so the report is
    byte-identical for a fixed spec regardless of ``jobs``.
    """
    if len(tset.templates) == 0:
        raise InvalidInput("cannot run trials on an empty template set")
    if force is None:
        force = default_force(object_mesh)
    force = np.asarray(force, dtype=np.float64).reshape(3)
    delta = float(tset.params.get("delta", DEFAULT_DELTA))

    if jobs <= 1 or len(tset.templates) <= 1:
        rows = [_template_row(t, object_mesh, model, spec, delta, force)
                for t in tset.templates]
    else:
        jobs = min(jobs, len(tset.templates))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_template_row, t, object_mesh, model, spec,
                            delta, force)
                for t in tset.templates
            ]
            rows = [f.result() for f in futures]  # submission order

    rho = spearman_rank([r.d_h for r in rows], [r.survival for r in rows])
    return TrialReport(rows=tuple(rows), spearman=rho, spec=spec,
                       force=tuple(float(v) for v in force))


def quality_level(score: float) -> str:
    """Bucket a normalized centering score into a quality label."""
    if score <= 1.0 / 3.0:
        return "High"
    if score <= 2.0 / 3.0:
        return "Medium"
    return "Low"


def _scores(rows) -> list[float]:
    values = [r.d_h for r in rows]
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0.0:
        return [0.0 for _ in values]
    return [(v - lo) / span for v in values]


def format_table(report: TrialReport) -> str:
    """Aligned plain-text table: quality level, survival %, moment."""
    headers = ("template", "quality", "d_h[m]", "survival[%]", "moment[N*m]")
    lines = []
    for row, score in zip(report.rows, _scores(report.rows)):
        lines.append((
            row.template_id,
            quality_level(score),
            f"{row.d_h:.6f}",
            f"{row.survival * 100.0:.1f}",
            f"{row.mean_moment:.6f}",
        ))
    widths = [max(len(h), *(len(line[i]) for line in lines)) if lines else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    out.extend(fmt(line) for line in lines)
    rho = "n/a" if report.spearman is None else f"{report.spearman:.4f}"
    out.append("")
    out.append(f"spearman(d_h, survival) = {rho}")
    return "\n".join(out) + "\n"


def report_to_doc(report: TrialReport) -> dict:
    return {
        "schema": SCHEMA,
        "spec": report.spec.as_dict(),
        "force": list(report.force),
        "rows": [
            {
                "id": row.template_id,
                "d_h": row.d_h,
                "survival": row.survival,
                "mean_moment": row.mean_moment,
            }
            for row in report.rows
        ],
        "spearman": report.spearman,
    }


def save_report(report: TrialReport, path) -> None:
    """Write the structured report; bytes are deterministic per input."""
    text = json.dumps(report_to_doc(report), indent=2, allow_nan=False) + "\n"
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
