"""Perturbation-based robustness evaluation and trial reporting."""

from .moments import (
    DEFAULT_FORCE_MAGNITUDE,
    default_force,
    extraction_moment,
    moment_about,
)
from .perturb import (
    PerturbationSpec,
    TrialOutcome,
    perturb_and_recheck,
    run_perturbation_trials,
    trial_perturbation,
)
from .report import (
    SCHEMA,
    TrialReport,
    TrialRow,
    format_table,
    quality_level,
    report_to_doc,
    run_trials,
    save_report,
    spearman_rank,
)

__all__ = [
    "DEFAULT_FORCE_MAGNITUDE",
    "SCHEMA",
    "PerturbationSpec",
    "TrialOutcome",
    "TrialReport",
    "TrialRow",
    "default_force",
    "extraction_moment",
    "format_table",
    "moment_about",
    "perturb_and_recheck",
    "quality_level",
    "report_to_doc",
    "run_perturbation_trials",
    "run_trials",
    "save_report",
    "spearman_rank",
    "trial_perturbation",
]
