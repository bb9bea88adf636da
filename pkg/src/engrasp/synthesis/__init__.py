"""Grasp synthesis: palm sampling, finger closing, caging evaluation."""

from .closing import (
    DEFAULT_STEP,
    ENVIRONMENT_COLLISION,
    JOINT_LIMIT,
    OBJECT_COLLISION,
    GraspState,
    close_fingers,
)
from .pipeline import (
    DEFAULT_DELTA,
    GraspEvaluation,
    SynthesisParams,
    contact_set,
    evaluate_grasp,
    synthesize,
)
from .sampling import SamplingRegion, sample_palm_poses

__all__ = [
    "DEFAULT_DELTA",
    "DEFAULT_STEP",
    "ENVIRONMENT_COLLISION",
    "JOINT_LIMIT",
    "OBJECT_COLLISION",
    "GraspEvaluation",
    "GraspState",
    "SamplingRegion",
    "SynthesisParams",
    "close_fingers",
    "contact_set",
    "evaluate_grasp",
    "sample_palm_poses",
    "synthesize",
]
