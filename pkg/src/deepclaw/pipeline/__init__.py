"""The four pipeline stages and a name registry used by task configs."""
from .grasp import N_BINS, GraspDecision, GraspMap, plan_grasp, select_grasp
from .motion import plan_motion
from .recognition import RecognitionResult, Template, TemplateBank, recognize_color, recognize_template
from .segmentation import SegmentationResult, segment_contour

STAGES = {
    "segmentation": {"contour": segment_contour},
    "recognition": {"color": recognize_color, "template": recognize_template},
    "grasp": {"analytic": plan_grasp},
    "motion": {"waypoint": plan_motion},
}


def get_stage(kind: str, name: str):
    try:
        return STAGES[kind][name]
    except KeyError:
        raise KeyError(f"unknown {kind} stage {name!r}; available: {sorted(STAGES.get(kind, {}))}") from None


__all__ = [
    "GraspDecision", "GraspMap", "N_BINS", "RecognitionResult", "STAGES", "SegmentationResult", "Template",
    "TemplateBank", "get_stage", "plan_grasp", "plan_motion", "recognize_color", "recognize_template",
    "segment_contour", "select_grasp",
]
