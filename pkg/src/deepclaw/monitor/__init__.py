"""Experiment recording: metrics, run records and run directories."""
from .io import read_pfm, read_ppm, read_run, summary_rows, write_pfm, write_ppm, write_run
from .metrics import (
    FUNCTION_WISE,
    JIGSAW_STANDARD_AREA,
    TASK_WISE,
    Detection,
    MetricValue,
    average_precision,
    iou,
    jigsaw_score,
    path_length,
)
from .records import RunRecord, SubTaskRecord, summarize, summarize_repetition

__all__ = [
    "Detection", "FUNCTION_WISE", "JIGSAW_STANDARD_AREA", "MetricValue", "RunRecord", "SubTaskRecord",
    "TASK_WISE", "average_precision", "iou", "jigsaw_score", "path_length", "read_pfm", "read_ppm",
    "read_run", "summarize", "summarize_repetition", "summary_rows", "write_pfm", "write_ppm", "write_run",
]
