"""Benchmark harness: datasets, synthetic sequences, OPE runs, metrics,
the reload-convergence experiment, drift statistics, and galleries."""

from .dataset import Sequence, load_dataset, load_otb_sequence, read_image
from .experiments import (DriftReport, PocRecord, ablation_grid, drift_stats,
                          poc_experiment, single_template_config)
from .gallery import dump_template_gallery
from .metrics import center_errors, iou_series, precision_at, success_auc
from .runner import RunResult, run_ope, write_results_json, write_trace_csv
from .synthetic import SyntheticSpec, generate_synthetic

__all__ = [
    "Sequence", "load_dataset", "load_otb_sequence", "read_image",
    "DriftReport", "PocRecord", "ablation_grid", "drift_stats",
    "poc_experiment", "single_template_config", "dump_template_gallery",
    "center_errors", "iou_series", "precision_at", "success_auc",
    "RunResult", "run_ope", "write_results_json", "write_trace_csv",
    "SyntheticSpec", "generate_synthetic",
]
