"""Benchmark experiments on top of the OPE runner: the save/reload
determinant-convergence loop, drift statistics over accepted templates,
the single-template baseline, and the ablation grid."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

from ..config import TrackerConfig
from ..errors import ExperimentError, GramtrackError, ParameterError
from ..memory import DecisionKind, load_memory_snapshot, save_memory_snapshot
from .dataset import Sequence
from .runner import RunResult, run_ope

_ACCEPT_KINDS = (DecisionKind.APPENDED.value, DecisionKind.REPLACED.value)

POC_CONVERGENCE_RTOL = 1e-3


@dataclass(frozen=True)
class PocRecord:
    run: int
    norm_det: float
    auc: float


def poc_experiment(seq: Sequence, config: TrackerConfig, max_runs: int,
                   workdir: str | None = None) -> list[PocRecord]:
    """Track, persist the long-term memory, re-track with it reloaded, and
    repeat until the end-of-run determinant stops changing (relative change
    below 1e-3) or ``max_runs`` is reached.

    Each reload starts from the previous run's snapshot with the base
    template unchanged; the determinant can keep growing because a run
    with better templates visits different candidate crops.
    """
    if max_runs < 2:
        raise ParameterError(f"max_runs must be >= 2, got {max_runs}")
    owned = workdir is None
    workdir = workdir or tempfile.mkdtemp(prefix="gramtrack-poc-")
    records: list[PocRecord] = []
    loaded = None
    try:
        for run in range(1, max_runs + 1):
            result = run_ope(seq, config, initial_ltm=loaded)
            records.append(PocRecord(run=run, norm_det=result.final_det,
                                     auc=result.auc))
            if run >= 2:
                prev, cur = records[-2].norm_det, records[-1].norm_det
                if abs(cur - prev) <= POC_CONVERGENCE_RTOL * max(abs(prev), 1e-12):
                    break
            if run == max_runs:
                break
            snap_dir = os.path.join(workdir, f"run_{run:02d}")
            save_memory_snapshot(result.final_state.ltm, snap_dir)
            loaded = load_memory_snapshot(snap_dir)
    except GramtrackError as exc:
        raise ExperimentError(f"reload experiment failed on {seq.name}: {exc}") from exc
    finally:
        if owned:
            import shutil
            shutil.rmtree(workdir, ignore_errors=True)
    return records


@dataclass(frozen=True)
class DriftReport:
    """Template-store purity over one run: how many accepted templates were
    captured off the object."""

    mean_norm_det: float
    n_drifted: int
    n_lt_updates: int

    @property
    def relative_drift(self) -> float:
        return self.n_drifted / max(self.n_lt_updates, 1)


def drift_stats(result: RunResult, seq: Sequence, drift_iou: float = 0.3) -> DriftReport:
    """Count accepted long-term templates whose capture box overlaps the
    ground truth at the capture frame by less than ``drift_iou``."""
    from ..boxes import iou as _iou
    n_updates = 0
    n_drifted = 0
    for event in result.events_of(*_ACCEPT_KINDS):
        n_updates += 1
        if event.capture_box is None:
            continue
        gt = seq.groundtruth[event.frame_index]
        if _iou(event.capture_box, gt) < drift_iou:
            n_drifted += 1
    return DriftReport(mean_norm_det=result.final_det,
                       n_drifted=n_drifted, n_lt_updates=n_updates)


def single_template_config(config: TrackerConfig) -> TrackerConfig:
    """The underlying matcher alone: base template only, no memories, no
    modulation. The reference point every comparison is against."""
    return config.with_overrides(k_lt=1, use_stm=False, use_modulation=False)


def ablation_grid(config: TrackerConfig) -> dict[str, TrackerConfig]:
    """Full system plus one configuration per disabled concept."""
    return {
        "full": config,
        "no_modulation": config.with_overrides(use_modulation=False),
        "no_masking": config.with_overrides(use_masking=False),
        "no_stm": config.with_overrides(use_stm=False),
    }
