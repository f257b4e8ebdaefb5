"""One-pass evaluation: initialize on frame 0, track every later frame,
record full traces. Ground truth is consulted only for the init box;
overlap metrics are computed after the run.

Results files are byte-reproducible for identical config and sequence:
``results.json`` and ``trace.csv`` carry no timing, which goes to a
separate ``timing.json``.
"""

from __future__ import annotations

import json
import os
import time
import warnings
from dataclasses import dataclass, field

from ..boxes import BoundingBox
from ..config import TrackerConfig
from ..inference import FramePrediction, track_step
from ..matcher import TrackState, track_init
from ..memory import DecisionKind, LongTermMemory, save_memory_snapshot
from .dataset import Sequence, read_image
from .metrics import center_errors, iou_series, precision_at, success_auc

REINIT_EVENT = "reinit"
ERROR_EVENT = "error"


@dataclass
class MemoryEvent:
    frame_index: int
    kind: str                      # decision kinds plus "reinit" / "error"
    slot: int | None = None
    template_id: int | None = None
    capture_box: BoundingBox | None = None

    def as_dict(self) -> dict:
        return {
            "frame_index": self.frame_index,
            "kind": self.kind,
            "slot": self.slot,
            "template_id": self.template_id,
            "capture_box": list(self.capture_box.as_tuple()) if self.capture_box else None,
        }


@dataclass
class RunResult:
    sequence_name: str
    config: dict
    boxes: list[BoundingBox] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)
    sources: list[str] = field(default_factory=list)
    det_trace: list[float] = field(default_factory=list)
    gamma_trace: list[float] = field(default_factory=list)
    ious: list[float] = field(default_factory=list)
    errors: list[float] = field(default_factory=list)
    events: list[MemoryEvent] = field(default_factory=list)
    frame_seconds: list[float] = field(default_factory=list)
    final_state: TrackState | None = None

    @property
    def auc(self) -> float:
        return success_auc(self.ious)

    @property
    def precision(self) -> float:
        return precision_at(self.errors)

    @property
    def final_det(self) -> float:
        return self.det_trace[-1] if self.det_trace else 0.0

    def events_of(self, *kinds: str) -> list[MemoryEvent]:
        return [e for e in self.events if e.kind in kinds]


def _record_step(result: RunResult, pred: FramePrediction) -> None:
    result.boxes.append(pred.box)
    result.scores.append(pred.score)
    result.sources.append(pred.source)
    result.det_trace.append(pred.det_after)
    result.gamma_trace.append(pred.gamma_after)
    if pred.stm_reinit:
        result.events.append(MemoryEvent(pred.frame_index, REINIT_EVENT))
    if pred.decision is not None:
        result.events.append(MemoryEvent(
            pred.frame_index, pred.decision.kind.value, slot=pred.decision.slot,
            template_id=pred.candidate_id, capture_box=pred.candidate_box))


def run_ope(seq: Sequence, config: TrackerConfig, *,
            crops_dir: str | None = None,
            initial_ltm: LongTermMemory | None = None) -> RunResult:
    """Track a sequence once. Per-frame failures are recorded as events and
    the run continues with the previous box.

    ``initial_ltm`` replaces the freshly initialized long-term memory
    (used by the save/reload experiment); its slot 0 must be the same base
    template the first frame produces.
    """
    result = RunResult(sequence_name=seq.name, config=config.as_dict())
    first = read_image(seq.frame_paths[0])
    state = track_init(first, seq.groundtruth[0], config, crops_dir=crops_dir)
    if initial_ltm is not None:
        state.ltm = initial_ltm
        state.next_template_id = 1 + max(t.id for t in initial_ltm.slots)
    # frame 0 is the init frame: the prediction is the init box by definition
    result.boxes.append(state.previous_box)
    result.scores.append(1.0)
    result.sources.append("LT")
    result.det_trace.append(state.ltm.objective_det)
    result.gamma_trace.append(state.stm.diversity(config.gamma_variant))
    result.frame_seconds.append(0.0)

    for path in seq.frame_paths[1:]:
        t0 = time.perf_counter()
        try:
            image = read_image(path)
            pred = track_step(state, image)
        except Exception as exc:  # never abort a benchmark mid-sequence
            warnings.warn(f"{seq.name}: frame {state.frame_index + 1} failed: {exc}")
            state.frame_index += 1
            pred = FramePrediction(
                frame_index=state.frame_index, box=state.previous_box, score=0.0,
                source="LT", stm_reinit=False, det_after=state.ltm.objective_det,
                gamma_after=0.0)
            result.events.append(MemoryEvent(state.frame_index, ERROR_EVENT))
        _record_step(result, pred)
        result.frame_seconds.append(time.perf_counter() - t0)

    result.ious = iou_series(result.boxes, seq.groundtruth)
    result.errors = center_errors(result.boxes, seq.groundtruth)
    result.final_state = state
    return result


# -- deterministic outputs ----------------------------------------------------

def results_payload(result: RunResult) -> dict:
    return {
        "sequence": result.sequence_name,
        "config": result.config,
        "metrics": {
            "auc": result.auc,
            "precision": result.precision,
            "mean_iou": sum(result.ious) / len(result.ious),
            "final_normalized_det": result.final_det,
            "frames": len(result.boxes),
        },
        "events": [e.as_dict() for e in result.events],
        "notes": ("reset-based protocol metrics (EAO, robustness) are "
                  "deliberately not implemented; one-pass evaluation only"),
    }


def write_results_json(result: RunResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(results_payload(result), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trace_csv(result: RunResult, path) -> None:
    with open(path, "w") as fh:
        fh.write("frame,iou,score,det,gamma,source\n")
        for i in range(len(result.boxes)):
            fh.write(f"{i},{result.ious[i]!r},{result.scores[i]!r},"
                     f"{result.det_trace[i]!r},{result.gamma_trace[i]!r},"
                     f"{result.sources[i]}\n")


def write_timing_json(result: RunResult, path) -> None:
    """Wall-clock per frame; deliberately outside results.json so the
    deterministic outputs stay byte-reproducible."""
    steps = result.frame_seconds[1:]
    payload = {
        "frame_seconds": result.frame_seconds,
        "mean_fps": (len(steps) / sum(steps)) if steps and sum(steps) > 0 else None,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def save_run(result: RunResult, out_dir, *, save_memory: bool = False) -> dict:
    """Write results.json / trace.csv / timing.json (and optionally the
    final memory snapshot) under ``out_dir``; returns the path map."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "results": os.path.join(out_dir, "results.json"),
        "trace": os.path.join(out_dir, "trace.csv"),
        "timing": os.path.join(out_dir, "timing.json"),
    }
    write_results_json(result, paths["results"])
    write_trace_csv(result, paths["trace"])
    write_timing_json(result, paths["timing"])
    if save_memory and result.final_state is not None:
        snap = os.path.join(out_dir, "memory")
        save_memory_snapshot(result.final_state.ltm, snap)
        paths["memory"] = snap
    return paths
