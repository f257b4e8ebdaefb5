"""Template galleries: the long-term memory's crop images at checkpoints,
reconstructed by replaying the run's memory events."""

from __future__ import annotations

import os
import shutil
import warnings

from ..memory import DecisionKind
from .runner import RunResult


def _slots_at(result: RunResult, frame_index: int) -> list[int | None]:
    """Replay events up to ``frame_index``: template id per slot (0 = base)."""
    slots: list[int | None] = [0]
    for event in result.events:
        if event.frame_index > frame_index:
            break
        if event.kind == DecisionKind.APPENDED.value:
            slots.append(event.template_id)
        elif event.kind == DecisionKind.REPLACED.value and event.slot is not None:
            while len(slots) <= event.slot:
                slots.append(None)
            slots[event.slot] = event.template_id
    return slots


def dump_template_gallery(result: RunResult, out_dir,
                          checkpoints: list[int] | None = None) -> list[str]:
    """Copy the stored templates' crop images into per-slot directories,
    one image per checkpoint frame (default: first, middle, last).

    Requires a run recorded with crop saving enabled; missing crops are
    skipped with a warning and the rest is written.
    """
    n = len(result.boxes)
    if checkpoints is None:
        checkpoints = sorted({0, (n - 1) // 2, n - 1})
    if result.final_state is None:
        warnings.warn("run carries no final state; gallery may be incomplete")
    crop_paths: dict[int, str | None] = {}
    crops_dir = None
    if result.final_state is not None:
        crops_dir = result.final_state.crops_dir
        for t in result.final_state.ltm.slots:
            crop_paths[t.id] = t.crop_path
        for t in result.final_state.stm.templates:
            crop_paths.setdefault(t.id, t.crop_path)

    def _crop_path(template_id: int) -> str | None:
        # replaced templates leave the state but their crops stay on disk
        # under the deterministic t<id>.png naming
        path = crop_paths.get(template_id)
        if path is None and crops_dir is not None:
            path = os.path.join(crops_dir, f"t{template_id:05d}.png")
        return path

    written = []
    for frame in checkpoints:
        for slot, template_id in enumerate(_slots_at(result, frame)):
            if template_id is None:
                continue
            src = _crop_path(template_id)
            if src is None or not os.path.exists(src):
                warnings.warn(f"no crop image for template {template_id} "
                              f"(slot {slot}, frame {frame}); skipped")
                continue
            slot_dir = os.path.join(str(out_dir), f"slot_{slot:02d}")
            os.makedirs(slot_dir, exist_ok=True)
            dst = os.path.join(slot_dir, f"frame_{frame:05d}.png")
            shutil.copyfile(src, dst)
            written.append(dst)
    return written
