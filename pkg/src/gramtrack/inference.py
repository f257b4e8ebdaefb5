"""Per-frame inference: modulation, best-box selection, the short/long-term
switch, and the orchestrated tracking step.

Each frame, every stored template produces an activation map over the
search region. Within the short-term set and the long-term set
separately, modulation multiplies each map by the score-weighted average
of the set, concentrating mass where templates agree, then rescales each
map back to its original peak so scores stay comparable across
templates. The best box per set feeds the switch: the short-term
prediction wins unless it disagrees with the long-term one (IoU below
``th_iou``), in which case the long-term box is used and the short-term
memory is reinitialized from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import BoundingBox, iou
from .errors import DegenerateInputError, DimensionError, ParameterError
from .features import ActivationMap, batch_cross_correlate
from .matcher import (SearchGeometry, TrackState, build_template, clamp_box,
                      locate_peak, search_geometry)
from .memory import Decision, should_consider

SOURCE_ST = "ST"
SOURCE_LT = "LT"


def shift_nonnegative(amap: ActivationMap) -> ActivationMap:
    """Subtract the map's minimum so scores are a non-negative activation.

    Raw correlation scores can be negative; the shift preserves every
    argmax and makes the maps usable as modulation weights.
    """
    scores = amap.scores - amap.scores.min()
    return ActivationMap(scores, template_id=amap.template_id,
                         scale_index=amap.scale_index)


def modulate(maps: list[ActivationMap]) -> list[ActivationMap]:
    """Spatially re-weight each map by the peak-weighted average of all maps.

    Inputs must be same-shape and non-negative. Each output map is
    ``map * average`` rescaled to the input map's peak value, so peaks are
    preserved and only the spatial mass moves. All-zero inputs (weight sum
    zero) pass through unchanged, as does any map whose product with the
    average is identically zero.
    """
    if not maps:
        raise ParameterError("modulate needs at least one activation map")
    shape = maps[0].scores.shape
    for m in maps[1:]:
        if m.scores.shape != shape:
            raise DimensionError(f"map shape mismatch: {m.scores.shape} vs {shape}")
    stack = np.stack([m.scores.astype(np.float64) for m in maps])
    if stack.min() < 0.0:
        raise ParameterError("modulate requires non-negative scores; "
                             "shift maps first (see shift_nonnegative)")
    weights = stack.reshape(len(maps), -1).max(axis=1)
    total = float(weights.sum())
    if total == 0.0:
        return list(maps)
    avg = np.tensordot(weights, stack, axes=(0, 0)) / total
    out = []
    for m, scores in zip(maps, stack):
        peak = float(scores.max())
        prod = scores * avg
        prod_peak = float(prod.max())
        if peak == 0.0 or prod_peak == 0.0:
            out.append(m)
            continue
        rescaled = prod * (peak / prod_peak)
        out.append(ActivationMap(rescaled.astype(m.scores.dtype),
                                 template_id=m.template_id,
                                 scale_index=m.scale_index))
    return out


def best_prediction(maps: list[ActivationMap],
                    geometry: SearchGeometry) -> tuple[BoundingBox, float]:
    """Global best box over all templates and scales.

    Ties resolve to the lowest template id, then the lowest scale index;
    within a map the first row-major peak wins (locate_peak).
    """
    if not maps:
        raise ParameterError("best_prediction needs at least one activation map")
    best = None
    for amap in maps:
        box, score = locate_peak(amap, geometry)
        key = (-score, amap.template_id, amap.scale_index)
        if best is None or key < best[0]:
            best = (key, box, score)
    return best[1], best[2]


def st_lt_switch(st: tuple[BoundingBox, float], lt: tuple[BoundingBox, float],
                 th_iou: float) -> tuple[str, bool]:
    """Choose between the short- and long-term predictions.

    Returns ``("ST", False)`` when the boxes agree (IoU >= th_iou,
    boundary inclusive), otherwise ``("LT", True)``: the long-term box is
    trusted and the short-term memory should be reinitialized from it.
    """
    if iou(st[0], lt[0]) >= th_iou:
        return SOURCE_ST, False
    return SOURCE_LT, True


@dataclass
class FramePrediction:
    """Trace record for one tracking step."""

    frame_index: int
    box: BoundingBox
    score: float
    source: str
    stm_reinit: bool
    det_after: float
    gamma_after: float
    decision: Decision | None = None
    candidate_box: BoundingBox | None = None
    candidate_id: int | None = None


def _correlate_set(templates, view) -> list[ActivationMap]:
    kernels = [t.feature for t in templates]
    ids = [t.id for t in templates]
    return batch_cross_correlate(kernels, view.feature, template_ids=ids,
                                 scale_index=view.scale_index)


def track_step(state: TrackState, image) -> FramePrediction:
    """Advance one frame: correlate, modulate, select, switch, update memory.

    Mutates ``state`` (previous box, frame index, memories) and returns the
    per-frame trace. Deterministic for identical state and frame.
    """
    cfg = state.config
    frame_index = state.frame_index + 1
    views = state.encoder.search_views(image, frame_index, state.previous_box,
                                       tuple(cfg.scales))
    geometry = search_geometry(state, views)

    lt_maps: list[ActivationMap] = []
    st_maps: list[ActivationMap] = []
    for view in views:
        lt_set = [shift_nonnegative(m) for m in _correlate_set(state.ltm.slots, view)]
        if cfg.use_modulation and len(lt_set) > 1:
            lt_set = modulate(lt_set)
        lt_maps.extend(lt_set)
        if cfg.use_stm and len(state.stm):
            st_set = [shift_nonnegative(m) for m in _correlate_set(state.stm.templates, view)]
            if cfg.use_modulation and len(st_set) > 1:
                st_set = modulate(st_set)
            st_maps.extend(st_set)

    lt_pred = best_prediction(lt_maps, geometry)
    if st_maps:
        st_pred = best_prediction(st_maps, geometry)
        source, reinit = st_lt_switch(st_pred, lt_pred, cfg.th_iou)
    else:
        st_pred, source, reinit = lt_pred, SOURCE_LT, False

    box_raw, score = st_pred if source == SOURCE_ST else lt_pred
    final_box = clamp_box(box_raw, state.image_size)

    reinit_done = False
    seed = None
    if reinit and cfg.use_stm:
        lt_box = clamp_box(lt_pred[0], state.image_size)
        try:
            seed = build_template(state.encoder, cfg, image, frame_index, lt_box,
                                  state.next_template_id, state.crops_dir)
        except DegenerateInputError:
            seed = None  # textureless reinit crop: keep the current STM
        if seed is not None:
            state.next_template_id += 1
            state.stm.reinitialize(seed)
            reinit_done = True

    decision = None
    candidate = None
    if should_consider(frame_index, cfg.dilation):
        # the reinit seed was captured at the same (LT) box; reuse it so one
        # frame yields one template
        if reinit_done and source == SOURCE_LT:
            candidate = seed
        else:
            try:
                candidate = build_template(state.encoder, cfg, image, frame_index,
                                           final_box, state.next_template_id,
                                           state.crops_dir)
                state.next_template_id += 1
            except DegenerateInputError:
                candidate = None
        if candidate is not None:
            if cfg.use_stm and candidate is not seed:
                state.stm.push(candidate)
            gamma = state.stm.diversity(cfg.gamma_variant) if cfg.use_stm else 0.0
            decision = state.ltm.consider(candidate, state.bound, gamma)

    state.previous_box = final_box
    state.frame_index = frame_index
    gamma_after = state.stm.diversity(cfg.gamma_variant) if cfg.use_stm else 0.0
    return FramePrediction(
        frame_index=frame_index,
        box=final_box,
        score=float(score),
        source=source,
        stm_reinit=reinit_done,
        det_after=state.ltm.objective_det,
        gamma_after=gamma_after,
        decision=decision,
        candidate_box=candidate.capture_box if candidate is not None else None,
        candidate_id=candidate.id if candidate is not None else None,
    )
