"""The template-matching substrate the memory framework plugs onto:
cropping geometry, encoders, multi-scale search views, and peak-to-box
mapping.

Images are ``(H, W, 3)`` RGB or ``(H, W)`` grayscale uint8 arrays. The
built-in encoder is zero-mean grayscale correlation; with the unit-norm
template convention this is the simplest matcher whose similarity is an
inner product. A precomputed encoder ingests per-frame feature maps
exported by any external network (FTS1 files plus ``meta.json``).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import cv2
import numpy as np

from .boxes import BoundingBox
from .config import TrackerConfig
from .errors import (ConfigError, DegenerateInputError, DimensionError,
                     IngestionError, ParameterError)
from .features import ActivationMap, apply_mask, l2_normalize, tapered_cosine_window
from .fts import read_feature_file
from .memory import LongTermMemory, LowerBoundConfig, ShortTermMemory, Template

_LUMA = np.array([0.299, 0.587, 0.114])

_MIN_BOX_SIDE = 4.0

_window_cache: dict[tuple, np.ndarray] = {}


def _cached_window(height: int, width: int, alpha: float) -> np.ndarray:
    key = (height, width, alpha)
    win = _window_cache.get(key)
    if win is None:
        win = tapered_cosine_window(height, width, alpha)
        win.setflags(write=False)
        _window_cache[key] = win
    return win


def _image_size(image) -> tuple[int, int]:
    img = np.asarray(image)
    if img.ndim not in (2, 3) or img.shape[0] < 1 or img.shape[1] < 1:
        raise DimensionError(f"image must be (H, W) or (H, W, 3), got {img.shape}")
    return img.shape[0], img.shape[1]


def clamp_box(box: BoundingBox, image_hw: tuple[int, int]) -> BoundingBox:
    """Clamp a box's center inside the image and its sides to sane limits."""
    h, w = image_hw
    bw = min(max(box.w, min(_MIN_BOX_SIDE, w)), float(w))
    bh = min(max(box.h, min(_MIN_BOX_SIDE, h)), float(h))
    cx, cy = box.center
    cx = min(max(cx, 0.0), w - 1.0)
    cy = min(max(cy, 0.0), h - 1.0)
    return BoundingBox(cx - bw / 2.0, cy - bh / 2.0, bw, bh)


def crop_and_resize(image, box: BoundingBox, pad_factor: float, out_size: int):
    """Square crop centered on the box, edge-replicated out of bounds,
    bilinearly resized to ``out_size``.

    The crop side is ``round(pad_factor * max(w, h))`` pixels. When the
    crop side already equals ``out_size`` the pixels pass through
    untouched.
    """
    if out_size < 1:
        raise ParameterError(f"out_size must be >= 1, got {out_size}")
    if pad_factor < 1.0:
        raise ParameterError(f"pad_factor must be >= 1, got {pad_factor}")
    img = np.asarray(image)
    h, w = _image_size(img)
    cx, cy = box.center
    side = max(1, int(round(pad_factor * max(box.w, box.h))))
    x0 = int(round(cx - side / 2.0))
    y0 = int(round(cy - side / 2.0))
    x1, y1 = x0 + side, y0 + side
    # intersection with the image; force at least one pixel for replication
    ix0, iy0 = min(max(x0, 0), w - 1), min(max(y0, 0), h - 1)
    ix1, iy1 = max(min(x1, w), ix0 + 1), max(min(y1, h), iy0 + 1)
    patch = img[iy0:iy1, ix0:ix1]
    pads = (iy0 - y0, y1 - iy1, ix0 - x0, x1 - ix1)
    if any(p > 0 for p in pads):
        patch = cv2.copyMakeBorder(patch, max(pads[0], 0), max(pads[1], 0),
                                   max(pads[2], 0), max(pads[3], 0),
                                   cv2.BORDER_REPLICATE)
    if patch.shape[0] != out_size or patch.shape[1] != out_size:
        patch = cv2.resize(patch, (out_size, out_size), interpolation=cv2.INTER_LINEAR)
    return patch


@dataclass(frozen=True)
class SearchView:
    """One scale's encoded search region plus the geometry to map a
    response cell back to image pixels."""

    feature: np.ndarray      # (C, sh, sw) float64
    cell_ratio: float        # image pixels per response-map cell
    scale: float
    scale_index: int


@dataclass(frozen=True)
class SearchGeometry:
    """Per-frame geometry shared by every scale's activation map."""

    center: tuple[float, float]
    prev_size: tuple[float, float]
    scales: tuple[float, ...]
    cell_ratios: tuple[float, ...]
    window_influence: float
    scale_penalty: float

    def cell_to_box(self, row: int, col: int, scale_index: int,
                    map_shape: tuple[int, int]) -> BoundingBox:
        ratio = self.cell_ratios[scale_index]
        vh, vw = map_shape
        dx = (col - (vw - 1) / 2.0) * ratio
        dy = (row - (vh - 1) / 2.0) * ratio
        s = self.scales[scale_index]
        bw = self.prev_size[0] * s
        bh = self.prev_size[1] * s
        cx = self.center[0] + dx
        cy = self.center[1] + dy
        return BoundingBox(cx - bw / 2.0, cy - bh / 2.0, bw, bh)


_penalty_cache: dict[tuple[int, int], np.ndarray] = {}


def _penalty_window(height: int, width: int) -> np.ndarray:
    win = _penalty_cache.get((height, width))
    if win is None:
        win = np.outer(np.hanning(height), np.hanning(width))
        win.setflags(write=False)
        _penalty_cache[(height, width)] = win
    return win


def locate_peak(amap: ActivationMap, geometry: SearchGeometry) -> tuple[BoundingBox, float]:
    """Map an activation map's peak back to an image-space box.

    A centered cosine window (weight ``window_influence``) is blended into
    the peak-normalized map before the argmax to damp large jumps; the
    returned score is the map's value at the chosen cell, multiplied by
    ``scale_penalty`` for non-unit scales.
    """
    scores = amap.scores.astype(np.float64)
    peak = float(scores.max())
    wi = geometry.window_influence
    if peak > 0.0:
        blended = (1.0 - wi) * (scores / peak) + wi * _penalty_window(*scores.shape)
    else:
        # nothing to match against; fall back to the centered prior
        blended = _penalty_window(*scores.shape)
    idx = int(np.argmax(blended))
    row, col = divmod(idx, scores.shape[1])
    value = float(scores[row, col])
    if geometry.scales[amap.scale_index] != 1.0:
        value *= geometry.scale_penalty
    box = geometry.cell_to_box(row, col, amap.scale_index, scores.shape)
    return box, value


# -- encoders ---------------------------------------------------------------

class NccEncoder:
    """Zero-mean grayscale encoder: deterministic, training-free.

    Grayscale via luma weights 0.299/0.587/0.114, then zero-mean per
    patch. Constant patches encode to the zero tensor, which downstream
    normalization rejects as degenerate.
    """

    channels = 1

    def __init__(self, config: TrackerConfig):
        self.template_size = config.template_size
        self.search_size = config.search_size
        self.context_factor = config.context_factor

    def encode(self, patch) -> np.ndarray:
        arr = np.asarray(patch, dtype=np.float64)
        if arr.ndim == 3:
            gray = arr @ _LUMA
        elif arr.ndim == 2:
            gray = arr
        else:
            raise DimensionError(f"patch must be 2D or 3D, got shape {arr.shape}")
        gray = gray - gray.mean()
        return gray[None, :, :]

    def template_feature(self, image, frame_index: int, box: BoundingBox):
        patch = crop_and_resize(image, box, 1.0, self.template_size)
        return self.encode(patch), patch

    def search_views(self, image, frame_index: int, box: BoundingBox,
                     scales: tuple[float, ...]) -> list[SearchView]:
        views = []
        base_side = max(box.w, box.h) * self.context_factor
        for i, s in enumerate(scales):
            patch = crop_and_resize(image, box, self.context_factor * s, self.search_size)
            side = max(1, int(round(base_side * s)))
            views.append(SearchView(
                feature=self.encode(patch),
                cell_ratio=side / self.search_size,
                scale=s,
                scale_index=i,
            ))
        return views


class PrecomputedEncoder:
    """Reads per-frame feature maps exported offline.

    Layout: ``<dir>/000000.fts``, ``000001.fts``, ... plus ``meta.json``
    declaring ``stride`` (image pixels per feature cell), ``channels`` and
    ``frame_count``. Cropping happens in feature coordinates; out-of-range
    cells replicate the edge.
    """

    def __init__(self, features_dir: str, context_factor: float = 2.5):
        self.features_dir = features_dir
        self.context_factor = context_factor
        meta_path = os.path.join(features_dir, "meta.json")
        try:
            with open(meta_path) as fh:
                meta = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestionError(f"cannot read {meta_path}: {exc}") from exc
        try:
            self.stride = int(meta["stride"])
            self.channels = int(meta["channels"])
            self.frame_count = int(meta["frame_count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{meta_path} must declare stride/channels/frame_count") from exc
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride}")
        self._cache: tuple[int, np.ndarray] | None = None

    def frame_path(self, frame_index: int) -> str:
        return os.path.join(self.features_dir, f"{frame_index:06d}.fts")

    def frame_feature(self, frame_index: int) -> np.ndarray:
        if self._cache is not None and self._cache[0] == frame_index:
            return self._cache[1]
        path = self.frame_path(frame_index)
        if not os.path.exists(path):
            raise IngestionError(f"missing feature file {path}")
        feat = np.asarray(read_feature_file(path), dtype=np.float64)
        if feat.ndim != 3:
            raise IngestionError(f"{path}: expected a 3D feature map, got {feat.shape}")
        if feat.shape[0] != self.channels:
            raise ConfigError(
                f"{path}: {feat.shape[0]} channels but meta.json declares {self.channels}")
        self._cache = (frame_index, feat)
        return feat

    def region_feature(self, frame_index: int, region: BoundingBox) -> np.ndarray:
        """Crop a pixel-space region from the frame's feature map
        (stride-aware: coordinates and sizes divide by ``stride``)."""
        x0 = int(round(region.x / self.stride))
        y0 = int(round(region.y / self.stride))
        wc = max(1, int(round(region.w / self.stride)))
        hc = max(1, int(round(region.h / self.stride)))
        return self._crop_cells(frame_index, y0, x0, hc, wc)

    def _crop_cells(self, frame_index: int, y0: int, x0: int, hc: int, wc: int) -> np.ndarray:
        feat = self.frame_feature(frame_index)
        rows = np.clip(np.arange(y0, y0 + hc), 0, feat.shape[1] - 1)
        cols = np.clip(np.arange(x0, x0 + wc), 0, feat.shape[2] - 1)
        return feat[:, rows[:, None], cols[None, :]]

    def template_feature(self, image, frame_index: int, box: BoundingBox):
        return self.region_feature(frame_index, box), None

    def search_views(self, image, frame_index: int, box: BoundingBox,
                     scales: tuple[float, ...]) -> list[SearchView]:
        kernel = self.region_feature(frame_index, box)
        kh, kw = kernel.shape[1:]
        margin = max(1, int(round((self.context_factor - 1.0) / 2.0 * max(kh, kw))))
        cx, cy = box.center
        x0 = int(round(cx / self.stride - kw / 2.0)) - margin
        y0 = int(round(cy / self.stride - kh / 2.0)) - margin
        feat = self._crop_cells(frame_index, y0, x0, kh + 2 * margin, kw + 2 * margin)
        return [SearchView(feature=feat, cell_ratio=float(self.stride),
                           scale=1.0, scale_index=0)]


def make_encoder(config: TrackerConfig):
    if config.encoder == "ncc":
        return NccEncoder(config)
    return PrecomputedEncoder(config.features_dir, config.context_factor)


# -- track state --------------------------------------------------------------

@dataclass
class TrackState:
    """Everything one tracking loop mutates; single-writer by contract."""

    config: TrackerConfig
    encoder: object
    image_size: tuple[int, int]
    previous_box: BoundingBox
    ltm: LongTermMemory
    stm: ShortTermMemory
    bound: LowerBoundConfig
    frame_index: int = 0
    next_template_id: int = 1
    crops_dir: str | None = None


def build_template(encoder, config: TrackerConfig, image, frame_index: int,
                   box: BoundingBox, template_id: int,
                   crops_dir: str | None = None) -> Template:
    """Crop, encode, mask, and normalize one template.

    Raises DegenerateInputError for textureless crops (zero feature norm).
    Saves the crop image when a crops directory is given.
    """
    raw, patch = encoder.template_feature(image, frame_index, box)
    if config.use_masking:
        mask = _cached_window(raw.shape[1], raw.shape[2], config.alpha)
        raw = apply_mask(raw, mask)
    feature = l2_normalize(raw) if config.normalize_features else raw
    crop_path = None
    if crops_dir is not None and patch is not None:
        os.makedirs(crops_dir, exist_ok=True)
        crop_path = os.path.join(crops_dir, f"t{template_id:05d}.png")
        bgr = patch[..., ::-1] if patch.ndim == 3 else patch
        cv2.imwrite(crop_path, bgr)
    return Template(id=template_id, frame_index=frame_index, feature=feature,
                    capture_box=box, crop_path=crop_path)


def track_init(image, box: BoundingBox, config: TrackerConfig,
               crops_dir: str | None = None) -> TrackState:
    """Initialize tracking: base template into LTM slot 0 and the STM."""
    hw = _image_size(image)
    start = clamp_box(box, hw)
    encoder = make_encoder(config)
    base = build_template(encoder, config, image, 0, start, template_id=0,
                          crops_dir=crops_dir)
    stm = ShortTermMemory(config.k_st)
    stm.push(base)
    return TrackState(
        config=config,
        encoder=encoder,
        image_size=hw,
        previous_box=start,
        ltm=LongTermMemory(base, config.k_lt),
        stm=stm,
        bound=config.lower_bound(),
        crops_dir=crops_dir,
    )


def search_geometry(state: TrackState, views: list[SearchView]) -> SearchGeometry:
    return SearchGeometry(
        center=state.previous_box.center,
        prev_size=(state.previous_box.w, state.previous_box.h),
        scales=tuple(v.scale for v in views),
        cell_ratios=tuple(v.cell_ratio for v in views),
        window_influence=state.config.window_influence,
        scale_penalty=state.config.scale_penalty,
    )
