"""Sequence ingestion: OTB-style directories of frames plus a ground-truth
rectangle file."""

from __future__ import annotations

import glob
import os
import re
from dataclasses import dataclass

import cv2
import numpy as np

from ..boxes import BoundingBox
from ..errors import IngestionError

_FRAME_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp")


@dataclass
class Sequence:
    """Ordered frames with one ground-truth box per frame (first = init)."""

    name: str
    frame_paths: list[str]
    groundtruth: list[BoundingBox]

    def __post_init__(self):
        if len(self.frame_paths) != len(self.groundtruth):
            raise IngestionError(
                f"{self.name}: {len(self.frame_paths)} frames vs "
                f"{len(self.groundtruth)} annotations")
        if len(self.frame_paths) < 2:
            raise IngestionError(f"{self.name}: need at least 2 frames")

    def __len__(self) -> int:
        return len(self.frame_paths)


def read_image(path) -> np.ndarray:
    """Load a frame as (H, W, 3) RGB uint8."""
    img = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if img is None:
        raise IngestionError(f"cannot read image {path}")
    return img[..., ::-1].copy()


def _frame_sort_key(path: str):
    stem = os.path.splitext(os.path.basename(path))[0]
    digits = re.findall(r"\d+", stem)
    return (int(digits[-1]) if digits else 0, stem)


def _parse_rect_line(line: str, lineno: int, path: str) -> tuple[float, ...]:
    parts = line.replace(",", " ").split()
    if len(parts) != 4:
        raise IngestionError(f"{path}:{lineno}: expected 4 values, got {len(parts)}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise IngestionError(f"{path}:{lineno}: unparseable value ({exc})") from exc


def load_otb_sequence(directory) -> Sequence:
    """Load ``<dir>/img/*`` frames and ``<dir>/groundtruth_rect.txt`` boxes.

    Rectangle lines are ``x,y,w,h`` (comma or whitespace separated) in
    1-based pixel coordinates, converted to 0-based here. Frame and
    annotation counts are reconciled by truncating to the shorter.
    """
    directory = str(directory)
    img_dir = os.path.join(directory, "img")
    gt_path = os.path.join(directory, "groundtruth_rect.txt")
    if not os.path.isdir(img_dir):
        raise IngestionError(f"missing frame directory {img_dir}")
    if not os.path.isfile(gt_path):
        raise IngestionError(f"missing ground-truth file {gt_path}")
    frames = [p for p in glob.glob(os.path.join(img_dir, "*"))
              if os.path.splitext(p)[1].lower() in _FRAME_EXTENSIONS]
    frames.sort(key=_frame_sort_key)
    if not frames:
        raise IngestionError(f"no frames found under {img_dir}")
    boxes = []
    with open(gt_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            x, y, w, h = _parse_rect_line(line, lineno, gt_path)
            if w <= 0 or h <= 0:
                raise IngestionError(
                    f"{gt_path}:{lineno}: degenerate box for frame {lineno} "
                    f"(w={w}, h={h})")
            boxes.append(BoundingBox(x - 1.0, y - 1.0, w, h))
    if not boxes:
        raise IngestionError(f"{gt_path}: no annotations")
    count = min(len(frames), len(boxes))
    return Sequence(name=os.path.basename(os.path.normpath(directory)),
                    frame_paths=frames[:count], groundtruth=boxes[:count])


def load_dataset(root) -> list[Sequence]:
    """Load every sequence directory under ``root``, sorted by name."""
    root = str(root)
    names = sorted(d for d in os.listdir(root)
                   if os.path.isdir(os.path.join(root, d, "img")))
    if not names:
        raise IngestionError(f"no sequences found under {root}")
    return [load_otb_sequence(os.path.join(root, name)) for name in names]
