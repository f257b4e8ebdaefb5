"""Deterministic synthetic sequences in the on-disk dataset layout.

A spec declares the canvas, a seeded target texture, a trajectory, and
timed appearance events (illumination shift, 90-degree rotation, an
occlusion band, texture swap). Frames are written as PNG under
``<out>/<name>/img/`` with an exact ``groundtruth_rect.txt``; the same
spec and seed always produce byte-identical files. An optional distractor
pastes a second patch whose zero-mean correlation against the target is
controlled, which is what a drift-guard stress scene needs.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from ..boxes import BoundingBox
from ..errors import ParameterError
from .dataset import Sequence

_EVENT_KINDS = ("illumination_shift", "rotation_90", "occlusion_band", "texture_swap")


@dataclass
class SyntheticSpec:
    name: str
    frames: int
    canvas: tuple[int, int] = (240, 320)          # (h, w)
    target_size: tuple[int, int] = (40, 40)       # (h, w)
    texture_seed: int = 0
    trajectory: dict = field(default_factory=lambda: {"kind": "static"})
    events: list[dict] = field(default_factory=list)
    distractor: dict | None = None
    background_seed: int = 9000
    background_noise: float = 6.0
    background_blur: float = 2.0

    def validate(self) -> None:
        if self.frames < 2:
            raise ParameterError(f"{self.name}: need at least 2 frames")
        ch, cw = self.canvas
        th, tw = self.target_size
        if th < 8 or tw < 8:
            raise ParameterError(f"{self.name}: target must be at least 8x8")
        if ch < th + 16 or cw < tw + 16:
            raise ParameterError(f"{self.name}: canvas too small for the target")
        kind = self.trajectory.get("kind")
        if kind not in ("static", "linear", "sine"):
            raise ParameterError(f"{self.name}: unknown trajectory kind {kind!r}")
        for ev in self.events:
            if ev.get("kind") not in _EVENT_KINDS:
                raise ParameterError(f"{self.name}: unknown event kind {ev.get('kind')!r}")
            if not 0 <= int(ev.get("frame", -1)) < self.frames:
                raise ParameterError(f"{self.name}: event frame out of range: {ev}")
            if ev.get("reference", "current") not in ("current", "original"):
                raise ParameterError(f"{self.name}: texture_swap reference must be "
                                     f"'current' or 'original': {ev}")


def _texture(rng: np.random.Generator, size: tuple[int, int],
             low: int = 40, high: int = 216) -> np.ndarray:
    t = rng.integers(low, high, size=size).astype(np.float64)
    return cv2.GaussianBlur(t, (0, 0), sigmaX=1.1)


def _background(spec: SyntheticSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.background_seed)
    h, w = spec.canvas
    noise = rng.standard_normal((h, w)) * spec.background_noise
    if spec.background_blur > 0:
        noise = cv2.GaussianBlur(noise, (0, 0), sigmaX=spec.background_blur)
    return 110.0 + noise


def _distractor_texture(target: np.ndarray, similarity: float,
                        seed: int) -> np.ndarray:
    """A patch whose zero-mean cosine similarity to the target is about
    ``similarity`` (before uint8 quantization)."""
    if not 0.0 <= similarity <= 1.0:
        raise ParameterError(f"distractor similarity must be in [0, 1], got {similarity}")
    rng = np.random.default_rng(seed)
    t0 = target - target.mean()
    tn = t0 / np.linalg.norm(t0)
    other = _texture(rng, target.shape)
    o0 = other - other.mean()
    o0 -= float(np.sum(o0 * tn)) * tn
    on = o0 / np.linalg.norm(o0)
    unit = similarity * tn + math.sqrt(max(1.0 - similarity ** 2, 0.0)) * on
    scale = float(np.std(t0))
    return unit / max(float(np.std(unit)), 1e-12) * scale + float(target.mean())


def _positions(spec: SyntheticSpec) -> list[tuple[int, int]]:
    """Integer top-left target positions per frame, clamped inside the canvas."""
    ch, cw = spec.canvas
    th, tw = spec.target_size
    traj = spec.trajectory
    kind = traj["kind"]
    x0, y0 = traj.get("start", ((cw - tw) // 2, (ch - th) // 2))
    out = []
    for t in range(spec.frames):
        if kind == "static":
            x, y = x0, y0
        elif kind == "linear":
            vx, vy = traj.get("velocity", (2.0, 0.0))
            x, y = x0 + vx * t, y0 + vy * t
        else:  # sine
            ax = traj.get("amplitude", (60.0, 25.0))
            period = traj.get("period", 80.0)
            phase = 2.0 * math.pi * t / period
            x = x0 + ax[0] * math.sin(phase)
            y = y0 + ax[1] * math.sin(2.0 * phase)
        xi = int(round(min(max(x, 0), cw - tw)))
        yi = int(round(min(max(y, 0), ch - th)))
        out.append((xi, yi))
    return out


def _render_frames(spec: SyntheticSpec):
    th, tw = spec.target_size
    texture = _texture(np.random.default_rng(spec.texture_seed), (th, tw))
    background = _background(spec)
    positions = _positions(spec)

    dis_texture = None
    dis_positions = None
    if spec.distractor is not None:
        dis_texture = _distractor_texture(
            texture,
            float(spec.distractor.get("similarity", 0.4)),
            int(spec.distractor.get("seed", spec.texture_seed + 77)))
        dis_spec = SyntheticSpec(
            name=spec.name + "-distractor", frames=spec.frames, canvas=spec.canvas,
            target_size=spec.target_size,
            trajectory=spec.distractor.get("trajectory", {"kind": "static"}))
        dis_positions = _positions(dis_spec)

    events = sorted(spec.events, key=lambda e: int(e["frame"]))
    original = texture.copy()
    illumination = 0.0
    morph = None   # (start_texture, end_texture, start_frame, duration)
    frames, boxes = [], []
    for t in range(spec.frames):
        for ev in events:
            if int(ev["frame"]) == t:
                kind = ev["kind"]
                if kind == "illumination_shift":
                    illumination += float(ev.get("amount", 40.0))
                elif kind == "rotation_90":
                    texture = np.rot90(texture).copy()
                elif kind == "texture_swap":
                    blend = float(ev.get("blend", 1.0))
                    src = original if ev.get("reference") == "original" else texture
                    new = _texture(np.random.default_rng(
                        int(ev.get("seed", spec.texture_seed + 31 + t))), texture.shape)
                    end = (1.0 - blend) * src + blend * new
                    duration = int(ev.get("duration", 0))
                    if duration > 1:
                        morph = (texture.copy(), end, t, duration)
                    else:
                        texture = end
        if morph is not None:
            start, end, f0, duration = morph
            ramp = min((t - f0 + 1) / duration, 1.0)
            texture = start + (end - start) * ramp
            if ramp >= 1.0:
                morph = None

        canvas = background.copy()
        if dis_texture is not None:
            dx, dy = dis_positions[t]
            canvas[dy:dy + th, dx:dx + tw] = dis_texture
        x, y = positions[t]
        canvas[y:y + th, x:x + tw] = texture

        for ev in events:
            if ev["kind"] == "occlusion_band":
                start = int(ev["frame"])
                duration = int(ev.get("duration", 10))
                if start <= t < start + duration:
                    thickness = int(ev.get("thickness", th // 2))
                    cy = y + th // 2
                    b0 = max(cy - thickness // 2, 0)
                    canvas[b0:b0 + thickness, :] = float(ev.get("value", 110.0))

        canvas = np.clip(canvas + illumination, 0.0, 255.0)
        frame = np.repeat(canvas.astype(np.uint8)[:, :, None], 3, axis=2)
        frames.append(frame)
        boxes.append(BoundingBox(float(x), float(y), float(tw), float(th)))
    return frames, boxes


def generate_synthetic(spec: SyntheticSpec, out_root) -> Sequence:
    """Render a spec to ``<out_root>/<name>/`` and return the Sequence.

    Ground-truth lines use the 1-based on-disk convention so the written
    directory reloads to the exact boxes returned here.
    """
    spec.validate()
    frames, boxes = _render_frames(spec)
    seq_dir = os.path.join(str(out_root), spec.name)
    img_dir = os.path.join(seq_dir, "img")
    os.makedirs(img_dir, exist_ok=True)
    paths = []
    for i, frame in enumerate(frames):
        path = os.path.join(img_dir, f"{i:04d}.png")
        cv2.imwrite(path, frame[..., ::-1])
        paths.append(path)
    with open(os.path.join(seq_dir, "groundtruth_rect.txt"), "w") as fh:
        for b in boxes:
            fh.write(f"{b.x + 1:.2f},{b.y + 1:.2f},{b.w:.2f},{b.h:.2f}\n")
    return Sequence(name=spec.name, frame_paths=paths, groundtruth=boxes)


# -- scene presets -----------------------------------------------------------

def poc_scene(seed: int = 0) -> SyntheticSpec:
    """200 frames, smooth motion, appearance variations paced so that every
    memory-update frame sees a distinct look: the scene for the save/reload
    determinant-convergence experiment.

    Variations reference the original texture (not a random walk) so
    candidates stay within the drift guard's reach of the base template.
    """
    events = [{"kind": "texture_swap", "frame": f, "blend": 0.45,
               "seed": seed + 1 + i, "reference": "original"}
              for i, f in enumerate((12, 22, 32, 42, 52, 62, 96, 148))]
    events.insert(6, {"kind": "illumination_shift", "frame": 80, "amount": 25.0})
    return SyntheticSpec(
        name="poc-scene",
        frames=200,
        texture_seed=seed,
        background_seed=seed + 9000,
        trajectory={"kind": "sine", "amplitude": (70.0, 20.0), "period": 130.0},
        events=events,
    )


def drift_scene(seed: int = 0) -> SyntheticSpec:
    """A confusable distractor crosses while the target is occluded; built
    to capture a single-template matcher."""
    return SyntheticSpec(
        name="drift-scene",
        frames=150,
        texture_seed=seed,
        background_seed=seed + 9000,
        trajectory={"kind": "linear", "start": (30, 100), "velocity": (1.2, 0.0)},
        events=[
            {"kind": "illumination_shift", "frame": 30, "amount": 18.0},
            {"kind": "occlusion_band", "frame": 62, "duration": 26,
             "thickness": 34, "value": 110.0},
        ],
        distractor={
            "similarity": 0.35,
            "seed": seed + 77,
            "trajectory": {"kind": "linear", "start": (118, 60), "velocity": (0.0, 1.0)},
        },
    )


def appearance_suite(seed: int = 0) -> list[SyntheticSpec]:
    """Six sequences over textured clutter, each with at least one gradual
    appearance change (texture morph, illumination); three add a distractor
    resembling the target's original look. Used for the memory-vs-baseline
    and ablation comparisons: a single stale template loses its lock as the
    target morphs away, while an adapting template store rides the change.
    """
    clutter = dict(background_noise=40.0, background_blur=1.2)
    specs = []
    specs.append(SyntheticSpec(
        name="morph-distractor-a",
        frames=200, texture_seed=seed + 10, background_seed=seed + 9010, **clutter,
        trajectory={"kind": "linear", "start": (30, 60), "velocity": (1.6, 0.4)},
        events=[{"kind": "texture_swap", "frame": 45, "blend": 0.95,
                 "duration": 50, "seed": seed + 11}],
        distractor={"similarity": 0.6, "seed": seed + 12,
                    "trajectory": {"kind": "linear", "start": (60, 170),
                                   "velocity": (1.6, -0.35)}},
    ))
    specs.append(SyntheticSpec(
        name="morph-distractor-b",
        frames=200, texture_seed=seed + 20, background_seed=seed + 9020, **clutter,
        trajectory={"kind": "sine", "amplitude": (65.0, 20.0), "period": 120.0},
        events=[{"kind": "texture_swap", "frame": 55, "blend": 0.9,
                 "duration": 45, "seed": seed + 21}],
        distractor={"similarity": 0.6, "seed": seed + 22,
                    "trajectory": {"kind": "linear", "start": (240, 160),
                                   "velocity": (-1.2, -0.3)}},
    ))
    specs.append(SyntheticSpec(
        name="morph-long",
        frames=200, texture_seed=seed + 30, background_seed=seed + 9030, **clutter,
        trajectory={"kind": "linear", "start": (30, 70), "velocity": (1.8, 0.5)},
        events=[{"kind": "texture_swap", "frame": 50, "blend": 1.0,
                 "duration": 40, "seed": seed + 31}],
    ))
    specs.append(SyntheticSpec(
        name="morph-illum",
        frames=190, texture_seed=seed + 40, background_seed=seed + 9040, **clutter,
        trajectory={"kind": "linear", "start": (30, 120), "velocity": (1.5, -0.4)},
        events=[{"kind": "texture_swap", "frame": 40, "blend": 0.9,
                 "duration": 35, "seed": seed + 41},
                {"kind": "illumination_shift", "frame": 120, "amount": 45.0}],
    ))
    specs.append(SyntheticSpec(
        name="morph-two-stage",
        frames=210, texture_seed=seed + 50, background_seed=seed + 9050, **clutter,
        trajectory={"kind": "sine", "amplitude": (60.0, 18.0), "period": 130.0},
        events=[{"kind": "texture_swap", "frame": 45, "blend": 0.9,
                 "duration": 40, "seed": seed + 51},
                {"kind": "texture_swap", "frame": 130, "blend": 0.9,
                 "duration": 40, "seed": seed + 52, "reference": "original"}],
    ))
    specs.append(SyntheticSpec(
        name="morph-distractor-c",
        frames=190, texture_seed=seed + 60, background_seed=seed + 9060, **clutter,
        trajectory={"kind": "linear", "start": (30, 140), "velocity": (1.5, -0.45)},
        events=[{"kind": "texture_swap", "frame": 48, "blend": 0.95,
                 "duration": 50, "seed": seed + 61}],
        distractor={"similarity": 0.6, "seed": seed + 62,
                    "trajectory": {"kind": "linear", "start": (250, 40),
                                   "velocity": (-1.3, 0.4)}},
    ))
    return specs
