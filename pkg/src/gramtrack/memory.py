"""Long-term and short-term template memories.

The long-term memory (LTM) keeps up to ``K_lt`` templates and accepts a
candidate only when it passes a similarity lower bound against the stored
templates (the drift guard) and, once full, only when swapping it into
some non-base slot strictly increases the Gram determinant, i.e. the
diversity of the store. Slot 0 holds the base template from the first
frame and is never replaced.

The short-term memory (STM) is a small FIFO with no acceptance gate; its
role is to bridge abrupt appearance changes. It also reports a diversity
measure gamma in [0, 1] that the dynamic lower bound uses to relax the
LTM's acceptance threshold when the recent past was turbulent.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .boxes import BoundingBox
from .errors import (DegenerateInputError, DimensionError, FormatError,
                     ParameterError)
from .features import as_feature_tensor, inner_product
from .fts import read_feature_file, write_feature_file
from .gram import build_gram, normalized_determinant, substitute_and_det

# Relative determinant improvement required before a slot swap; filters
# floating-point churn while keeping every accepted swap a strict gain.
GAIN_EPSILON = 1e-6

_SNAPSHOT_MANIFEST = "manifest.json"


@dataclass
class Template:
    """A stored template: masked, normalized feature plus capture metadata."""

    id: int
    frame_index: int
    feature: np.ndarray
    capture_box: BoundingBox
    crop_path: str | None = None

    def __post_init__(self):
        self.feature = as_feature_tensor(self.feature)


class DecisionKind(enum.Enum):
    REJECTED_BOUND = "rejected_bound"
    REJECTED_NO_GAIN = "rejected_no_gain"
    APPENDED = "appended"
    REPLACED = "replaced"


@dataclass(frozen=True)
class Decision:
    """Outcome of offering one candidate to the long-term memory."""

    kind: DecisionKind
    slot: int | None = None

    @property
    def accepted(self) -> bool:
        return self.kind in (DecisionKind.APPENDED, DecisionKind.REPLACED)


@dataclass(frozen=True)
class LowerBoundConfig:
    """Drift-guard variant and its similarity threshold ``ell``.

    ``static``   candidate vs base:        sim(c, base) > ell * G11
    ``dynamic``  static relaxed by gamma:  sim(c, base) > ell * G11 - gamma
    ``ensemble`` candidate vs every slot:  sim(c, slot_i) > ell * Gii for all i
    ``none``     always passes (ablation switch)

    ``ell`` acts as a temperature on self-similarity; under the unit-norm
    convention it lives in (0, 1].
    """

    mode: str = "dynamic"
    ell: float = 0.8

    def __post_init__(self):
        if self.mode not in ("static", "dynamic", "ensemble", "none"):
            raise ParameterError(f"unknown lower-bound mode {self.mode!r}")
        if self.mode != "none" and not 0.0 < self.ell <= 1.0:
            raise ParameterError(f"ell must be in (0, 1], got {self.ell}")


def should_consider(frame_index: int, dilation: int) -> bool:
    """Dilation gate: only every ``dilation``-th frame feeds the memories."""
    if dilation < 1:
        raise ParameterError(f"dilation must be >= 1, got {dilation}")
    return frame_index % dilation == 0


class LongTermMemory:
    """Bounded template store that maximizes Gram-determinant diversity."""

    def __init__(self, base: Template, capacity: int):
        if capacity < 1:
            raise ParameterError(f"capacity must be >= 1, got {capacity}")
        feat = base.feature
        dim = feat.size
        if capacity > dim:
            raise ParameterError(
                f"capacity {capacity} exceeds feature dimensionality {dim}")
        if float(np.dot(feat.ravel(), feat.ravel())) <= 0.0:
            raise DegenerateInputError("base template feature has zero norm")
        self.capacity = capacity
        self.slots: list[Template] = [base]
        self._shape = feat.shape
        self._rows = feat.reshape(1, -1).copy()
        self.gram = build_gram(self._rows)

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def is_full(self) -> bool:
        return len(self.slots) >= self.capacity

    @property
    def base(self) -> Template:
        return self.slots[0]

    @property
    def features(self) -> list[np.ndarray]:
        return [t.feature for t in self.slots]

    @property
    def feature_rows(self) -> np.ndarray:
        return self._rows

    @property
    def current_det(self) -> float:
        """Normalized determinant of the current Gram matrix."""
        return normalized_determinant(self.gram)

    @property
    def objective_det(self) -> float:
        """The diversity objective as traced over a run.

        Determinants of different orders are not comparable, so while free
        slots remain this reports 0 (equivalently: the determinant of the
        full-capacity matrix with unfilled slots holding base duplicates).
        Once the store is full it equals ``current_det`` clamped at zero
        (Gram determinants are non-negative; tiny negatives are rounding),
        and replacements can only increase it.
        """
        if not self.is_full and self.capacity > 1:
            return 0.0
        return max(self.current_det, 0.0)

    def similarities(self, candidate: Template) -> np.ndarray:
        """Inner products of a candidate against every stored template."""
        flat = self._check_candidate(candidate)
        return self._rows @ flat

    # -- mutation ---------------------------------------------------------

    def consider(self, candidate: Template, bound: LowerBoundConfig,
                 gamma: float = 0.0) -> Decision:
        """Offer a candidate; mutate only on acceptance.

        While free slots remain, any candidate passing the lower bound is
        appended. At capacity, the swap that maximizes the determinant is
        taken if it beats the current determinant by more than
        ``GAIN_EPSILON`` relative; ties resolve to the lowest slot index.
        """
        flat = self._check_candidate(candidate)
        if not lower_bound_check(self, candidate, bound, gamma):
            return Decision(DecisionKind.REJECTED_BOUND)
        if not self.is_full:
            slot = len(self.slots)
            self.slots.append(candidate)
            self._rows = np.vstack([self._rows, flat[None]])
            self.gram = build_gram(self._rows)
            return Decision(DecisionKind.APPENDED, slot=slot)
        if len(self.slots) == 1:  # capacity 1: the base is not replaceable
            return Decision(DecisionKind.REJECTED_NO_GAIN)
        # clamp tiny negative rounding so the gain test is a strict increase
        current = max(float(np.linalg.det(self.gram)), 0.0)
        best_slot, best_det = -1, -np.inf
        for slot in range(1, len(self.slots)):
            det = substitute_and_det(self.gram, self._rows, candidate.feature, slot)
            if det > best_det:
                best_slot, best_det = slot, det
        if best_det <= current * (1.0 + GAIN_EPSILON):
            return Decision(DecisionKind.REJECTED_NO_GAIN)
        self.slots[best_slot] = candidate
        self._rows[best_slot] = flat
        self.gram = build_gram(self._rows)
        return Decision(DecisionKind.REPLACED, slot=best_slot)

    def _check_candidate(self, candidate: Template) -> np.ndarray:
        if candidate.feature.shape != self._shape:
            raise DimensionError(
                f"candidate shape {candidate.feature.shape} vs stored {self._shape}")
        return candidate.feature.ravel()


def lower_bound_check(mem: LongTermMemory, candidate: Template,
                      bound: LowerBoundConfig, gamma: float = 0.0) -> bool:
    """Drift-guard predicate; pure, never raises on the similarity values."""
    if bound.mode == "none":
        return True
    sims = mem.similarities(candidate)
    diag = np.diag(mem.gram)
    if bound.mode == "static":
        return bool(sims[0] > bound.ell * diag[0])
    if bound.mode == "dynamic":
        return bool(sims[0] > bound.ell * diag[0] - gamma)
    return bool(np.all(sims > bound.ell * diag))


class ShortTermMemory:
    """FIFO template store with a diversity measure over its Gram matrix."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ParameterError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.queue: list[Template] = []
        self.gram: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.queue)

    @property
    def templates(self) -> list[Template]:
        return list(self.queue)

    def push(self, template: Template) -> None:
        """Append unconditionally, evicting the oldest entry when full."""
        self.queue.append(template)
        if len(self.queue) > self.capacity:
            self.queue.pop(0)
        self._rebuild()

    def reinitialize(self, seed: Template) -> None:
        """Clear the queue and seed it with one template."""
        self.queue = [seed]
        self._rebuild()

    def diversity(self, variant: str = "as_written") -> float:
        """Diversity gamma in [0, 1]; 1 means maximally diverse templates.

        gamma = 1 - (2 / (N (N+1) G_max)) * sum_{i<j} G_ij with G_max the
        maximum Gram entry. ``variant="pair_normalized"`` replaces the
        N (N+1) constant with N (N-1), which maps identical templates to 0.
        Degenerate cases (N < 2 or G_max <= 0) return 0, which makes the
        dynamic lower bound reduce to the static one.
        """
        if variant not in ("as_written", "pair_normalized"):
            raise ParameterError(f"unknown gamma variant {variant!r}")
        n = len(self.queue)
        if n < 2 or self.gram is None:
            return 0.0
        gmax = float(self.gram.max())
        if gmax <= 0.0:
            return 0.0
        upper = float(np.triu(self.gram, 1).sum())
        denom = n * (n + 1) if variant == "as_written" else n * (n - 1)
        gamma = 1.0 - (2.0 / (denom * gmax)) * upper
        return float(min(max(gamma, 0.0), 1.0))

    def _rebuild(self):
        # capacity is tiny; a full rebuild per push is cheaper than bookkeeping
        self.gram = build_gram([t.feature for t in self.queue]) if self.queue else None


# -- snapshot persistence --------------------------------------------------

def save_memory_snapshot(mem: LongTermMemory, directory) -> None:
    """Persist an LTM as one FTS1 file per template plus a JSON manifest."""
    os.makedirs(directory, exist_ok=True)
    entries = []
    for slot, t in enumerate(mem.slots):
        fname = f"slot_{slot:03d}.fts"
        write_feature_file(t.feature, os.path.join(directory, fname), dtype=np.float64)
        entries.append({
            "slot": slot,
            "template_id": int(t.id),
            "frame_index": int(t.frame_index),
            "capture_box": [float(v) for v in t.capture_box.as_tuple()],
            "feature_file": fname,
            "crop_path": t.crop_path,
        })
    manifest = {
        "format": "ltm-snapshot-v1",
        "capacity": mem.capacity,
        "normalized_det": float(mem.current_det),
        "slots": entries,
    }
    with open(os.path.join(directory, _SNAPSHOT_MANIFEST), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_memory_snapshot(directory) -> LongTermMemory:
    """Rebuild an LTM from :func:`save_memory_snapshot` output.

    The Gram matrix and determinant are recomputed from the stored
    features; the manifest's determinant is informational.
    """
    path = os.path.join(directory, _SNAPSHOT_MANIFEST)
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read snapshot manifest {path}: {exc}") from exc
    if manifest.get("format") != "ltm-snapshot-v1":
        raise FormatError(f"{path}: unknown snapshot format {manifest.get('format')!r}")
    entries = sorted(manifest["slots"], key=lambda e: e["slot"])
    if not entries or entries[0]["slot"] != 0:
        raise FormatError(f"{path}: snapshot must contain slot 0")
    templates = []
    for entry in entries:
        feature = read_feature_file(os.path.join(directory, entry["feature_file"]))
        templates.append(Template(
            id=int(entry["template_id"]),
            frame_index=int(entry["frame_index"]),
            feature=np.asarray(feature, dtype=np.float64),
            capture_box=BoundingBox(*entry["capture_box"]),
            crop_path=entry.get("crop_path"),
        ))
    mem = LongTermMemory(templates[0], int(manifest["capacity"]))
    for t in templates[1:]:
        flat = mem._check_candidate(t)
        mem.slots.append(t)
        mem._rows = np.vstack([mem._rows, flat[None]])
    mem.gram = build_gram(mem._rows)
    return mem
