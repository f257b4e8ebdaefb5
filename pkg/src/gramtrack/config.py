"""Tracker configuration: one flat dataclass covering encoder geometry,
memory sizes, the drift guard, inference knobs, and ablation switches."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

from .errors import ConfigError
from .memory import LowerBoundConfig

_DEFAULT_ELL = {"static": 0.8, "dynamic": 0.8, "ensemble": 0.5, "none": 0.8}


@dataclass(frozen=True)
class TrackerConfig:
    # encoder / search geometry
    encoder: str = "ncc"
    features_dir: str | None = None
    template_size: int = 64
    search_size: int = 160
    context_factor: float = 2.5
    scales: tuple[float, ...] = (0.96, 1.0, 1.04)
    scale_penalty: float = 0.97
    window_influence: float = 0.2
    # template construction
    alpha: float = 0.25
    normalize_features: bool = True
    use_masking: bool = True
    # memories
    k_lt: int = 8
    k_st: int = 4
    bound_mode: str = "dynamic"
    ell: float | None = None
    dilation: int = 10
    gamma_variant: str = "as_written"
    # inference
    th_iou: float = 0.4
    use_modulation: bool = True
    use_stm: bool = True
    # benchmark
    drift_iou: float = 0.3
    seed: int = 0

    def __post_init__(self):
        self.validate()

    @property
    def resolved_ell(self) -> float:
        """Explicit ``ell`` if set, otherwise the per-mode default
        (0.8 static/dynamic, 0.5 ensemble — the all-slots bound tolerates
        much lower thresholds)."""
        if self.ell is not None:
            return self.ell
        return _DEFAULT_ELL[self.bound_mode]

    def lower_bound(self) -> LowerBoundConfig:
        return LowerBoundConfig(mode=self.bound_mode, ell=self.resolved_ell)

    def validate(self) -> None:
        if self.encoder not in ("ncc", "precomputed"):
            raise ConfigError(f"unknown encoder {self.encoder!r}")
        if self.encoder == "precomputed":
            if not self.features_dir:
                raise ConfigError("precomputed encoder requires features_dir")
            if tuple(self.scales) != (1.0,):
                raise ConfigError("precomputed features support single-scale "
                                  "search only (scales=(1.0,))")
        else:
            if self.template_size < 16 or self.search_size < 16:
                raise ConfigError("template_size and search_size must be >= 16")
            if self.template_size >= self.search_size:
                raise ConfigError("template_size must be < search_size")
            ratio = self.search_size / self.template_size
            if abs(self.context_factor - ratio) > 1e-9:
                raise ConfigError(
                    f"context_factor ({self.context_factor}) must equal "
                    f"search_size/template_size ({ratio}); anything else makes "
                    "the kernel and search pixel scales inconsistent")
        if not self.scales or 1.0 not in self.scales:
            raise ConfigError("scales must contain 1.0")
        if list(self.scales) != sorted(self.scales) or min(self.scales) <= 0:
            raise ConfigError("scales must be positive and sorted ascending")
        if not 0.0 < self.scale_penalty <= 1.0:
            raise ConfigError(f"scale_penalty must be in (0, 1], got {self.scale_penalty}")
        if not 0.0 <= self.window_influence <= 1.0:
            raise ConfigError(f"window_influence must be in [0, 1], got {self.window_influence}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.k_lt < 1 or self.k_st < 1:
            raise ConfigError("k_lt and k_st must be >= 1")
        if self.bound_mode not in ("static", "dynamic", "ensemble", "none"):
            raise ConfigError(f"unknown bound mode {self.bound_mode!r}")
        if self.ell is not None and not 0.0 < self.ell <= 1.0:
            raise ConfigError(f"ell must be in (0, 1], got {self.ell}")
        if self.dilation < 1:
            raise ConfigError(f"dilation must be >= 1, got {self.dilation}")
        if self.gamma_variant not in ("as_written", "pair_normalized"):
            raise ConfigError(f"unknown gamma_variant {self.gamma_variant!r}")
        if not 0.0 <= self.th_iou <= 1.0:
            raise ConfigError(f"th_iou must be in [0, 1], got {self.th_iou}")
        if not 0.0 <= self.drift_iou <= 1.0:
            raise ConfigError(f"drift_iou must be in [0, 1], got {self.drift_iou}")

    def with_overrides(self, **kwargs: Any) -> "TrackerConfig":
        return replace(self, **kwargs)

    def as_dict(self) -> dict[str, Any]:
        """JSON-friendly echo of every setting (used in results files)."""
        return {
            "encoder": self.encoder,
            "features_dir": self.features_dir,
            "template_size": self.template_size,
            "search_size": self.search_size,
            "context_factor": self.context_factor,
            "scales": list(self.scales),
            "scale_penalty": self.scale_penalty,
            "window_influence": self.window_influence,
            "alpha": self.alpha,
            "normalize_features": self.normalize_features,
            "use_masking": self.use_masking,
            "k_lt": self.k_lt,
            "k_st": self.k_st,
            "bound_mode": self.bound_mode,
            "ell": self.resolved_ell,
            "dilation": self.dilation,
            "gamma_variant": self.gamma_variant,
            "th_iou": self.th_iou,
            "use_modulation": self.use_modulation,
            "use_stm": self.use_stm,
            "drift_iou": self.drift_iou,
            "seed": self.seed,
        }
