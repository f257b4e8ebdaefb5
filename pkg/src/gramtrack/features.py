"""Inner-product feature space: tensors, correlation, windows, normalization.

A feature tensor is a dense ``(channels, height, width)`` float64 array.
Every similarity in the package is an inner product in this space: the
full-overlap similarity of two same-shape tensors is their flattened dot
product, and sliding a kernel over a larger search tensor (valid-mode
cross-correlation, summed over channels) produces an activation map.

The correlation path runs in float32 via FFTs for speed; it agrees with
direct float64 evaluation to about 1e-5 relative error, which is the
documented tolerance for everything downstream of an activation map. The
memory / determinant path (dot products, Gram matrices) stays in float64.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from .errors import DegenerateInputError, DimensionError, ParameterError

# float32 keeps the batched FFT working set inside cache; tolerance 1e-5.
CORRELATION_DTYPE = np.float32

# MAC count under which a sliding dot product beats the FFT round trip.
_DIRECT_COST_LIMIT = 262_144

_FFT_WORKERS = min(2, os.cpu_count() or 1)


def as_feature_tensor(data, *, copy: bool = False) -> np.ndarray:
    """Validate and return ``data`` as a (C, H, W) float64 feature tensor.

    Raises DimensionError for wrong rank or non-positive dims, and
    DegenerateInputError if any value is NaN/Inf.
    """
    arr = np.array(data, dtype=np.float64, copy=copy, order="C") if copy else \
        np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise DimensionError(f"feature tensor must be (C, H, W), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise DimensionError(f"feature tensor dims must be positive, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise DegenerateInputError("feature tensor contains NaN or Inf")
    return arr


def inner_product(a, b) -> float:
    """Full-overlap similarity of two same-shape tensors: sum(a * b).

    Symmetric in its arguments; float64 accumulation.
    """
    ta, tb = as_feature_tensor(a), as_feature_tensor(b)
    if ta.shape != tb.shape:
        raise DimensionError(f"shape mismatch: {ta.shape} vs {tb.shape}")
    return float(np.dot(ta.ravel(), tb.ravel()))


def l2_normalize(f) -> np.ndarray:
    """Scale a tensor to unit L2 norm. Raises DegenerateInputError on zero norm."""
    t = as_feature_tensor(f)
    norm = float(np.linalg.norm(t.ravel()))
    if norm == 0.0:
        raise DegenerateInputError("cannot normalize a zero tensor")
    return t / norm


def tapered_cosine_window_1d(length: int, alpha: float) -> np.ndarray:
    """1D tapered cosine (Tukey) window.

    Flat at 1 over the central ``1 - alpha`` fraction, raised-cosine taper
    down to 0 over ``alpha / 2`` of the length at each end. ``alpha = 0``
    is the rectangular window, ``alpha = 1`` the Hann window.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"alpha must be in [0, 1], got {alpha}")
    if length < 1:
        raise ParameterError(f"window length must be >= 1, got {length}")
    if length == 1 or alpha == 0.0:
        return np.ones(length)
    x = np.linspace(0.0, 1.0, length)
    w = np.ones(length)
    lo = x < alpha / 2.0
    hi = x >= 1.0 - alpha / 2.0
    w[lo] = 0.5 * (1.0 + np.cos(2.0 * np.pi / alpha * (x[lo] - alpha / 2.0)))
    w[hi] = 0.5 * (1.0 + np.cos(2.0 * np.pi / alpha * (x[hi] - 1.0 + alpha / 2.0)))
    return w


def tapered_cosine_window(height: int, width: int, alpha: float) -> np.ndarray:
    """2D tapered cosine mask: outer product of two 1D Tukey windows."""
    return np.outer(tapered_cosine_window_1d(height, alpha),
                    tapered_cosine_window_1d(width, alpha))


def apply_mask(f, mask) -> np.ndarray:
    """Multiply a (C, H, W) tensor by a (H, W) mask, broadcast across channels."""
    t = as_feature_tensor(f)
    m = np.asarray(mask, dtype=np.float64)
    if m.ndim != 2 or m.shape != t.shape[1:]:
        raise DimensionError(
            f"mask shape {m.shape} does not match spatial dims {t.shape[1:]}")
    return t * m[None, :, :]


@dataclass
class ActivationMap:
    """2D similarity response of one template kernel over a search region."""

    scores: np.ndarray
    template_id: int = 0
    scale_index: int = 0

    def __post_init__(self):
        self.scores = np.asarray(self.scores)
        if self.scores.ndim != 2 or min(self.scores.shape) < 1:
            raise DimensionError(f"activation map must be 2D, got {self.scores.shape}")
        if not np.isfinite(self.scores).all():
            raise DegenerateInputError("activation map contains NaN or Inf")

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]

    def peak(self) -> tuple[float, tuple[int, int]]:
        """Maximum score and its first (row-major) location."""
        idx = int(np.argmax(self.scores))
        r, c = divmod(idx, self.scores.shape[1])
        return float(self.scores[r, c]), (r, c)


def _check_correlation_shapes(kshape, sshape):
    if kshape[0] != sshape[0]:
        raise DimensionError(
            f"channel mismatch: kernel {kshape[0]} vs search {sshape[0]}")
    if kshape[1] > sshape[1] or kshape[2] > sshape[2]:
        raise DimensionError(
            f"kernel {kshape[1:]} larger than search {sshape[1:]}")


def _resolve_method(kshape, sshape, method: str) -> str:
    if method not in ("auto", "direct", "fft"):
        raise ParameterError(f"unknown correlation method {method!r}")
    if method != "auto":
        return method
    c, kh, kw = kshape
    _, sh, sw = sshape
    macs = (sh - kh + 1) * (sw - kw + 1) * c * kh * kw
    return "direct" if macs <= _DIRECT_COST_LIMIT else "fft"


def _correlate_direct(kernels: np.ndarray, search: np.ndarray) -> np.ndarray:
    # kernels (n, C, kh, kw), search (C, sh, sw) -> (n, oh, ow)
    kh, kw = kernels.shape[-2:]
    windows = np.lib.stride_tricks.sliding_window_view(search, (kh, kw), axis=(1, 2))
    out = np.einsum("nckl,coukl->nou", kernels, windows, optimize=False)
    return out.astype(CORRELATION_DTYPE)


def _correlate_fft(kernels: np.ndarray, search: np.ndarray) -> np.ndarray:
    # Circular correlation with period = search size: the first
    # (sh - kh + 1, sw - kw + 1) entries are wrap-free, so no extra padding.
    n, c, kh, kw = kernels.shape
    sh, sw = search.shape[-2:]
    oh, ow = sh - kh + 1, sw - kw + 1
    k32 = kernels.astype(CORRELATION_DTYPE, copy=False)
    s32 = search.astype(CORRELATION_DTYPE, copy=False)
    kspec = _fft.rfft2(k32, s=(sh, sw), axes=(-2, -1), workers=_FFT_WORKERS)
    sspec = _fft.rfft2(s32, axes=(-2, -1), workers=_FFT_WORKERS)
    np.conjugate(kspec, out=kspec)
    kspec *= sspec
    prod = kspec[:, 0] if c == 1 else kspec.sum(axis=1)
    full = _fft.irfft2(prod, s=(sh, sw), axes=(-2, -1), workers=_FFT_WORKERS)
    return full[:, :oh, :ow]


def _correlate_stack(kernels: np.ndarray, search: np.ndarray, method: str) -> np.ndarray:
    resolved = _resolve_method(kernels.shape[1:], search.shape, method)
    if resolved == "direct":
        return _correlate_direct(kernels, search)
    return _correlate_fft(kernels, search)


def cross_correlate(kernel, search, *, template_id: int = 0, scale_index: int = 0,
                    method: str = "auto") -> ActivationMap:
    """Valid-mode cross-correlation of a kernel over a search tensor.

    Output dims are ``(search.h - kernel.h + 1, search.w - kernel.w + 1)``;
    each cell is the inner product of the kernel with the aligned search
    window, summed over channels. No kernel flip is applied.
    """
    k = as_feature_tensor(kernel)
    s = as_feature_tensor(search)
    _check_correlation_shapes(k.shape, s.shape)
    scores = _correlate_stack(k[None], s, method)[0]
    return ActivationMap(scores, template_id=template_id, scale_index=scale_index)


def batch_cross_correlate(kernels, search, *, template_ids=None, scale_index: int = 0,
                          method: str = "auto") -> list[ActivationMap]:
    """Correlate several same-shape kernels against one search tensor.

    Element-wise identical to sequential :func:`cross_correlate` calls, in
    order; the search transform is shared and the kernel transforms run as
    one stacked FFT, which is what makes multi-template inference cheap.
    """
    tensors = [as_feature_tensor(k) for k in kernels]
    if not tensors:
        raise DimensionError("batch_cross_correlate needs at least one kernel")
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise DimensionError(f"kernel shape mismatch: {t.shape} vs {shape}")
    s = as_feature_tensor(search)
    _check_correlation_shapes(shape, s.shape)
    if template_ids is None:
        template_ids = list(range(len(tensors)))
    elif len(template_ids) != len(tensors):
        raise ParameterError("template_ids length must match kernels")
    stack = _correlate_stack(np.stack(tensors), s, method)
    return [ActivationMap(stack[i], template_id=int(template_ids[i]), scale_index=scale_index)
            for i in range(len(tensors))]
