"""Gram matrices of template features and their determinants.

The Gram matrix of n stored features holds every pairwise inner product;
its determinant is the squared n-dimensional volume of the parallelotope
the features span, which is the diversity objective the long-term memory
maximizes. All arithmetic here is float64.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, DimensionError, NumericConsistencyError
from .features import as_feature_tensor

# Determinants this far below zero cannot be rounding on a PSD matrix.
_PSD_TOLERANCE = -1e-9


def feature_rows(features) -> np.ndarray:
    """Stack feature tensors into an (n, D) float64 row matrix."""
    if isinstance(features, np.ndarray) and features.ndim == 2:
        return np.ascontiguousarray(features, dtype=np.float64)
    tensors = [as_feature_tensor(f) for f in features]
    if not tensors:
        raise DimensionError("need at least one feature")
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise DimensionError(f"feature shape mismatch: {t.shape} vs {shape}")
    return np.stack([t.ravel() for t in tensors])


def build_gram(features) -> np.ndarray:
    """Pairwise inner-product matrix of a feature list (or (n, D) row matrix).

    The result is exactly symmetric: the upper triangle is computed and
    mirrored.
    """
    rows = feature_rows(features)
    g = rows @ rows.T
    upper = np.triu(g)
    return upper + np.triu(g, 1).T


def _as_square(gram) -> np.ndarray:
    g = np.asarray(gram, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 1:
        raise DimensionError(f"Gram matrix must be square, got {g.shape}")
    return g


def determinant(gram) -> float:
    """Determinant via LU factorization with partial pivoting (float64)."""
    return float(np.linalg.det(_as_square(gram)))


def normalized_determinant(gram) -> float:
    """det(G / G11): the determinant after dividing the matrix by its first
    diagonal entry, so the result is invariant to uniform feature scaling.

    With unit-norm features G11 = 1 and this equals det(G).
    """
    g = _as_square(gram)
    g11 = float(g[0, 0])
    if g11 <= 0.0:
        raise DegenerateInputError(f"G11 must be positive, got {g11}")
    return float(np.linalg.det(g / g11))


def substitute_and_det(gram, features, candidate, slot: int) -> float:
    """Determinant of the Gram matrix with row/column ``slot`` recomputed
    against ``candidate``. Does not mutate inputs.

    Recomputes the full determinant rather than a rank-one update: n is
    small and full recomputation avoids update-formula instability.
    """
    g = _as_square(gram)
    rows = feature_rows(features)
    n = g.shape[0]
    if rows.shape[0] != n:
        raise DimensionError(f"{rows.shape[0]} features for a {n}x{n} Gram matrix")
    if not 0 <= slot < n:
        raise IndexError(f"slot {slot} out of range for {n} slots")
    cand = as_feature_tensor(candidate).ravel()
    if cand.shape[0] != rows.shape[1]:
        raise DimensionError(
            f"candidate size {cand.shape[0]} vs feature size {rows.shape[1]}")
    sims = rows @ cand
    sims[slot] = float(np.dot(cand, cand))
    sub = g.copy()
    sub[slot, :] = sims
    sub[:, slot] = sims
    return float(np.linalg.det(sub))


def parallelotope_volume(gram) -> float:
    """sqrt of the Gram determinant: the n-dimensional parallelotope volume.

    Small negative determinants (>= -1e-9) are clamped to zero; anything
    more negative indicates a non-PSD matrix and raises.
    """
    det = determinant(gram)
    if det < _PSD_TOLERANCE:
        raise NumericConsistencyError(
            f"Gram determinant {det} is too negative for a PSD matrix")
    return float(np.sqrt(max(det, 0.0)))
