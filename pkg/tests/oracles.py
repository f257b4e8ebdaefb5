"""Independent reference implementations the tests check against.

Everything here is deliberately naive: cofactor expansion for
determinants, an explicit python sliding loop for correlation, and
exhaustive rebuild-from-scratch searches for memory decisions. None of it
shares code with the package's own numeric paths.
"""

import numpy as np


def cofactor_determinant(matrix) -> float:
    """Determinant by recursive cofactor expansion along the first row."""
    m = np.asarray(matrix, dtype=np.float64)
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    if n == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += ((-1.0) ** j) * float(m[0, j]) * cofactor_determinant(minor)
    return total


def sliding_correlation(kernel, search) -> np.ndarray:
    """Valid-mode cross-correlation by explicit python loops."""
    k = np.asarray(kernel, dtype=np.float64)
    s = np.asarray(search, dtype=np.float64)
    kh, kw = k.shape[-2:]
    oh = s.shape[-2] - kh + 1
    ow = s.shape[-1] - kw + 1
    out = np.empty((oh, ow))
    for r in range(oh):
        for c in range(ow):
            out[r, c] = float(np.sum(k * s[..., r:r + kh, c:c + kw]))
    return out


def rebuild_substitution_det(features, candidate, slot) -> float:
    """Determinant after substitution, via a full Gram rebuild and cofactor
    expansion on the substituted feature list."""
    rows = [np.asarray(f, dtype=np.float64).ravel() for f in features]
    rows[slot] = np.asarray(candidate, dtype=np.float64).ravel()
    n = len(rows)
    gram = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            gram[i, j] = float(np.dot(rows[i], rows[j]))
    return cofactor_determinant(gram)


def exhaustive_best_slot(features, candidate) -> tuple[int, float]:
    """Best non-base replacement slot by rebuilding every alternative;
    ties resolve to the lowest slot index."""
    best_slot, best_det = -1, -np.inf
    for slot in range(1, len(features)):
        det = rebuild_substitution_det(features, candidate, slot)
        if det > best_det:
            best_slot, best_det = slot, det
    return best_slot, best_det


def gamma_formula(gram, variant="as_written") -> float:
    """STM diversity evaluated directly from its definition."""
    g = np.asarray(gram, dtype=np.float64)
    n = g.shape[0]
    if n < 2:
        return 0.0
    gmax = float(g.max())
    if gmax <= 0.0:
        return 0.0
    upper = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            upper += float(g[i, j])
    denom = n * (n + 1) if variant == "as_written" else n * (n - 1)
    gamma = 1.0 - (2.0 / (denom * gmax)) * upper
    return min(max(gamma, 0.0), 1.0)


def auc_by_counting(ious) -> float:
    """Success AUC by explicit threshold counting."""
    thresholds = [i / 100.0 for i in range(101)]
    rates = []
    for t in thresholds:
        rates.append(sum(1 for v in ious if v > t) / len(ious))
    return sum(rates) / len(rates)


def random_unit_features(rng, n, dim) -> list[np.ndarray]:
    """Unit-norm feature tensors of shape (1, 1, dim)."""
    feats = []
    for _ in range(n):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        feats.append(v.reshape(1, 1, dim))
    return feats
