"""Feature-space basics: inner products, sliding correlation, tapered
windows, and masking.

Run:  python3 demos/01_feature_space.py
Writes a small figure to demos/out/feature_space.png.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gramtrack import (apply_mask, cross_correlate, inner_product,
                       l2_normalize, tapered_cosine_window)

rng = np.random.default_rng(0)

# Every similarity in the package is an inner product. For same-shape
# tensors that is just the flattened dot product:
a = rng.standard_normal((1, 8, 8))
b = rng.standard_normal((1, 8, 8))
print(f"inner_product(a, b) = {inner_product(a, b):+.4f}")
print(f"inner_product(b, a) = {inner_product(b, a):+.4f}   (symmetric)")

# Unit-normalized tensors give cosine similarities in [-1, 1]:
an, bn = l2_normalize(a), l2_normalize(b)
print(f"cosine similarity   = {inner_product(an, bn):+.4f}")

# Sliding a kernel over a larger search tensor produces an activation map.
# Paste the kernel into a flat background and watch the peak land exactly
# at the paste location:
search = np.zeros((1, 40, 40))
kernel = rng.standard_normal((1, 9, 9))
search[:, 18:27, 5:14] = kernel
amap = cross_correlate(kernel, search)
peak_value, (row, col) = amap.peak()
print(f"\ncorrelation peak at cell (row={row}, col={col}) -> paste was at (18, 5)")
print(f"peak value {peak_value:.3f} vs kernel self-similarity "
      f"{inner_product(kernel, kernel):.3f}")

# The tapered cosine window flattens template borders before similarity
# computation, de-weighting background pixels at the template edge:
window = tapered_cosine_window(64, 64, alpha=0.25)
masked = apply_mask(np.ones((1, 64, 64)), window)
print(f"\nwindow range [{window.min():.2f}, {window.max():.2f}]; "
      f"masked tensor keeps {masked.sum() / 64 / 64:.1%} of total mass")

os.makedirs(os.path.join(os.path.dirname(__file__), "out"), exist_ok=True)
fig, axes = plt.subplots(1, 3, figsize=(12, 4))
axes[0].imshow(search[0], cmap="gray")
axes[0].set_title("search tensor (kernel pasted)")
axes[1].imshow(amap.scores, cmap="viridis")
axes[1].set_title("activation map")
axes[2].imshow(window, cmap="magma")
axes[2].set_title("tapered cosine window")
for ax in axes:
    ax.set_xticks([]), ax.set_yticks([])
out = os.path.join(os.path.dirname(__file__), "out", "feature_space.png")
fig.tight_layout()
fig.savefig(out, dpi=110)
print(f"\nfigure written to {out}")
