"""Track a synthetic sequence end to end and plot the traces.

Generates a 200-frame scene whose target texture morphs away from its
initial look over textured clutter, tracks it with the full system and
with the single-template baseline, and plots IoU plus the determinant
and diversity traces.

Run:  python3 demos/03_tracking_synthetic.py
Writes demos/out/tracking.png and prints the metrics.
"""

import os
import tempfile

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from gramtrack import TrackerConfig
from gramtrack.bench import (generate_synthetic, run_ope,
                             single_template_config)
from gramtrack.bench.synthetic import appearance_suite

scene = appearance_suite(0)[0]          # morphing target + crossing distractor
root = tempfile.mkdtemp(prefix="gramtrack-demo-")
seq = generate_synthetic(scene, root)
print(f"generated {scene.name}: {len(seq)} frames under {root}")

config = TrackerConfig()
full = run_ope(seq, config)
base = run_ope(seq, single_template_config(config))

print(f"\nfull system : auc={full.auc:.4f} precision={full.precision:.4f} "
      f"final det={full.final_det:.5f}")
print(f"baseline    : auc={base.auc:.4f} precision={base.precision:.4f}")
print("\nmemory events (frame, kind, slot):")
for event in full.events:
    if event.kind in ("appended", "replaced"):
        print(f"  {event.frame_index:4d}  {event.kind:9s} slot {event.slot}")
print("\nnote: this scene fills the memory before the morph begins, so the")
print("early templates are near-duplicates and the determinant stays near")
print("zero; the short-term memory does the bridging here. Demo 04 shows a")
print("scene whose captures are diverse and the determinant visibly grows.")

os.makedirs(os.path.join(os.path.dirname(__file__), "out"), exist_ok=True)
fig, axes = plt.subplots(3, 1, figsize=(9, 8), sharex=True)
axes[0].plot(full.ious, label="full system")
axes[0].plot(base.ious, label="single template", alpha=0.7)
axes[0].set_ylabel("IoU vs ground truth")
axes[0].legend(loc="lower left")
axes[1].plot(full.det_trace, color="tab:green")
axes[1].set_ylabel("normalized det")
axes[2].plot(full.gamma_trace, color="tab:purple")
axes[2].set_ylabel("STM diversity")
axes[2].set_xlabel("frame")
for ax in axes:
    ax.grid(alpha=0.3)
out = os.path.join(os.path.dirname(__file__), "out", "tracking.png")
fig.tight_layout()
fig.savefig(out, dpi=110)
print(f"\nfigure written to {out}")
