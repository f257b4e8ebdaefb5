"""The diversity-maximizing long-term memory on toy vectors.

Shows the Gram determinant as a volume, the three lower-bound variants,
and how the memory decides to append, replace, or reject candidates.

Run:  python3 demos/02_gram_memory.py
"""

import numpy as np

from gramtrack import (BoundingBox, LongTermMemory, LowerBoundConfig,
                       ShortTermMemory, Template, build_gram, determinant,
                       parallelotope_volume)


def template(vec, tid, frame=0):
    return Template(id=tid, frame_index=frame,
                    feature=np.asarray(vec, float).reshape(1, 1, -1),
                    capture_box=BoundingBox(0, 0, 10, 10))


def unit(*values):
    v = np.asarray(values, float)
    return v / np.linalg.norm(v)


# The Gram determinant of unit vectors is the squared volume they span:
# orthogonal vectors span a unit square, correlated ones a thin sliver.
for angle_deg in (90, 60, 30, 5):
    theta = np.radians(angle_deg)
    g = build_gram([unit(1, 0).reshape(1, 1, 2),
                    unit(np.cos(theta), np.sin(theta)).reshape(1, 1, 2)])
    print(f"angle {angle_deg:2d}°: det = {determinant(g):.4f}, "
          f"volume = {parallelotope_volume(g):.4f} (volume = sin of the angle)")

# A memory with capacity 3 in a 4-dimensional feature space:
base = template(unit(1, 0, 0, 0), tid=0)
mem = LongTermMemory(base, capacity=3)
bound = LowerBoundConfig(mode="static", ell=0.3)

candidates = [
    ("near-duplicate of base", unit(0.99, 0.1, 0, 0)),
    ("diverse, similar enough", unit(0.5, 0.86, 0, 0)),
    ("diverse, new direction", unit(0.5, 0.0, 0.86, 0)),
    ("too dissimilar (drift?)", unit(0.1, 0, 0, 0.99)),
    ("even more volume", unit(0.4, 0.2, 0.2, 0.87)),
]
print("\nofferings to a capacity-3 memory (static bound, ell = 0.3):")
for i, (label, vec) in enumerate(candidates, start=1):
    decision = mem.consider(template(vec, tid=i, frame=10 * i), bound)
    print(f"  {label:28s} -> {decision.kind.value:17s} "
          f"slot={decision.slot} det={mem.current_det:.4f}")

# The short-term FIFO has no gate but reports a diversity measure gamma;
# the dynamic lower bound subtracts it, loosening the guard when the
# recent past was turbulent.
stm = ShortTermMemory(4)
for i in range(4):
    stm.push(template(unit(1, 0.1 * i, 0, 0), tid=100 + i))
print(f"\nSTM of 4 slowly-varying templates: gamma = {stm.diversity():.3f}")
stm.push(template(unit(0, 0, 1, 0), tid=200))
print(f"after one very different push:     gamma = {stm.diversity():.3f}")
