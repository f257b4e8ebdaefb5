"""Benchmark harness walkthrough: metrics, drift statistics, and the
save/reload determinant-convergence experiment.

Run:  python3 demos/04_benchmark_poc.py   (takes a minute or two)
"""

import tempfile

import numpy as np

from gramtrack import TrackerConfig
from gramtrack.bench import (drift_stats, generate_synthetic, poc_experiment,
                             run_ope, single_template_config, success_auc)
from gramtrack.bench.synthetic import drift_scene, poc_scene

config = TrackerConfig()
root = tempfile.mkdtemp(prefix="gramtrack-demo-")

# 1. Success AUC is the mean success rate over 101 overlap thresholds.
print("success_auc of perfect tracking :", round(success_auc([1.0] * 50), 4))
print("success_auc of coin-flip overlap:", round(success_auc([0.9, 0.1] * 25), 4))

# 2. Drift statistics: a scene with a confusable distractor. The ensemble
#    lower bound keeps junk out of the long-term store; without a bound,
#    drifted templates get in.
seq = generate_synthetic(drift_scene(0), root)
for label, cfg in [
        ("ensemble ell=0.5", config.with_overrides(bound_mode="ensemble", ell=0.5)),
        ("no bound        ", config.with_overrides(bound_mode="none"))]:
    result = run_ope(seq, cfg)
    report = drift_stats(result, seq)
    print(f"\n{label}: {report.n_lt_updates} accepted templates, "
          f"{report.n_drifted} drifted, relative drift {report.relative_drift:.1%}")

baseline = run_ope(seq, single_template_config(config))
print(f"single-template baseline on the same scene: "
      f"mean IoU over the last 30 frames = {np.mean(baseline.ious[-30:]):.3f} "
      f"(captured by the distractor)")

# 3. The save/reload loop: persist the long-term memory, re-track with it
#    loaded, and repeat until the determinant stops growing.
seq = generate_synthetic(poc_scene(0), root)
records = poc_experiment(seq, config, max_runs=10)
print(f"\nsave/reload experiment on {seq.name}:")
print(f"{'run':>4} {'norm_det':>12} {'auc':>8}")
for r in records:
    print(f"{r.run:>4} {r.norm_det:>12.6f} {r.auc:>8.4f}")
print("the determinant never decreases across reloads; convergence means the")
print("template store has saturated the diversity reachable on this scene")
