"""Command-line interface.

Subcommands: ``track`` (one sequence), ``bench`` (a dataset), ``poc``
(the save/reload convergence experiment), ``ablate`` (concept toggles),
``synth`` (generate synthetic data), ``gallery`` (template crop dumps).
Every command emits machine-readable JSON under ``--out``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import TrackerConfig
from .errors import GramtrackError
from .bench.dataset import Sequence, load_dataset, load_otb_sequence
from .bench.experiments import (ablation_grid, drift_stats, poc_experiment,
                                single_template_config)
from .bench.gallery import dump_template_gallery
from .bench.runner import run_ope, save_run
from .bench.synthetic import (SyntheticSpec, appearance_suite, drift_scene,
                              generate_synthetic, poc_scene)

_PRESETS = {
    "basic": lambda seed: [SyntheticSpec(
        name="basic", frames=120, texture_seed=seed,
        trajectory={"kind": "linear", "start": (40, 90), "velocity": (1.5, 0.4)})],
    "poc": lambda seed: [poc_scene(seed)],
    "drift": lambda seed: [drift_scene(seed)],
    "suite": lambda seed: appearance_suite(seed),
}


def _add_tracker_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("tracker")
    g.add_argument("--bound", choices=["static", "dynamic", "ensemble", "none"],
                   default="dynamic", help="lower-bound (drift guard) variant")
    g.add_argument("--ell", type=float, default=None,
                   help="lower-bound threshold (default 0.8, ensemble 0.5)")
    g.add_argument("--k-lt", type=int, default=8, help="long-term memory slots")
    g.add_argument("--k-st", type=int, default=4, help="short-term memory slots")
    g.add_argument("--th-iou", type=float, default=0.4,
                   help="short/long-term switch IoU threshold")
    g.add_argument("--alpha", type=float, default=0.25,
                   help="tapered cosine window fraction")
    g.add_argument("--dilation", type=int, default=10,
                   help="frames between memory updates")
    g.add_argument("--encoder", choices=["ncc", "precomputed"], default="ncc")
    g.add_argument("--features-dir", default=None,
                   help="precomputed feature directory (FTS1 files + meta.json)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--no-modulation", action="store_true")
    g.add_argument("--no-masking", action="store_true")
    g.add_argument("--no-stm", action="store_true")


def _config_from_args(args: argparse.Namespace) -> TrackerConfig:
    kwargs = dict(
        encoder=args.encoder,
        features_dir=args.features_dir,
        bound_mode=args.bound,
        ell=args.ell,
        k_lt=args.k_lt,
        k_st=args.k_st,
        th_iou=args.th_iou,
        alpha=args.alpha,
        dilation=args.dilation,
        seed=args.seed,
        use_modulation=not args.no_modulation,
        use_masking=not args.no_masking,
        use_stm=not args.no_stm,
    )
    if args.encoder == "precomputed":
        kwargs["scales"] = (1.0,)
    return TrackerConfig(**kwargs)


def _load_sequences(args: argparse.Namespace) -> list[Sequence]:
    if getattr(args, "sequence_dir", None):
        return [load_otb_sequence(args.sequence_dir)]
    seqs = load_dataset(args.dataset)
    if getattr(args, "sequence", None):
        wanted = [s for s in seqs if s.name == args.sequence]
        if not wanted:
            raise GramtrackError(f"sequence {args.sequence!r} not in {args.dataset}")
        return wanted
    return seqs


def _write_json(payload, path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_track(args) -> int:
    config = _config_from_args(args)
    seq = _load_sequences(args)[0]
    crops = os.path.join(args.out, "crops") if args.save_crops else None
    result = run_ope(seq, config, crops_dir=crops)
    paths = save_run(result, args.out, save_memory=args.save_memory)
    print(f"{seq.name}: auc={result.auc:.4f} precision={result.precision:.4f} "
          f"det={result.final_det:.4g}")
    print(f"results written to {paths['results']}")
    return 0


def _cmd_bench(args) -> int:
    config = _config_from_args(args)
    if args.baseline:
        config = single_template_config(config)
    sequences = _load_sequences(args)
    per_seq = {}
    for seq in sequences:
        result = run_ope(seq, config)
        report = drift_stats(result, seq, config.drift_iou)
        per_seq[seq.name] = {
            "auc": result.auc,
            "precision": result.precision,
            "final_normalized_det": result.final_det,
            "lt_updates": report.n_lt_updates,
            "drifted_templates": report.n_drifted,
            "relative_drift": report.relative_drift,
        }
        save_run(result, os.path.join(args.out, seq.name))
        print(f"{seq.name}: auc={result.auc:.4f} precision={result.precision:.4f}")
    names = sorted(per_seq)
    aggregate = {
        "mean_auc": sum(per_seq[n]["auc"] for n in names) / len(names),
        "mean_precision": sum(per_seq[n]["precision"] for n in names) / len(names),
        "mean_normalized_det": sum(per_seq[n]["final_normalized_det"]
                                   for n in names) / len(names),
        "sequences": len(names),
    }
    _write_json({"config": config.as_dict(), "per_sequence": per_seq,
                 "aggregate": aggregate},
                os.path.join(args.out, "bench.json"))
    print(f"aggregate: auc={aggregate['mean_auc']:.4f} "
          f"precision={aggregate['mean_precision']:.4f}")
    return 0


def _cmd_poc(args) -> int:
    config = _config_from_args(args)
    seq = _load_sequences(args)[0]
    records = poc_experiment(seq, config, args.runs,
                             workdir=os.path.join(args.out, "snapshots"))
    rows = [{"run": r.run, "norm_det": r.norm_det, "auc": r.auc} for r in records]
    _write_json({"config": config.as_dict(), "sequence": seq.name, "runs": rows},
                os.path.join(args.out, "poc.json"))
    print(f"{'run':>4} {'norm_det':>12} {'auc':>8}")
    for r in records:
        print(f"{r.run:>4} {r.norm_det:>12.6f} {r.auc:>8.4f}")
    return 0


def _cmd_ablate(args) -> int:
    config = _config_from_args(args)
    toggled = args.no_modulation or args.no_masking or args.no_stm or args.bound == "none"
    grid = {"toggled": config} if toggled else ablation_grid(config)
    sequences = _load_sequences(args)
    table = {}
    for name, cfg in grid.items():
        aucs = []
        for seq in sequences:
            result = run_ope(seq, cfg)
            aucs.append(result.auc)
        table[name] = {"mean_auc": sum(aucs) / len(aucs),
                       "per_sequence_auc": dict(zip([s.name for s in sequences], aucs))}
        print(f"{name}: mean auc={table[name]['mean_auc']:.4f}")
    _write_json({"config": config.as_dict(), "ablations": table},
                os.path.join(args.out, "ablate.json"))
    return 0


def _cmd_synth(args) -> int:
    if args.spec:
        with open(args.spec) as fh:
            raw = json.load(fh)
        specs = [SyntheticSpec(**raw)] if isinstance(raw, dict) else \
            [SyntheticSpec(**entry) for entry in raw]
    else:
        specs = _PRESETS[args.preset](args.seed)
    for spec in specs:
        seq = generate_synthetic(spec, args.out)
        print(f"wrote {seq.name}: {len(seq)} frames under {args.out}")
    return 0


def _cmd_gallery(args) -> int:
    config = _config_from_args(args)
    seq = _load_sequences(args)[0]
    crops = os.path.join(args.out, "crops")
    result = run_ope(seq, config, crops_dir=crops)
    written = dump_template_gallery(result, os.path.join(args.out, "gallery"),
                                    checkpoints=args.checkpoints)
    save_run(result, args.out)
    print(f"{len(written)} gallery images under {os.path.join(args.out, 'gallery')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramtrack",
        description="Diversity-maximizing template memory on a template matcher")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dataset=True):
        if dataset:
            p.add_argument("--dataset", help="dataset root (sequence directories)")
            p.add_argument("--sequence", help="sequence name inside the dataset")
            p.add_argument("--sequence-dir", help="path to a single sequence directory")
        p.add_argument("--out", required=True, help="output directory")
        _add_tracker_flags(p)

    p = sub.add_parser("track", help="track one sequence")
    common(p)
    p.add_argument("--save-memory", action="store_true",
                   help="persist the final long-term memory snapshot")
    p.add_argument("--save-crops", action="store_true",
                   help="save accepted template crops")
    p.set_defaults(func=_cmd_track)

    p = sub.add_parser("bench", help="run every sequence in a dataset")
    common(p)
    p.add_argument("--baseline", action="store_true",
                   help="single-template matcher (no memory)")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("poc", help="save/reload determinant convergence")
    common(p)
    p.add_argument("--runs", type=int, default=5, help="maximum reload runs")
    p.set_defaults(func=_cmd_poc)

    p = sub.add_parser("ablate", help="concept ablations")
    common(p)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("synth", help="generate synthetic sequences")
    p.add_argument("--preset", choices=sorted(_PRESETS), default="basic")
    p.add_argument("--spec", help="JSON spec file (object or list)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("gallery", help="track and dump template galleries")
    common(p)
    p.add_argument("--checkpoints", type=int, nargs="*", default=None,
                   help="frame indices (default: first, middle, last)")
    p.set_defaults(func=_cmd_gallery)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "dataset", None) is None and \
            getattr(args, "sequence_dir", None) is None and \
            args.command in ("track", "bench", "poc", "ablate", "gallery"):
        parser.error(f"{args.command} requires --dataset or --sequence-dir")
    try:
        return args.func(args)
    except GramtrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
