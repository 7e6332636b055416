"""Command-line interface.

Subcommands mirror the pipeline stages: ingest, train-metric, flows,
graph, resequence, evaluate, serve. Every failure maps to the stable
exit code of its error class (see errors.py); argparse keeps its usual
code 2 for usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import secrets
import sys

import numpy as np

from . import pipeline
from .errors import VideoReseqError
from .graph import graph_summary
from .media_io import (
    flow_filename,
    load_frame_set,
    load_manifest,
    write_embedding_set,
    write_flo,
)
from .metric import TrainConfig, embedding_to_container, train_metric
from .sdpf import SdpfParams


def _add_dataset_args(sp, cache: bool = True):
    sp.add_argument("--manifest", required=True, help="dataset manifest JSON")
    sp.add_argument("--resize", type=int, nargs="?", const=224, default=None,
                    help="resize frames to a square side (224 when bare)")
    if cache:
        sp.add_argument("--cache-dir", default=None,
                        help="cache directory (default: .videoreseq_cache next to the manifest)")
        sp.add_argument("--no-cache", action="store_true",
                        help="disable artifact caching")


def _add_provider_args(sp):
    sp.add_argument("--provider", choices=("learned", "pixel", "external"),
                    default="learned", help="frame embedding provider")
    sp.add_argument("--plain-euclidean", action="store_true",
                    help="skip the learned map; use raw pixel-feature distance")
    sp.add_argument("--feature-side", type=int, default=32)
    sp.add_argument("--train-seed", type=int, default=0)


def _add_flow_args(sp):
    sp.add_argument("--block", type=int, default=8)
    sp.add_argument("--radius", type=int, default=7)


def _add_walk_args(sp):
    sp.add_argument("--start", type=int, required=True, help="start frame index")
    sp.add_argument("--seed", type=int, default=None,
                    help="walk seed (fresh random seed when omitted)")
    sp.add_argument("--temperature", type=float, default=1.0)
    sp.add_argument("--no-cd", action="store_true",
                    help="disable the directional constraint")
    sp.add_argument("--no-ct", action="store_true",
                    help="disable the coherent constraint")
    sp.add_argument("--max-length", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="videoreseq",
        description="Resequence a clip by walking its semantic relation graph.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="load a dataset and print a summary")
    _add_dataset_args(sp, cache=False)

    sp = sub.add_parser("train-metric", help="fit the learned frame metric")
    _add_dataset_args(sp)
    sp.add_argument("--out", required=True, help="output parameter container")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--epochs", type=int, default=60)
    sp.add_argument("--batch-size", type=int, default=8)
    sp.add_argument("--lr", type=float, default=1e-3)
    sp.add_argument("--embed-dim", type=int, default=128)
    sp.add_argument("--feature-side", type=int, default=32)
    sp.add_argument("--triplets-per-frame", type=int, default=50)

    sp = sub.add_parser("flows", help="estimate and write .flo fields")
    _add_dataset_args(sp)
    _add_flow_args(sp)
    sp.add_argument("--out", required=True, help="output directory")

    sp = sub.add_parser("graph", help="build the relation graph and write JSON")
    _add_dataset_args(sp)
    _add_provider_args(sp)
    sp.add_argument("--eta-divisor", choices=("edges", "nodes"), default="edges")
    sp.add_argument("--out", default=None, help="output JSON path")

    sp = sub.add_parser("resequence", help="run one walk and write the sequence")
    _add_dataset_args(sp)
    _add_provider_args(sp)
    _add_flow_args(sp)
    _add_walk_args(sp)
    sp.add_argument("--out", default=None, help="output sequence JSON path")

    sp = sub.add_parser("evaluate", help="score stored sequences against the source")
    _add_dataset_args(sp)
    sp.add_argument("sequences", nargs="+", help="sequence JSON files")
    sp.add_argument("--strategy", choices=("runs", "lcs"), default="runs")
    sp.add_argument("--out", default=None, help="optional JSON report path")

    sp = sub.add_parser("serve", help="serve the HTTP API over a dataset")
    _add_dataset_args(sp)
    _add_provider_args(sp)
    _add_flow_args(sp)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8008)
    sp.add_argument("--ui-dir", default=None,
                    help="optional static directory to mount at /ui")
    return p


def _cache_dir(args) -> str | None:
    if getattr(args, "no_cache", False):
        return None
    if getattr(args, "cache_dir", None):
        return args.cache_dir
    return os.path.join(os.path.dirname(os.path.abspath(args.manifest)),
                        ".videoreseq_cache")


def _pipeline_config(args, sdpf: SdpfParams | None = None) -> pipeline.PipelineConfig:
    provider = getattr(args, "provider", "learned")
    if getattr(args, "plain_euclidean", False):
        provider = "pixel"
    train = TrainConfig(seed=getattr(args, "train_seed", 0),
                        feature_side=getattr(args, "feature_side", 32))
    return pipeline.PipelineConfig(
        manifest_path=args.manifest,
        provider_kind=provider,
        sdpf=sdpf or SdpfParams(),
        train=train,
        block=getattr(args, "block", 8),
        radius=getattr(args, "radius", 7),
        resize=args.resize,
        eta_divisor=getattr(args, "eta_divisor", "edges"),
        cache_dir=_cache_dir(args),
    )


def cmd_ingest(args) -> int:
    manifest = load_manifest(args.manifest)
    frames = load_frame_set(manifest, args.resize)
    print(f"frames: {frames.n}")
    print(f"resolution: {frames.width}x{frames.height}")
    print(f"fps: {manifest.fps}")
    print(f"flows: {manifest.flows or '(none)'}")
    print(f"embeddings: {manifest.embeddings or '(none)'}")
    return 0


def cmd_train_metric(args) -> int:
    manifest = load_manifest(args.manifest)
    frames = load_frame_set(manifest, args.resize)
    cfg = TrainConfig(
        seed=args.seed,
        max_epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        embed_dim=args.embed_dim,
        feature_side=args.feature_side,
        triplets_per_frame=args.triplets_per_frame,
    )
    learned = train_metric(frames, cfg)
    os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
    write_embedding_set(args.out, embedding_to_container(learned))
    print(f"epochs: {learned.epochs_run}")
    print(f"final loss: {learned.final_loss:.6f}")
    print(f"wrote {args.out}")
    return 0


def cmd_flows(args) -> int:
    cfg = _pipeline_config(args)
    cfg = dataclasses.replace(cfg, provider_kind="pixel")  # no metric needed
    artifacts = pipeline.build_pipeline(cfg)
    os.makedirs(args.out, exist_ok=True)
    count = 0
    for f in artifacts.ctx.forward_flows:
        write_flo(os.path.join(args.out, flow_filename(f.src_index, f.dst_index)), f)
        count += 1
    for i, f in enumerate(artifacts.ctx.backward_flows):
        if i == 0:
            continue  # frame 0 has no backward neighbor; its field is derived
        write_flo(os.path.join(args.out, flow_filename(i, i - 1)), f)
        count += 1
    print(f"wrote {count} flow fields to {args.out}")
    return 0


def cmd_graph(args) -> int:
    artifacts = pipeline.build_pipeline(_pipeline_config(args))
    g = artifacts.graph
    summary = graph_summary(g)
    print(f"nodes: {g.n}")
    print(f"eta: {g.eta:.6f}")
    if args.out:
        iu = np.triu_indices(g.n, k=1)
        doc = {
            "n": g.n,
            "eta": g.eta,
            "eta_divisor": g.eta_divisor,
            "weights_upper": [float(w) for w in g.weights[iu]],
            "histogram": summary["histogram"],
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0


def cmd_resequence(args) -> int:
    seed = args.seed if args.seed is not None else secrets.randbelow(2**31)
    sdpf = SdpfParams(
        softmax_temperature=args.temperature,
        max_length=args.max_length,
        seed=seed,
        disable_cd=args.no_cd,
        disable_ct=args.no_ct,
    )
    artifacts = pipeline.build_pipeline(_pipeline_config(args, sdpf))
    seq = pipeline.run_walk(artifacts, args.start)
    record = pipeline.sequence_record(artifacts, seq)
    print("indices:", " ".join(str(i) for i in seq.indices))
    print(f"seed: {seq.seed}")
    print(f"stop reason: {seq.stop_reason}")
    if args.out:
        out_dir = os.path.dirname(os.path.abspath(args.out))
        os.makedirs(out_dir, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(pipeline.dump_record(record))
        print(f"wrote {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _pipeline_config(args)
    cfg = dataclasses.replace(cfg, provider_kind="pixel")  # scores need frames only
    artifacts = pipeline.build_pipeline(cfg)
    rows = []
    for path in args.sequences:
        record = pipeline.load_record(path)
        report = pipeline.evaluate_record(artifacts, record, args.strategy)
        rows.append((os.path.basename(path), report))
    header = f"{'sequence':<28}{'length':>7}{'M_D':>9}{'M_D(src)':>10}{'overlap%':>10}"
    print(header)
    for name, r in rows:
        print(f"{name:<28}{r['length']:>7}{r['m_d']:>9.4f}"
              f"{r['source_m_d']:>10.4f}{r['delta_o']:>10.2f}")
    if len(rows) > 1:
        avg = {
            "length": float(np.mean([r["length"] for _, r in rows])),
            "m_d": float(np.mean([r["m_d"] for _, r in rows])),
            "source_m_d": float(np.mean([r["source_m_d"] for _, r in rows])),
            "delta_o": float(np.mean([r["delta_o"] for _, r in rows])),
        }
        print(f"{'average':<28}{avg['length']:>7.1f}{avg['m_d']:>9.4f}"
              f"{avg['source_m_d']:>10.4f}{avg['delta_o']:>10.2f}")
    if args.out:
        doc = {name: r for name, r in rows}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    artifacts = pipeline.build_pipeline(_pipeline_config(args))
    app = create_app(artifacts, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "train-metric": cmd_train_metric,
    "flows": cmd_flows,
    "graph": cmd_graph,
    "resequence": cmd_resequence,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except VideoReseqError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
