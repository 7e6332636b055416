"""End-to-end orchestration: manifest to graph, context, and runs.

The CLI and the HTTP service both sit on top of this module. Intermediate
artifacts (learned parameters, per-frame embeddings, flow fields) are
cached on disk keyed by a content hash of the decoded frames plus every
parameter that shapes the artifact, so repeated invocations are cheap and
cache hits cannot change results: everything round-trips at the exact
stored precision.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingPath, UniverseMismatch
from .evaluate import overlap_measure, stability
from .features import (
    ExternalEmbeddingProvider,
    LearnedEmbeddingProvider,
    PixelEmbeddingProvider,
)
from .flow import DEFAULT_BLOCK, DEFAULT_RADIUS, estimate_flow, negate_flow
from .graph import SRG, build_graph
from .media_io import (
    DatasetManifest,
    EmbeddingSet,
    FlowField,
    FrameSet,
    flow_filename,
    load_frame_set,
    load_manifest,
    read_embedding_set,
    read_flo,
    write_embedding_set,
)
from .metric import (
    LearnedEmbedding,
    TrainConfig,
    container_to_embedding,
    embedding_to_container,
    train_metric,
)
from .sdpf import (
    MotionContext,
    MotionDistanceCache,
    SdpfParams,
    SequencePath,
    build_motion_context,
    sdpf_run,
)

PROVIDER_KINDS = ("pixel", "learned", "external")


@dataclass
class PipelineConfig:
    manifest_path: str
    provider_kind: str = "learned"
    sdpf: SdpfParams = field(default_factory=SdpfParams)
    train: TrainConfig = field(default_factory=TrainConfig)
    block: int = DEFAULT_BLOCK
    radius: int = DEFAULT_RADIUS
    resize: int | None = None
    eta_divisor: str = "edges"
    cache_dir: str | None = None


@dataclass
class PipelineArtifacts:
    manifest: DatasetManifest
    config: PipelineConfig
    frame_set: FrameSet
    provider: object
    embeddings: EmbeddingSet
    graph: SRG
    ctx: MotionContext
    pmsm_embedder: object
    dataset_hash: str
    learned: LearnedEmbedding | None = None
    _motion_cache: MotionDistanceCache | None = None

    def motion_cache(self) -> MotionDistanceCache:
        if self._motion_cache is None:
            self._motion_cache = MotionDistanceCache(
                self.ctx, self.pmsm_embedder, self.config.sdpf
            )
        return self._motion_cache


def frames_content_hash(frame_set: FrameSet) -> str:
    h = hashlib.sha256()
    h.update(str(frame_set.frames.shape).encode())
    h.update(frame_set.frames.tobytes())
    return h.hexdigest()


def _key(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x00")
    return h.hexdigest()[:20]


def _train_with_cache(frame_set: FrameSet, cfg: PipelineConfig,
                      dataset_hash: str) -> LearnedEmbedding:
    if cfg.cache_dir is None:
        return train_metric(frame_set, cfg.train)
    key = _key("learned", dataset_hash, dataclasses.astuple(cfg.train))
    path = os.path.join(cfg.cache_dir, f"learned_{key}.vemb")
    if os.path.isfile(path):
        return container_to_embedding(read_embedding_set(path))
    learned = train_metric(frame_set, cfg.train)
    os.makedirs(cfg.cache_dir, exist_ok=True)
    write_embedding_set(path, embedding_to_container(learned))
    return learned


def _embed_with_cache(provider, frame_set: FrameSet, cfg: PipelineConfig,
                      dataset_hash: str, provider_key) -> EmbeddingSet:
    if cfg.cache_dir is None:
        return provider.embed_all(frame_set)
    key = _key("emb", dataset_hash, provider_key)
    path = os.path.join(cfg.cache_dir, f"emb_{key}.vemb")
    if os.path.isfile(path):
        return read_embedding_set(path)
    eset = provider.embed_all(frame_set)
    os.makedirs(cfg.cache_dir, exist_ok=True)
    write_embedding_set(path, eset)
    return eset


def _load_manifest_flows(manifest: DatasetManifest, n: int):
    """Collect .flo files keyed (src, dst) from the manifest's flow dir."""
    found: dict[tuple[int, int], FlowField] = {}
    if manifest.flows is None:
        return found
    flow_dir = manifest.resolve(manifest.flows)
    if not os.path.isdir(flow_dir):
        raise MissingPath(f"flow directory does not resolve: {manifest.flows}")
    for src in range(n):
        for dst in (src + 1, src - 1):
            if 0 <= dst < n:
                path = os.path.join(flow_dir, flow_filename(src, dst))
                if os.path.isfile(path):
                    found[(src, dst)] = read_flo(path, src, dst)
    return found


def _compute_flows(frame_set: FrameSet, cfg: PipelineConfig,
                   manifest: DatasetManifest, dataset_hash: str):
    """Forward flows i->i+1 and backward flows i+1->i, cached as one npz."""
    n = frame_set.n
    provided = _load_manifest_flows(manifest, n)

    cache_path = None
    if cfg.cache_dir is not None:
        key = _key("flows", dataset_hash, cfg.block, cfg.radius,
                   sorted(provided.keys()))
        cache_path = os.path.join(cfg.cache_dir, f"flows_{key}.npz")
        if os.path.isfile(cache_path):
            data = np.load(cache_path)
            forward = [
                FlowField(u=data[f"fu{i}"], v=data[f"fv{i}"],
                          src_index=i, dst_index=i + 1)
                for i in range(n - 1)
            ]
            backward = [
                FlowField(u=data[f"bu{i}"], v=data[f"bv{i}"],
                          src_index=i + 1, dst_index=i)
                for i in range(n - 1)
            ]
            return forward, backward

    frames = frame_set.frames
    forward = []
    for i in range(n - 1):
        f = provided.get((i, i + 1))
        if f is None:
            f = estimate_flow(frames[i], frames[i + 1], cfg.block, cfg.radius,
                              i, i + 1)
        forward.append(f)
    backward = []
    for i in range(n - 1):
        bk = provided.get((i + 1, i))
        if bk is None:
            if provided:
                # A manifest that ships flows gets its backward fields by
                # negation instead of silently mixing in estimated ones.
                bk = negate_flow(forward[i])
            else:
                bk = estimate_flow(frames[i + 1], frames[i], cfg.block,
                                   cfg.radius, i + 1, i)
        backward.append(bk)

    if cache_path is not None:
        os.makedirs(cfg.cache_dir, exist_ok=True)
        arrays = {}
        for i in range(n - 1):
            arrays[f"fu{i}"] = forward[i].u
            arrays[f"fv{i}"] = forward[i].v
            arrays[f"bu{i}"] = backward[i].u
            arrays[f"bv{i}"] = backward[i].v
        np.savez(cache_path, **arrays)
    return forward, backward


def build_pipeline(cfg: PipelineConfig) -> PipelineArtifacts:
    """Load the dataset and build every shared artifact for runs."""
    manifest = load_manifest(cfg.manifest_path)
    frame_set = load_frame_set(manifest, cfg.resize)
    dataset_hash = frames_content_hash(frame_set)

    learned = None
    if cfg.provider_kind == "external":
        if manifest.embeddings is None:
            raise MissingPath("manifest has no 'embeddings' entry for external provider")
        eset = read_embedding_set(manifest.resolve(manifest.embeddings))
        provider = ExternalEmbeddingProvider(eset)
        provider_key = ("external", eset.vectors.shape)
    elif cfg.provider_kind == "learned":
        learned = _train_with_cache(frame_set, cfg, dataset_hash)
        provider = LearnedEmbeddingProvider(
            learned.weight, learned.bias, cfg.train.feature_side
        )
        provider_key = ("learned", _key("w", learned.weight.tobytes(),
                                        learned.bias.tobytes()))
    elif cfg.provider_kind == "pixel":
        provider = PixelEmbeddingProvider(cfg.train.feature_side)
        provider_key = ("pixel", cfg.train.feature_side)
    else:
        raise MissingPath(f"unknown provider kind {cfg.provider_kind!r}")

    embeddings = _embed_with_cache(provider, frame_set, cfg, dataset_hash,
                                   provider_key)
    g = build_graph(embeddings, cfg.eta_divisor)

    forward, backward = _compute_flows(frame_set, cfg, manifest, dataset_hash)
    ctx = build_motion_context(frame_set, cfg.sdpf, forward, backward,
                               cfg.block, cfg.radius)

    if cfg.provider_kind == "external":
        pmsm_embedder = PixelEmbeddingProvider(cfg.train.feature_side)
    else:
        pmsm_embedder = provider

    return PipelineArtifacts(
        manifest=manifest,
        config=cfg,
        frame_set=frame_set,
        provider=provider,
        embeddings=embeddings,
        graph=g,
        ctx=ctx,
        pmsm_embedder=pmsm_embedder,
        dataset_hash=dataset_hash,
        learned=learned,
    )


def run_walk(artifacts: PipelineArtifacts, start: int,
             overrides: dict | None = None) -> SequencePath:
    """One seeded walk with per-run parameter overrides."""
    params = artifacts.config.sdpf
    if overrides:
        params = dataclasses.replace(params, **overrides)
    # The shared distance cache stays valid while the PMSM knobs match.
    if (params.mu0 == artifacts.config.sdpf.mu0
            and params.ne_min == artifacts.config.sdpf.ne_min):
        cache = artifacts.motion_cache()
    else:
        cache = MotionDistanceCache(artifacts.ctx, artifacts.pmsm_embedder, params)
    return sdpf_run(artifacts.graph, start, artifacts.ctx,
                    artifacts.pmsm_embedder, params, cache)


def sequence_record(artifacts: PipelineArtifacts, seq: SequencePath,
                    params: SdpfParams | None = None) -> dict:
    """JSON-ready record of one run; no timestamps, fully reproducible."""
    params = params or artifacts.config.sdpf
    return {
        "indices": [int(i) for i in seq.indices],
        "seed": int(seq.seed),
        "stop_reason": seq.stop_reason,
        "eta": artifacts.graph.eta,
        "dataset": {
            "n": artifacts.frame_set.n,
            "content_hash": artifacts.dataset_hash,
        },
        "params": {
            "sigma": params.sigma,
            "delta": params.delta,
            "xi": params.xi,
            "mu0": params.mu0,
            "ne_min": params.ne_min,
            "softmax_temperature": params.softmax_temperature,
            "max_length": params.max_length,
            "disable_cd": params.disable_cd,
            "disable_ct": params.disable_ct,
        },
        "steps": [dataclasses.asdict(s) for s in seq.steps],
    }


def dump_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def load_record(path: str) -> dict:
    if not os.path.isfile(path):
        raise MissingPath(f"sequence file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def evaluate_record(artifacts: PipelineArtifacts, record: dict,
                    strategy: str = "runs") -> dict:
    """Stability and source-overlap report for a stored run."""
    ds = record.get("dataset", {})
    if ds.get("content_hash") not in (None, artifacts.dataset_hash):
        raise UniverseMismatch(
            "sequence was generated from a different dataset "
            f"({ds.get('content_hash', '?')[:12]} vs {artifacts.dataset_hash[:12]})"
        )
    if ds.get("n") not in (None, artifacts.frame_set.n):
        raise UniverseMismatch(
            f"sequence universe has {ds.get('n')} frames, dataset has "
            f"{artifacts.frame_set.n}"
        )
    indices = [int(i) for i in record["indices"]]
    stab = stability(artifacts.frame_set, indices)
    source = list(range(artifacts.frame_set.n))
    source_stab = stability(artifacts.frame_set, source)
    overlap = overlap_measure(indices, source, strategy=strategy)
    return {
        "m_d": stab.m_d,
        "source_m_d": stab.source_m_d,
        "differences": stab.differences,
        "source_differences": source_stab.differences,
        "delta_o": overlap.delta_o,
        "precision": overlap.precision,
        "recall": overlap.recall,
        "overlap_length": overlap.overlap_length,
        "length": len(indices),
        "stop_reason": record.get("stop_reason"),
    }
