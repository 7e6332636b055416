"""
==========================
Generate new orderings
==========================

Runs the full pipeline on the tour dataset: pixel embeddings, relation
graph, motion context, then several seeded walks from one start frame.
Run 01_make_dataset.py first.
"""

import os

from videoreseq.pipeline import PipelineConfig, build_pipeline, run_walk
from videoreseq.metric import TrainConfig
from videoreseq.sdpf import SdpfParams

HERE = os.path.dirname(__file__)
MANIFEST = os.path.join(HERE, "out", "tour", "manifest.json")

config = PipelineConfig(
    manifest_path=MANIFEST,
    provider_kind="pixel",
    train=TrainConfig(feature_side=16),
    sdpf=SdpfParams(seed=0),
    block=8,
    radius=7,
)
art = build_pipeline(config)
print(f"{art.frame_set.n} frames, eta {art.graph.eta:.4f}, "
      f"{art.ctx.lms.segment_count} linear segments")

################################################################
# a few walks from frame 0, different seeds

for seed in range(4):
    path = run_walk(art, start=0, overrides={"seed": seed})
    print(f"\nseed {seed}: {len(path.indices)} frames, stop={path.stop_reason}")
    print("  order:", " ".join(str(i) for i in path.indices))

################################################################
# step diagnostics for one walk

path = run_walk(art, start=0, overrides={"seed": 0})
print("\nstep  src->next   |S1| |S2|   p      w(eta)    d(omega)")
for s in path.steps[:10]:
    print(f"{s.step:4d}  {s.source:3d}->{s.chosen:3d}   {s.s1_size:4d} "
          f"{s.s2_size:4d}  {s.probability:.3f}  {s.edge_weight:7.4f}  "
          f"{s.motion_distance:.4f}/{s.omega:.4f}")
print("..." if len(path.steps) > 10 else "")
