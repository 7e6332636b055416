"""
==========================
Score generated orderings
==========================

Compares seeded walks against the source order: frame-difference
stability, overlap with the original sequence, and a mock rating round.
Run 01_make_dataset.py first.
"""

import os

from videoreseq.evaluate import RatingTally, overlap_measure, rating_aggregate, stability
from videoreseq.metric import TrainConfig
from videoreseq.pipeline import PipelineConfig, build_pipeline, run_walk
from videoreseq.sdpf import SdpfParams

HERE = os.path.dirname(__file__)
MANIFEST = os.path.join(HERE, "out", "tour", "manifest.json")

config = PipelineConfig(
    manifest_path=MANIFEST,
    provider_kind="pixel",
    train=TrainConfig(feature_side=16),
    sdpf=SdpfParams(seed=0),
)
art = build_pipeline(config)
source = list(range(art.frame_set.n))

################################################################
# stability and overlap, walks vs the source order itself

print("order        len   M_D     M_D(src)  overlap%")
rows = [("source", source)]
rows += [(f"seed {s}", run_walk(art, 0, {"seed": s}).indices) for s in range(4)]
for name, indices in rows:
    st = stability(art.frame_set, indices)
    ov = overlap_measure(indices, source)
    print(f"{name:12s} {len(indices):3d}  {st.m_d:7.4f}  {st.source_m_d:7.4f}  "
          f"{ov.delta_o:7.2f}")

################################################################
# aggregating a rating round (5 = best)

tally = RatingTally(counts=(0, 1, 2, 5, 3), rater_count=11)
print(f"\n11 raters, counts {tally.counts} -> score "
      f"{rating_aggregate(tally):.3f}")
