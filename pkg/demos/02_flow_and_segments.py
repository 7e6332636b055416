"""
=================================
Motion tendencies and segments
=================================

Estimates block-matching flow between consecutive frames of the tour
clip, reduces each field to a dominant direction, and marks the linear
motion segments. Run 01_make_dataset.py first.
"""

import math
import os

import numpy as np

from videoreseq.flow import detect_lms, estimate_flow, expand_tendencies, motion_tendency
from videoreseq.media_io import load_frame_set, load_manifest, write_flo, flow_filename

HERE = os.path.dirname(__file__)
MANIFEST = os.path.join(HERE, "out", "tour", "manifest.json")
FLOW_DIR = os.path.join(HERE, "out", "tour", "flows")

clip = load_frame_set(load_manifest(MANIFEST))
os.makedirs(FLOW_DIR, exist_ok=True)

################################################################
# forward flow for every consecutive pair

flows = []
for i in range(clip.n - 1):
    f = estimate_flow(clip.frame(i), clip.frame(i + 1), block=8, radius=7,
                      src_index=i, dst_index=i + 1)
    write_flo(os.path.join(FLOW_DIR, flow_filename(i, i + 1)), f)
    flows.append(f)
print(f"wrote {len(flows)} fields to {FLOW_DIR}")

################################################################
# one angle per frame, last frame borrows its predecessor's

pair_tendencies = [motion_tendency(f) for f in flows]
tendencies = expand_tendencies(pair_tendencies)
lms = detect_lms(tendencies, delta=math.pi / 4, min_window=4)

print("\nframe  angle(deg)  valid  lms")
for i, t in enumerate(tendencies):
    deg = math.degrees(t.angle) if t.valid else float("nan")
    print(f"{i:5d}  {deg:10.1f}  {str(t.valid):5s}  {'*' if lms.is_lms[i] else ''}")

print(f"\n{lms.segment_count} segments:", lms.segments)
mags = [float(np.hypot(f.u, f.v).mean()) for f in flows]
print(f"mean |flow| per pair: min {min(mags):.2f} max {max(mags):.2f}")
