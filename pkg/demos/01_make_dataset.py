"""
===========================
Build a synthetic clip
===========================

Renders a textured square touring the canvas, writes the frames as PNGs
plus a manifest JSON, and prints what ended up on disk. Every other demo
reads this dataset.
"""

import json
import os

from videoreseq.media_io import load_frame_set, load_manifest
from videoreseq.synth import save_clip, tour_clip

OUT = os.path.join(os.path.dirname(__file__), "out", "tour")

################################################################
# render and save

clip = tour_clip(n=40, size=64, square=12, seed=0)
manifest_path = save_clip(clip, OUT, fps=12.0)

print("wrote", manifest_path)
with open(manifest_path) as fh:
    print(json.dumps(json.load(fh), indent=2))

################################################################
# read it back the way the pipeline will

manifest = load_manifest(manifest_path)
again = load_frame_set(manifest)
print(f"{again.n} frames, {again.height}x{again.width}, fps {manifest.fps}")
assert again.n == clip.n
