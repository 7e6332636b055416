"""
==============================
Learn the frame metric
==============================

Trains the affine embedding on a clip with two visually distinct scenes.
PSNR labels the triplets, so a good metric should pull same-scene frames
together and push the scenes apart. No dataset on disk needed.
"""

import numpy as np

from videoreseq.features import LearnedEmbeddingProvider, PixelEmbeddingProvider
from videoreseq.graph import pairwise_distances
from videoreseq.metric import TrainConfig, train_metric
from videoreseq.synth import two_cluster_clip

clip = two_cluster_clip(per_cluster=30, size=48, seed=0)
cfg = TrainConfig(seed=0, feature_side=16, embed_dim=32,
                  triplets_per_frame=20, max_epochs=25)

################################################################
# fit

learned = train_metric(clip, cfg)
print(f"trained {learned.epochs_run} epochs, best validation loss "
      f"{learned.final_loss:.4f}")

################################################################
# did the metric learn the scene split?

half = clip.n // 2


def cluster_stats(vectors):
    d = pairwise_distances(np.asarray(vectors, dtype=np.float64))
    iu = np.triu_indices(half, k=1)
    intra = np.concatenate([d[:half, :half][iu], d[half:, half:][iu]]).mean()
    inter = d[:half, half:].mean()
    return float(intra), float(inter)


for name, provider in [
    ("raw pixels", PixelEmbeddingProvider(side=cfg.feature_side)),
    ("learned", LearnedEmbeddingProvider(learned.weight, learned.bias,
                                         cfg.feature_side)),
]:
    intra, inter = cluster_stats(provider.embed_all(clip).vectors)
    print(f"{name:11s} intra {intra:7.4f}  inter {inter:7.4f}  "
          f"ratio {inter / intra:6.2f}")
