"""Frame feature extraction, PSNR, and embedding providers.

The default frame representation is a normalized downsampled-pixel vector:
bilinear resize to side x side, flatten, subtract the vector mean, divide by
the L2 norm. A learned affine map on top of that vector (see the metric
module) gives the trained representation; precomputed vectors from an
external model are supported through the same provider interface.
"""

from __future__ import annotations

import math

import cv2
import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, ProviderNotReady, SideTooSmall
from .media_io import EmbeddingSet, FrameSet

DEFAULT_FEATURE_SIDE = 32


def extract_pixel_feature(frame: np.ndarray, side: int = DEFAULT_FEATURE_SIDE) -> np.ndarray:
    """Downsampled, mean-centered, L2-normalized pixel vector of length 3*side*side.

    A constant frame centers to the zero vector, which is returned as-is
    rather than divided by its zero norm.
    """
    if side < 4:
        raise SideTooSmall(f"feature side must be >= 4, got {side}")
    frame = np.asarray(frame, dtype=np.float32)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise DimensionMismatch(f"expected (H, W, 3) frame, got {frame.shape}")
    small = cv2.resize(frame, (side, side), interpolation=cv2.INTER_LINEAR)
    vec = small.reshape(-1).astype(np.float64)
    vec -= vec.mean()
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] frames.

    Identical frames return math.inf, which sorts above every finite value.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


class PixelEmbeddingProvider:
    """Embeds any image via the downsampled-pixel feature."""

    kind = "builtin-pixel"

    def __init__(self, side: int = DEFAULT_FEATURE_SIDE):
        self.side = side

    @property
    def dim(self) -> int:
        return 3 * self.side * self.side

    def embed_image(self, image: np.ndarray) -> np.ndarray:
        return extract_pixel_feature(image, self.side)

    def embed_frame(self, frame_set: FrameSet, index: int) -> np.ndarray:
        if not 0 <= index < frame_set.n:
            raise IndexOutOfRange(f"frame index {index} not in [0, {frame_set.n})")
        return self.embed_image(frame_set.frame(index))

    def embed_all(self, frame_set: FrameSet) -> EmbeddingSet:
        vecs = np.stack([self.embed_image(f) for f in frame_set.frames])
        return EmbeddingSet(vectors=vecs.astype(np.float32), provider_tag=self.kind)


class LearnedEmbeddingProvider:
    """Affine map on top of the pixel feature: v = W x + b."""

    kind = "builtin-learned"

    def __init__(self, weight: np.ndarray, bias: np.ndarray, side: int = DEFAULT_FEATURE_SIDE):
        self.weight = np.asarray(weight, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DimensionMismatch("weight must be (D_out, D_in) with matching bias")
        self.side = side
        if self.weight.shape[1] != 3 * side * side:
            raise DimensionMismatch(
                f"weight expects input dim {self.weight.shape[1]}, "
                f"pixel feature yields {3 * side * side}"
            )

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    def embed_image(self, image: np.ndarray) -> np.ndarray:
        x = extract_pixel_feature(image, self.side)
        return self.weight @ x + self.bias

    def embed_frame(self, frame_set: FrameSet, index: int) -> np.ndarray:
        if not 0 <= index < frame_set.n:
            raise IndexOutOfRange(f"frame index {index} not in [0, {frame_set.n})")
        return self.embed_image(frame_set.frame(index))

    def embed_all(self, frame_set: FrameSet) -> EmbeddingSet:
        vecs = np.stack([self.embed_image(f) for f in frame_set.frames])
        return EmbeddingSet(vectors=vecs.astype(np.float32), provider_tag=self.kind)


class ExternalEmbeddingProvider:
    """Serves vectors precomputed by an outside model; cannot embed new images."""

    kind = "external"

    def __init__(self, embedding_set: EmbeddingSet):
        self.embedding_set = embedding_set

    @property
    def dim(self) -> int:
        return self.embedding_set.dim

    def embed_image(self, image: np.ndarray) -> np.ndarray:
        raise ProviderNotReady("external provider cannot embed novel images")

    def embed_frame(self, frame_set: FrameSet, index: int) -> np.ndarray:
        if not 0 <= index < self.embedding_set.n:
            raise IndexOutOfRange(
                f"index {index} not in [0, {self.embedding_set.n})"
            )
        return self.embedding_set.vectors[index].astype(np.float64)

    def embed_all(self, frame_set: FrameSet) -> EmbeddingSet:
        if self.embedding_set.n != frame_set.n:
            raise DimensionMismatch(
                f"external set has {self.embedding_set.n} vectors "
                f"for {frame_set.n} frames"
            )
        return self.embedding_set
