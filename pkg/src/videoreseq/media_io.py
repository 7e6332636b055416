"""Dataset loading and binary formats.

Three on-disk formats live here:

* image frames: PNG or binary PPM, decoded to float32 RGB in [0, 1];
* optical flow: the common .flo layout (float32 magic 202021.25, then
  little-endian int32 width and height, then row-major interleaved (u, v)
  float32 pairs);
* embedding container: 16-byte header (4-byte magic ``VEMB``, uint32
  version, uint32 row count, uint32 dimension), then row-major float32
  vectors, then the provider tag as trailing UTF-8 bytes.

A dataset is described by a small JSON manifest with keys ``frames``
(directory or glob of images), optional ``flows`` (directory of .flo files
named ``{src:04d}_{dst:04d}.flo``), optional ``embeddings`` (container
file), and optional ``fps`` playback hint.
"""

from __future__ import annotations

import glob
import json
import os
import re
import struct
from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import (
    BadMagic,
    DimZero,
    FewerThanTwoFrames,
    HeaderMismatch,
    MissingPath,
    MixedDimensions,
    NonFiniteValues,
    TruncatedPayload,
)

FLO_MAGIC = 202021.25
EMBEDDING_MAGIC = b"VEMB"
EMBEDDING_VERSION = 1
PROVIDER_TAGS = ("builtin-pixel", "builtin-learned", "external")

_IMAGE_EXTENSIONS = (".png", ".ppm")


def natural_key(name: str):
    """Sort key that orders embedded integers numerically (frame2 < frame10)."""
    parts = re.split(r"(\d+)", os.path.basename(name))
    return [int(p) if p.isdigit() else p for p in parts]


@dataclass
class FrameSet:
    """Ordered clip frames as one (n, H, W, 3) float32 array in [0, 1]."""

    frames: np.ndarray
    source_order: list[int] = field(default_factory=list)
    paths: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4 or self.frames.shape[-1] != 3:
            raise MixedDimensions("frames must stack to (n, H, W, 3)")
        if self.frames.shape[0] < 2:
            raise FewerThanTwoFrames("a clip needs at least two frames")
        if not self.source_order:
            self.source_order = list(range(self.frames.shape[0]))

    @property
    def n(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    def frame(self, i: int) -> np.ndarray:
        return self.frames[i]


@dataclass
class FlowField:
    """Dense displacement field: u is horizontal (columns), v vertical (rows)."""

    u: np.ndarray
    v: np.ndarray
    src_index: int = -1
    dst_index: int = -1

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float32)
        self.v = np.asarray(self.v, dtype=np.float32)
        if self.u.shape != self.v.shape or self.u.ndim != 2:
            raise MixedDimensions("u and v must be equal-shaped 2-d arrays")

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape


@dataclass
class EmbeddingSet:
    """One row vector per frame, all from a single provider."""

    vectors: np.ndarray
    provider_tag: str

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise DimZero("vectors must be a (n, D) matrix")
        if self.vectors.shape[1] == 0:
            raise DimZero("embedding dimension must be positive")
        if not np.all(np.isfinite(self.vectors)):
            raise NonFiniteValues("embedding vectors must be finite")
        if self.provider_tag not in PROVIDER_TAGS:
            raise HeaderMismatch(f"unknown provider tag {self.provider_tag!r}")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class DatasetManifest:
    frames: str
    flows: str | None = None
    embeddings: str | None = None
    fps: float = 12.0
    base_dir: str = "."

    def resolve(self, p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)


def load_manifest(path: str) -> DatasetManifest:
    """Read a dataset manifest JSON and check its referenced paths exist."""
    if not os.path.isfile(path):
        raise MissingPath(f"manifest not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if "frames" not in raw:
        raise MissingPath("manifest is missing the required 'frames' key")
    m = DatasetManifest(
        frames=raw["frames"],
        flows=raw.get("flows"),
        embeddings=raw.get("embeddings"),
        fps=float(raw.get("fps", 12.0)),
        base_dir=os.path.dirname(os.path.abspath(path)),
    )
    frames_path = m.resolve(m.frames)
    if not os.path.isdir(frames_path) and not glob.glob(frames_path):
        raise MissingPath(f"frames path does not resolve: {m.frames}")
    for key, p in (("flows", m.flows), ("embeddings", m.embeddings)):
        if p is not None and not os.path.exists(m.resolve(p)):
            raise MissingPath(f"{key} path does not resolve: {p}")
    return m


def _list_frame_files(frames_path: str) -> list[str]:
    if os.path.isdir(frames_path):
        names = [
            os.path.join(frames_path, f)
            for f in os.listdir(frames_path)
            if f.lower().endswith(_IMAGE_EXTENSIONS)
        ]
    else:
        names = glob.glob(frames_path)
    return sorted(names, key=natural_key)


def load_frame_set(manifest: DatasetManifest, resize: int | None = None) -> FrameSet:
    """Decode the manifest's images into a FrameSet, in natural filename order.

    All images must share one resolution. With ``resize`` set, every frame is
    bilinearly resized to a resize x resize square after decoding.
    """
    files = _list_frame_files(manifest.resolve(manifest.frames))
    if len(files) < 2:
        raise FewerThanTwoFrames(f"found {len(files)} frames under {manifest.frames}")
    decoded = []
    shape = None
    for p in files:
        img = cv2.imread(p, cv2.IMREAD_COLOR)
        if img is None:
            raise MissingPath(f"not a decodable image: {p}")
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise MixedDimensions(f"{p} has shape {img.shape[:2]}, expected {shape[:2]}")
        rgb = cv2.cvtColor(img, cv2.COLOR_BGR2RGB).astype(np.float32) / 255.0
        if resize is not None:
            rgb = cv2.resize(rgb, (resize, resize), interpolation=cv2.INTER_LINEAR)
        decoded.append(rgb)
    return FrameSet(frames=np.stack(decoded), paths=files)


def decode_flo(data: bytes, src_index: int = -1, dst_index: int = -1) -> FlowField:
    """Parse .flo bytes into a FlowField. Bit-exact inverse of encode_flo."""
    if len(data) < 12:
        raise TruncatedPayload(f"flo header needs 12 bytes, got {len(data)}")
    magic, width, height = struct.unpack("<fii", data[:12])
    if magic != np.float32(FLO_MAGIC):
        raise BadMagic(f"bad flo magic {magic!r}")
    if width <= 0 or height <= 0:
        raise TruncatedPayload(f"bad flo dimensions {width}x{height}")
    expected = 12 + 8 * width * height
    if len(data) != expected:
        raise TruncatedPayload(f"flo payload is {len(data)} bytes, expected {expected}")
    pairs = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width, 2)
    if not np.all(np.isfinite(pairs)):
        raise NonFiniteValues("flo payload contains non-finite values")
    return FlowField(u=pairs[..., 0].copy(), v=pairs[..., 1].copy(),
                     src_index=src_index, dst_index=dst_index)


def encode_flo(flow: FlowField) -> bytes:
    """Serialize a FlowField to .flo bytes."""
    if not (np.all(np.isfinite(flow.u)) and np.all(np.isfinite(flow.v))):
        raise NonFiniteValues("cannot encode non-finite flow")
    h, w = flow.shape
    header = struct.pack("<fii", FLO_MAGIC, w, h)
    pairs = np.stack([flow.u, flow.v], axis=-1).astype("<f4")
    return header + pairs.tobytes()


def read_flo(path: str, src_index: int = -1, dst_index: int = -1) -> FlowField:
    if not os.path.isfile(path):
        raise MissingPath(f"flo file not found: {path}")
    with open(path, "rb") as fh:
        return decode_flo(fh.read(), src_index, dst_index)


def write_flo(path: str, flow: FlowField) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_flo(flow))


def flow_filename(src: int, dst: int) -> str:
    return f"{src:04d}_{dst:04d}.flo"


def read_embedding_set(path: str) -> EmbeddingSet:
    """Read an embedding container file."""
    if not os.path.isfile(path):
        raise MissingPath(f"embedding file not found: {path}")
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16:
        raise HeaderMismatch(f"container header needs 16 bytes, got {len(data)}")
    magic, version, n, dim = struct.unpack("<4sIII", data[:16])
    if magic != EMBEDDING_MAGIC:
        raise HeaderMismatch(f"bad container magic {magic!r}")
    if version != EMBEDDING_VERSION:
        raise HeaderMismatch(f"unsupported container version {version}")
    if dim == 0:
        raise DimZero("container declares zero dimension")
    payload_len = 4 * n * dim
    if len(data) < 16 + payload_len:
        raise HeaderMismatch(
            f"container declares {n}x{dim} but holds {len(data) - 16} payload bytes"
        )
    vectors = np.frombuffer(data, dtype="<f4", offset=16, count=n * dim).reshape(n, dim)
    tag = data[16 + payload_len:].decode("utf-8")
    return EmbeddingSet(vectors=vectors.copy(), provider_tag=tag)


def write_embedding_set(path: str, eset: EmbeddingSet) -> None:
    """Write an embedding container file (bit-exact round trip with read)."""
    header = struct.pack("<4sIII", EMBEDDING_MAGIC, EMBEDDING_VERSION, eset.n, eset.dim)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(eset.vectors.astype("<f4").tobytes())
        fh.write(eset.provider_tag.encode("utf-8"))
