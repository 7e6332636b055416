"""Block-matching optical flow and motion descriptors built on it.

estimate_flow is a plain exhaustive block matcher: integer displacements,
sum of absolute differences over all color channels, ties broken by the
smaller displacement magnitude and then lexicographic (du, dv). It is slow
and honest, which is what the rest of the pipeline needs; swap in .flo
files from a real estimator for quality.

On top of a flow field:

* normalize_magnitude: per-field min-max normalization of |F| to [0, 1]
  (a constant field normalizes to all zeros);
* motion_tendency: the angle of the mean displacement over pixels whose
  normalized magnitude exceeds sigma, invalid when none do;
* detect_lms: marks frames inside linear motion segments, i.e. windows of
  at least min_window frames whose tendencies all stay within delta of the
  window's first frame (angles compared on the circle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, DimensionMismatch, EmptyInput, NonFiniteValues
from .media_io import FlowField

DEFAULT_BLOCK = 8
DEFAULT_RADIUS = 7
DEFAULT_SIGMA = 0.5
DEFAULT_DELTA = math.pi / 4
DEFAULT_MIN_WINDOW = 4


@dataclass
class MotionTendency:
    angle: float
    valid: bool


@dataclass
class LMSMask:
    is_lms: np.ndarray  # (n,) bool
    segments: list[tuple[int, int]]  # inclusive (start, end) frame ranges

    @property
    def segment_count(self) -> int:
        return len(self.segments)


def estimate_flow(
    a: np.ndarray,
    b: np.ndarray,
    block: int = DEFAULT_BLOCK,
    radius: int = DEFAULT_RADIUS,
    src_index: int = -1,
    dst_index: int = -1,
) -> FlowField:
    """Dense integer flow from frame a to frame b, constant per block."""
    if block < 4:
        raise BadParams(f"block must be >= 4, got {block}")
    if radius < 1:
        raise BadParams(f"radius must be >= 1, got {radius}")
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != b.shape:
        raise DimensionMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[..., None]
        b = b[..., None]
    h, w = a.shape[:2]
    if h < block or w < block:
        raise BadParams(f"frames of {h}x{w} are smaller than one {block}px block")

    ys = np.arange(0, h, block)
    xs = np.arange(0, w, block)
    padded = np.pad(b, ((radius, radius), (radius, radius), (0, 0)), mode="edge")

    # Candidate order encodes the tie-break: nearest displacement wins,
    # then lexicographic (du, dv); strict improvement keeps earlier wins.
    candidates = sorted(
        ((du, dv) for du in range(-radius, radius + 1)
         for dv in range(-radius, radius + 1)),
        key=lambda d: (d[0] * d[0] + d[1] * d[1], d[0], d[1]),
    )

    best_sad = np.full((len(ys), len(xs)), np.inf)
    best_u = np.zeros((len(ys), len(xs)), dtype=np.float32)
    best_v = np.zeros((len(ys), len(xs)), dtype=np.float32)
    for du, dv in candidates:
        shifted = padded[radius + dv: radius + dv + h, radius + du: radius + du + w]
        diff = np.abs(a - shifted).sum(axis=2)
        rows = np.add.reduceat(diff, ys, axis=0)
        sad = np.add.reduceat(rows, xs, axis=1)
        better = sad < best_sad
        best_sad = np.where(better, sad, best_sad)
        best_u = np.where(better, np.float32(du), best_u)
        best_v = np.where(better, np.float32(dv), best_v)

    u = np.repeat(np.repeat(best_u, block, axis=0), block, axis=1)[:h, :w]
    v = np.repeat(np.repeat(best_v, block, axis=0), block, axis=1)[:h, :w]
    return FlowField(u=u, v=v, src_index=src_index, dst_index=dst_index)


def negate_flow(flow: FlowField) -> FlowField:
    return FlowField(u=-flow.u, v=-flow.v,
                     src_index=flow.dst_index, dst_index=flow.src_index)


def normalize_magnitude(flow: FlowField) -> np.ndarray:
    """Min-max normalized magnitude map in [0, 1]; constant fields give zeros."""
    u = np.asarray(flow.u, dtype=np.float64)
    v = np.asarray(flow.v, dtype=np.float64)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NonFiniteValues("flow contains non-finite values")
    mag = np.hypot(u, v)
    lo = mag.min()
    hi = mag.max()
    if hi == lo:
        return np.zeros_like(mag)
    return (mag - lo) / (hi - lo)


def motion_tendency(flow: FlowField, sigma: float = DEFAULT_SIGMA) -> MotionTendency:
    """Dominant motion direction over the strongly moving pixels.

    Pixels are selected by normalized magnitude > sigma; the tendency is
    the angle of their mean displacement vector. No qualifying pixels
    (e.g. a constant field) yields valid=False.
    """
    m = normalize_magnitude(flow)
    sel = m > sigma
    if not sel.any():
        return MotionTendency(angle=0.0, valid=False)
    mean_u = float(np.asarray(flow.u, dtype=np.float64)[sel].mean())
    mean_v = float(np.asarray(flow.v, dtype=np.float64)[sel].mean())
    return MotionTendency(angle=math.atan2(mean_v, mean_u), valid=True)


def wrapped_angle_distance(t1: float, t2: float) -> float:
    """Distance between two angles on the circle, in [0, pi]."""
    d = abs(t1 - t2) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def expand_tendencies(tendencies: list[MotionTendency]) -> list[MotionTendency]:
    """Per-pair tendencies (n-1 of them) to per-frame ones (n).

    Frame i takes the tendency of the flow i -> i+1; the last frame
    inherits its predecessor's.
    """
    if not tendencies:
        raise EmptyInput("need at least one tendency")
    return list(tendencies) + [tendencies[-1]]


def detect_lms(
    tendencies: list[MotionTendency],
    delta: float = DEFAULT_DELTA,
    min_window: int = DEFAULT_MIN_WINDOW,
) -> LMSMask:
    """Mark frames belonging to linear motion segments.

    Input is one tendency per consecutive source pair (length n-1 for an
    n-frame clip); the returned mask covers all n frames. A frame is
    marked when some window of >= min_window frames contains it and every
    tendency in the window is valid and within delta of the window's
    first; invalid tendencies break windows.
    """
    if min_window < 2:
        raise BadParams(f"min_window must be >= 2, got {min_window}")
    per_frame = expand_tendencies(tendencies)
    n = len(per_frame)
    marked = np.zeros(n, dtype=bool)
    for j in range(n):
        if not per_frame[j].valid:
            continue
        end = j
        for l in range(j + 1, n):
            t = per_frame[l]
            if not t.valid or wrapped_angle_distance(per_frame[j].angle, t.angle) > delta:
                break
            end = l
        if end - j + 1 >= min_window:
            marked[j:end + 1] = True

    segments: list[tuple[int, int]] = []
    i = 0
    while i < n:
        if marked[i]:
            j = i
            while j + 1 < n and marked[j + 1]:
                j += 1
            segments.append((i, j))
            i = j + 1
        else:
            i += 1
    return LMSMask(is_lms=marked, segments=segments)
