"""Quality measures for generated orderings.

* frame_difference: RMS pixel difference between two frames in [0, 1];
* stability: mean frame difference along a path, reported next to the
  same measure over the source ordering for context;
* overlap_measure: harmonic-mean overlap (in percent) between a generated
  ordering and a target one, counting frames inside maximal runs whose
  consecutive pairs appear identically ordered in both; an LCS strategy
  is available for sensitivity checks;
* rating_aggregate: normalized mean of a 1..5 rating tally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParams,
    DimensionMismatch,
    EmptyPath,
    PathTooShort,
    TallyMismatch,
)
from .media_io import FrameSet


def frame_difference(a: np.ndarray, b: np.ndarray) -> float:
    """Root-mean-square difference over all pixels and channels."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.sqrt(np.mean(diff * diff)))


@dataclass
class StabilityReport:
    differences: list[float]
    m_d: float
    source_m_d: float


def stability(frame_set: FrameSet, indices: list[int]) -> StabilityReport:
    """Per-transition frame differences and their mean along a path."""
    if len(indices) < 2:
        raise PathTooShort(f"stability needs >= 2 frames, got {len(indices)}")
    frames = frame_set.frames
    diffs = [
        frame_difference(frames[a], frames[b])
        for a, b in zip(indices[:-1], indices[1:])
    ]
    source = [
        frame_difference(frames[i], frames[i + 1]) for i in range(frame_set.n - 1)
    ]
    return StabilityReport(
        differences=diffs,
        m_d=float(np.mean(diffs)),
        source_m_d=float(np.mean(source)),
    )


@dataclass
class OverlapReport:
    precision: float
    recall: float
    delta_o: float  # percent
    overlap_length: int
    generated_length: int
    target_length: int
    strategy: str


def _common_run_length(g: list[int], t: list[int]) -> int:
    """Frames of g inside maximal runs of consecutive pairs shared with t."""
    target_pairs = set(zip(t[:-1], t[1:]))
    common = [pair in target_pairs for pair in zip(g[:-1], g[1:])]
    total = 0
    i = 0
    while i < len(common):
        if common[i]:
            j = i
            while j < len(common) and common[j]:
                j += 1
            total += (j - i) + 1
            i = j
        else:
            i += 1
    return total


def _lcs_length(g: list[int], t: list[int]) -> int:
    prev = [0] * (len(t) + 1)
    for gi in g:
        cur = [0]
        for j, tj in enumerate(t):
            cur.append(prev[j] + 1 if gi == tj else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def overlap_measure(
    generated: list[int], target: list[int], strategy: str = "runs"
) -> OverlapReport:
    """Harmonic-mean overlap between two orderings, as a percentage.

    The default strategy credits only frames that sit inside shared
    contiguous runs, so a reshuffle that preserves no consecutive pair
    scores zero even though the frame sets coincide.
    """
    if not generated or not target:
        raise EmptyPath("both orderings must be non-empty")
    if strategy == "runs":
        overlap = _common_run_length(list(generated), list(target))
    elif strategy == "lcs":
        overlap = _lcs_length(list(generated), list(target))
    else:
        raise BadParams(f"unknown overlap strategy {strategy!r}")
    precision = overlap / len(generated)
    recall = overlap / len(target)
    if precision + recall == 0:
        delta_o = 0.0
    else:
        delta_o = 2.0 * precision * recall / (precision + recall) * 100.0
    return OverlapReport(
        precision=precision,
        recall=recall,
        delta_o=delta_o,
        overlap_length=overlap,
        generated_length=len(generated),
        target_length=len(target),
        strategy=strategy,
    )


@dataclass
class RatingTally:
    """Counts of 1..5 star ratings from a panel of raters."""

    counts: tuple[int, int, int, int, int]
    rater_count: int = 11


def rating_aggregate(tally: RatingTally) -> float:
    """Mean rating normalized to [0.2, 1.0]: sum(s * N_s) / (5 * raters)."""
    if len(tally.counts) != 5:
        raise TallyMismatch(f"expected 5 counts, got {len(tally.counts)}")
    if any(c < 0 for c in tally.counts):
        raise TallyMismatch("rating counts must be non-negative")
    if tally.rater_count < 1:
        raise TallyMismatch("rater_count must be >= 1")
    if sum(tally.counts) != tally.rater_count:
        raise TallyMismatch(
            f"counts sum to {sum(tally.counts)}, rater_count is {tally.rater_count}"
        )
    weighted = sum(s * n for s, n in zip(range(1, 6), tally.counts))
    return weighted / (5.0 * tally.rater_count)
