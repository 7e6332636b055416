"""Two-layer distillation path search over the relation graph.

A walk starts at a user-chosen frame. Each step first gathers S1, the
unvisited frames within the graph's content threshold, then distills S2
out of S1 with two motion constraints:

* directional: when the current frame sits inside a linear motion segment
  and S1 still holds segment frames, candidates must be segment frames
  whose tendency stays within xi of the current one (angles on the circle);
* coherent: a candidate's motion distance to the current frame must not
  exceed omega, the mean motion distance over S1 (with a single candidate,
  omega falls back to the distance between the current frame's backward
  flow and its quarter-turn rotations).

Motion distance compares two frames through pseudo-images built from
their backward flows: pixels that move significantly in either flow are
painted with the unit direction of the frame's own flow (shifted into
[0, 1]) plus a presence flag, everything else stays at the neutral
(1/2, 1/2, 0); the distance is the embedding distance between the two
pseudo-images. The next frame is drawn from softmax(-distance), so closer
motion is likelier but not forced. The walk stops when S2 empties, every
frame is visited, or a length cap is hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadParams,
    DimensionMismatch,
    EmptyInput,
    StartOutOfRange,
)
from .flow import (
    DEFAULT_BLOCK,
    DEFAULT_DELTA,
    DEFAULT_MIN_WINDOW,
    DEFAULT_RADIUS,
    DEFAULT_SIGMA,
    LMSMask,
    MotionTendency,
    detect_lms,
    estimate_flow,
    expand_tendencies,
    motion_tendency,
    negate_flow,
    normalize_magnitude,
    wrapped_angle_distance,
)
from .graph import SRG, CandidateSet, content_candidates
from .media_io import FlowField, FrameSet

MU_FLOOR = 1e-6


@dataclass
class SdpfParams:
    sigma: float = DEFAULT_SIGMA  # tendency pixel-selection threshold
    delta: float = DEFAULT_DELTA  # segment tendency tolerance
    xi: float = math.pi / 3  # directional-constraint tolerance
    mu0: float = 0.5  # initial significance threshold
    ne_min: int = 224  # minimum significant-set size before halving mu
    softmax_temperature: float = 1.0
    max_length: int | None = None
    seed: int = 0
    disable_cd: bool = False
    disable_ct: bool = False
    lms_membership_required: bool = True
    min_window: int = DEFAULT_MIN_WINDOW

    def __post_init__(self):
        if self.softmax_temperature <= 0:
            raise BadParams("softmax_temperature must be positive")
        if self.mu0 <= 0:
            raise BadParams("mu0 must be positive")
        if self.ne_min < 1:
            raise BadParams("ne_min must be >= 1")
        if self.max_length is not None and self.max_length < 1:
            raise BadParams("max_length must be >= 1")


@dataclass
class MotionContext:
    """Per-frame motion state shared by every walk over one clip."""

    backward_flows: list[FlowField]  # flow from frame i to frame i-1
    tendencies: list[MotionTendency]  # per frame, last inherits predecessor
    lms: LMSMask
    forward_flows: list[FlowField] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.backward_flows)


def build_motion_context(
    frame_set: FrameSet,
    params: SdpfParams | None = None,
    forward_flows: list[FlowField] | None = None,
    backward_flows: list[FlowField] | None = None,
    block: int = DEFAULT_BLOCK,
    radius: int = DEFAULT_RADIUS,
) -> MotionContext:
    """Estimate (or adopt) flows and derive tendencies and segments.

    ``forward_flows`` holds flow i -> i+1 at position i (n-1 entries);
    ``backward_flows`` holds flow i+1 -> i at position i (n-1 entries).
    Missing backward flows are negated forward ones; frame 0, which has
    no backward neighbor, always uses the negated flow 0 -> 1.
    """
    params = params or SdpfParams()
    n = frame_set.n
    frames = frame_set.frames
    if forward_flows is None:
        forward_flows = [
            estimate_flow(frames[i], frames[i + 1], block, radius, i, i + 1)
            for i in range(n - 1)
        ]
    if len(forward_flows) != n - 1:
        raise DimensionMismatch(f"need {n - 1} forward flows, got {len(forward_flows)}")
    if backward_flows is None:
        backward = [negate_flow(forward_flows[0])] + [
            estimate_flow(frames[i], frames[i - 1], block, radius, i, i - 1)
            for i in range(1, n)
        ]
    else:
        if len(backward_flows) != n - 1:
            raise DimensionMismatch(
                f"need {n - 1} backward flows, got {len(backward_flows)}"
            )
        backward = [negate_flow(forward_flows[0])] + list(backward_flows)

    pair_tendencies = [motion_tendency(f, params.sigma) for f in forward_flows]
    tendencies = expand_tendencies(pair_tendencies)
    lms = detect_lms(pair_tendencies, params.delta, params.min_window)
    return MotionContext(
        backward_flows=backward,
        tendencies=tendencies,
        lms=lms,
        forward_flows=list(forward_flows),
    )


def significant_set(
    magnitudes: np.ndarray, mu0: float = 0.5, ne_min: int = 224
) -> tuple[np.ndarray, float]:
    """Values strictly above the significance threshold, sorted ascending.

    The threshold starts at mu0 and halves while fewer than ne_min values
    qualify, stopping at the 1e-6 floor; the final threshold is returned
    alongside the set so callers can audit how far it backed off.
    """
    vals = np.asarray(magnitudes, dtype=np.float64).ravel()
    mu = float(mu0)
    selected = vals[vals > mu]
    while selected.size < ne_min and mu > MU_FLOOR:
        mu /= 2.0
        selected = vals[vals > mu]
    return np.sort(selected), mu


def significant_motion_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise max of two normalized magnitude maps."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"magnitude maps differ: {a.shape} vs {b.shape}")
    return np.maximum(a, b)


def pseudo_image(flow: FlowField, m: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Paint flow directions at the pixels the joint map marks significant.

    Significant pixels (m >= min of the significant set) carry the unit
    direction of the flow mapped into [0, 1] and a presence flag of 1;
    a significant pixel where this flow is exactly zero sits at the
    neutral direction (1/2, 1/2) with flag 1; everything else is
    (1/2, 1/2, 0). With an empty significant set nothing qualifies.
    """
    m = np.asarray(m, dtype=np.float64)
    u = np.asarray(flow.u, dtype=np.float64)
    v = np.asarray(flow.v, dtype=np.float64)
    if m.shape != u.shape:
        raise DimensionMismatch(f"map {m.shape} does not match flow {u.shape}")
    e = np.asarray(e, dtype=np.float64)
    cutoff = float(e[0]) if e.size else math.inf
    mag = np.hypot(u, v)
    significant = m >= cutoff
    moving = significant & (mag > 0)

    out = np.full(m.shape + (3,), 0.5)
    out[..., 2] = 0.0
    out[moving, 0] = u[moving] / (2.0 * mag[moving]) + 0.5
    out[moving, 1] = v[moving] / (2.0 * mag[moving]) + 0.5
    out[significant, 2] = 1.0
    return out


def rotate_flow_quarter(flow: FlowField, turns: int) -> FlowField:
    """Rotate every displacement vector by turns * 90 degrees (exact)."""
    t = turns % 4
    u, v = flow.u, flow.v
    if t == 0:
        return FlowField(u=u.copy(), v=v.copy())
    if t == 1:
        return FlowField(u=-v, v=u)
    if t == 2:
        return FlowField(u=-u, v=-v)
    return FlowField(u=v, v=-u)


def motion_distance(
    fc: FlowField,
    fk: FlowField,
    embedder,
    mu0: float = 0.5,
    ne_min: int = 224,
) -> float:
    """Unsigned distance between the motion of two frames.

    Both frames' backward flows are normalized, joined into one
    significance map, rendered as pseudo-images, and embedded; the result
    is the Euclidean distance between the two embeddings. Symmetric, and
    exactly zero for identical flows.
    """
    if fc.shape != fk.shape:
        raise DimensionMismatch(f"flow shapes differ: {fc.shape} vs {fk.shape}")
    nc = normalize_magnitude(fc)
    nk = normalize_magnitude(fk)
    joint = significant_motion_map(nc, nk)
    e_c, _ = significant_set(nc, mu0, ne_min)
    e_k, _ = significant_set(nk, mu0, ne_min)
    p_c = pseudo_image(fc, joint, e_c)
    p_k = pseudo_image(fk, joint, e_k)
    return float(np.linalg.norm(embedder.embed_image(p_c) - embedder.embed_image(p_k)))


def coherence_threshold(
    dists: list[float],
    fc: FlowField,
    embedder,
    mu0: float = 0.5,
    ne_min: int = 224,
) -> float:
    """Mean motion distance over the candidate pool.

    With fewer than two candidates there is no meaningful mean, so the
    threshold falls back to the nearer of the distances between fc and
    its two quarter-turn rotations.
    """
    if len(dists) >= 2:
        return float(np.mean(dists))
    plus = motion_distance(fc, rotate_flow_quarter(fc, 1), embedder, mu0, ne_min)
    minus = motion_distance(fc, rotate_flow_quarter(fc, -1), embedder, mu0, ne_min)
    return min(plus, minus)


class MotionDistanceCache:
    """Memoized pairwise motion distances for one clip.

    Safe to share across walks over the same context; distances are
    symmetric so pairs are keyed in sorted order.
    """

    def __init__(self, ctx: MotionContext, embedder, params: SdpfParams):
        self.ctx = ctx
        self.embedder = embedder
        self.params = params
        self._pairs: dict[tuple[int, int], float] = {}
        self._rotations: dict[int, float] = {}

    def pair(self, i: int, j: int) -> float:
        key = (i, j) if i <= j else (j, i)
        if key not in self._pairs:
            self._pairs[key] = motion_distance(
                self.ctx.backward_flows[i],
                self.ctx.backward_flows[j],
                self.embedder,
                self.params.mu0,
                self.params.ne_min,
            )
        return self._pairs[key]

    def rotation_threshold(self, i: int) -> float:
        if i not in self._rotations:
            self._rotations[i] = coherence_threshold(
                [],
                self.ctx.backward_flows[i],
                self.embedder,
                self.params.mu0,
                self.params.ne_min,
            )
        return self._rotations[i]


def directional_ok(
    t_c: MotionTendency,
    t_k: MotionTendency,
    lms_c: bool,
    lms_k: bool,
    any_lms_in_s1: bool,
    xi: float,
    membership_required: bool = True,
) -> bool:
    """Directional constraint between the current frame and a candidate.

    Active only when the current frame is inside a linear motion segment
    and the pool still offers segment frames; otherwise vacuously true.
    When active, the candidate must itself be a segment frame (unless
    membership is relaxed) and its tendency must stay within xi of the
    current one.
    """
    if not (lms_c and any_lms_in_s1):
        return True
    if not lms_k:
        return not membership_required
    if not (t_c.valid and t_k.valid):
        return False
    return wrapped_angle_distance(t_c.angle, t_k.angle) <= xi


@dataclass
class DistillResult:
    candidates: CandidateSet
    distances: list[float]
    omega: float
    cd_active: bool


def distill_s2(
    current: int,
    s1: CandidateSet,
    ctx: MotionContext,
    embedder,
    params: SdpfParams,
    cache: MotionDistanceCache | None = None,
) -> DistillResult:
    """Filter S1 down to the motion-coherent candidate set S2."""
    if cache is None:
        cache = MotionDistanceCache(ctx, embedder, params)
    if len(s1) == 0:
        return DistillResult(CandidateSet((), "S2"), [], math.nan, False)

    dists_all = [cache.pair(current, k) for k in s1.indices]
    if len(dists_all) >= 2:
        omega = float(np.mean(dists_all))
    else:
        omega = cache.rotation_threshold(current)

    lms = ctx.lms.is_lms
    any_lms = any(bool(lms[k]) for k in s1.indices)
    cd_active = (not params.disable_cd) and bool(lms[current]) and any_lms

    survivors: list[int] = []
    survivor_dists: list[float] = []
    for k, d in zip(s1.indices, dists_all):
        if not params.disable_cd and not directional_ok(
            ctx.tendencies[current],
            ctx.tendencies[k],
            bool(lms[current]),
            bool(lms[k]),
            any_lms,
            params.xi,
            params.lms_membership_required,
        ):
            continue
        if not params.disable_ct and d > omega:
            continue
        survivors.append(k)
        survivor_dists.append(d)
    return DistillResult(
        CandidateSet(tuple(survivors), "S2"), survivor_dists, omega, cd_active
    )


def selection_probabilities(dists, temperature: float = 1.0) -> np.ndarray:
    """Softmax over negated distances; closer motion gets higher mass."""
    if temperature <= 0:
        raise BadParams("temperature must be positive")
    d = np.asarray(dists, dtype=np.float64)
    if d.size == 0:
        raise EmptyInput("no distances to normalize")
    logits = -d / temperature
    logits -= logits.max()
    p = np.exp(logits)
    return p / p.sum()


@dataclass
class StepRecord:
    step: int
    source: int
    chosen: int
    s1_size: int
    s2_size: int
    probability: float
    edge_weight: float
    motion_distance: float
    omega: float
    cd_active: bool


@dataclass
class SequencePath:
    indices: list[int]
    seed: int
    stop_reason: str  # exhausted | empty_S2 | max_length
    steps: list[StepRecord]


def sdpf_run(
    g: SRG,
    start: int,
    ctx: MotionContext,
    embedder,
    params: SdpfParams,
    cache: MotionDistanceCache | None = None,
) -> SequencePath:
    """Run one stochastic walk from the chosen start frame.

    Deterministic for a fixed seed. Every emitted transition satisfies
    both the content threshold and the step's motion constraints; the
    per-step records make that auditable after the fact.
    """
    if not 0 <= start < g.n:
        raise StartOutOfRange(f"start {start} not in [0, {g.n})")
    if ctx.n != g.n:
        raise DimensionMismatch(f"context covers {ctx.n} frames, graph {g.n}")
    if cache is None:
        cache = MotionDistanceCache(ctx, embedder, params)
    rng = np.random.default_rng(params.seed)
    max_length = params.max_length if params.max_length is not None else g.n

    path = [start]
    visited = {start}
    steps: list[StepRecord] = []
    while True:
        if len(visited) >= g.n:
            stop = "exhausted"
            break
        if len(path) >= max_length:
            stop = "max_length"
            break
        current = path[-1]
        s1 = content_candidates(g, current, visited - {current})
        if len(s1) == 0:
            stop = "empty_S2"
            break
        result = distill_s2(current, s1, ctx, embedder, params, cache)
        if len(result.candidates) == 0:
            stop = "empty_S2"
            break
        probs = selection_probabilities(result.distances, params.softmax_temperature)
        pick = int(rng.choice(len(probs), p=probs))
        chosen = result.candidates.indices[pick]
        steps.append(
            StepRecord(
                step=len(path) - 1,
                source=current,
                chosen=chosen,
                s1_size=len(s1),
                s2_size=len(result.candidates),
                probability=float(probs[pick]),
                edge_weight=float(g.weights[current, chosen]),
                motion_distance=result.distances[pick],
                omega=result.omega,
                cd_active=result.cd_active,
            )
        )
        path.append(chosen)
        visited.add(chosen)

    return SequencePath(indices=path, seed=params.seed, stop_reason=stop, steps=steps)
