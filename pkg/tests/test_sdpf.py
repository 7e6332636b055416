from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import (
    pseudo_image_scalar,
    selection_probabilities_scalar,
    significant_set_scalar,
)
from videoreseq.errors import (
    BadParams,
    DimensionMismatch,
    EmptyInput,
    StartOutOfRange,
)
from videoreseq.features import PixelEmbeddingProvider
from videoreseq.flow import MotionTendency, estimate_flow
from videoreseq.graph import SRG, build_graph
from videoreseq.media_io import FlowField, FrameSet
from videoreseq.sdpf import (
    MotionDistanceCache,
    SdpfParams,
    build_motion_context,
    coherence_threshold,
    directional_ok,
    distill_s2,
    motion_distance,
    pseudo_image,
    rotate_flow_quarter,
    sdpf_run,
    selection_probabilities,
    significant_motion_map,
    significant_set,
)
from videoreseq.synth import back_and_forth_clip, tour_clip


def test_sdpf_params_validation():
    with pytest.raises(BadParams):
        SdpfParams(softmax_temperature=0.0)
    with pytest.raises(BadParams):
        SdpfParams(mu0=-0.1)
    with pytest.raises(BadParams):
        SdpfParams(ne_min=0)
    with pytest.raises(BadParams):
        SdpfParams(max_length=0)


def test_significant_set_selects_and_halves():
    vals = np.full(300, 0.6)
    sel, mu = significant_set(vals, mu0=0.5, ne_min=224)
    assert len(sel) == 300 and mu == 0.5

    low = np.full(300, 0.3)
    sel, mu = significant_set(low, mu0=0.5, ne_min=224)
    assert len(sel) == 300 and mu == 0.25  # halved once to reach the values

    tiny = np.full(10, 1e-9)
    sel, mu = significant_set(tiny, mu0=0.5, ne_min=224)
    assert len(sel) == 0 and mu <= 1e-6  # backed off to the floor, still empty

    rng = np.random.default_rng(0)
    vals = rng.uniform(size=400)
    got, got_mu = significant_set(vals, mu0=0.5, ne_min=224)
    want, want_mu = significant_set_scalar(vals.tolist(), 0.5, 224)
    assert got_mu == want_mu
    assert np.allclose(got, want, atol=0)
    assert np.all(np.diff(got) >= 0)


def test_significant_motion_map_is_elementwise_max():
    a = np.array([[0.1, 0.9], [0.5, 0.2]])
    b = np.array([[0.3, 0.1], [0.5, 0.8]])
    assert np.array_equal(significant_motion_map(a, b),
                          np.array([[0.3, 0.9], [0.5, 0.8]]))
    with pytest.raises(DimensionMismatch):
        significant_motion_map(a, np.zeros((3, 2)))


def test_pseudo_image_hand_case():
    u = np.array([[2.0, 0.0], [0.0, -2.0]])
    v = np.zeros((2, 2))
    flow = FlowField(u=u, v=v)
    m = np.array([[1.0, 1.0], [0.0, 1.0]])
    e = np.array([0.5])  # cutoff 0.5: rows marked except the 0.0 cell
    img = pseudo_image(flow, m, e)
    assert img.shape == (2, 2, 3)
    assert img[0, 0].tolist() == [1.0, 0.5, 1.0]  # moving right
    assert img[0, 1].tolist() == [0.5, 0.5, 1.0]  # significant but still
    assert img[1, 0].tolist() == [0.5, 0.5, 0.0]  # not significant
    assert img[1, 1].tolist() == [0.0, 0.5, 1.0]  # moving left

    neutral = pseudo_image(flow, m, np.array([]))
    assert np.all(neutral[..., 2] == 0.0)
    assert np.all(neutral[..., :2] == 0.5)

    want = np.array(pseudo_image_scalar(
        flow.u.tolist(), flow.v.tolist(), m.tolist(), [0.5]))
    assert np.allclose(img, want, atol=1e-12)

    with pytest.raises(DimensionMismatch):
        pseudo_image(flow, np.zeros((3, 3)), e)


def test_rotate_flow_quarter_is_exact():
    rng = np.random.default_rng(1)
    f = FlowField(u=rng.normal(size=(3, 3)), v=rng.normal(size=(3, 3)))
    r1 = rotate_flow_quarter(f, 1)
    assert np.array_equal(r1.u, -f.v)
    assert np.array_equal(r1.v, f.u)
    r2 = rotate_flow_quarter(f, 2)
    assert np.array_equal(r2.u, -f.u)
    assert np.array_equal(r2.v, -f.v)
    r4 = rotate_flow_quarter(f, 4)
    assert np.array_equal(r4.u, f.u)
    r_minus = rotate_flow_quarter(f, -1)
    r3 = rotate_flow_quarter(f, 3)
    assert np.array_equal(r_minus.u, r3.u)
    assert np.array_equal(r_minus.v, r3.v)


def test_motion_distance_symmetry_and_identity():
    rng = np.random.default_rng(2)
    emb = PixelEmbeddingProvider(side=8)
    a = FlowField(u=rng.normal(size=(16, 16)), v=rng.normal(size=(16, 16)))
    b = FlowField(u=rng.normal(size=(16, 16)), v=rng.normal(size=(16, 16)))
    ab = motion_distance(a, b, emb, ne_min=32)
    ba = motion_distance(b, a, emb, ne_min=32)
    assert abs(ab - ba) < 1e-12
    assert motion_distance(a, a, emb, ne_min=32) == 0.0
    with pytest.raises(DimensionMismatch):
        motion_distance(a, FlowField(u=np.zeros((4, 4)), v=np.zeros((4, 4))), emb)


def test_coherence_threshold_mean_and_rotation_fallback():
    rng = np.random.default_rng(3)
    emb = PixelEmbeddingProvider(side=8)
    fc = FlowField(u=rng.normal(size=(16, 16)), v=rng.normal(size=(16, 16)))
    assert coherence_threshold([0.2, 0.4], fc, emb) == pytest.approx(0.3)
    plus = motion_distance(fc, rotate_flow_quarter(fc, 1), emb)
    minus = motion_distance(fc, rotate_flow_quarter(fc, -1), emb)
    assert coherence_threshold([0.7], fc, emb) == min(plus, minus)
    assert coherence_threshold([], fc, emb) == min(plus, minus)


def test_motion_distance_cache_is_symmetric_and_memoized():
    clip = tour_clip(n=6, size=32, square=8, seed=0)
    params = SdpfParams(ne_min=64)
    ctx = build_motion_context(clip, params, block=8, radius=2)
    cache = MotionDistanceCache(ctx, PixelEmbeddingProvider(side=8), params)
    d = cache.pair(1, 4)
    assert cache.pair(4, 1) == d
    assert len(cache._pairs) == 1
    r = cache.rotation_threshold(2)
    assert cache.rotation_threshold(2) == r


def test_directional_constraint_truth_table():
    xi = math.pi / 3
    fwd = MotionTendency(angle=0.0, valid=True)
    near = MotionTendency(angle=0.5, valid=True)
    far = MotionTendency(angle=math.pi, valid=True)
    invalid = MotionTendency(angle=0.0, valid=False)

    # Inactive when the current frame is outside any segment, or S1 has none.
    assert directional_ok(fwd, far, False, True, True, xi)
    assert directional_ok(fwd, far, True, True, False, xi)
    # Active: candidate must be a segment frame with a close tendency.
    assert directional_ok(fwd, near, True, True, True, xi)
    assert not directional_ok(fwd, far, True, True, True, xi)
    assert not directional_ok(fwd, near, True, False, True, xi)
    assert directional_ok(fwd, near, True, False, True, xi,
                          membership_required=False)
    assert not directional_ok(fwd, invalid, True, True, True, xi)
    assert not directional_ok(invalid, near, True, True, True, xi)


def _small_context(n=10):
    clip = back_and_forth_clip(n=n, size=48, square=8, seed=0, step=3)
    provider = PixelEmbeddingProvider(side=8)
    g = build_graph(provider.embed_all(clip))
    params = SdpfParams(ne_min=64, seed=0)
    ctx = build_motion_context(clip, params, block=8, radius=3)
    return clip, provider, g, params, ctx


def test_distill_s2_respects_constraint_switches():
    from videoreseq.graph import content_candidates

    clip, provider, g, params, ctx = _small_context()
    cache = MotionDistanceCache(ctx, provider, params)
    current = next(
        i for i in range(clip.n)
        if len(content_candidates(g, i, set())) >= 2)
    s1 = content_candidates(g, current, set())
    assert len(s1) >= 2

    both_off = SdpfParams(ne_min=64, disable_cd=True, disable_ct=True)
    free = distill_s2(current, s1, ctx, provider, both_off, cache)
    assert free.candidates.indices == s1.indices

    full = distill_s2(current, s1, ctx, provider, params, cache)
    assert set(full.candidates.indices) <= set(s1.indices)
    for d in full.distances:
        assert d <= full.omega
    want_omega = float(np.mean([cache.pair(current, k) for k in s1.indices]))
    assert full.omega == pytest.approx(want_omega)


def test_selection_probabilities_properties():
    dists = [0.1, 0.5, 2.0]
    p = selection_probabilities(dists, temperature=1.0)
    want = selection_probabilities_scalar(dists, 1.0)
    assert np.all(np.abs(p - np.array(want)) <= 1e-9 * np.maximum(1.0, np.abs(want)))
    assert p.sum() == pytest.approx(1.0)
    assert p[0] > p[1] > p[2]
    flat = selection_probabilities(dists, temperature=1e6)
    assert np.allclose(flat, 1.0 / 3.0, atol=1e-6)
    with pytest.raises(EmptyInput):
        selection_probabilities([])
    with pytest.raises(BadParams):
        selection_probabilities([0.1], temperature=0.0)


def test_build_motion_context_adopts_given_flows():
    clip, provider, g, params, ctx = _small_context(n=6)
    fwd = [estimate_flow(clip.frame(i), clip.frame(i + 1), 8, 3, i, i + 1)
           for i in range(5)]
    bwd = [estimate_flow(clip.frame(i + 1), clip.frame(i), 8, 3, i + 1, i)
           for i in range(5)]
    built = build_motion_context(clip, params, fwd, bwd)
    assert built.n == 6
    # Frame 0 has no backward neighbor: its field is the negated first forward.
    assert np.array_equal(built.backward_flows[0].u, -fwd[0].u)
    assert np.array_equal(built.backward_flows[1].u, bwd[0].u)
    with pytest.raises(DimensionMismatch):
        build_motion_context(clip, params, fwd[:-1])
    with pytest.raises(DimensionMismatch):
        build_motion_context(clip, params, fwd, bwd[:-1])


def test_sdpf_run_input_checks():
    clip, provider, g, params, ctx = _small_context(n=6)
    with pytest.raises(StartOutOfRange):
        sdpf_run(g, 6, ctx, provider, params)
    other = tour_clip(n=5, size=48, square=8, seed=0)
    other_ctx = build_motion_context(other, params, block=8, radius=2)
    with pytest.raises(DimensionMismatch):
        sdpf_run(g, 0, other_ctx, provider, params)


def test_sdpf_run_exhausts_a_two_frame_graph():
    clip = tour_clip(n=2, size=48, square=8, seed=0)
    provider = PixelEmbeddingProvider(side=8)
    params = SdpfParams(ne_min=64, seed=0)
    ctx = build_motion_context(clip, params, block=8, radius=2)
    # Hand-raised eta so the single edge clears the content threshold.
    w = float(np.linalg.norm(provider.embed_image(clip.frame(0))
                             - provider.embed_image(clip.frame(1))))
    g = SRG(weights=np.array([[0.0, w], [w, 0.0]]), eta=w * 1.5)
    path = sdpf_run(g, 0, ctx, provider, params)
    assert path.indices == [0, 1]
    assert path.stop_reason == "exhausted"
    assert len(path.steps) == 1
    assert path.steps[0].probability == 1.0


def test_sdpf_run_honors_max_length():
    clip, provider, g, params, ctx = _small_context()
    capped = SdpfParams(ne_min=64, seed=0, max_length=1)
    path = sdpf_run(g, 0, ctx, provider, capped)
    assert path.indices == [0]
    assert path.stop_reason == "max_length"
    assert path.steps == []


def test_sdpf_run_is_deterministic_and_auditable():
    clip, provider, g, params, ctx = _small_context()
    cache = MotionDistanceCache(ctx, provider, params)
    first = sdpf_run(g, 0, ctx, provider, params, cache)
    second = sdpf_run(g, 0, ctx, provider, params, cache)
    assert first.indices == second.indices
    assert [s.chosen for s in first.steps] == [s.chosen for s in second.steps]
    # The step log retells the path exactly.
    for step, (a, b) in zip(first.steps, zip(first.indices, first.indices[1:])):
        assert (step.source, step.chosen) == (a, b)
        assert step.edge_weight < g.eta
        assert step.motion_distance <= step.omega + 1e-12
        assert 0.0 < step.probability <= 1.0
