"""End-to-end property gate for the whole engine.

Each test here checks one load-bearing guarantee at a pinned tolerance and
prints a single summary line with the measured numbers. Thresholds are
frozen; loosening them is a behavior change, not a test fix.
"""

from __future__ import annotations

import math
import struct
import time

import numpy as np

import oracles
from videoreseq.evaluate import (
    RatingTally,
    frame_difference,
    overlap_measure,
    rating_aggregate,
    stability,
)
from videoreseq.features import LearnedEmbeddingProvider, PixelEmbeddingProvider
from videoreseq.flow import (
    MotionTendency,
    detect_lms,
    estimate_flow,
    motion_tendency,
    normalize_magnitude,
    wrapped_angle_distance,
)
from videoreseq.graph import build_graph, mean_edge_weight, pairwise_distances
from videoreseq.media_io import FlowField, decode_flo, encode_flo
from videoreseq.metric import (
    TrainConfig,
    batch_loss_and_grad,
    build_triplets,
    distance_loss,
    frame_feature_matrix,
    mean_triplet_loss,
    train_metric,
)
from videoreseq.sdpf import (
    MotionDistanceCache,
    SdpfParams,
    build_motion_context,
    pseudo_image,
    sdpf_run,
    selection_probabilities,
    significant_motion_map,
    significant_set,
)
from videoreseq.synth import (
    back_and_forth_clip,
    orbit_clip,
    textured_image,
    tour_clip,
    two_cluster_clip,
)

REL_TOL = 1e-9


def _close(got, want, tol=REL_TOL):
    got = np.asarray(got, dtype=np.float64)
    want = np.asarray(want, dtype=np.float64)
    if got.shape != want.shape:
        return False
    return bool(np.all(np.abs(got - want) <= tol * np.maximum(1.0, np.abs(want))))


def test_formula_kernels_match_scalar_oracles():
    t0 = time.time()
    rng = np.random.default_rng(0)
    per_op = 200

    for i in range(per_op):
        d = int(rng.integers(1, 9))
        r_a, r_p, r_n = rng.normal(scale=1 + i % 5, size=(3, d))
        z = int(rng.integers(0, 2))
        got = distance_loss(r_a, r_p, r_n, z)
        want = oracles.distance_loss_scalar(r_a.tolist(), r_p.tolist(),
                                            r_n.tolist(), z)
        assert _close(got, want), f"distance loss case {i}"

    for i in range(per_op):
        h, w = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        if i % 10 == 0:
            u = np.full((h, w), float(rng.normal()))
            v = np.full((h, w), float(rng.normal()))
        else:
            u = rng.normal(size=(h, w)) * 3
            v = rng.normal(size=(h, w)) * 3
        field = FlowField(u=u, v=v)
        got = normalize_magnitude(field)
        want = oracles.normalize_magnitude_scalar(field.u.tolist(), field.v.tolist())
        assert _close(got, np.array(want)), f"normalize case {i}"

    for i in range(per_op):
        h, w = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        u = rng.normal(size=(h, w)) * 2
        v = rng.normal(size=(h, w)) * 2
        sigma = float(rng.uniform(0.1, 0.9))
        field = FlowField(u=u, v=v)
        got = motion_tendency(field, sigma)
        angle, valid = oracles.motion_tendency_scalar(
            field.u.tolist(), field.v.tolist(), sigma)
        assert got.valid == valid, f"tendency validity case {i}"
        if valid:
            assert _close(got.angle, angle), f"tendency angle case {i}"

    for i in range(per_op):
        h, w = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        a = rng.uniform(size=(h, w))
        b = rng.uniform(size=(h, w))
        got = significant_motion_map(a, b)
        want = oracles.significant_motion_map_scalar(a.tolist(), b.tolist())
        assert _close(got, np.array(want)), f"joint map case {i}"

    for i in range(per_op):
        h, w = int(rng.integers(2, 7)), int(rng.integers(2, 9))
        u = rng.normal(size=(h, w)) * 2
        v = rng.normal(size=(h, w)) * 2
        field = FlowField(u=u, v=v)
        m = rng.uniform(size=(h, w))
        mu0 = float(rng.uniform(0.2, 0.8))
        ne_min = int(rng.integers(1, h * w + 1))
        e, _ = significant_set(m, mu0, ne_min)
        got = pseudo_image(field, m, e)
        want = oracles.pseudo_image_scalar(
            field.u.tolist(), field.v.tolist(), m.tolist(), e.tolist())
        assert _close(got, np.array(want)), f"pseudo image case {i}"

    for i in range(per_op):
        k = int(rng.integers(1, 11))
        dists = rng.uniform(0, 20, size=k)
        temp = float(rng.uniform(0.5, 4.0))
        got = selection_probabilities(dists, temp)
        want = oracles.selection_probabilities_scalar(dists.tolist(), temp)
        assert _close(got, np.array(want)), f"selection case {i}"

    for i in range(per_op):
        n = int(rng.integers(2, 9))
        w = pairwise_distances(rng.normal(size=(n, 4)))
        got = mean_edge_weight(w)
        want = oracles.mean_edge_weight_scalar(w.tolist())
        assert _close(got, want), f"edge mean case {i}"

    for i in range(per_op):
        h, w = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        a = rng.uniform(size=(h, w, 3))
        b = rng.uniform(size=(h, w, 3))
        got = frame_difference(a, b)
        want = oracles.frame_difference_scalar(a.tolist(), b.tolist())
        assert _close(got, want), f"frame difference case {i}"

    for i in range(per_op):
        counts = tuple(int(c) for c in rng.integers(0, 10, size=5))
        raters = max(1, sum(counts))
        counts = counts if sum(counts) == raters else (raters, 0, 0, 0, 0)
        tally = RatingTally(counts, rater_count=raters)
        got = rating_aggregate(tally)
        want = oracles.rating_aggregate_scalar(counts, raters)
        assert _close(got, want), f"rating case {i}"

    dt = time.time() - t0
    assert dt < 10.0, f"oracle sweep took {dt:.1f}s"
    print(f"PASS formula kernels: 9 ops x {per_op} inputs within 1e-9 "
          f"relative in {dt:.1f}s")


def test_segment_detection_matches_exhaustive_enumerator():
    rng = np.random.default_rng(1)
    cases = 500
    for i in range(cases):
        n_pairs = int(rng.integers(1, 40))
        angles = rng.uniform(-math.pi, math.pi, size=n_pairs)
        valids = rng.uniform(size=n_pairs) > 0.15
        ts = [MotionTendency(a, bool(v)) for a, v in zip(angles, valids)]
        got = detect_lms(ts, delta=math.pi / 4, min_window=4)
        want = oracles.lms_mask_enumerated(
            list(angles), [bool(v) for v in valids], math.pi / 4, 4)
        assert got.is_lms.tolist() == want, f"segment case {i}"
    print(f"PASS segment detection: {cases} random sequences (<= 40 frames) "
          f"match the exhaustive enumerator exactly")


def test_block_matcher_recovers_planted_shifts():
    rng = np.random.default_rng(2)
    size, block, radius = 224, 8, 7
    margin = block + radius
    trials = 10
    rates = []
    for _ in range(trials):
        img = textured_image(size, size, rng, blur=3)
        dx = int(rng.integers(-5, 6))
        dy = int(rng.integers(-5, 6))
        shifted = np.roll(img, (dy, dx), axis=(0, 1))
        flow = estimate_flow(img, shifted, block=block, radius=radius)
        interior = (slice(margin, size - margin), slice(margin, size - margin))
        hit = (flow.u[interior] == dx) & (flow.v[interior] == dy)
        rates.append(float(hit.mean()))
        assert rates[-1] >= 0.95, f"shift ({dx},{dy}) recovered {rates[-1]:.3f}"
    print(f"PASS flow recovery: {trials} trials, interior accuracy "
          f"min {min(rates):.3f} (threshold 0.95)")


def test_metric_training_improves_ranking_loss():
    t0 = time.time()
    clip = two_cluster_clip(per_cluster=30, size=48, seed=0)
    cfg = TrainConfig(seed=0, feature_side=16, embed_dim=32,
                      triplets_per_frame=20, max_epochs=25)
    features = frame_feature_matrix(clip, cfg.feature_side)

    eval_rng = np.random.default_rng(99)
    eval_triplets = build_triplets(clip, 400, eval_rng,
                                   cfg.positive_window, cfg.negative_window)

    init_rng = np.random.default_rng(cfg.seed)
    d_in = features.shape[1]
    w0 = init_rng.normal(0.0, 1.0 / math.sqrt(d_in), size=(cfg.embed_dim, d_in))
    b0 = np.zeros(cfg.embed_dim)
    loss_before = mean_triplet_loss(w0, b0, features, eval_triplets)

    trained = train_metric(clip, cfg)
    loss_after = mean_triplet_loss(trained.weight, trained.bias,
                                   features, eval_triplets)
    reduction = (loss_before - loss_after) / loss_before
    assert reduction >= 0.30, (
        f"loss went {loss_before:.4f} -> {loss_after:.4f} ({reduction:.1%})")

    # Analytic gradient against central differences at the 10 strongest
    # coordinates of a small, well-conditioned problem.
    gc_rng = np.random.default_rng(3)
    feats = gc_rng.normal(size=(12, 10))
    feats /= np.linalg.norm(feats, axis=1, keepdims=True)
    w = gc_rng.normal(scale=0.1 / math.sqrt(10), size=(6, 10))
    bias = gc_rng.normal(scale=0.01, size=6)
    idx = gc_rng.integers(0, 12, size=(3, 16))
    x_a, x_p, x_n = feats[idx[0]], feats[idx[1]], feats[idx[2]]
    z = gc_rng.integers(0, 2, size=16).astype(np.float64)
    _, g_w, _ = batch_loss_and_grad(w, bias, x_a, x_p, x_n, z)

    flat = np.argsort(np.abs(g_w).ravel())[::-1][:10]
    h = 1e-5
    worst = 0.0
    for f in flat:
        i, j = divmod(int(f), w.shape[1])
        wp = w.copy()
        wp[i, j] += h
        lp, _, _ = batch_loss_and_grad(wp, bias, x_a, x_p, x_n, z)
        wm = w.copy()
        wm[i, j] -= h
        lm, _, _ = batch_loss_and_grad(wm, bias, x_a, x_p, x_n, z)
        fd = (lp - lm) / (2 * h)
        rel = abs(g_w[i, j] - fd) / max(abs(fd), 1e-12)
        worst = max(worst, rel)
        assert rel <= 1e-4, f"gradient at W[{i},{j}]: {g_w[i, j]} vs {fd}"

    provider = LearnedEmbeddingProvider(trained.weight, trained.bias,
                                        cfg.feature_side)
    vecs = provider.embed_all(clip).vectors.astype(np.float64)
    half = clip.n // 2
    dists = pairwise_distances(vecs)
    iu = np.triu_indices(half, k=1)
    intra = float(np.concatenate([
        dists[:half, :half][iu], dists[half:, half:][iu]]).mean())
    inter = float(dists[:half, half:].mean())
    assert intra < inter, f"intra {intra:.4f} vs inter {inter:.4f}"

    dt = time.time() - t0
    assert dt < 60.0, f"training check took {dt:.1f}s"
    print(f"PASS metric training: loss {loss_before:.4f} -> {loss_after:.4f} "
          f"({reduction:.1%} drop), gradcheck worst rel err {worst:.2e}, "
          f"intra {intra:.4f} < inter {inter:.4f}, {dt:.1f}s")


def test_walk_contracts_hold_across_seeded_runs():
    clip = tour_clip(n=40, size=64, square=12, seed=0)
    provider = PixelEmbeddingProvider(side=16)
    g = build_graph(provider.embed_all(clip))
    base = SdpfParams(seed=0)
    ctx = build_motion_context(clip, base, block=8, radius=7)
    cache = MotionDistanceCache(ctx, provider, base)

    starts = (0, 20)
    paths: dict[int, list] = {s: [] for s in starts}
    runs = 0
    for seed in range(50):
        for start in starts:
            p = sdpf_run(g, start, ctx, provider,
                         SdpfParams(seed=seed), cache=cache)
            runs += 1
            assert len(set(p.indices)) == len(p.indices), "revisited a frame"
            for step in p.steps:
                assert step.edge_weight < g.eta
                assert step.motion_distance <= step.omega + 1e-12
            paths[start].append(p)

    for seed in range(10):
        for start in starts:
            again = sdpf_run(g, start, ctx, provider,
                             SdpfParams(seed=seed), cache=cache)
            assert again.indices == paths[start][seed].indices, "replay diverged"

    distinct_note = []
    for start in starts:
        group = paths[start]
        if group[0].steps and group[0].steps[0].s2_size >= 2:
            distinct = {tuple(p.indices) for p in group}
            assert len(distinct) >= 2, f"no diversity from start {start}"
            distinct_note.append(f"start {start}: {len(distinct)} distinct")
    assert distinct_note, "no start offered a choice on step 1"
    print(f"PASS walk contracts: {runs} seeded runs audited "
          f"(no revisits, weights < eta, distances <= omega), "
          f"replays identical, {'; '.join(distinct_note)}")


def _count_reversals(path, ctx, xi):
    count = 0
    for step in path.steps:
        a, b = step.source, step.chosen
        if not (ctx.lms.is_lms[a] and ctx.lms.is_lms[b]):
            continue
        ta, tb = ctx.tendencies[a], ctx.tendencies[b]
        if not (ta.valid and tb.valid):
            continue
        if wrapped_angle_distance(ta.angle, tb.angle) > xi:
            count += 1
    return count


def test_motion_constraints_shape_walk_quality():
    clip = back_and_forth_clip(n=48, size=64, square=10, seed=2, step=2)
    provider = PixelEmbeddingProvider(side=16)
    g = build_graph(provider.embed_all(clip))
    base = SdpfParams(seed=0)
    ctx = build_motion_context(clip, base, block=8, radius=4)
    cache = MotionDistanceCache(ctx, provider, base)
    assert ctx.lms.segment_count >= 2, "clip must plant linear segments"

    def sweep(**kw):
        reversals = 0
        dists = []
        for seed in range(50):
            p = sdpf_run(g, 0, ctx, provider,
                         SdpfParams(seed=seed, **kw), cache=cache)
            reversals += _count_reversals(p, ctx, SdpfParams().xi)
            dists.extend(s.motion_distance for s in p.steps)
        return reversals, float(np.mean(dists))

    full_rev, full_dist = sweep()
    nocd_rev, _ = sweep(disable_cd=True)
    _, noct_dist = sweep(disable_ct=True)

    assert full_rev == 0, f"full configuration produced {full_rev} reversals"
    assert nocd_rev >= 1, "dropping the directional constraint changed nothing"
    assert noct_dist > full_dist, (
        f"coherence off gave {noct_dist:.4f} <= {full_dist:.4f}")
    print(f"PASS constraint ablations: reversals full=0 vs no-cd={nocd_rev}; "
          f"mean step motion distance full={full_dist:.4f} < "
          f"no-ct={noct_dist:.4f}")


def test_looping_clip_exhausts_early():
    clip = orbit_clip(n=60, size=64, square=10, half=20, step=10, seed=3)
    provider = PixelEmbeddingProvider(side=16)
    g = build_graph(provider.embed_all(clip))
    base = SdpfParams(seed=0)
    ctx = build_motion_context(clip, base, block=8, radius=7)
    cache = MotionDistanceCache(ctx, provider, base)

    limit = int(0.3 * clip.n)
    longest = 0
    runs = 0
    for seed in range(20):
        for start in (0, 15, 30, 45):
            p = sdpf_run(g, start, ctx, provider,
                         SdpfParams(seed=seed), cache=cache)
            runs += 1
            assert p.stop_reason == "empty_S2", p.stop_reason
            assert len(p.indices) <= limit, (
                f"walk covered {len(p.indices)}/{clip.n} frames")
            assert len(set(p.indices)) == len(p.indices)
            for step in p.steps:
                assert step.edge_weight < g.eta
                assert step.motion_distance <= step.omega + 1e-12
            longest = max(longest, len(p.indices))
    print(f"PASS early stop: {runs} runs on a looping clip all ended with "
          f"empty_S2 at <= {longest}/{clip.n} frames (cap {limit})")


def test_score_identities_hold():
    clip = tour_clip(n=12, size=48, square=8, seed=0)
    source = list(range(clip.n))

    self_overlap = overlap_measure(source, source)
    assert self_overlap.delta_o == 100.0
    assert self_overlap.precision == 1.0 and self_overlap.recall == 1.0

    report = stability(clip, source)
    column = [frame_difference(clip.frame(i), clip.frame(i + 1))
              for i in range(clip.n - 1)]
    assert report.differences == column
    assert report.m_d == report.source_m_d

    assert rating_aggregate(RatingTally((0, 0, 0, 0, 11), rater_count=11)) == 1.0
    print("PASS score identities: self-overlap 100%, source stability "
          "reproduces the per-pair column, unanimous top rating scores 1.0")


def test_flow_codec_round_trips_bit_exact():
    rng = np.random.default_rng(4)
    cases = 100
    for i in range(cases):
        h, w = int(rng.integers(1, 13)), int(rng.integers(1, 13))
        flow = FlowField(
            u=(rng.normal(size=(h, w)) * 10).astype(np.float32),
            v=(rng.normal(size=(h, w)) * 10).astype(np.float32),
        )
        back = decode_flo(encode_flo(flow))
        assert back.u.tobytes() == flow.u.tobytes(), f"u mismatch case {i}"
        assert back.v.tobytes() == flow.v.tobytes(), f"v mismatch case {i}"

    golden = struct.pack(
        "<fii", 202021.25, 2, 2
    ) + struct.pack("<8f", 1.5, -0.25, 0.0, 2.0, -3.5, 0.125, 4.0, -1.0)
    flow = decode_flo(golden)
    assert flow.u.tolist() == [[1.5, 0.0], [-3.5, 4.0]]
    assert flow.v.tolist() == [[-0.25, 2.0], [0.125, -1.0]]
    assert encode_flo(flow) == golden
    print(f"PASS flow codec: {cases} random fields and a hand-built golden "
          f"file round-trip bit-exactly")
