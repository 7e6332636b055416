"""Learnable frame distance.

A single affine map r = W x + b over pixel features is trained so that
embedding distances order frame pairs the way pixel-level fidelity does.
Each training triplet (anchor, positive, negative) carries a label z set by
comparing PSNR: z = 1 when the negative is pixel-farther from the anchor
than the positive is. The loss is a logistic cross-entropy on the distance
gap,

    xi = sigmoid(||r_a - r_n|| - ||r_a - r_p||)
    L  = -z * log(xi) + (z - 1) * log(1 - xi)

so minimizing it pulls the anchor toward whichever frame PSNR says is
closer. Pairs with exactly equal PSNR give no usable label and are dropped.

Trained parameters persist through the embedding container format as a
(D_in + 1) x D_out matrix: transposed weight on top, bias as the last row,
provider tag "builtin-learned".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoValidTriplets, TooFewFrames
from .features import extract_pixel_feature, psnr
from .media_io import EmbeddingSet, FrameSet

XI_CLAMP = 1e-7


@dataclass
class Triplet:
    anchor: int
    positive: int
    negative: int
    z: int


@dataclass
class LearnedEmbedding:
    weight: np.ndarray  # (D_out, D_in)
    bias: np.ndarray  # (D_out,)
    epochs_run: int = 0
    final_loss: float = math.nan

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float32)
        self.bias = np.asarray(self.bias, dtype=np.float32)
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DimensionMismatch("weight must be (D_out, D_in) with matching bias")


@dataclass
class TrainConfig:
    batch_size: int = 8
    learning_rate: float = 1e-3
    early_stop_patience: int = 10
    lr_patience: int = 3
    max_epochs: int = 60
    seed: int = 0
    feature_side: int = 32
    embed_dim: int = 128
    triplets_per_frame: int = 50
    triplet_count: int | None = None
    validation_fraction: float = 0.1
    positive_window: int = 3
    negative_window: int = 8
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.early_stop_patience < 1 or self.lr_patience < 1:
            raise ValueError("patience values must be >= 1")


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def distance_loss(r_a: np.ndarray, r_p: np.ndarray, r_n: np.ndarray, z: int) -> float:
    """Cross-entropy on the embedding distance gap for one labeled triplet.

    xi is clamped to [1e-7, 1 - 1e-7] so the loss stays finite in
    saturation; equidistant embeddings give log(2) regardless of z.
    """
    r_a = np.asarray(r_a, dtype=np.float64)
    r_p = np.asarray(r_p, dtype=np.float64)
    r_n = np.asarray(r_n, dtype=np.float64)
    if not (r_a.shape == r_p.shape == r_n.shape):
        raise DimensionMismatch("triplet embeddings must share one shape")
    gap = np.linalg.norm(r_a - r_n) - np.linalg.norm(r_a - r_p)
    xi = float(np.clip(sigmoid(gap), XI_CLAMP, 1.0 - XI_CLAMP))
    return -z * math.log(xi) + (z - 1) * math.log(1.0 - xi)


def _label_from_psnr(frames: np.ndarray, a: int, p: int, n: int) -> int | None:
    """z = 1 when the negative is pixel-farther (lower PSNR); None on a tie."""
    psnr_an = psnr(frames[a], frames[n])
    psnr_ap = psnr(frames[a], frames[p])
    if psnr_an == psnr_ap:
        return None
    return 1 if psnr_an < psnr_ap else 0


def build_triplets(
    frame_set: FrameSet,
    count: int,
    rng: np.random.Generator,
    positive_window: int = 3,
    negative_window: int = 8,
) -> list[Triplet]:
    """Sample labeled triplets from a clip.

    Anchors are uniform; positives come from the anchor's temporal
    neighborhood (within +/- positive_window); negatives from outside
    +/- negative_window, falling back to any remaining index on short
    clips. Labels come from PSNR, so a role assignment that turns out
    pixel-reversed simply gets z = 1. Tied PSNR drops the sample.
    """
    n = frame_set.n
    if n < 3:
        raise TooFewFrames(f"triplet sampling needs >= 3 frames, got {n}")
    frames = frame_set.frames
    out: list[Triplet] = []
    attempts = 0
    max_attempts = max(20 * count, 100)
    while len(out) < count and attempts < max_attempts:
        attempts += 1
        a = int(rng.integers(0, n))
        near = [j for j in range(max(0, a - positive_window),
                                 min(n, a + positive_window + 1)) if j != a]
        p = int(near[rng.integers(0, len(near))])
        far = [j for j in range(n) if abs(j - a) > negative_window and j != p]
        if not far:
            far = [j for j in range(n) if j not in (a, p)]
        if not far:
            continue
        neg = int(far[rng.integers(0, len(far))])
        z = _label_from_psnr(frames, a, p, neg)
        if z is None:
            continue
        out.append(Triplet(anchor=a, positive=p, negative=neg, z=z))
    if not out:
        raise NoValidTriplets("every sampled triplet had tied PSNR")
    return out


def _gather(features: np.ndarray, triplets: list[Triplet]):
    idx_a = np.array([t.anchor for t in triplets])
    idx_p = np.array([t.positive for t in triplets])
    idx_n = np.array([t.negative for t in triplets])
    z = np.array([t.z for t in triplets], dtype=np.float64)
    return features[idx_a], features[idx_p], features[idx_n], z


def batch_loss_and_grad(
    weight: np.ndarray,
    bias: np.ndarray,
    x_a: np.ndarray,
    x_p: np.ndarray,
    x_n: np.ndarray,
    z: np.ndarray,
):
    """Mean triplet loss over a batch plus analytic gradients for W and b.

    Distances are translation invariant, so the bias gradient cancels to
    zero; it is still accumulated explicitly to keep the math auditable.
    """
    r_a = x_a @ weight.T + bias
    r_p = x_p @ weight.T + bias
    r_n = x_n @ weight.T + bias
    diff_an = r_a - r_n
    diff_ap = r_a - r_p
    d_an = np.linalg.norm(diff_an, axis=1)
    d_ap = np.linalg.norm(diff_ap, axis=1)
    xi = sigmoid(d_an - d_ap)
    xi_c = np.clip(xi, XI_CLAMP, 1.0 - XI_CLAMP)
    losses = -z * np.log(xi_c) + (z - 1.0) * np.log(1.0 - xi_c)
    loss = float(np.mean(losses))

    b = x_a.shape[0]
    g = (xi - z) / b  # dL/d(gap), averaged
    # Unit direction vectors; zero-distance pairs contribute no gradient.
    e_an = np.where(d_an[:, None] > 0, diff_an / np.maximum(d_an, 1e-300)[:, None], 0.0)
    e_ap = np.where(d_ap[:, None] > 0, diff_ap / np.maximum(d_ap, 1e-300)[:, None], 0.0)
    d_ra = g[:, None] * (e_an - e_ap)
    d_rp = g[:, None] * e_ap
    d_rn = -g[:, None] * e_an
    grad_w = d_ra.T @ x_a + d_rp.T @ x_p + d_rn.T @ x_n
    grad_b = d_ra.sum(axis=0) + d_rp.sum(axis=0) + d_rn.sum(axis=0)
    return loss, grad_w, grad_b


def mean_triplet_loss(weight, bias, features, triplets) -> float:
    x_a, x_p, x_n, z = _gather(features, triplets)
    loss, _, _ = batch_loss_and_grad(np.asarray(weight, dtype=np.float64),
                                     np.asarray(bias, dtype=np.float64),
                                     x_a, x_p, x_n, z)
    return loss


def frame_feature_matrix(frame_set: FrameSet, side: int) -> np.ndarray:
    return np.stack([extract_pixel_feature(f, side) for f in frame_set.frames])


def train_metric(frame_set: FrameSet, cfg: TrainConfig | None = None) -> LearnedEmbedding:
    """Fit the affine embedding map with Adam.

    Deterministic for a fixed seed: initialization, triplet sampling,
    shuffling, and scheduling all draw from one seeded generator. The best
    validation checkpoint is what gets returned; the learning rate halves
    after lr_patience epochs without improvement and training stops after
    early_stop_patience of them.
    """
    cfg = cfg or TrainConfig()
    rng = np.random.default_rng(cfg.seed)
    features = frame_feature_matrix(frame_set, cfg.feature_side)
    count = cfg.triplet_count or cfg.triplets_per_frame * frame_set.n
    triplets = build_triplets(frame_set, count, rng,
                              cfg.positive_window, cfg.negative_window)

    perm = rng.permutation(len(triplets))
    n_val = int(round(cfg.validation_fraction * len(triplets)))
    val = [triplets[i] for i in perm[:n_val]]
    train = [triplets[i] for i in perm[n_val:]] or list(val)

    d_in = features.shape[1]
    weight = rng.normal(0.0, 1.0 / math.sqrt(d_in), size=(cfg.embed_dim, d_in))
    bias = np.zeros(cfg.embed_dim)

    beta1, beta2 = cfg.adam_betas
    m_w = np.zeros_like(weight)
    v_w = np.zeros_like(weight)
    m_b = np.zeros_like(bias)
    v_b = np.zeros_like(bias)
    lr = cfg.learning_rate
    step = 0

    def evaluate(ts):
        return mean_triplet_loss(weight, bias, features, ts) if ts else math.inf

    best_loss = evaluate(val or train)
    best_w = weight.copy()
    best_b = bias.copy()
    since_improve = 0
    since_lr_drop = 0
    epochs_run = 0

    for epoch in range(cfg.max_epochs):
        epochs_run = epoch + 1
        order = rng.permutation(len(train))
        for lo in range(0, len(train), cfg.batch_size):
            batch = [train[i] for i in order[lo:lo + cfg.batch_size]]
            x_a, x_p, x_n, z = _gather(features, batch)
            _, g_w, g_b = batch_loss_and_grad(weight, bias, x_a, x_p, x_n, z)
            step += 1
            m_w = beta1 * m_w + (1 - beta1) * g_w
            v_w = beta2 * v_w + (1 - beta2) * g_w * g_w
            m_b = beta1 * m_b + (1 - beta1) * g_b
            v_b = beta2 * v_b + (1 - beta2) * g_b * g_b
            m_w_hat = m_w / (1 - beta1 ** step)
            v_w_hat = v_w / (1 - beta2 ** step)
            m_b_hat = m_b / (1 - beta1 ** step)
            v_b_hat = v_b / (1 - beta2 ** step)
            weight -= lr * m_w_hat / (np.sqrt(v_w_hat) + cfg.adam_eps)
            bias -= lr * m_b_hat / (np.sqrt(v_b_hat) + cfg.adam_eps)

        val_loss = evaluate(val or train)
        if val_loss < best_loss:
            best_loss = val_loss
            best_w = weight.copy()
            best_b = bias.copy()
            since_improve = 0
            since_lr_drop = 0
        else:
            since_improve += 1
            since_lr_drop += 1
            if since_lr_drop >= cfg.lr_patience:
                lr *= 0.5
                since_lr_drop = 0
            if since_improve >= cfg.early_stop_patience:
                break

    return LearnedEmbedding(weight=best_w, bias=best_b,
                            epochs_run=epochs_run, final_loss=float(best_loss))


def learned_distance(v_i: np.ndarray, v_j: np.ndarray) -> float:
    """Euclidean distance between two embeddings from one provider."""
    v_i = np.asarray(v_i, dtype=np.float64)
    v_j = np.asarray(v_j, dtype=np.float64)
    if v_i.shape != v_j.shape:
        raise DimensionMismatch(f"embedding shapes differ: {v_i.shape} vs {v_j.shape}")
    return float(np.linalg.norm(v_i - v_j))


def embedding_to_container(learned: LearnedEmbedding) -> EmbeddingSet:
    """Pack learned parameters into the container layout (W^T over bias row)."""
    stacked = np.vstack([learned.weight.T, learned.bias[None, :]])
    return EmbeddingSet(vectors=stacked.astype(np.float32), provider_tag="builtin-learned")


def container_to_embedding(eset: EmbeddingSet) -> LearnedEmbedding:
    """Inverse of embedding_to_container."""
    if eset.n < 2:
        raise DimensionMismatch("parameter container needs at least two rows")
    weight = eset.vectors[:-1].T
    bias = eset.vectors[-1]
    return LearnedEmbedding(weight=weight, bias=bias)
