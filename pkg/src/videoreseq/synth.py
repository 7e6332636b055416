"""Synthetic clips for tests, demos, and desk experiments.

Every generator is deterministic for a given seed and returns frames
already quantized to the uint8 grid, so writing them out as PNG and
loading them back reproduces the exact same float values.
"""

from __future__ import annotations

import json
import os

import cv2
import numpy as np

from .media_io import FrameSet


def _quantize(frames: np.ndarray) -> np.ndarray:
    return (np.round(np.clip(frames, 0.0, 1.0) * 255.0) / 255.0).astype(np.float32)


def textured_image(height: int, width: int, rng: np.random.Generator,
                   blur: int = 3, low: float = 0.1, high: float = 0.9) -> np.ndarray:
    """Random smooth texture with enough local variation for block matching."""
    img = rng.uniform(low, high, size=(height, width, 3)).astype(np.float32)
    if blur > 1:
        img = cv2.blur(img, (blur, blur))
    return img


def _paste_square(canvas: np.ndarray, patch: np.ndarray, x: int, y: int) -> np.ndarray:
    out = canvas.copy()
    h, w = patch.shape[:2]
    out[y:y + h, x:x + w] = patch
    return out


def square_positions_tour(n: int, size: int, square: int, margin: int = 4,
                          step: int = 2) -> list[tuple[int, int]]:
    """Right, then down, then left: three linear legs over n frames."""
    lo = margin
    hi = size - square - margin
    positions = []
    x, y = lo, lo
    leg = 0
    for _ in range(n):
        positions.append((x, y))
        if leg == 0:
            x += step
            if x >= hi:
                x = hi
                leg = 1
        elif leg == 1:
            y += step
            if y >= hi:
                y = hi
                leg = 2
        else:
            x -= step
            if x <= lo:
                x = lo
    return positions


def square_positions_back_and_forth(n: int, size: int, square: int,
                                    margin: int = 4, step: int = 2) -> list[tuple[int, int]]:
    """Horizontal sweep that reverses at the edges, repeated until n frames."""
    lo = margin
    hi = size - square - margin
    positions = []
    x = lo
    direction = 1
    y = (size - square) // 2
    for _ in range(n):
        positions.append((x, y))
        nxt = x + direction * step
        if nxt > hi or nxt < lo:
            direction = -direction
            nxt = x + direction * step
        x = nxt
    return positions


def square_positions_oscillation(n: int, size: int, square: int,
                                 amplitude: int = 8, step: int = 1) -> list[tuple[int, int]]:
    """Small looping oscillation around the center: the subtle-motion case."""
    center = (size - square) // 2
    y = center
    positions = []
    x = center - amplitude
    direction = 1
    for _ in range(n):
        positions.append((x, y))
        nxt = x + direction * step
        if nxt > center + amplitude or nxt < center - amplitude:
            direction = -direction
            nxt = x + direction * step
        x = nxt
    return positions


def square_positions_orbit(n: int, size: int, square: int,
                           half: int = 16, step: int = 8) -> list[tuple[int, int]]:
    """Rectangular orbit around the center, repeated until n frames.

    The square revisits the exact same positions every cycle, so the clip
    loops with a small inter-frame change: the subtle looping case that
    legitimately exhausts a walk early.
    """
    cx = (size - square) // 2
    cy = (size - square) // 2
    cycle: list[tuple[int, int]] = []
    for dx in range(-half, half, step):  # top edge, moving right
        cycle.append((cx + dx, cy - half))
    for dy in range(-half, half, step):  # right edge, moving down
        cycle.append((cx + half, cy + dy))
    for dx in range(half, -half, -step):  # bottom edge, moving left
        cycle.append((cx + dx, cy + half))
    for dy in range(half, -half, -step):  # left edge, moving up
        cycle.append((cx - half, cy + dy))
    return [cycle[i % len(cycle)] for i in range(n)]


def moving_square_clip(
    positions: list[tuple[int, int]],
    size: int = 64,
    square: int = 12,
    seed: int = 0,
) -> FrameSet:
    """Render a textured square sliding over a static textured background."""
    rng = np.random.default_rng(seed)
    background = textured_image(size, size, rng, blur=3, low=0.15, high=0.55)
    patch = textured_image(square, square, rng, blur=2, low=0.6, high=1.0)
    frames = [
        _paste_square(background, patch, x, y) for x, y in positions
    ]
    return FrameSet(frames=_quantize(np.stack(frames)))


def tour_clip(n: int = 40, size: int = 64, square: int = 12, seed: int = 0) -> FrameSet:
    return moving_square_clip(
        square_positions_tour(n, size, square), size=size, square=square, seed=seed
    )


def back_and_forth_clip(n: int = 48, size: int = 64, square: int = 10,
                        seed: int = 0, step: int = 2) -> FrameSet:
    return moving_square_clip(
        square_positions_back_and_forth(n, size, square, step=step),
        size=size, square=square, seed=seed,
    )


def oscillation_clip(n: int = 48, size: int = 64, square: int = 10,
                     amplitude: int = 8, seed: int = 0) -> FrameSet:
    return moving_square_clip(
        square_positions_oscillation(n, size, square, amplitude=amplitude),
        size=size, square=square, seed=seed,
    )


def orbit_clip(n: int = 48, size: int = 64, square: int = 8,
               half: int = 16, step: int = 8, seed: int = 0) -> FrameSet:
    return moving_square_clip(
        square_positions_orbit(n, size, square, half=half, step=step),
        size=size, square=square, seed=seed,
    )


def two_cluster_clip(per_cluster: int = 30, size: int = 48, seed: int = 0,
                     noise: float = 0.02) -> FrameSet:
    """Two visually distinct scenes with per-frame noise, concatenated.

    Within a cluster frames differ only by noise (high PSNR); across
    clusters the base scene differs (low PSNR).
    """
    rng = np.random.default_rng(seed)
    base_a = textured_image(size, size, rng, blur=4, low=0.1, high=0.5)
    base_b = textured_image(size, size, rng, blur=4, low=0.5, high=0.9)
    frames = []
    for base in (base_a, base_b):
        for _ in range(per_cluster):
            jitter = rng.uniform(-noise, noise, size=base.shape).astype(np.float32)
            frames.append(np.clip(base + jitter, 0.0, 1.0))
    return FrameSet(frames=_quantize(np.stack(frames)))


def save_clip(frame_set: FrameSet, out_dir: str, fps: float = 12.0) -> str:
    """Write frames as PNGs plus a manifest JSON; returns the manifest path."""
    frames_dir = os.path.join(out_dir, "frames")
    os.makedirs(frames_dir, exist_ok=True)
    for i, frame in enumerate(frame_set.frames):
        bgr = cv2.cvtColor(
            (np.round(frame * 255.0)).astype(np.uint8), cv2.COLOR_RGB2BGR
        )
        cv2.imwrite(os.path.join(frames_dir, f"frame_{i:04d}.png"), bgr)
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump({"frames": "frames", "fps": fps}, fh, indent=2)
        fh.write("\n")
    return manifest_path
