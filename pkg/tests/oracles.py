"""Independent scalar reimplementations used as test oracles.

Everything here is written with plain Python loops and the math module,
deliberately avoiding the vectorized numpy paths of the package under
test. Slow on purpose; correctness is the only goal.
"""

from __future__ import annotations

import math


def sigmoid_scalar(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def distance_loss_scalar(r_a, r_p, r_n, z: int) -> float:
    d_an = math.sqrt(sum((a - b) ** 2 for a, b in zip(r_a, r_n)))
    d_ap = math.sqrt(sum((a - b) ** 2 for a, b in zip(r_a, r_p)))
    xi = sigmoid_scalar(d_an - d_ap)
    xi = min(max(xi, 1e-7), 1.0 - 1e-7)
    return -z * math.log(xi) + (z - 1) * math.log(1.0 - xi)


def normalize_magnitude_scalar(u_rows, v_rows):
    mags = [
        [math.hypot(u, v) for u, v in zip(ur, vr)]
        for ur, vr in zip(u_rows, v_rows)
    ]
    flat = [m for row in mags for m in row]
    lo, hi = min(flat), max(flat)
    if hi == lo:
        return [[0.0 for _ in row] for row in mags]
    return [[(m - lo) / (hi - lo) for m in row] for row in mags]


def motion_tendency_scalar(u_rows, v_rows, sigma: float):
    norm = normalize_magnitude_scalar(u_rows, v_rows)
    sum_u = sum_v = 0.0
    count = 0
    for y, row in enumerate(norm):
        for x, m in enumerate(row):
            if m > sigma:
                sum_u += u_rows[y][x]
                sum_v += v_rows[y][x]
                count += 1
    if count == 0:
        return 0.0, False
    return math.atan2(sum_v / count, sum_u / count), True


def significant_motion_map_scalar(a_rows, b_rows):
    return [
        [max(a, b) for a, b in zip(ar, br)]
        for ar, br in zip(a_rows, b_rows)
    ]


def significant_set_scalar(values, mu0: float, ne_min: int):
    mu = float(mu0)
    selected = sorted(v for v in values if v > mu)
    while len(selected) < ne_min and mu > 1e-6:
        mu /= 2.0
        selected = sorted(v for v in values if v > mu)
    return selected, mu


def pseudo_image_scalar(u_rows, v_rows, m_rows, e_sorted):
    cutoff = e_sorted[0] if e_sorted else math.inf
    out = []
    for y, m_row in enumerate(m_rows):
        row = []
        for x, m in enumerate(m_row):
            u, v = u_rows[y][x], v_rows[y][x]
            mag = math.hypot(u, v)
            if m >= cutoff:
                if mag > 0:
                    row.append([u / (2.0 * mag) + 0.5, v / (2.0 * mag) + 0.5, 1.0])
                else:
                    row.append([0.5, 0.5, 1.0])
            else:
                row.append([0.5, 0.5, 0.0])
        out.append(row)
    return out


def selection_probabilities_scalar(dists, temperature: float):
    exps = [math.exp(-d / temperature) for d in dists]
    total = sum(exps)
    return [e / total for e in exps]


def mean_edge_weight_scalar(weight_rows) -> float:
    n = len(weight_rows)
    total = 0.0
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            total += weight_rows[i][j]
            count += 1
    return total / count


def frame_difference_scalar(a, b) -> float:
    total = 0.0
    count = 0
    for ra, rb in zip(a, b):
        for pa, pb in zip(ra, rb):
            for ca, cb in zip(pa, pb):
                total += (float(ca) - float(cb)) ** 2
                count += 1
    return math.sqrt(total / count)


def rating_aggregate_scalar(counts, rater_count: int) -> float:
    weighted = sum(s * n for s, n in zip(range(1, 6), counts))
    return weighted / (5.0 * rater_count)


def psnr_scalar(a, b) -> float:
    total = 0.0
    count = 0
    for ra, rb in zip(a, b):
        for pa, pb in zip(ra, rb):
            for ca, cb in zip(pa, pb):
                total += (float(ca) - float(cb)) ** 2
                count += 1
    mse = total / count
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def wrapped_distance_scalar(t1: float, t2: float) -> float:
    d = abs(t1 - t2) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def lms_mask_enumerated(angles, valids, delta: float, min_window: int):
    """Every (start, end) window checked from scratch: the O(n^3) reference.

    Takes per-pair tendencies (n-1 of them), appends the predecessor's for
    the final frame, and marks every frame covered by some window of at
    least min_window frames whose tendencies are all valid and within
    delta of the window's first.
    """
    angles = list(angles) + [angles[-1]]
    valids = list(valids) + [valids[-1]]
    n = len(angles)
    marked = [False] * n
    for start in range(n):
        for end in range(start + min_window - 1, n):
            ok = True
            for k in range(start, end + 1):
                if not valids[k]:
                    ok = False
                    break
                if wrapped_distance_scalar(angles[start], angles[k]) > delta:
                    ok = False
                    break
            if ok:
                for k in range(start, end + 1):
                    marked[k] = True
    return marked
