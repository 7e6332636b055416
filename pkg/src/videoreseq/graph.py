"""Semantic relation graph over a clip.

A complete weighted graph: one node per frame, edge weight = embedding
distance between the two frames. The content threshold eta is the mean
edge weight; candidates for the next step of a walk are the unvisited
nodes whose edge to the current node falls strictly below it.

The mean can be taken over the n(n-1)/2 distinct edges (default) or
divided by the node count instead; the latter reproduces a stricter
threshold some configurations prefer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllVisited, BadParams, EmptyEmbeddings, IndexOutOfRange
from .media_io import EmbeddingSet

ETA_DIVISORS = ("edges", "nodes")


@dataclass
class SRG:
    weights: np.ndarray  # (n, n) symmetric, zero diagonal
    eta: float
    eta_divisor: str = "edges"

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass
class CandidateSet:
    indices: tuple[int, ...]
    layer_tag: str  # "S1" or "S2"

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices


def pairwise_distances(vectors: np.ndarray) -> np.ndarray:
    """Symmetric Euclidean distance matrix with an exactly zero diagonal."""
    v = np.asarray(vectors, dtype=np.float64)
    n = v.shape[0]
    out = np.zeros((n, n))
    for i in range(n - 1):
        out[i, i + 1:] = np.linalg.norm(v[i + 1:] - v[i], axis=1)
    return out + out.T


def mean_edge_weight(weights: np.ndarray) -> float:
    """Arithmetic mean over the distinct (upper-triangle) edges."""
    w = np.asarray(weights)
    n = w.shape[0]
    if n < 2:
        raise EmptyEmbeddings("need at least two nodes for an edge mean")
    iu = np.triu_indices(n, k=1)
    return float(w[iu].sum() / len(iu[0]))


def build_graph(embeddings: EmbeddingSet, eta_divisor: str = "edges") -> SRG:
    """Build the complete relation graph from per-frame embeddings."""
    if eta_divisor not in ETA_DIVISORS:
        raise BadParams(f"eta_divisor must be one of {ETA_DIVISORS}")
    n = embeddings.n
    if n < 2:
        raise EmptyEmbeddings(f"graph needs >= 2 embeddings, got {n}")
    weights = pairwise_distances(embeddings.vectors)
    iu = np.triu_indices(n, k=1)
    total = float(weights[iu].sum())
    if eta_divisor == "edges":
        eta = total / len(iu[0])
    else:
        eta = total / n
    return SRG(weights=weights, eta=eta, eta_divisor=eta_divisor)


def content_candidates(g: SRG, current: int, visited: set[int]) -> CandidateSet:
    """Unvisited nodes within the content threshold of the current node.

    Raises AllVisited when no unvisited node remains at all; an empty
    result otherwise means every remaining node sits at or beyond eta.
    """
    if not 0 <= current < g.n:
        raise IndexOutOfRange(f"node {current} not in [0, {g.n})")
    remaining = [j for j in range(g.n) if j != current and j not in visited]
    if not remaining:
        raise AllVisited("every node has been visited")
    row = g.weights[current]
    inside = tuple(j for j in remaining if row[j] < g.eta)
    return CandidateSet(indices=inside, layer_tag="S1")


def graph_summary(g: SRG, bins: int = 10) -> dict:
    """Histogram summary used by the service layer."""
    iu = np.triu_indices(g.n, k=1)
    vals = g.weights[iu]
    hist, edges = np.histogram(vals, bins=bins)
    return {
        "n": g.n,
        "eta": g.eta,
        "eta_divisor": g.eta_divisor,
        "histogram": {
            "counts": hist.tolist(),
            "bin_edges": [float(e) for e in edges],
        },
    }
