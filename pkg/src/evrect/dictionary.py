"""Dictionary learning by k-means and per-window match histograms.

Clustering is deterministic for a fixed seed: k-means++ seeding from a
seeded generator, Lloyd iterations with lowest-index tie-breaking, and
empty clusters keeping their previous centroid.  Exact duplicate
centroids are collapsed (first occurrence wins) so the tree downstream
can hold one entry per leaf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, EvrectError
from .kdtree import KdTree, descend_batch

_ASSIGN_BLOCK = 1 << 22  # floats per distance block, keeps memory flat


@dataclass(frozen=True)
class Dictionary:
    centroids: np.ndarray        # (K, d')
    feature_space: str           # "rect" | "pca-rect" | "vpca-rect"
    inertia_history: tuple[float, ...] = ()

    @property
    def k(self) -> int:
        return len(self.centroids)


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray  # (K,) match counts
    window_size: int    # events per window


def _assign(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest centroid per sample and the squared distance to it."""
    n = len(x)
    k = len(centers)
    labels = np.empty(n, dtype=np.int64)
    best = np.empty(n, dtype=np.float64)
    c2 = np.einsum("ij,ij->i", centers, centers)
    chunk = max(1, _ASSIGN_BLOCK // max(k, 1))
    for s in range(0, n, chunk):
        blk = x[s : s + chunk]
        d = blk @ centers.T
        d *= -2.0
        d += c2
        j = np.argmin(d, axis=1)
        labels[s : s + chunk] = j
        x2 = np.einsum("ij,ij->i", blk, blk)
        best[s : s + chunk] = d[np.arange(len(blk)), j] + x2
    np.maximum(best, 0.0, out=best)
    return labels, best


def learn(
    samples: np.ndarray,
    k: int,
    seed: int,
    feature_space: str = "rect",
    max_iter: int = 100,
    tol: float = 1e-4,
) -> Dictionary:
    """Cluster sampled descriptors into a K-entry dictionary."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("samples must be a 2-D array")
    if k < 2:
        raise DataError("dictionary size must be at least 2")
    if len(x) < k:
        raise DataError(f"{len(x)} samples cannot seed {k} clusters")
    rng = np.random.default_rng(seed)

    centers = np.empty((k, x.shape[1]), dtype=np.float64)
    centers[0] = x[rng.integers(len(x))]
    diff = x - centers[0]
    d2 = np.einsum("ij,ij->i", diff, diff)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            idx = rng.choice(len(x), p=d2 / total)
        else:
            idx = rng.integers(len(x))
        centers[j] = x[idx]
        diff = x - centers[j]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)

    history: list[float] = []
    prev = None
    for _ in range(max_iter):
        labels, dist2 = _assign(x, centers)
        inertia = float(dist2.sum())
        if prev is not None and inertia > prev * (1.0 + 1e-9) + 1e-9:
            raise EvrectError("clustering inertia increased between iterations")
        history.append(inertia)
        counts = np.bincount(labels, minlength=k)
        sums = np.empty_like(centers)
        for dim in range(x.shape[1]):
            sums[:, dim] = np.bincount(labels, weights=x[:, dim], minlength=k)
        nonempty = counts > 0
        centers[nonempty] = sums[nonempty] / counts[nonempty, None]
        if prev is not None and prev > 0.0 and (prev - inertia) / prev < tol:
            break
        prev = inertia

    _, first_seen = np.unique(centers, axis=0, return_index=True)
    keep = np.sort(first_seen)
    return Dictionary(
        centroids=centers[keep].copy(),
        feature_space=feature_space,
        inertia_history=tuple(history),
    )


def accumulate(tree: KdTree, descriptors: np.ndarray, window_size: int) -> list[Histogram]:
    """Descend descriptors and bin leaf matches into non-overlapping windows.

    A window size of 0 means one histogram over the whole sequence; a
    trailing partial window is dropped otherwise.
    """
    if window_size < 0:
        raise DataError("window size must be non-negative")
    desc = np.asarray(descriptors, dtype=np.float64)
    if len(desc) == 0:
        return []
    leaves = descend_batch(tree, desc)
    return windows_from_leaves(leaves, tree.n_points, window_size)


def windows_from_leaves(leaves: np.ndarray, k: int, window_size: int) -> list[Histogram]:
    """Window the precomputed leaf-index sequence (see accumulate)."""
    if window_size == 0:
        if len(leaves) == 0:
            return []
        counts = np.bincount(leaves, minlength=k)
        return [Histogram(counts=counts, window_size=len(leaves))]
    out = []
    for s in range(0, len(leaves) - window_size + 1, window_size):
        counts = np.bincount(leaves[s : s + window_size], minlength=k)
        out.append(Histogram(counts=counts, window_size=window_size))
    return out
