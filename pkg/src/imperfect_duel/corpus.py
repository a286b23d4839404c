"""Embedding-corpus ingestion: standardization, k-means clustering, and a
synthetic Gaussian-mixture corpus generator used in place of real catalog
data.

Corpus CSVs are headerless numeric rows (comma separated, LF endings).
Standardization uses population variance.  Clustering is Lloyd's algorithm
with k-means++ seeding, at most 50 iterations, stopping when assignments
stabilize.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Corpus", "ingest_corpus", "make_synthetic_corpus", "kmeans"]


@dataclass(frozen=True)
class Corpus:
    items: np.ndarray
    k: int
    assignments: np.ndarray
    centroids: np.ndarray


def _standardize(X: np.ndarray) -> np.ndarray:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    if np.any(std <= 0):
        raise ValueError("constant column cannot be standardized")
    return (X - mean) / std


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = [X[int(rng.integers(n))]]
    for _ in range(1, k):
        d2 = np.min(
            [np.einsum("ij,ij->i", X - c, X - c) for c in centers], axis=0
        )
        total = float(d2.sum())
        if total <= 0:
            centers.append(X[int(rng.integers(n))])
            continue
        probs = d2 / total
        centers.append(X[int(rng.choice(n, p=probs))])
    return np.array(centers)


def _lloyd(
    X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int
) -> tuple[np.ndarray, np.ndarray, float]:
    centroids = _kmeans_pp_init(X, k, rng)
    assignments = np.full(X.shape[0], -1)
    d2 = None
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assignments = np.argmin(d2, axis=1)
        if np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for j in range(k):
            mask = assignments == j
            if np.any(mask):
                centroids[j] = X[mask].mean(axis=0)
    inertia = float(d2[np.arange(X.shape[0]), assignments].sum())
    return assignments, centroids, inertia


def kmeans(
    X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 50, n_init: int = 10
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's iterations with k-means++ seeding and restarts.

    Runs n_init independent initializations and keeps the clustering with
    the lowest inertia; each run converges when assignments stop changing
    or after max_iter sweeps.
    """
    if X.shape[0] < k:
        raise ValueError(f"need at least k={k} rows, have {X.shape[0]}")
    best = None
    for _ in range(n_init):
        assignments, centroids, inertia = _lloyd(X, k, rng, max_iter)
        if best is None or inertia < best[2]:
            best = (assignments, centroids, inertia)
    return best[0], best[1]


@functools.lru_cache(maxsize=8)
def _ingest_cached(path: str, k: int, seed: int) -> Corpus:
    X = np.loadtxt(path, delimiter=",", ndmin=2)
    if not np.all(np.isfinite(X)):
        raise ValueError("corpus contains non-finite values")
    Z = _standardize(X)
    rng = np.random.Generator(np.random.PCG64(seed))
    assignments, centroids = kmeans(Z, k, rng)
    return Corpus(items=Z, k=k, assignments=assignments, centroids=centroids)


def ingest_corpus(path: str | Path, k: int, seed: int) -> Corpus:
    """Load, standardize, and cluster a corpus CSV (cached per arguments)."""
    return _ingest_cached(str(Path(path).resolve()), int(k), int(seed))


def make_synthetic_corpus(
    path: str | Path, N: int, d: int, k_true: int, seed: int
) -> np.ndarray:
    """Write an N x d Gaussian-mixture corpus CSV; returns true labels.

    Component centers are well separated (distance ~ 10 sigma) so that
    clustering with k = k_true recovers the components.
    """
    if N < k_true * 10:
        raise ValueError("need N >= 10 * k_true")
    rng = np.random.Generator(np.random.PCG64(seed))
    while True:
        centers = rng.standard_normal((k_true, d))
        centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        centers *= 10.0
        dists = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
        if k_true == 1 or dists[~np.eye(k_true, dtype=bool)].min() >= 8.0:
            break
    labels = rng.integers(k_true, size=N)
    X = centers[labels] + rng.standard_normal((N, d))
    with open(path, "w", newline="\n") as fh:
        for row in X:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return labels
