"""Clustering primitives: k-means, spectral clustering, Jaccard baseline.

kmeans and spectral_cluster operate on real-valued point rows (GCN
embeddings in the pipeline); baseline_hierarchical is the trace-overlap
comparison partitioner that needs no learned embedding at all.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .metrics import Partition
from .trace_model import ApplicationModel, CallGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClusterResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int
    # inertia after each assignment phase; Lloyd guarantees non-increasing
    inertia_trace: tuple[float, ...]

    @property
    def k(self) -> int:
        return self.centers.shape[0]


def _squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centers by squared-distance sampling."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    for i in range(1, k):
        d2 = _squared_distances(points, centers[:i]).min(axis=1)
        total = d2.sum()
        if total == 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers[i] = points[idx]
    return centers


def kmeans(
    points: np.ndarray,
    k: int,
    seed: int | np.random.SeedSequence,
    max_iter: int = 100,
    tol: float = 1e-6,
) -> ClusterResult:
    """Lloyd's algorithm with k-means++ initialization.

    Deterministic for a fixed seed.  An empty cluster (possible with
    duplicate points) is re-seeded at the point farthest from its
    current center.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n = points.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds number of points {n}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, k, rng)

    labels = np.zeros(n, dtype=np.int64)
    trace: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = _squared_distances(points, centers)
        labels = d2.argmin(axis=1)
        trace.append(float(d2[np.arange(n), labels].sum()))

        new_centers = centers.copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centers[j] = points[mask].mean(axis=0)
            else:
                farthest = d2[np.arange(n), labels].argmax()
                new_centers[j] = points[farthest]
                labels[farthest] = j
        shift = np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        centers = new_centers
        if shift < tol:
            break

    d2 = _squared_distances(points, centers)
    labels = d2.argmin(axis=1)
    labels, centers = _fill_empty_clusters(points, labels, centers)
    inertia = float(((points - centers[labels]) ** 2).sum())
    return ClusterResult(
        labels=labels, centers=centers, inertia=inertia, n_iter=n_iter,
        inertia_trace=tuple(trace),
    )


def _fill_empty_clusters(
    points: np.ndarray, labels: np.ndarray, centers: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Re-seed each empty cluster at the farthest point of a non-singleton one."""
    k = centers.shape[0]
    for j in range(k):
        if np.any(labels == j):
            continue
        d = ((points - centers[labels]) ** 2).sum(axis=1)
        counts = np.bincount(labels, minlength=k)
        d[counts[labels] <= 1] = -1.0
        src = int(d.argmax())
        labels[src] = j
        centers[j] = points[src]
    return labels, centers


def _gaussian_affinity(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    n = points.shape[0]
    if n > 1:
        iu = np.triu_indices(n, k=1)
        sigma = float(np.median(np.sqrt(d2[iu])))
    else:
        sigma = 0.0
    if sigma == 0.0:
        sigma = 1.0
    return np.exp(-d2 / (2 * sigma**2))


def spectral_cluster(
    points: np.ndarray, k: int, seed: int | np.random.SeedSequence
) -> ClusterResult:
    """Normalized spectral clustering of point rows.

    Gaussian affinity with median-distance bandwidth, symmetric
    normalized Laplacian, k smallest eigenvectors (deterministic sign),
    L2 row normalization, then kmeans in eigenvector space.  A failed
    eigendecomposition falls back to kmeans on the raw points.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds number of points {n}")

    W = _gaussian_affinity(points)
    inv_sqrt = 1.0 / np.sqrt(W.sum(axis=1))
    L = np.eye(n) - W * inv_sqrt[:, None] * inv_sqrt[None, :]
    try:
        eigvals, eigvecs = np.linalg.eigh(L)
        if not (np.isfinite(eigvals).all() and np.isfinite(eigvecs).all()):
            raise np.linalg.LinAlgError("non-finite eigendecomposition")
    except np.linalg.LinAlgError as exc:
        log.warning("spectral eigendecomposition failed (%s); falling back to kmeans", exc)
        return kmeans(points, k, seed)

    U = eigvecs[:, np.argsort(eigvals)[:k]].copy()
    for col in range(U.shape[1]):
        nonzero = np.nonzero(np.abs(U[:, col]) > 1e-12)[0]
        if nonzero.size and U[nonzero[0], col] < 0:
            U[:, col] = -U[:, col]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    U = np.divide(U, norms, out=U, where=norms > 0)
    return kmeans(U, k, seed)


def _jaccard_distance(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return 1.0 - len(a & b) / union


def baseline_hierarchical(model: ApplicationModel, graph: CallGraph, k: int) -> Partition:
    """Agglomerative average-linkage clustering under Jaccard distance.

    Each class is represented by the set of entry points whose traces
    contain it.  Ties between merge candidates break on the smallest
    cluster-position pair, making the dendrogram deterministic.
    """
    n = len(graph.nodes)
    if k > n:
        raise ValueError(f"k={k} exceeds number of classes {n}")

    ep_sets = []
    for node in graph.nodes:
        members = frozenset(
            j for j, ep in enumerate(model.entry_points)
            if any(node in call for call in ep.calls)
        )
        ep_sets.append(members)
    base = np.zeros((n, n))
    for i, j in combinations(range(n), 2):
        base[i, j] = base[j, i] = _jaccard_distance(ep_sets[i], ep_sets[j])

    clusters: list[list[int]] = [[i] for i in range(n)]
    while len(clusters) > k:
        best = None
        for i, j in combinations(range(len(clusters)), 2):
            d = float(np.mean([base[a, b] for a in clusters[i] for b in clusters[j]]))
            if best is None or (d, i, j) < best:
                best = (d, i, j)
        _, i, j = best
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]

    labels = np.empty(n, dtype=np.int64)
    for cid, members in enumerate(clusters):
        for m in members:
            labels[m] = cid
    return Partition.from_labels(graph.nodes, labels.tolist())
