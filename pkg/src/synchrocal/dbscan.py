"""Density-based clustering (DBSCAN) with deterministic labeling.

Neighborhoods are closed Euclidean balls and include the point itself.
Clusters are numbered in order of their smallest core-point index; a
border point within reach of several clusters joins the cluster of the
lowest-indexed core point that reaches it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput

OUTLIER = -1
CORE, REACHABLE, NOISE = "core", "reachable", "outlier"


@dataclass(frozen=True)
class DbscanConfig:
    eps: float
    min_pts: int = 3

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if self.min_pts < 1:
            raise ValueError(f"min_pts must be >= 1, got {self.min_pts}")


@dataclass(frozen=True)
class Clustering:
    labels: np.ndarray
    point_roles: tuple[str, ...]

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)

    @property
    def outliers(self) -> np.ndarray:
        return np.flatnonzero(self.labels == OUTLIER)

    def main_cluster(self) -> int:
        """Id of the largest cluster (lowest id on ties), or OUTLIER if none."""
        if self.n_clusters == 0:
            return OUTLIER
        sizes = np.bincount(self.labels[self.labels >= 0], minlength=self.n_clusters)
        return int(np.argmax(sizes))


def _as_points(points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput("no points to cluster")
    if not np.all(np.isfinite(X)):
        raise ValueError("points must be finite")
    return X


def neighborhoods(points, eps: float) -> np.ndarray:
    """Boolean adjacency: ``dist(p, q) <= eps`` (diagonal is True)."""
    X = _as_points(points)
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1)) <= eps


def cluster(points, config: DbscanConfig) -> Clustering:
    adj = neighborhoods(points, config.eps)
    n = adj.shape[0]
    core = adj.sum(axis=1) >= config.min_pts
    labels = np.full(n, OUTLIER, dtype=int)
    next_id = 0
    for seed in range(n):
        if not core[seed] or labels[seed] != OUTLIER:
            continue
        labels[seed] = next_id
        queue = deque([seed])
        while queue:
            p = queue.popleft()
            for q in np.flatnonzero(adj[p] & core):
                if labels[q] == OUTLIER:
                    labels[q] = next_id
                    queue.append(q)
        next_id += 1
    core_idx = np.flatnonzero(core)
    roles = []
    for p in range(n):
        if core[p]:
            roles.append(CORE)
            continue
        claimants = core_idx[adj[p, core_idx]]
        if claimants.size:
            labels[p] = labels[claimants[0]]
            roles.append(REACHABLE)
        else:
            roles.append(NOISE)
    return Clustering(labels, tuple(roles))
