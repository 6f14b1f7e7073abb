"""Measurement pre-processing: RSSI thresholding, dynamic K-means over
observation positions, small-cluster elimination, and max-power
reference-node selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geo import EARTH_RADIUS_M, GeoPoint, PlanarPoint
from .pathloss import Calibration, rssi_to_distance

KMEANS_TOL_M = 1e-6
KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class Observation:
    """One telemetry sample: timestamp, GPS position, RSSI reading."""

    t: float
    pos: GeoPoint
    rssi: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError(f"non-finite timestamp {self.t}")
        if not -200.0 <= self.rssi <= 50.0:
            raise ValueError(f"rssi {self.rssi} dBm outside [-200, 50]")


@dataclass(frozen=True)
class Cluster:
    centroid: PlanarPoint
    members: tuple  # indices into the clustered observation list


@dataclass(frozen=True)
class ClusterSet:
    clusters: tuple


@dataclass(frozen=True)
class ReferenceNode:
    """Strongest-RSSI member of a cluster, with its inverted distance."""

    pos_planar: PlanarPoint
    pos_geo: GeoPoint
    rssi: float
    distance: float

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError(f"reference distance must be positive, got {self.distance}")


def threshold_rssi(obs, min_dbm: float):
    """Keep observations with rssi >= min_dbm, preserving order."""
    return [o for o in obs if o.rssi >= min_dbm]


def max_pairwise_distance(obs) -> float:
    """Maximum pairwise haversine distance over observation positions."""
    lat = np.radians([o.pos.lat for o in obs])
    lon = np.radians([o.pos.lon for o in obs])
    dlat = lat[:, None] - lat[None, :]
    dlon = lon[:, None] - lon[None, :]
    h = (np.sin(dlat / 2.0) ** 2
         + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2.0) ** 2)
    return float(2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.minimum(1.0, h))).max())


def compute_k(obs, ma: float) -> int:
    """Cluster count: ceil(max pairwise distance / ma), clamped to [1, N]."""
    if not obs:
        raise ValueError("need at least one observation")
    if not ma > 0:
        raise ValueError(f"ma must be positive, got {ma}")
    d_max = max_pairwise_distance(obs)
    return max(1, min(len(obs), math.ceil(d_max / ma)))


def _kmeans_pp_init(pts: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: D^2-weighted sampling of initial centers."""
    n = len(pts)
    centers = np.empty((k, 2))
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total == 0.0:
            centers[j] = pts[rng.integers(n)]
        else:
            centers[j] = pts[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(pts: np.ndarray, centers: np.ndarray):
    """Lloyd iterations; returns (centers, labels, sse_history)."""
    k = len(centers)
    sse_history = []
    labels = np.zeros(len(pts), dtype=int)
    for _ in range(KMEANS_MAX_ITER):
        d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        sse_history.append(float(d2[np.arange(len(pts)), labels].sum()))
        new_centers = centers.copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centers[j] = pts[mask].mean(axis=0)
            else:
                # reseed empty cluster at the point farthest from its centroid
                far = np.argmax(d2[np.arange(len(pts)), labels])
                new_centers[j] = pts[far]
        shift = np.sqrt(np.sum((new_centers - centers) ** 2, axis=1)).max()
        centers = new_centers
        if shift < KMEANS_TOL_M:
            break
    d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    return centers, labels, sse_history


def kmeans(points, k: int, seed: int) -> ClusterSet:
    """Deterministic K-means over planar points (k-means++ init, Lloyd)."""
    if not 1 <= k <= len(points):
        raise ValueError(f"k={k} outside [1, {len(points)}]")
    pts = np.asarray([(p.x, p.y) for p in points], dtype=float)
    rng = np.random.default_rng(seed)
    centers, labels, _ = _lloyd(pts, _kmeans_pp_init(pts, k, rng))
    clusters = []
    for j in range(k):
        members = tuple(int(i) for i in np.flatnonzero(labels == j))
        if members:
            clusters.append(Cluster(PlanarPoint(*centers[j]), members))
    return ClusterSet(tuple(clusters))


def filter_clusters(cs: ClusterSet, r_thresh: int) -> ClusterSet:
    """Keep clusters with strictly more than r_thresh members."""
    return ClusterSet(tuple(c for c in cs.clusters if len(c.members) > r_thresh))


def select_reference_nodes(cs: ClusterSet, obs, points, cal: Calibration):
    """One reference node per cluster: the strongest-RSSI member.

    Ties are broken by earliest timestamp. points[i] must be the planar
    projection of obs[i] (the same coordinates the clustering ran on).
    """
    refs = []
    for c in cs.clusters:
        best = min(c.members, key=lambda i: (-obs[i].rssi, obs[i].t))
        o = obs[best]
        refs.append(ReferenceNode(
            pos_planar=points[best],
            pos_geo=o.pos,
            rssi=o.rssi,
            distance=rssi_to_distance(o.rssi, cal),
        ))
    return refs
