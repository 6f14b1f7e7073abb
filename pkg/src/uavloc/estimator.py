"""Iterative localization loop.

Observations stream in; every batch_size samples an iteration runs the
full threshold -> cluster -> multilateration pipeline over ALL samples
collected so far. The final answer is the estimate from the iteration
with the smallest least-squares residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cluster as cl
from .errors import (DegenerateGeometryError, InsufficientReferencesError,
                     NoEstimateError, ObservationOrderError)
from .geo import GeoPoint, project
from .lateration import estimate_position
from .pathloss import Calibration

R_THRESH_ITERATION = "iteration"


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning knobs for the iterative estimator.

    r_thresh is either a fixed integer or the string "iteration", in which
    case the minimum cluster size grows with the iteration index.
    """

    ma: float
    cal: Calibration
    batch_size: int = 50
    min_dbm: float = -math.inf
    r_thresh: object = R_THRESH_ITERATION
    seed: int = 0

    def __post_init__(self):
        if not self.ma > 0:
            raise ValueError(f"ma must be positive, got {self.ma}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.r_thresh != R_THRESH_ITERATION and (
                not isinstance(self.r_thresh, int) or self.r_thresh < 0):
            raise ValueError(f"r_thresh must be 'iteration' or a non-negative int, "
                             f"got {self.r_thresh!r}")

    def r_thresh_for(self, index: int) -> int:
        return index if self.r_thresh == R_THRESH_ITERATION else self.r_thresh


@dataclass(frozen=True)
class IterationResult:
    index: int
    n_obs: int
    n_clusters_used: int
    estimate: GeoPoint | None
    residual_rms: float | None
    condition: float | None
    status: str  # "ok" or "skipped"
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class Estimator:
    """Single-owner accumulator of observations and iteration history."""

    def __init__(self, config: EstimatorConfig):
        self.config = config
        self.observations: list[cl.Observation] = []
        self.history: list[IterationResult] = []
        self.origin: GeoPoint | None = None

    def ingest(self, o: cl.Observation) -> IterationResult | None:
        """Append one observation; run an iteration on each full batch."""
        if self.observations and o.t < self.observations[-1].t:
            raise ObservationOrderError(
                f"timestamp {o.t} precedes last observation {self.observations[-1].t}")
        if self.origin is None:
            self.origin = o.pos
        self.observations.append(o)
        if len(self.observations) % self.config.batch_size == 0:
            result = self.run_iteration()
            self.history.append(result)
            return result
        return None

    def run_iteration(self) -> IterationResult:
        """Run one full pipeline pass over all observations so far.

        Pipeline failures (too few clusters, degenerate geometry) are
        reported as skipped results, never raised.
        """
        if not self.observations:
            raise ValueError("no observations ingested")
        cfg = self.config
        index = len(self.history) + 1
        n_obs = len(self.observations)

        def skipped(reason):
            return IterationResult(index=index, n_obs=n_obs, n_clusters_used=0,
                                   estimate=None, residual_rms=None, condition=None,
                                   status="skipped", reason=reason)

        kept = cl.threshold_rssi(self.observations, cfg.min_dbm)
        if not kept:
            return skipped("no observations above rssi threshold")
        k = cl.compute_k(kept, cfg.ma)
        points = [project(self.origin, o.pos) for o in kept]
        cs = cl.kmeans(points, k, _iteration_seed(cfg.seed, index))
        cs = cl.filter_clusters(cs, cfg.r_thresh_for(index))
        if len(cs.clusters) < 3:
            return skipped(f"only {len(cs.clusters)} clusters survive size filter")
        refs = cl.select_reference_nodes(cs, kept, points, cfg.cal)
        try:
            estimate, residual_rms, condition = estimate_position(refs, self.origin)
        except (InsufficientReferencesError, DegenerateGeometryError) as e:
            return skipped(str(e))
        return IterationResult(index=index, n_obs=n_obs, n_clusters_used=len(refs),
                               estimate=estimate, residual_rms=residual_rms,
                               condition=condition, status="ok")

    def best_estimate(self) -> tuple[GeoPoint, IterationResult]:
        """Estimate from the ok iteration with minimum residual (ties: earliest)."""
        ok = [r for r in self.history if r.ok]
        if not ok:
            raise NoEstimateError("no successful iterations in history")
        best = min(ok, key=lambda r: (r.residual_rms, r.index))
        return best.estimate, best


def _iteration_seed(seed: int, index: int) -> int:
    """Independent, reproducible k-means seed per (run seed, iteration)."""
    return int(np.random.SeedSequence([seed & 0xFFFFFFFF, index]).generate_state(1)[0])
