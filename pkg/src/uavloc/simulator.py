"""Kinematic fixed-wing flight simulator and RF measurement generation.

Trajectories are waypoint-following at constant speed (no aerodynamics);
RSSI samples come from the free-space model plus log-normal shadowing at a
1 Hz default cadence. Also hosts the plain-SVD baseline and the cluster
granularity sweep used for evaluation.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from .cluster import Observation, ReferenceNode
from .estimator import Estimator, EstimatorConfig
from .geo import GeoPoint, PlanarPoint, haversine, project, unproject
from .lateration import estimate_position
from .pathloss import Calibration, TxParams, rssi_to_distance, sample_shadowed_rssi

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class FlightPlan:
    """Survey path geometry about a center point.

    kind "loiter": circle of `radius` meters (`turns` only informs
    default durations). kind "lawnmower": boustrophedon lanes covering a
    width x height box centered on `center`, lanes `spacing` meters apart.
    """

    kind: str
    center: GeoPoint
    speed: float
    radius: float = 0.0
    turns: float = 1.0
    width: float = 0.0
    height: float = 0.0
    spacing: float = 0.0

    def __post_init__(self):
        if not 1.0 < self.speed <= 60.0:
            raise ValueError(f"speed {self.speed} m/s outside (1, 60]")
        if self.kind == "loiter":
            if not self.radius > 0:
                raise ValueError("loiter requires radius > 0")
        elif self.kind == "lawnmower":
            if not (self.width > 0 and self.height > 0 and self.spacing > 0):
                raise ValueError("lawnmower requires width, height, spacing > 0")
        else:
            raise ValueError(f"unknown plan kind {self.kind!r}")

    def path_length(self) -> float:
        if self.kind == "loiter":
            return 2.0 * math.pi * self.radius * self.turns
        lanes = self._lane_ys()
        return len(lanes) * self.width + (len(lanes) - 1) * abs(lanes[1] - lanes[0])

    def _lane_ys(self):
        n_lanes = max(2, int(round(self.height / self.spacing)) + 1)
        return np.linspace(-self.height / 2.0, self.height / 2.0, n_lanes)

    def position_at(self, s: float) -> PlanarPoint:
        """Planar position after arc length s meters along the path."""
        if self.kind == "loiter":
            phi = s / self.radius
            return PlanarPoint(self.radius * math.cos(phi), self.radius * math.sin(phi))
        lanes = self._lane_ys()
        gap = abs(lanes[1] - lanes[0])
        leg = self.width + gap  # one lane plus the transition to the next
        s = min(s, self.path_length())
        i = min(int(s // leg), len(lanes) - 1)
        r = s - i * leg
        y = lanes[i]
        x0, x1 = (-self.width / 2.0, self.width / 2.0) if i % 2 == 0 else (self.width / 2.0, -self.width / 2.0)
        if r <= self.width:
            x = x0 + (x1 - x0) * (r / self.width)
            return PlanarPoint(x, y)
        # climbing to the next lane at the lane's far end
        frac = (r - self.width) / gap if gap > 0 else 1.0
        y_next = lanes[min(i + 1, len(lanes) - 1)]
        return PlanarPoint(x1, y + (y_next - y) * min(1.0, frac))


@dataclass(frozen=True)
class SimScenario:
    plan: FlightPlan
    target: GeoPoint
    tx: TxParams
    sigma_db: float
    seed: int
    sample_period: float = 1.0

    def __post_init__(self):
        if not self.sample_period > 0:
            raise ValueError(f"sample_period must be positive, got {self.sample_period}")


def generate_trajectory(plan: FlightPlan, duration: float, dt: float):
    """Sampled (t, GeoPoint) waypoints at constant speed along the plan."""
    if not duration > 0 or not dt > 0:
        raise ValueError("duration and dt must be positive")
    n = max(1, int(math.floor(duration / dt)))
    out = []
    for k in range(n):
        t = k * dt
        out.append((t, unproject(plan.center, plan.position_at(plan.speed * t))))
    return out


def simulate_observations(sc: SimScenario, duration: float):
    """One shadowed RSSI observation per sample period; deterministic per seed.

    Samples coincident with the target (distance 0) are skipped with a
    warning, since the free-space model is singular there.
    """
    rng = np.random.default_rng(sc.seed)
    obs = []
    skipped = 0
    for t, pos in generate_trajectory(sc.plan, duration, sc.sample_period):
        d = haversine(pos, sc.target)
        if d == 0.0:
            skipped += 1
            continue
        obs.append(Observation(t=t, pos=pos,
                               rssi=sample_shadowed_rssi(sc.tx, d, sc.sigma_db, rng)))
    if skipped:
        log.warning("skipped %d samples coincident with the target", skipped)
    return obs


def evaluate(estimate: GeoPoint, truth: GeoPoint) -> float:
    """Haversine error between an estimate and the true target, meters."""
    return haversine(estimate, truth)


def run_baseline_svd(obs, cal: Calibration, origin: GeoPoint) -> GeoPoint:
    """Plain-SVD baseline: every observation becomes a reference node."""
    refs = [ReferenceNode(pos_planar=project(origin, o.pos), pos_geo=o.pos,
                          rssi=o.rssi, distance=rssi_to_distance(o.rssi, cal))
            for o in obs]
    estimate, _, _ = estimate_position(refs, origin)
    return estimate


def run_estimator(obs, config: EstimatorConfig) -> Estimator:
    """Feed a full observation log through a fresh estimator."""
    est = Estimator(config)
    for o in obs:
        est.ingest(o)
    return est


def sweep_ma(sc: SimScenario, duration: float, ma_values, cfg_template: EstimatorConfig):
    """Best-estimate error per cluster granularity, on one shared log.

    Returns (ma, error_m) pairs; error is None when no iteration succeeded.
    """
    if not ma_values:
        raise ValueError("ma_values must be non-empty")
    obs = simulate_observations(sc, duration)
    return sweep_ma_log(obs, sc.target, ma_values, cfg_template)


def sweep_ma_log(obs, truth: GeoPoint, ma_values, cfg_template: EstimatorConfig):
    rows = []
    for ma in ma_values:
        est = run_estimator(obs, dataclasses.replace(cfg_template, ma=ma))
        try:
            estimate, _ = est.best_estimate()
            rows.append((ma, evaluate(estimate, truth)))
        except Exception:
            rows.append((ma, None))
    return rows


def gtu_sim_scenario(seed: int = 0, sigma_db: float = 3.0) -> SimScenario:
    """Default desk-scale survey: ~3.14 km^2 lawnmower with an interior target.

    The target sits midway between two survey lanes, so consecutive passes
    bracket it from both sides.
    """
    center = GeoPoint(40.8081, 29.3560)
    plan = FlightPlan(kind="lawnmower", center=center, speed=12.0,
                      width=2000.0, height=1570.0, spacing=120.0)
    tx = TxParams(pt_dbm=20.0, gt_db=0.0, gr_db=0.0,
                  wavelength_m=SPEED_OF_LIGHT / 435e6)
    target = unproject(center, PlanarPoint(244.0, -235.0))
    return SimScenario(plan=plan, target=target, tx=tx,
                       sigma_db=sigma_db, seed=seed)


SCENARIOS = {
    "gtu-sim": gtu_sim_scenario,
}
