"""Forward RF signal model and inverse distance estimation.

The forward model is free-space Friis (in decibel form) plus optional
log-normal shadowing; the inverse is the log-distance path-loss model
solved for distance with the noise term taken as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError


@dataclass(frozen=True)
class Calibration:
    """Per-survey path-loss calibration.

    d0: reference distance in meters.
    p0_dbm: received power measured at d0.
    n: path-loss exponent (2 = free space).
    sigma_db: std-dev of the shadowing term in dB.
    """

    d0: float
    p0_dbm: float
    n: float
    sigma_db: float = 0.0

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError(f"reference distance must be positive, got {self.d0}")
        if not 0.5 < self.n <= 8.0:
            raise ValueError(f"path-loss exponent {self.n} outside (0.5, 8]")
        if self.sigma_db < 0:
            raise ValueError(f"shadowing sigma must be >= 0, got {self.sigma_db}")


@dataclass(frozen=True)
class TxParams:
    """Transmitter/receiver link parameters for the free-space model."""

    pt_dbm: float
    gt_db: float
    gr_db: float
    wavelength_m: float

    def __post_init__(self):
        if not self.wavelength_m > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength_m}")
        for v in (self.pt_dbm, self.gt_db, self.gr_db):
            if not math.isfinite(v):
                raise ValueError("non-finite link parameter")


def friis_rssi(tx: TxParams, d: float) -> float:
    """Free-space received power in dBm at distance d meters."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return tx.pt_dbm + tx.gt_db + tx.gr_db + 20.0 * math.log10(tx.wavelength_m / (4.0 * math.pi * d))


def rssi_to_distance(pr_dbm: float, cal: Calibration) -> float:
    """Invert the log-distance model: distance in meters for a received power.

    The shadowing term is taken as zero (maximum-likelihood point estimate).
    """
    return cal.d0 * 10.0 ** ((-pr_dbm + cal.p0_dbm) / (10.0 * cal.n))


def sample_shadowed_rssi(tx: TxParams, d: float, sigma_db: float,
                         rng: np.random.Generator) -> float:
    """Draw one shadowed RSSI sample: friis_rssi plus N(0, sigma_db^2)."""
    if sigma_db < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma_db}")
    base = friis_rssi(tx, d)
    if sigma_db == 0.0:
        return base
    return base + rng.normal(0.0, sigma_db)


def calibration_from_tx(tx: TxParams, d0: float, sigma_db: float = 0.0) -> Calibration:
    """Calibration exactly consistent with the free-space model (n = 2)."""
    return Calibration(d0=d0, p0_dbm=friis_rssi(tx, d0), n=2.0, sigma_db=sigma_db)


def fit_exponent(samples, d0: float) -> Calibration:
    """Fit p0 and n from (distance_m, rssi_dbm) pairs by least squares.

    Regresses rssi = p0 - 10*n*log10(d/d0). Needs at least two samples at
    two distinct distances. The returned sigma_db is the residual std-dev.
    """
    if len(samples) < 2:
        raise DegenerateFitError(f"need >= 2 calibration samples, got {len(samples)}")
    d = np.asarray([s[0] for s in samples], dtype=float)
    pr = np.asarray([s[1] for s in samples], dtype=float)
    if np.any(d <= 0):
        raise ValueError("calibration distances must be positive")
    logd = np.log10(d / d0)
    if np.ptp(logd) == 0.0:
        raise DegenerateFitError("all calibration samples at the same distance")
    # pr = p0 + (-10 n) * logd
    coeffs, *_ = np.linalg.lstsq(np.column_stack([np.ones_like(logd), logd]), pr, rcond=None)
    p0, slope = coeffs
    n = -slope / 10.0
    resid = pr - (p0 + slope * logd)
    dof = len(samples) - 2
    sigma = float(np.sqrt(np.sum(resid ** 2) / dof)) if dof > 0 else 0.0
    return Calibration(d0=d0, p0_dbm=float(p0), n=float(n), sigma_db=sigma)


def quantize_rssi(pr_dbm: float, step_db: float = 0.5,
                  lo_dbm: float = -120.0, hi_dbm: float = -10.0) -> float:
    """Optional sensor model: quantize to step_db and clamp to the linear range."""
    q = round(pr_dbm / step_db) * step_db
    return min(hi_dbm, max(lo_dbm, q))
