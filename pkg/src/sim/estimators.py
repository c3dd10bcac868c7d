"""
Wald IV and difference-in-means (ITT) estimators with their two-sided
z-tests.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from src.dist import phi_inv
from src.exceptions import DegenerateSampleError

FIRST_STAGE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WaldFit:
    tau_hat: float
    var_hat: float
    z: float
    reject: bool
    pi_hat: float
    gamma_hat: float
    residuals: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class IttFit:
    gamma_hat: float
    var_hat: float
    z: float
    reject: bool


@lru_cache(maxsize=32)
def critical_value(alpha: float) -> float:
    return phi_inv(1.0 - alpha / 2.0)


def z_statistic(estimate: float, variance: float) -> float:
    """estimate / sqrt(variance); a zero variance gives +/-inf, or 0 at 0"""
    if variance > 0:
        return estimate / math.sqrt(variance)
    if estimate == 0:
        return 0.0
    return math.copysign(math.inf, estimate)


def _arm_sizes(z: np.ndarray) -> tuple:
    treated = int(np.count_nonzero(z))
    return len(z) - treated, treated


def wald_iv_estimate(z, d, y, alpha: float = 0.05) -> WaldFit:
    z = np.asarray(z, dtype=float)
    d = np.asarray(d, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(z)

    control, treated = _arm_sizes(z)
    if control == 0 or treated == 0:
        raise DegenerateSampleError("an assignment arm is empty")

    z_centered = z - z.mean()
    d_centered = d - d.mean()
    y_centered = y - y.mean()
    cov_dz = float(np.mean(d_centered * z_centered))
    if abs(cov_dz) < FIRST_STAGE_TOLERANCE:
        raise DegenerateSampleError("first-stage covariance is zero")
    cov_yz = float(np.mean(y_centered * z_centered))
    var_z = float(np.mean(z_centered**2))

    tau_hat = cov_yz / cov_dz
    residuals = y_centered - tau_hat * d_centered
    var_hat = float(np.mean(residuals**2 * z_centered**2)) / (
        n * cov_dz**2
    )
    z_stat = z_statistic(tau_hat, var_hat)

    return WaldFit(
        tau_hat=tau_hat,
        var_hat=var_hat,
        z=z_stat,
        reject=abs(z_stat) > critical_value(alpha),
        pi_hat=cov_dz / var_z,
        gamma_hat=cov_yz / var_z,
        residuals=residuals,
    )


def itt_estimate(z, y, alpha: float = 0.05) -> IttFit:
    z = np.asarray(z).astype(bool)
    y = np.asarray(y, dtype=float)

    control, treated = _arm_sizes(z)
    if control < 2 or treated < 2:
        raise DegenerateSampleError("an assignment arm has fewer than 2 units")

    y1, y0 = y[z], y[~z]
    gamma_hat = float(y1.mean() - y0.mean())
    var_hat = float(y1.var(ddof=1) / treated + y0.var(ddof=1) / control)
    z_stat = z_statistic(gamma_hat, var_hat)
    return IttFit(
        gamma_hat=gamma_hat,
        var_hat=var_hat,
        z=z_stat,
        reject=abs(z_stat) > critical_value(alpha),
    )
