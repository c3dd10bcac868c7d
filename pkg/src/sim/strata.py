"""
Principal-strata superpopulations: the parameter set, its mixture moments,
the ordered-means check, and i.i.d. sample generation.
"""

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, NamedTuple, Tuple, Union

import numpy as np
from scipy import optimize

from src.exceptions import BracketError, DomainError
from src.power import power_from_ncp
from src.utils.logger import get_logger

logger = get_logger(__name__)

PROPORTION_TOLERANCE = 1e-12
SPARSE_STRATUM = 1e-9

COMPLIER, NEVER_TAKER, ALWAYS_TAKER = 0, 1, 2


@dataclass(frozen=True)
class StrataSpec:
    mu_c0: float
    sd_c0: float
    sd_c1: float
    tau: float
    mu_nt: float
    sd_nt: float
    mu_at: float
    sd_at: float
    p_c: float
    p_nt: float
    p_at: float
    p_z: float = 0.5
    family: str = "normal"

    def __post_init__(self):
        if self.family != "normal":
            raise DomainError(
                f"Only the normal family is supported, got {self.family!r}"
            )
        for name in ("p_c", "p_nt", "p_at"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")
        if self.p_c <= 0:
            raise DomainError("p_c (the complier share) must be positive")
        total = self.p_c + self.p_nt + self.p_at
        if abs(total - 1.0) > PROPORTION_TOLERANCE:
            raise DomainError(
                f"Stratum proportions must sum to 1, got {total!r}"
            )
        for name in ("sd_c0", "sd_c1", "sd_nt", "sd_at"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not 0.0 < self.p_z < 1.0:
            raise DomainError(f"p_z must lie in (0, 1), got {self.p_z}")

    @property
    def pi(self) -> float:
        return self.p_c

    def with_tau(self, tau: float) -> "StrataSpec":
        return replace(self, tau=tau)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StrataSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(
                f"Unknown spec keys: {', '.join(sorted(unknown))}"
            )
        try:
            return cls(**data)
        except TypeError as e:
            raise DomainError(f"Incomplete spec: {e}")

    def arm_components(
        self, z: int
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(weights, uptake, means, sds) of the observed mixture in arm z"""
        weights = np.array([self.p_c, self.p_nt, self.p_at])
        uptake = np.array([float(z), 0.0, 1.0])
        if z:
            means = np.array([self.mu_c0 + self.tau, self.mu_nt, self.mu_at])
            sds = np.array([self.sd_c1, self.sd_nt, self.sd_at])
        else:
            means = np.array([self.mu_c0, self.mu_nt, self.mu_at])
            sds = np.array([self.sd_c0, self.sd_nt, self.sd_at])
        return weights, uptake, means, sds


class OrderedMeans(NamedTuple):
    ybar_nt: float
    ybar_c: float
    ybar_at: float
    satisfied: bool


class PopulationMoments(NamedTuple):
    e_zeta_sq: float
    e_nu_sq: float
    cov_nu_zeta: float
    gamma: float
    strata_cov: float


def load_spec(
    path: Union[str, Path]
) -> Tuple[StrataSpec, Dict[str, Any]]:
    """Read a spec document; returns the spec and its optional config."""
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise DomainError(f"Spec file {path} must hold a JSON object")
    config = data.pop("config", {}) or {}
    return StrataSpec.from_dict(data), config


def save_spec(
    spec: StrataSpec,
    path: Union[str, Path],
    config: Union[Dict[str, Any], None] = None,
) -> str:
    data = spec.to_dict()
    if config:
        data["config"] = dict(config)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
    return str(path)


def mixture_moments(
    weights: np.ndarray, means: np.ndarray, sds: np.ndarray
) -> Tuple[float, float]:
    """Mean and variance of a finite mixture of normals"""
    mean = float(np.dot(weights, means))
    second = float(np.dot(weights, sds**2 + means**2))
    return mean, max(second - mean**2, 0.0)


def arm_variance(spec: StrataSpec, z: int) -> float:
    weights, _, means, sds = spec.arm_components(z)
    return mixture_moments(weights, means, sds)[1]


def kappa_of_spec(spec: StrataSpec) -> float:
    """Effect size tau / sqrt(E[Var(Y|Z)]) implied by the spec"""
    expected_var = spec.p_z * arm_variance(spec, 1) + (
        1.0 - spec.p_z
    ) * arm_variance(spec, 0)
    if expected_var <= 0:
        raise DomainError("Spec has zero within-arm outcome variance")
    return spec.tau / math.sqrt(expected_var)


def tau_for_kappa(
    template: StrataSpec, kappa_target: float, tolerance: float = 1e-10
) -> float:
    """Solve kappa_of_spec(template.with_tau(tau)) = kappa_target, tau >= 0"""
    if not math.isfinite(kappa_target) or kappa_target < 0:
        raise DomainError(
            f"kappa_target must be nonnegative, got {kappa_target}"
        )
    if kappa_target == 0:
        return 0.0

    def gap(tau: float) -> float:
        return kappa_of_spec(template.with_tau(tau)) - kappa_target

    tau_hi = 1.0
    for _ in range(200):
        if gap(tau_hi) > 0:
            break
        tau_hi *= 2.0
    else:
        # kappa saturates at 1 / sqrt(p_z * p_c * (1 - p_c)) as tau grows
        raise BracketError(
            "kappa target is not reachable for this spec",
            {
                "kappa_target": kappa_target,
                "tau_hi": tau_hi,
                "kappa_at_tau_hi": kappa_of_spec(template.with_tau(tau_hi)),
            },
        )

    grid = np.linspace(0.0, tau_hi, 65)
    kappas = np.array([kappa_of_spec(template.with_tau(t)) for t in grid])
    if not np.all(np.diff(kappas) > 0):
        raise BracketError(
            "kappa(tau) is not monotone on the bracket",
            {
                "kappa_target": kappa_target,
                "tau_hi": tau_hi,
                "first_drop_at": float(
                    grid[1:][np.diff(kappas) <= 0][0]
                ),
            },
        )

    tau = optimize.bisect(gap, 0.0, tau_hi, xtol=1e-14, maxiter=1000)
    residual = abs(gap(tau))
    if residual > tolerance:
        raise BracketError(
            "bisection did not converge",
            {"kappa_target": kappa_target, "residual": residual},
        )
    logger.debug(f"tau_for_kappa: kappa={kappa_target:g} -> tau={tau:.10g}")
    return float(tau)


def ordered_means_of_spec(spec: StrataSpec) -> OrderedMeans:
    """Expected observed stratum means and whether NT <= C <= AT holds."""
    ybar_c = spec.mu_c0 + spec.p_z * spec.tau
    satisfied = True
    if spec.p_nt >= SPARSE_STRATUM:
        satisfied = satisfied and spec.mu_nt <= ybar_c
    if spec.p_at >= SPARSE_STRATUM:
        satisfied = satisfied and ybar_c <= spec.mu_at
    return OrderedMeans(spec.mu_nt, ybar_c, spec.mu_at, satisfied)


def population_moments(spec: StrataSpec) -> PopulationMoments:
    """Exact E[zeta^2], E[nu^2] and Cov(nu, zeta) of the superpopulation"""
    e_zeta_sq = e_nu_sq = cov = 0.0
    arm_means = []
    for z, arm_weight in ((1, spec.p_z), (0, 1.0 - spec.p_z)):
        weights, uptake, means, sds = spec.arm_components(z)
        mean_y, var_y = mixture_moments(weights, means, sds)
        mean_d = float(np.dot(weights, uptake))
        e_zeta_sq += arm_weight * var_y
        e_nu_sq += arm_weight * mean_d * (1.0 - mean_d)
        cov += arm_weight * (
            float(np.dot(weights, uptake * means)) - mean_d * mean_y
        )
        arm_means.append(mean_y)

    weights = np.array([spec.p_c, spec.p_nt, spec.p_at])
    stratum_d = np.array([spec.p_z, 0.0, 1.0])
    stratum_y = np.array(
        [spec.mu_c0 + spec.p_z * spec.tau, spec.mu_nt, spec.mu_at]
    )
    strata_cov = float(np.dot(weights, stratum_d * stratum_y)) - float(
        np.dot(weights, stratum_d)
    ) * float(np.dot(weights, stratum_y))

    return PopulationMoments(
        e_zeta_sq=e_zeta_sq,
        e_nu_sq=e_nu_sq,
        cov_nu_zeta=cov,
        gamma=arm_means[0] - arm_means[1],
        strata_cov=strata_cov,
    )


def wald_variance_of_spec(spec: StrataSpec, n: float) -> float:
    """Large-sample variance of the Wald IV estimator under the spec"""
    residual_var = []
    for z in (1, 0):
        weights, uptake, means, sds = spec.arm_components(z)
        residual_var.append(
            mixture_moments(weights, means - spec.tau * uptake, sds)[1]
        )
    p = spec.p_z
    numerator = (1.0 - p) * residual_var[0] + p * residual_var[1]
    return numerator / (n * p * (1.0 - p) * spec.p_c**2)


def asymptotic_power_of_spec(
    spec: StrataSpec, n: float, alpha: float
) -> float:
    variance = wald_variance_of_spec(spec, n)
    return power_from_ncp(abs(spec.tau) / math.sqrt(variance), alpha)


def draw_strata(
    spec: StrataSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    thresholds = np.array([spec.p_c, spec.p_c + spec.p_nt])
    return np.searchsorted(thresholds, rng.random(n), side="right")


def generate_sample(
    spec: StrataSpec, n: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (Z, D, Y) for n i.i.d. units of the superpopulation."""
    strata = draw_strata(spec, n, rng)
    z = (rng.random(n) < spec.p_z).astype(np.int8)
    d = np.where(strata == COMPLIER, z, strata == ALWAYS_TAKER).astype(
        np.int8
    )

    # index = 2 * stratum + z
    means = np.array(
        [
            spec.mu_c0,
            spec.mu_c0 + spec.tau,
            spec.mu_nt,
            spec.mu_nt,
            spec.mu_at,
            spec.mu_at,
        ]
    )
    sds = np.array(
        [
            spec.sd_c0,
            spec.sd_c1,
            spec.sd_nt,
            spec.sd_nt,
            spec.sd_at,
            spec.sd_at,
        ]
    )
    cell = 2 * strata + z
    y = means[cell] + sds[cell] * rng.standard_normal(n)
    return z, d, y
