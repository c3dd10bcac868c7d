"""
Standard-normal kernel used by the power formulas.

The CDF and quantile come from scipy's Cephes routines (``ndtr`` and
``ndtri``), accurate to about 1e-15 over the range the power formulas use.
"""

import math
from dataclasses import dataclass

from scipy import special

from src.exceptions import DomainError


def phi_cdf(x: float) -> float:
    """Standard normal CDF."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"phi_cdf requires a finite argument, got {x}")
    return float(special.ndtr(x))


def phi_inv(p: float) -> float:
    """Standard normal quantile for 0 < p < 1."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"phi_inv requires 0 < p < 1, got {p}")
    return float(special.ndtri(p))


@dataclass(frozen=True)
class ErrorSpec:
    """Type-I (alpha) and type-II (beta) error tolerances."""

    alpha: float = 0.05
    beta: float = 0.2

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {value}")

    @property
    def critical_value(self) -> float:
        return phi_inv(1.0 - self.alpha / 2.0)

    @property
    def target_power(self) -> float:
        return 1.0 - self.beta


def multiplier(err: ErrorSpec) -> float:
    """M = c* + z_(1-beta), the noncentrality that yields power 1 - beta."""
    return phi_inv(1.0 - err.alpha / 2.0) + phi_inv(1.0 - err.beta)
