"""
Analytic power bounds, MDES and sample-size solvers for the Wald IV
estimator of the LATE.

Every regime shares one variance denominator, written in terms of the
standardized effect size kappa:

    A + kappa^2 * B  +/-  2 * kappa * sqrt(A * B)

with A = 1 - R2_YW, B = (1 - R2_DW) * E[nu^2] and a leading scale of 0.25
(equal assignment) or p_z * (1 - p_z) (general assignment). The '+' and '-'
denominators are perfect squares, which the code exploits to avoid
cancellation near the singular point kappa * sqrt(B) = sqrt(A).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from src.dist import ErrorSpec, multiplier, phi_cdf, phi_inv
from src.exceptions import DomainError
from src.utils.logger import get_logger

logger = get_logger(__name__)

SINGULAR_TOLERANCE = 1e-12
EQUAL_PZ_TOLERANCE = 1e-12


class AssignmentMode(str, Enum):
    EQUAL = "equal"
    GENERAL = "general"


@dataclass(frozen=True)
class AssumptionSet:
    mode: AssignmentMode = AssignmentMode.EQUAL
    ordered_means: bool = False

    @classmethod
    def for_assignment(
        cls, p_z: float, ordered_means: bool = False
    ) -> "AssumptionSet":
        """EqualAssignment when p_z is one half, GeneralAssignment otherwise"""
        if abs(p_z - 0.5) <= EQUAL_PZ_TOLERANCE:
            return cls(AssignmentMode.EQUAL, ordered_means)
        return cls(AssignmentMode.GENERAL, ordered_means)


@dataclass(frozen=True)
class DesignPoint:
    kappa: float
    pi: float
    n: float
    p_z: float = 0.5

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise DomainError(f"kappa must be finite, got {self.kappa}")
        _check_pi(self.pi)
        _check_open_unit("p_z", self.p_z)
        if not (math.isfinite(self.n) and self.n > 0):
            raise DomainError(f"n must be positive, got {self.n}")


@dataclass(frozen=True)
class CovariateAdjust:
    r2_dw: float = 0.0
    r2_yw: float = 0.0

    def __post_init__(self):
        for name in ("r2_dw", "r2_yw"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise DomainError(f"{name} must lie in [0, 1), got {value}")


@dataclass(frozen=True)
class PowerBounds:
    lower: float
    upper: float
    ordered_lower: Optional[float] = None


class NcpBounds(NamedTuple):
    lower: float
    upper: float


class CovariateNcpBounds(NamedTuple):
    lower: float
    upper: float
    ordered: float


class MdesResult(NamedTuple):
    kappa_low: float
    kappa_high: float
    kappa_star: float

    @property
    def attainable(self) -> bool:
        return math.isfinite(self.kappa_high) and math.isfinite(
            self.kappa_star
        )


class SampleSizeResult(NamedTuple):
    n_low: float
    n_high: float
    n_star: float


@dataclass(frozen=True)
class _VarianceTerms:
    scale: float
    outcome: float
    uptake: float

    def ncp(self, kappa: float, pi: float, n: float) -> CovariateNcpBounds:
        kappa = abs(kappa)
        signal = kappa * pi * math.sqrt(self.scale * n)
        root_a = math.sqrt(self.outcome)
        root_b = math.sqrt(self.uptake)

        lower = signal / (root_a + kappa * root_b)
        ordered = signal / math.sqrt(self.outcome + kappa**2 * self.uptake)
        gap = root_a - kappa * root_b
        if gap * gap < SINGULAR_TOLERANCE:
            upper = math.inf
        else:
            upper = signal / abs(gap)
        return CovariateNcpBounds(lower, upper, ordered)


def _check_open_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {value}")


def _check_pi(pi: float) -> None:
    if not 0.0 < pi <= 1.0:
        raise DomainError(f"pi must lie in (0, 1], got {pi}")


def nu_sq_ceiling(pi: float) -> float:
    """Largest E[nu^2] compatible with first-stage effect pi at p_z = 0.5"""
    _check_pi(pi)
    return (0.5 - pi / 2.0) * (0.5 + pi / 2.0)


def _variance_terms(
    pi: float,
    p_z: float,
    a: AssumptionSet,
    c: Optional[CovariateAdjust] = None,
) -> _VarianceTerms:
    _check_pi(pi)
    _check_open_unit("p_z", p_z)
    c = c or CovariateAdjust()

    if a.mode == AssignmentMode.EQUAL:
        if abs(p_z - 0.5) > EQUAL_PZ_TOLERANCE:
            raise DomainError(
                f"EqualAssignment requires p_z = 0.5, got {p_z}; "
                "use GeneralAssignment"
            )
        scale, nu_sq = 0.25, nu_sq_ceiling(pi)
    else:
        scale, nu_sq = p_z * (1.0 - p_z), 0.25

    return _VarianceTerms(
        scale=scale,
        outcome=1.0 - c.r2_yw,
        uptake=(1.0 - c.r2_dw) * nu_sq,
    )


def power_from_ncp(ncp: float, alpha: float) -> float:
    """Two-sided normal power Phi(-c* + ncp) + Phi(-c* - ncp)."""
    if math.isnan(ncp) or ncp < 0:
        raise DomainError(f"ncp must be nonnegative, got {ncp}")
    _check_open_unit("alpha", alpha)
    if math.isinf(ncp):
        return 1.0
    critical = phi_inv(1.0 - alpha / 2.0)
    return phi_cdf(-critical + ncp) + phi_cdf(-critical - ncp)


def ncp_bounds(d: DesignPoint, a: AssumptionSet) -> NcpBounds:
    bounds = _variance_terms(d.pi, d.p_z, a).ncp(d.kappa, d.pi, d.n)
    return NcpBounds(bounds.lower, bounds.upper)


def covariate_ncp_bounds(
    d: DesignPoint, c: CovariateAdjust, a: AssumptionSet
) -> CovariateNcpBounds:
    return _variance_terms(d.pi, d.p_z, a, c).ncp(d.kappa, d.pi, d.n)


def late_power_bounds(
    d: DesignPoint,
    a: AssumptionSet,
    err: ErrorSpec,
    covariates: Optional[CovariateAdjust] = None,
) -> PowerBounds:
    ncp = _variance_terms(d.pi, d.p_z, a, covariates).ncp(
        d.kappa, d.pi, d.n
    )
    ordered_lower = None
    if a.ordered_means:
        ordered_lower = power_from_ncp(ncp.ordered, err.alpha)
    return PowerBounds(
        lower=power_from_ncp(ncp.lower, err.alpha),
        upper=power_from_ncp(ncp.upper, err.alpha),
        ordered_lower=ordered_lower,
    )


def mdes(
    pi: float,
    n: float,
    p_z: float,
    a: AssumptionSet,
    err: ErrorSpec,
    covariates: Optional[CovariateAdjust] = None,
) -> MdesResult:
    """
    Bounds on the minimum detectable effect size at power 1 - beta.

    Uses the one-term approximation of the power formula, so beta must be
    below one half. kappa_high and kappa_star are math.inf when no effect
    size reaches the target power at this N.
    """
    if err.beta >= 0.5:
        raise DomainError(
            f"mdes requires beta < 0.5 (one-term regime), got {err.beta}"
        )
    if not (math.isfinite(n) and n > 0):
        raise DomainError(f"n must be positive, got {n}")

    terms = _variance_terms(pi, p_z, a, covariates)
    m = multiplier(err)
    root_a = math.sqrt(terms.outcome)
    root_b = math.sqrt(terms.uptake)
    signal = pi * math.sqrt(terms.scale * n)

    kappa_low = m * root_a / (signal + m * root_b)

    high_denominator = signal - m * root_b
    kappa_high = (
        m * root_a / high_denominator if high_denominator > 0 else math.inf
    )

    radicand = signal**2 - (m * root_b) ** 2
    kappa_star = m * root_a / math.sqrt(radicand) if radicand > 0 else math.inf

    result = MdesResult(kappa_low, kappa_high, kappa_star)
    if not result.attainable:
        logger.warning(
            f"MDES unattainable at N={n:g}, pi={pi:g}: the lower power "
            "bound never reaches the target"
        )
    return result


def required_n(
    kappa: float,
    pi: float,
    p_z: float,
    a: AssumptionSet,
    err: ErrorSpec,
    covariates: Optional[CovariateAdjust] = None,
) -> SampleSizeResult:
    """Real-valued sample-size bounds for power 1 - beta at effect kappa."""
    if not math.isfinite(kappa) or kappa == 0:
        raise DomainError(
            f"required_n needs a finite nonzero kappa, got {kappa}"
        )
    kappa = abs(kappa)
    terms = _variance_terms(pi, p_z, a, covariates)
    m = multiplier(err)
    root_a = math.sqrt(terms.outcome)
    root_b = math.sqrt(terms.uptake)

    base = m**2 / (terms.scale * kappa**2 * pi**2)
    return SampleSizeResult(
        n_low=base * (root_a - kappa * root_b) ** 2,
        n_high=base * (root_a + kappa * root_b) ** 2,
        n_star=base * (terms.outcome + kappa**2 * terms.uptake),
    )


def scaled_ate_power(
    kappa: float, pi: float, n: float, p_z: float, err: ErrorSpec
) -> float:
    """Power implied by an ATE analysis with variance scaled by 1/pi^2."""
    if not math.isfinite(kappa) or kappa < 0:
        raise DomainError(f"kappa must be nonnegative, got {kappa}")
    _check_pi(pi)
    _check_open_unit("p_z", p_z)
    if not (math.isfinite(n) and n > 0):
        raise DomainError(f"n must be positive, got {n}")
    return power_from_ncp(
        kappa * pi * math.sqrt(n * p_z * (1.0 - p_z)), err.alpha
    )


def round_sample_size(value: float, mode: str = "ceil") -> float:
    """Presentation rounding; infinite values pass through."""
    if not math.isfinite(value):
        return value
    if mode == "ceil":
        return math.ceil(value)
    if mode == "nearest":
        return math.floor(value + 0.5)
    raise DomainError(f"Unknown rounding mode: {mode}")
