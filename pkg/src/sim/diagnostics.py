"""
Stratum-mean decomposition of a published (Z, D) summary table and sample
checks on the covariance between the outcome and uptake residuals.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.exceptions import DomainError, InfeasibleTableError
from src.sim.engine import SimConfig, substream
from src.sim.strata import (
    StrataSpec,
    generate_sample,
    ordered_means_of_spec,
    population_moments,
)
from src.utils.logger import get_logger

logger = get_logger(__name__)

CELL_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Cell:
    count: int
    mean: Optional[float] = None


@dataclass(frozen=True)
class ObservedTable:
    cells: Dict[Tuple[int, int], Cell]

    def __post_init__(self):
        if set(self.cells) != set(CELL_ORDER):
            raise DomainError("Table needs exactly the four (z, d) cells")
        for (z, d), cell in self.cells.items():
            if cell.count < 0:
                raise DomainError(f"Cell (z={z}, d={d}) has a negative count")
            if cell.count > 0 and (
                cell.mean is None or not math.isfinite(cell.mean)
            ):
                raise DomainError(f"Cell (z={z}, d={d}) needs a finite mean")
        for z in (0, 1):
            if self.arm_size(z) == 0:
                raise DomainError(f"Assignment arm z={z} is empty")

    @classmethod
    def from_counts(cls, rows) -> "ObservedTable":
        """Rows of (count, mean) in the order Z0D0, Z0D1, Z1D0, Z1D1."""
        rows = list(rows)
        if len(rows) != 4:
            raise DomainError("Expected four (count, mean) rows")
        return cls(
            {
                key: Cell(int(count), None if mean is None else float(mean))
                for key, (count, mean) in zip(CELL_ORDER, rows)
            }
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ObservedTable":
        cells = {}
        for entry in data.get("cells", []):
            key = (int(entry["z"]), int(entry["d"]))
            if key in cells:
                raise DomainError(f"Duplicate cell {key}")
            mean = entry.get("mean")
            cells[key] = Cell(
                int(entry["count"]), None if mean is None else float(mean)
            )
        for key in CELL_ORDER:
            cells.setdefault(key, Cell(0))
        return cls(cells)

    def arm_size(self, z: int) -> int:
        return self.cells[(z, 0)].count + self.cells[(z, 1)].count

    def total(self, z: int, d: int) -> float:
        cell = self.cells[(z, d)]
        return cell.count * cell.mean if cell.count else 0.0


def load_table(path: Union[str, Path]) -> ObservedTable:
    with open(path, "r", encoding="utf-8") as f:
        return ObservedTable.from_dict(json.load(f))


@dataclass(frozen=True)
class StratumMeans:
    p_c: float
    p_nt: float
    p_at: float
    ybar_nt: Optional[float]
    ybar_c: float
    ybar_at: Optional[float]
    complier_mean_control: Optional[float]
    complier_mean_treated: Optional[float]
    ordered_means_satisfied: bool


@dataclass(frozen=True)
class CovarianceReport:
    n: int
    cov_zeta_nu: float
    var_zeta: float
    var_nu: float
    cauchy_schwarz_bound: float
    cauchy_schwarz_holds: bool
    standard_error: float
    z_score: float
    population_cov: float
    ordered_means_satisfied: bool


def _complier_part(
    cell_total: float,
    other_mean: Optional[float],
    other_expected: float,
    complier_expected: float,
) -> Optional[float]:
    if complier_expected <= 0:
        return None
    other_total = other_expected * other_mean if other_expected else 0.0
    return (cell_total - other_total) / complier_expected


def stratum_means_from_table(t: ObservedTable) -> StratumMeans:
    """Decompose the four observed cells into never-taker, complier and
    always-taker means under monotonicity."""
    n0, n1 = t.arm_size(0), t.arm_size(1)

    # Z=0, D=1 holds only always-takers; Z=1, D=0 only never-takers
    p_at = t.cells[(0, 1)].count / n0
    p_nt = t.cells[(1, 0)].count / n1
    p_c = 1.0 - p_at - p_nt
    if p_c <= 0:
        raise InfeasibleTableError(
            f"Implied complier share {p_c:.4f} is not positive"
        )

    ybar_at = t.cells[(0, 1)].mean if p_at > 0 else None
    ybar_nt = t.cells[(1, 0)].mean if p_nt > 0 else None

    expected_nt_control = p_nt * n0
    expected_at_treated = p_at * n1
    complier_control = t.cells[(0, 0)].count - expected_nt_control
    complier_treated = t.cells[(1, 1)].count - expected_at_treated
    if complier_control < 0 or complier_treated < 0:
        raise InfeasibleTableError(
            "Implied complier count is negative "
            f"(control {complier_control:.2f}, treated {complier_treated:.2f})"
        )

    mean_control = _complier_part(
        t.total(0, 0),
        ybar_nt,
        expected_nt_control,
        complier_control,
    )
    mean_treated = _complier_part(
        t.total(1, 1),
        ybar_at,
        expected_at_treated,
        complier_treated,
    )

    weighted = [
        (count, mean)
        for count, mean in (
            (complier_control, mean_control),
            (complier_treated, mean_treated),
        )
        if mean is not None
    ]
    total_compliers = sum(count for count, _ in weighted)
    ybar_c = sum(count * mean for count, mean in weighted) / total_compliers

    satisfied = True
    if ybar_nt is not None:
        satisfied = satisfied and ybar_nt <= ybar_c
    if ybar_at is not None:
        satisfied = satisfied and ybar_c <= ybar_at

    logger.debug(
        f"Stratum shares: compliers {p_c:.4f}, never-takers {p_nt:.4f}, "
        f"always-takers {p_at:.4f}"
    )
    return StratumMeans(
        p_c=p_c,
        p_nt=p_nt,
        p_at=p_at,
        ybar_nt=ybar_nt,
        ybar_c=ybar_c,
        ybar_at=ybar_at,
        complier_mean_control=mean_control,
        complier_mean_treated=mean_treated,
        ordered_means_satisfied=satisfied,
    )


def residual_covariance(z, d, y) -> Tuple[float, float, float, float]:
    """Sample Cov(zeta, nu), Var(zeta), Var(nu) and the covariance's SE."""
    z = np.asarray(z, dtype=float)
    d = np.asarray(d, dtype=float)
    y = np.asarray(y, dtype=float)
    z_centered = z - z.mean()
    var_z = float(np.mean(z_centered**2))
    if var_z == 0:
        raise DomainError("Sample has a single assignment arm")

    gamma_hat = float(np.mean((y - y.mean()) * z_centered)) / var_z
    pi_hat = float(np.mean((d - d.mean()) * z_centered)) / var_z
    zeta = y - y.mean() - gamma_hat * z_centered
    nu = d - d.mean() - pi_hat * z_centered

    products = zeta * nu
    return (
        float(products.mean()),
        float(np.mean(zeta**2)),
        float(np.mean(nu**2)),
        float(products.std() / math.sqrt(len(z))),
    )


def covariance_diagnostics(
    spec: StrataSpec, cfg: SimConfig
) -> CovarianceReport:
    z, d, y = generate_sample(spec, cfg.n, substream(cfg.seed, 0))
    cov, var_zeta, var_nu, se = residual_covariance(z, d, y)
    bound = math.sqrt(var_zeta * var_nu)
    return CovarianceReport(
        n=cfg.n,
        cov_zeta_nu=cov,
        var_zeta=var_zeta,
        var_nu=var_nu,
        cauchy_schwarz_bound=bound,
        # relative slack for rounding in the products
        cauchy_schwarz_holds=abs(cov) <= bound * (1.0 + 1e-12),
        standard_error=se,
        z_score=cov / se if se > 0 else 0.0,
        population_cov=population_moments(spec).cov_nu_zeta,
        ordered_means_satisfied=ordered_means_of_spec(spec).satisfied,
    )
