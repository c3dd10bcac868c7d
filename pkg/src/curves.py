from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.dist import ErrorSpec
from src.exceptions import DomainError
from src.power import (
    AssumptionSet,
    DesignPoint,
    late_power_bounds,
    mdes,
    required_n,
)

CURVE_KINDS = ("power-by-kappa", "power-by-n", "mdes-by-n", "n-by-kappa")


def parse_grid(text: str) -> List[float]:
    """Parse an inclusive 'start:stop:step' grid."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise DomainError(f"Grid must look like start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise DomainError(
            f"Grid needs step > 0 and stop >= start, got {text!r}"
        )
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def power_curve(
    kind: str,
    grid: Sequence[float],
    pi: float,
    fixed: float,
    p_z: float = 0.5,
    assumptions: Optional[AssumptionSet] = None,
    err: Optional[ErrorSpec] = None,
) -> List[Dict[str, Any]]:
    """
    Plot-ready curve data: the two bounds plus the ordered-means curve.

    ``fixed`` is N for power-by-kappa and kappa for power-by-n; the solver
    curves (mdes-by-n, n-by-kappa) hold power at 1 - beta instead.
    """
    err = err or ErrorSpec()
    assumptions = replace(
        assumptions or AssumptionSet.for_assignment(p_z), ordered_means=True
    )

    rows = []
    for x in grid:
        if kind == "power-by-kappa":
            bounds = late_power_bounds(
                DesignPoint(kappa=x, pi=pi, n=fixed, p_z=p_z),
                assumptions,
                err,
            )
            rows.append(
                {
                    "kappa": x,
                    "lower": bounds.lower,
                    "ordered_lower": bounds.ordered_lower,
                    "upper": bounds.upper,
                }
            )
        elif kind == "power-by-n":
            bounds = late_power_bounds(
                DesignPoint(kappa=fixed, pi=pi, n=x, p_z=p_z),
                assumptions,
                err,
            )
            rows.append(
                {
                    "n": x,
                    "lower": bounds.lower,
                    "ordered_lower": bounds.ordered_lower,
                    "upper": bounds.upper,
                }
            )
        elif kind == "mdes-by-n":
            solved = mdes(pi, x, p_z, assumptions, err)
            rows.append(
                {
                    "n": x,
                    "kappa_low": solved.kappa_low,
                    "kappa_star": solved.kappa_star,
                    "kappa_high": solved.kappa_high,
                }
            )
        elif kind == "n-by-kappa":
            solved = required_n(x, pi, p_z, assumptions, err)
            rows.append(
                {
                    "kappa": x,
                    "n_low": solved.n_low,
                    "n_star": solved.n_star,
                    "n_high": solved.n_high,
                }
            )
        else:
            raise DomainError(
                f"Unknown curve kind {kind!r}; expected one of "
                f"{', '.join(CURVE_KINDS)}"
            )
    return rows
