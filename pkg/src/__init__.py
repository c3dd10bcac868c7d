"""
late-power: power analysis for the local average treatment effect

Analytic bounds on the power of the Wald IV test, minimum detectable
effect sizes and sample sizes, plus a principal-strata Monte-Carlo engine
that checks the bounds against simulated power.
"""

__version__ = "0.1.0"
__license__ = "MIT"

from .config import Config
from .dist import ErrorSpec
from .output import OutputGenerator
from .power import (
    AssignmentMode,
    AssumptionSet,
    CovariateAdjust,
    DesignPoint,
    late_power_bounds,
    mdes,
    required_n,
)
from .tables import TableBuilder

__all__ = [
    "AssignmentMode",
    "AssumptionSet",
    "Config",
    "CovariateAdjust",
    "DesignPoint",
    "ErrorSpec",
    "OutputGenerator",
    "TableBuilder",
    "late_power_bounds",
    "mdes",
    "required_n",
]
