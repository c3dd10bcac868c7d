from src.sim.diagnostics import (
    ObservedTable,
    covariance_diagnostics,
    load_table,
    stratum_means_from_table,
)
from src.sim.engine import (
    BOUNDS_COLUMNS,
    MonteCarloEngine,
    SimConfig,
    SimResult,
    simulate_power,
    validate_bounds,
)
from src.sim.estimators import itt_estimate, wald_iv_estimate
from src.sim.strata import (
    StrataSpec,
    generate_sample,
    kappa_of_spec,
    load_spec,
    ordered_means_of_spec,
    population_moments,
    tau_for_kappa,
)

__all__ = [
    "BOUNDS_COLUMNS",
    "MonteCarloEngine",
    "ObservedTable",
    "SimConfig",
    "SimResult",
    "StrataSpec",
    "covariance_diagnostics",
    "generate_sample",
    "itt_estimate",
    "kappa_of_spec",
    "load_spec",
    "load_table",
    "ordered_means_of_spec",
    "population_moments",
    "simulate_power",
    "stratum_means_from_table",
    "tau_for_kappa",
    "validate_bounds",
    "wald_iv_estimate",
]
