"""
Preset reproductions of the published tables.

Tables 1 and 2 are analytic sample-size grids. The simulation tables
(B1-B4, F1) are lists of scenarios run through the Monte-Carlo engine; each
row gets its own seed, base seed + row index.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional

from src.config import Config
from src.dist import ErrorSpec
from src.exceptions import DomainError
from src.power import (
    AssumptionSet,
    round_sample_size,
    required_n,
    scaled_ate_power,
)
from src.sim.engine import MonteCarloEngine, SimConfig
from src.sim.strata import StrataSpec, kappa_of_spec
from src.utils.logger import get_logger

logger = get_logger(__name__)

TABLE_NAMES = ("1", "2", "B1", "B2", "B3", "B4", "F1")

SAMPLE_SIZE_TABLES = {"1": 0.63, "2": 0.4}
SAMPLE_SIZE_PZ = 0.67
KAPPA_GRID = [round(0.05 * i, 2) for i in range(1, 11)]

# fixed parameters shared by the B tables
BASE_SPEC = StrataSpec(
    mu_c0=0.0,
    sd_c0=8.0,
    sd_c1=8.0,
    tau=5.0,
    mu_nt=-3.0,
    sd_nt=12.0,
    mu_at=3.0,
    sd_at=4.0,
    p_c=0.2,
    p_nt=0.4,
    p_at=0.4,
)

DILUTION_SPEC = StrataSpec(
    mu_c0=0.0,
    sd_c0=3.0,
    sd_c1=3.0,
    tau=5.0,
    mu_nt=10.0,
    sd_nt=3.0,
    mu_at=-5.0,
    sd_at=3.0,
    p_c=0.3,
    p_nt=0.35,
    p_at=0.35,
)
DILUTION_N = 650

SWEEP_PAIRS = [
    (-20.0, 20.0),
    (-10.0, 10.0),
    (-3.0, 3.0),
    (10.0, -10.0),
    (20.0, -20.0),
]
SWEEP_N = 1500
SWEEP_KAPPAS = [round(0.05 * i, 2) for i in range(1, 11)]


@dataclass(frozen=True)
class Scenario:
    table: str
    block: str
    label: str
    spec: StrataSpec
    n: int


def sweep_templates(p_z: float = 0.5) -> List[StrataSpec]:
    """The five bound-validation templates (tau is solved per kappa)."""
    return [
        StrataSpec(
            mu_c0=0.0,
            sd_c0=8.0,
            sd_c1=8.0,
            tau=0.0,
            mu_nt=mu_nt,
            sd_nt=12.0,
            mu_at=mu_at,
            sd_at=4.0,
            p_c=0.5,
            p_nt=0.25,
            p_at=0.25,
            p_z=p_z,
        )
        for mu_nt, mu_at in SWEEP_PAIRS
    ]


def _b1() -> List[Scenario]:
    rows = [
        Scenario("B1", "n", str(n), BASE_SPEC, n) for n in (1000, 2000, 4000)
    ]
    rows += [
        Scenario("B1", "tau", f"{tau:g}", BASE_SPEC.with_tau(tau), 1000)
        for tau in (5.0, 6.0, 7.0)
    ]
    return rows


def _b2() -> List[Scenario]:
    rows = []
    for mu_c0 in (0.0, 10.0, 20.0):
        spec = replace(BASE_SPEC, mu_c0=mu_c0)
        rows.append(Scenario("B2", "mu_c0", f"{mu_c0:g}", spec, 1000))

    wider = replace(BASE_SPEC, p_c=0.3, p_nt=0.35, p_at=0.35)
    for sd_c0, sd_c1 in ((8.0, 8.0), (8.0, 16.0), (16.0, 16.0)):
        spec = replace(wider, sd_c0=sd_c0, sd_c1=sd_c1)
        rows.append(
            Scenario("B2", "sd_c", f"{sd_c0:g}/{sd_c1:g}", spec, 1000)
        )

    for mu_nt, mu_at in ((-3.0, 3.0), (10.0, 3.0), (10.0, -6.0)):
        spec = replace(BASE_SPEC, mu_nt=mu_nt, mu_at=mu_at)
        rows.append(
            Scenario("B2", "mu_nt/mu_at", f"{mu_nt:g}/{mu_at:g}", spec, 1000)
        )

    for sd_nt, sd_at in ((12.0, 4.0), (12.0, 8.0), (24.0, 8.0)):
        spec = replace(BASE_SPEC, sd_nt=sd_nt, sd_at=sd_at)
        rows.append(
            Scenario("B2", "sd_nt/sd_at", f"{sd_nt:g}/{sd_at:g}", spec, 1000)
        )

    for p_c, p_nt, p_at in (
        (0.3, 0.35, 0.35),
        (0.2, 0.4, 0.4),
        (0.2, 0.1, 0.7),
        (0.2, 0.8, 0.0),
    ):
        spec = replace(BASE_SPEC, p_c=p_c, p_nt=p_nt, p_at=p_at)
        rows.append(
            Scenario(
                "B2", "proportions", f"{p_c:g}/{p_nt:g}/{p_at:g}", spec, 1000
            )
        )
    return rows


def _b3() -> List[Scenario]:
    return [
        Scenario(
            "B3",
            "mu_nt/mu_at",
            f"{mu_nt:g}/{mu_at:g}",
            replace(BASE_SPEC, mu_nt=mu_nt, mu_at=mu_at),
            1000,
        )
        for mu_nt, mu_at in (
            (-10.0, 10.0),
            (-10.0, 3.0),
            (-3.0, 3.0),
            (10.0, 3.0),
            (10.0, -6.0),
        )
    ]


def _b4() -> List[Scenario]:
    return [
        Scenario(
            "B4",
            "strata",
            f"{mu_nt:g}/{mu_at:g}/{sd_nt:g}/{sd_at:g}",
            replace(
                BASE_SPEC, mu_nt=mu_nt, mu_at=mu_at, sd_nt=sd_nt, sd_at=sd_at
            ),
            2500,
        )
        for mu_nt, mu_at, sd_nt, sd_at in (
            (0.0, 5.0, 8.0, 8.0),
            (-10.0, 15.0, 8.0, 8.0),
            (0.0, 5.0, 16.0, 16.0),
            (-10.0, 15.0, 16.0, 16.0),
            (15.0, -10.0, 16.0, 16.0),
        )
    ]


def _f1() -> List[Scenario]:
    return [
        Scenario("F1", "dilution", "itt-vs-late", DILUTION_SPEC, DILUTION_N)
    ]


SCENARIOS = {"B1": _b1, "B2": _b2, "B3": _b3, "B4": _b4, "F1": _f1}


def scenarios(which: str) -> List[Scenario]:
    if which not in SCENARIOS:
        raise DomainError(f"No simulation table named {which!r}")
    return SCENARIOS[which]()


class TableBuilder:
    def __init__(self, config: Optional[Config] = None, workers: int = 0):
        self.config = config or Config()
        self.engine = MonteCarloEngine(self.config, workers=workers)

    def sample_size_table(
        self,
        pi: float,
        err: Optional[ErrorSpec] = None,
        p_z: float = SAMPLE_SIZE_PZ,
        outcome_sd: Optional[float] = None,
        round_mode: str = "nearest",
    ) -> List[Dict[str, Any]]:
        """Required N (conservative and ordered-means) over the kappa grid"""
        err = err or ErrorSpec(self.config.ALPHA, self.config.BETA)
        outcome_sd = outcome_sd or self.config.OUTCOME_SD
        assumptions = AssumptionSet.for_assignment(p_z, ordered_means=True)

        rows = []
        for kappa in KAPPA_GRID:
            solved = required_n(kappa, pi, p_z, assumptions, err)
            rows.append(
                {
                    "kappa": kappa,
                    "tau": round(kappa * outcome_sd, 2),
                    "n_conservative": round_sample_size(
                        solved.n_high, round_mode
                    ),
                    "n_ordered": round_sample_size(solved.n_star, round_mode),
                }
            )
        return rows

    def simulation_table(
        self,
        which: str,
        reps: Optional[int] = None,
        seed: Optional[int] = None,
        alpha: Optional[float] = None,
    ) -> List[Dict[str, Any]]:
        """Run every scenario of a simulation table; one row each."""
        if reps is None:
            reps = (
                self.config.SWEEP_REPS if which == "F1" else self.config.REPS
            )
        seed = self.config.SEED if seed is None else seed
        alpha = self.config.ALPHA if alpha is None else alpha

        rows = []
        for index, scenario in enumerate(scenarios(which)):
            cfg = SimConfig(
                n=scenario.n, reps=reps, alpha=alpha, seed=seed + index
            )
            result = self.engine.simulate_power(
                scenario.spec, cfg, label=f"{which} {scenario.label}"
            )
            row = {
                "table": scenario.table,
                "block": scenario.block,
                "scenario": scenario.label,
                "n": scenario.n,
                "tau": scenario.spec.tau,
                "kappa": kappa_of_spec(scenario.spec),
                "power_late": result.power_late,
                "mcse_late": result.mcse_late,
                "power_itt": result.power_itt,
                "mcse_itt": result.mcse_itt,
                "asymptotic_power": result.asymptotic_power,
            }
            if which == "B4":
                # scaled ATE analysis at the complier control SD
                row["scaled_ate_power"] = scaled_ate_power(
                    scenario.spec.tau / scenario.spec.sd_c0,
                    scenario.spec.p_c,
                    scenario.n,
                    scenario.spec.p_z,
                    ErrorSpec(alpha=alpha),
                )
            rows.append(row)
        return rows

    def build(self, which: str, **kwargs) -> List[Dict[str, Any]]:
        if which in SAMPLE_SIZE_TABLES:
            sim_only = {"reps", "seed"}
            options = {
                key: value
                for key, value in kwargs.items()
                if key not in sim_only and value is not None
            }
            if "alpha" in options or "beta" in options:
                options["err"] = ErrorSpec(
                    options.pop("alpha", self.config.ALPHA),
                    options.pop("beta", self.config.BETA),
                )
            return self.sample_size_table(SAMPLE_SIZE_TABLES[which], **options)
        if which in SCENARIOS:
            options = {
                key: kwargs[key]
                for key in ("reps", "seed", "alpha")
                if kwargs.get(key) is not None
            }
            return self.simulation_table(which, **options)
        expected = ", ".join(TABLE_NAMES)
        raise DomainError(
            f"Unknown table {which!r}; expected one of {expected}"
        )
