import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from src.config import Config
from src.dist import ErrorSpec
from src.exceptions import DomainError, DegenerateSampleError
from src.power import AssignmentMode, AssumptionSet, DesignPoint
from src.power import late_power_bounds
from src.sim.estimators import itt_estimate, wald_iv_estimate
from src.sim.strata import (
    StrataSpec,
    asymptotic_power_of_spec,
    generate_sample,
    ordered_means_of_spec,
    tau_for_kappa,
)
from src.utils.logger import get_logger

logger = get_logger(__name__)

CONTAINMENT_MCSE = 3.0


@dataclass(frozen=True)
class SimConfig:
    n: int
    reps: int = 5000
    alpha: float = 0.05
    seed: int = 20240611

    def __post_init__(self):
        if self.n < 4:
            raise DomainError(f"n must be at least 4, got {self.n}")
        if self.reps < 1:
            raise DomainError(f"reps must be at least 1, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.seed < 0:
            raise DomainError(f"seed must be nonnegative, got {self.seed}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimConfig":
        known = {"n", "reps", "alpha", "seed"}
        unknown = set(data) - known
        if unknown:
            raise DomainError(
                f"Unknown config keys: {', '.join(sorted(unknown))}"
            )
        if "n" not in data:
            raise DomainError("Simulation config needs a sample size 'n'")
        return cls(
            n=int(data["n"]),
            reps=int(data.get("reps", cls.reps)),
            alpha=float(data.get("alpha", cls.alpha)),
            seed=int(data.get("seed", cls.seed)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SimResult:
    power_late: float
    power_itt: float
    mcse_late: float
    mcse_itt: float
    redraws: int
    reps: int
    n: int
    mean_tau_hat: float
    mean_gamma_hat: float
    mean_pi_hat: float
    asymptotic_power: float
    warnings: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["warnings"] = list(self.warnings)
        return data


@dataclass(frozen=True)
class BoundsCheck:
    kappa: float
    tau: float
    sim_power: float
    mcse: float
    lower: float
    ordered_lower: float
    upper: float
    contained: bool
    ordered_contained: Optional[bool]


BOUNDS_COLUMNS = [
    "kappa",
    "tau",
    "sim_power",
    "mcse",
    "lower",
    "ordered_lower",
    "upper",
    "contained",
    "ordered_contained",
]


class _ChunkTally(NamedTuple):
    late_rejections: int
    itt_rejections: int
    redraws: int
    tau_hats: np.ndarray
    gamma_hats: np.ndarray
    pi_hats: np.ndarray


def substream(seed: int, rep: int, redraw: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, replication, redraw)."""
    sequence = np.random.SeedSequence(seed, spawn_key=(rep, redraw))
    return np.random.Generator(np.random.Philox(sequence))


def mcse(power: float, reps: int) -> float:
    return math.sqrt(power * (1.0 - power) / reps)


def _replicate(
    spec: StrataSpec, cfg: SimConfig, rep: int, max_redraws: int
) -> Tuple[Any, Any, int]:
    for attempt in Retrying(
        stop=stop_after_attempt(max_redraws + 1),
        retry=retry_if_exception_type(DegenerateSampleError),
        reraise=True,
    ):
        with attempt:
            redraw = attempt.retry_state.attempt_number - 1
            rng = substream(cfg.seed, rep, redraw)
            z, d, y = generate_sample(spec, cfg.n, rng)
            late = wald_iv_estimate(z, d, y, cfg.alpha)
            itt = itt_estimate(z, y, cfg.alpha)
    if redraw:
        logger.debug(f"Replication {rep} redrawn {redraw} time(s)")
    return late, itt, redraw


def _run_chunk(task: Tuple[StrataSpec, SimConfig, int, int, int]):
    spec, cfg, start, stop, max_redraws = task
    size = stop - start
    tau_hats = np.empty(size)
    gamma_hats = np.empty(size)
    pi_hats = np.empty(size)
    late_rejections = itt_rejections = redraws = 0

    for i, rep in enumerate(range(start, stop)):
        late, itt, redrawn = _replicate(spec, cfg, rep, max_redraws)
        late_rejections += int(late.reject)
        itt_rejections += int(itt.reject)
        redraws += redrawn
        tau_hats[i] = late.tau_hat
        gamma_hats[i] = itt.gamma_hat
        pi_hats[i] = late.pi_hat

    return _ChunkTally(
        late_rejections,
        itt_rejections,
        redraws,
        tau_hats,
        gamma_hats,
        pi_hats,
    )


class MonteCarloEngine:
    def __init__(self, config: Optional[Config] = None, workers: int = 0):
        self.config = config or Config()
        self.workers = workers or self.config.resolve_workers()
        self.chunk_size = self.config.CHUNK_SIZE
        self.max_redraws = self.config.MAX_REDRAWS
        self.redraw_warn = self.config.REDRAW_WARN
        self.progress = self.config.PROGRESS

    def _tally(
        self, spec: StrataSpec, cfg: SimConfig, label: str
    ) -> List[_ChunkTally]:
        tasks = []
        for start in range(0, cfg.reps, self.chunk_size):
            stop = min(start + self.chunk_size, cfg.reps)
            tasks.append((spec, cfg, start, stop, self.max_redraws))
        bar = tqdm(
            total=len(tasks),
            desc=label,
            unit="chunk",
            disable=not self.progress,
        )
        try:
            if self.workers <= 1 or len(tasks) == 1:
                results = []
                for task in tasks:
                    results.append(_run_chunk(task))
                    bar.update(1)
                return results

            workers = min(self.workers, len(tasks))
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = []
                # map preserves task order
                for result in executor.map(_run_chunk, tasks):
                    results.append(result)
                    bar.update(1)
                return results
        finally:
            bar.close()

    def simulate_power(
        self, spec: StrataSpec, cfg: SimConfig, label: str = "simulate"
    ) -> SimResult:
        """Rejection rates of the Wald IV and ITT tests over cfg.reps draws."""
        logger.info(
            f"Simulating {cfg.reps} replications at N={cfg.n} "
            f"(tau={spec.tau:g}, pi={spec.p_c:g}, workers={self.workers})"
        )
        started = time.perf_counter()
        chunks = self._tally(spec, cfg, label)

        late = sum(c.late_rejections for c in chunks)
        itt = sum(c.itt_rejections for c in chunks)
        redraws = sum(c.redraws for c in chunks)
        power_late = late / cfg.reps
        power_itt = itt / cfg.reps
        logger.info(
            f"Finished {cfg.reps} replications in "
            f"{time.perf_counter() - started:.1f}s: LATE power "
            f"{power_late:.4f}, ITT power {power_itt:.4f}"
        )

        warnings = []
        if redraws > self.redraw_warn * cfg.reps:
            message = (
                f"{redraws} degenerate samples were redrawn across "
                f"{cfg.reps} replications"
            )
            logger.warning(message)
            warnings.append(message)

        return SimResult(
            power_late=power_late,
            power_itt=power_itt,
            mcse_late=mcse(power_late, cfg.reps),
            mcse_itt=mcse(power_itt, cfg.reps),
            redraws=redraws,
            reps=cfg.reps,
            n=cfg.n,
            mean_tau_hat=float(
                np.concatenate([c.tau_hats for c in chunks]).mean()
            ),
            mean_gamma_hat=float(
                np.concatenate([c.gamma_hats for c in chunks]).mean()
            ),
            mean_pi_hat=float(
                np.concatenate([c.pi_hats for c in chunks]).mean()
            ),
            asymptotic_power=asymptotic_power_of_spec(spec, cfg.n, cfg.alpha),
            warnings=tuple(warnings),
        )

    def validate_bounds(
        self,
        template: StrataSpec,
        kappa_grid: Sequence[float],
        cfg: SimConfig,
        err: Optional[ErrorSpec] = None,
        mode: Optional[AssignmentMode] = None,
    ) -> List[BoundsCheck]:
        """
        Place simulated power next to the analytic bounds on a kappa grid.

        Grid point i runs with seed cfg.seed + i. The bounds use
        EqualAssignment at p_z = 0.5 and GeneralAssignment otherwise unless
        ``mode`` says differently.
        """
        if any(k <= 0 for k in kappa_grid):
            raise DomainError("kappa grid values must be positive")
        err = err or ErrorSpec(alpha=cfg.alpha)
        if mode is None:
            assumptions = AssumptionSet.for_assignment(
                template.p_z, ordered_means=True
            )
        else:
            assumptions = AssumptionSet(mode, ordered_means=True)

        checks = []
        for i, kappa in enumerate(kappa_grid):
            tau = tau_for_kappa(template, kappa)
            spec = template.with_tau(tau)
            result = self.simulate_power(
                spec,
                replace(cfg, seed=cfg.seed + i),
                label=f"kappa={kappa:g}",
            )
            bounds = late_power_bounds(
                DesignPoint(kappa, template.p_c, cfg.n, template.p_z),
                assumptions,
                err,
            )
            slack = CONTAINMENT_MCSE * result.mcse_late
            sim = result.power_late
            contained = bounds.lower - slack <= sim <= bounds.upper + slack
            ordered_contained = None
            if ordered_means_of_spec(spec).satisfied:
                ordered_contained = sim >= bounds.ordered_lower - slack
            if not contained:
                logger.warning(
                    f"kappa={kappa:g}: simulated power {sim:.4f} outside "
                    f"[{bounds.lower:.4f}, {bounds.upper:.4f}]"
                )
            checks.append(
                BoundsCheck(
                    kappa=kappa,
                    tau=tau,
                    sim_power=sim,
                    mcse=result.mcse_late,
                    lower=bounds.lower,
                    ordered_lower=bounds.ordered_lower,
                    upper=bounds.upper,
                    contained=contained,
                    ordered_contained=ordered_contained,
                )
            )
        return checks


def simulate_power(
    spec: StrataSpec, cfg: SimConfig, workers: int = 1
) -> SimResult:
    return MonteCarloEngine(workers=workers).simulate_power(spec, cfg)


def validate_bounds(
    template: StrataSpec,
    kappa_grid: Sequence[float],
    cfg: SimConfig,
    err: Optional[ErrorSpec] = None,
    workers: int = 1,
) -> List[BoundsCheck]:
    return MonteCarloEngine(workers=workers).validate_bounds(
        template, kappa_grid, cfg, err
    )
