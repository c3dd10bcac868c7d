import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

ROUND_MODES = ("ceil", "nearest")


def get_config_dir() -> Path:
    """Get the per-user configuration directory for late-power"""
    return Path.home() / ".late-power"


def load_config_from_user_dir() -> bool:
    """Load ~/.late-power/.env if it exists; never overrides the process"""
    env_path = get_config_dir() / ".env"
    if env_path.exists():
        load_dotenv(env_path, override=False)
        return True
    return False


class Config:
    def __init__(self):
        self.reload_from_env()

    def reload_from_env(self):
        """Reload configuration from environment variables"""
        self.ALPHA: float = float(os.getenv("LATE_POWER_ALPHA", "0.05"))
        self.BETA: float = float(os.getenv("LATE_POWER_BETA", "0.2"))
        self.P_Z: float = float(os.getenv("LATE_POWER_PZ", "0.5"))

        self.REPS: int = int(os.getenv("LATE_POWER_REPS", "5000"))
        self.SWEEP_REPS: int = int(
            os.getenv("LATE_POWER_SWEEP_REPS", "10000")
        )
        self.SEED: int = int(os.getenv("LATE_POWER_SEED", "20240611"))

        self.THREADS: int = int(os.getenv("LATE_POWER_THREADS", "0"))
        self.CHUNK_SIZE: int = int(
            os.getenv("LATE_POWER_CHUNK_SIZE", "250")
        )
        self.MAX_REDRAWS: int = int(
            os.getenv("LATE_POWER_MAX_REDRAWS", "100")
        )
        self.REDRAW_WARN: float = float(
            os.getenv("LATE_POWER_REDRAW_WARN", "0.01")
        )

        self.ROUND_MODE: str = os.getenv("LATE_POWER_ROUND", "ceil").lower()
        self.OUTCOME_SD: float = float(
            os.getenv("LATE_POWER_OUTCOME_SD", "16758.8")
        )
        self.PROGRESS: bool = os.getenv(
            "LATE_POWER_PROGRESS", "0"
        ).lower() in ("1", "true", "yes")

        self.LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    def validate(self) -> None:
        if not 0.0 < self.ALPHA < 1.0:
            raise ValueError("LATE_POWER_ALPHA must lie in (0, 1)")
        if not 0.0 < self.BETA < 1.0:
            raise ValueError("LATE_POWER_BETA must lie in (0, 1)")
        if not 0.0 < self.P_Z < 1.0:
            raise ValueError("LATE_POWER_PZ must lie in (0, 1)")
        if self.REPS < 1 or self.SWEEP_REPS < 1:
            raise ValueError(
                "LATE_POWER_REPS and LATE_POWER_SWEEP_REPS must be at least 1"
            )
        if self.THREADS < 0:
            raise ValueError("LATE_POWER_THREADS must be >= 0 (0 = auto)")
        if self.CHUNK_SIZE < 1:
            raise ValueError("LATE_POWER_CHUNK_SIZE must be at least 1")
        if self.MAX_REDRAWS < 0:
            raise ValueError("LATE_POWER_MAX_REDRAWS must be >= 0")
        if not 0.0 <= self.REDRAW_WARN <= 1.0:
            raise ValueError("LATE_POWER_REDRAW_WARN must lie in [0, 1]")
        if self.ROUND_MODE not in ROUND_MODES:
            raise ValueError(
                f"LATE_POWER_ROUND must be one of {', '.join(ROUND_MODES)}"
            )
        if self.OUTCOME_SD <= 0:
            raise ValueError("LATE_POWER_OUTCOME_SD must be positive")

    def resolve_workers(self) -> int:
        """Effective simulation worker count (0 means one per CPU)"""
        if self.THREADS > 0:
            return self.THREADS
        return max(1, os.cpu_count() or 1)
