from typing import Any, Dict, Optional


class LatePowerError(Exception):
    pass


class DomainError(LatePowerError, ValueError):
    """An input lies outside the domain of the requested operation."""


class InfeasibleTableError(DomainError):
    pass


class UnattainableError(LatePowerError):
    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(reason)
        self.reason = reason
        self.details = details or {}


class DegenerateSampleError(LatePowerError):
    """Raised for samples the estimators cannot use; callers redraw."""


class BracketError(LatePowerError):
    def __init__(self, message: str, diagnostics: Dict[str, Any]):
        super().__init__(message)
        self.diagnostics = diagnostics

    def __str__(self) -> str:
        details = ", ".join(
            f"{key}={value}" for key, value in self.diagnostics.items()
        )
        return f"{self.args[0]} ({details})"
