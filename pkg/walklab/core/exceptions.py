"""Custom exception classes for the laboratory."""

from typing import Any


class BaseAppError(Exception):
    """Base exception for all application errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(BaseAppError):
    """Invalid parameters, paths, marks or distributions."""

    pass


class CapacityError(BaseAppError):
    """An enumeration or state-space cap was exceeded."""

    def __init__(
        self,
        message: str,
        cap: int,
        requested: int,
        details: dict[str, Any] | None = None,
    ) -> None:
        self.cap = cap
        self.requested = requested
        super().__init__(message, {"cap": cap, "requested": requested, **(details or {})})


class IdentityViolation(BaseAppError):
    """A combinatorial or probabilistic identity failed to hold."""

    def __init__(
        self,
        message: str,
        identity: str,
        counterexample: dict[str, Any] | None = None,
    ) -> None:
        self.identity = identity
        self.counterexample = counterexample or {}
        super().__init__(message, {"identity": identity, "counterexample": self.counterexample})


class SimulationError(BaseAppError):
    """Error while running Monte Carlo replicas."""

    pass
