"""
Exception hierarchy.

Every error carries the CLI exit code of its family so the command layer
can translate it without inspecting types one by one.
"""

from typing import Any


class QCherenkovError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, **context: Any) -> None:
        super().__init__(detail)
        self.detail = detail
        self.context = context

    def __str__(self) -> str:
        if not self.context:
            return self.detail
        extra = ", ".join(f"{k}={v}" for k, v in self.context.items())
        return f"{self.detail} ({extra})"


# Configuration (exit 2)


class ConfigError(QCherenkovError):
    exit_code = 2

    def __init__(self, detail: str, diagnostics: list[str] | None = None, **context: Any):
        super().__init__(detail, **context)
        self.diagnostics = diagnostics or []


class InvalidWindow(ConfigError):
    pass


class UnknownFormat(ConfigError):
    pass


# Physics (exit 3)


class PhysicsError(QCherenkovError):
    exit_code = 3


class OutOfRange(PhysicsError):
    pass


class NearResonance(PhysicsError):
    pass


class NegativeEnergy(PhysicsError):
    pass


class BelowThreshold(PhysicsError):
    pass


class InvalidState(PhysicsError):
    pass


class UnsupportedVariant(PhysicsError):
    pass


class GridTooCoarse(PhysicsError):
    pass


class GridTooNarrow(PhysicsError):
    pass


class NonPositiveRadius(PhysicsError):
    pass


class TruncationFailure(PhysicsError):
    pass


class OutOfWindow(PhysicsError):
    pass


class DegenerateEnvelope(PhysicsError):
    pass


class FitFailure(PhysicsError):
    """Raised for non-Gaussian coherence profiles; `profile` keeps the fringes."""

    def __init__(self, detail: str, profile: Any = None, **context: Any) -> None:
        super().__init__(detail, **context)
        self.profile = profile


class IllConditioned(PhysicsError):
    pass


class NegativeVariance(PhysicsError):
    pass


class NondispersiveDivergence(PhysicsError):
    pass


class TooLarge(PhysicsError):
    pass


# I/O (exit 4)


class IoError(QCherenkovError):
    exit_code = 4
