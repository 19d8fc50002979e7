"""Exception hierarchy for the simulator."""


class RipSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(RipSimError, ValueError):
    """Malformed or inconsistent device / pulse configuration."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class DispersiveRegimeViolation(ConfigError):
    pass


class DegenerateQubits(ConfigError):
    pass


class TruncationTooSmall(RipSimError, ValueError):
    pass


class OutOfRange(RipSimError, ValueError):
    pass


class StepTooLarge(RipSimError, ValueError):
    pass


class ResonantDrive(RipSimError, ValueError):
    pass


class UnsupportedTarget(RipSimError, ValueError):
    pass


class Unreachable(RipSimError, RuntimeError):
    """Tune-up could not reach the requested phase."""


class DomainError(RipSimError, ValueError):
    pass


class InvalidDensityMatrix(RipSimError, ValueError):
    pass
