"""Exception hierarchy shared by the pricing, solver and calibration modules."""


class AbmOptionsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AbmOptionsError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class UnsupportedExerciseError(AbmOptionsError, ValueError):
    """A closed-form or oracle pricer was asked to value an American option."""


class ConfigError(AbmOptionsError, ValueError):
    """Solver or Monte Carlo configuration is invalid."""


class GridError(AbmOptionsError, ValueError):
    """A finite-difference grid cannot represent the requested problem."""


class DataError(AbmOptionsError, ValueError):
    """Price-series input is malformed or too short."""


class ArbitrageViolationError(AbmOptionsError, ValueError):
    """A quoted price lies below the no-arbitrage lower bound."""


class SolverError(AbmOptionsError, RuntimeError):
    """An iterative numerical method failed to converge."""

    def __init__(self, message: str, iterations: int = 0, last_change: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.last_change = last_change
