"""Market and contract descriptions shared across the package."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import DomainError


class OptionKind(str, enum.Enum):
    CALL = "call"
    PUT = "put"

    @property
    def sign(self) -> int:
        return 1 if self is OptionKind.CALL else -1


class Exercise(str, enum.Enum):
    EUROPEAN = "european"
    AMERICAN = "american"


class Underlying(str, enum.Enum):
    NO_DIVIDEND = "no_dividend"
    DIVIDEND_YIELD = "dividend_yield"
    FUTURES = "futures"


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MarketState:
    """State of the market at valuation time.

    ``spot`` is the underlying price (the futures price for futures options)
    and may be negative. ``sigma_s`` is the standard deviation of price
    *changes* per square-root year, in price units, not a return volatility.
    """

    spot: float
    rate: float
    sigma_s: float
    maturity_time: float
    valuation_time: float = 0.0
    dividend_yield: float = 0.0

    def __post_init__(self) -> None:
        for name in ("spot", "rate", "sigma_s", "maturity_time", "valuation_time", "dividend_yield"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.sigma_s < 0.0:
            raise DomainError(f"sigma_s must be >= 0, got {self.sigma_s}")
        if self.maturity_time < self.valuation_time:
            raise DomainError(
                f"maturity_time {self.maturity_time} precedes valuation_time {self.valuation_time}"
            )

    @classmethod
    def from_tau(
        cls,
        spot: float,
        rate: float,
        sigma_s: float,
        tau: float,
        dividend_yield: float = 0.0,
        valuation_time: float = 0.0,
    ) -> "MarketState":
        return cls(
            spot=spot,
            rate=rate,
            sigma_s=sigma_s,
            maturity_time=valuation_time + tau,
            valuation_time=valuation_time,
            dividend_yield=dividend_yield,
        )

    @property
    def tau(self) -> float:
        return self.maturity_time - self.valuation_time

    def with_(self, **changes) -> "MarketState":
        return replace(self, **changes)


@dataclass(frozen=True)
class OptionContract:
    kind: OptionKind
    strike: float
    exercise: Exercise = Exercise.EUROPEAN
    underlying: Underlying = Underlying.NO_DIVIDEND

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OptionKind(self.kind))
        object.__setattr__(self, "exercise", Exercise(self.exercise))
        object.__setattr__(self, "underlying", Underlying(self.underlying))
        object.__setattr__(self, "strike", _finite("strike", self.strike))


def carry_yield(ms: MarketState, underlying: Underlying) -> float:
    """Yield q the pricers use for a given underlying kind.

    No-dividend underlyings ignore ``ms.dividend_yield``; futures behave like
    an asset whose yield equals the riskless rate.
    """
    underlying = Underlying(underlying)
    if underlying is Underlying.NO_DIVIDEND:
        return 0.0
    if underlying is Underlying.FUTURES:
        return ms.rate
    return ms.dividend_yield
