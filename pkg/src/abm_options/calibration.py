"""Implied and historical sigma_s."""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analytic import _ncdf, _npdf, variance_factor
from .errors import ArbitrageViolationError, DataError, DomainError, SolverError, UnsupportedExerciseError
from .market import Exercise, MarketState, OptionContract, carry_yield

TRADING_DAY = 1.0 / 252.0
MAX_ITERATIONS = 200
_BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class ImpliedResult:
    sigma_s: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class PriceSeries:
    """Ordered (timestamp in days, price) observations.

    Each consecutive pair counts as one step of ``year_fraction_per_step``
    years, regardless of the calendar gap between timestamps.
    """

    observations: tuple
    year_fraction_per_step: float = TRADING_DAY

    def __post_init__(self) -> None:
        obs = tuple((float(t), float(p)) for t, p in self.observations)
        times = [t for t, _ in obs]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DataError("timestamps must be strictly increasing")
        if not all(math.isfinite(p) for _, p in obs):
            raise DataError("prices must be finite")
        if not self.year_fraction_per_step > 0.0:
            raise DataError("year_fraction_per_step must be positive")
        object.__setattr__(self, "observations", obs)

    @classmethod
    def from_prices(cls, prices: Sequence[float], year_fraction_per_step: float = TRADING_DAY) -> "PriceSeries":
        return cls(tuple(enumerate(prices)), year_fraction_per_step)

    @property
    def prices(self) -> np.ndarray:
        return np.array([p for _, p in self.observations])


def _parse_timestamp(text: str) -> float:
    text = text.strip()
    try:
        return float(dt.date.fromisoformat(text).toordinal())
    except ValueError:
        stamp = dt.datetime.fromisoformat(text)
        midnight = dt.datetime.combine(stamp.date(), dt.time(), tzinfo=stamp.tzinfo)
        return stamp.date().toordinal() + (stamp - midnight).total_seconds() / 86400.0


def load_price_series(path, year_fraction_per_step: float = TRADING_DAY) -> PriceSeries:
    """Read a ``date,price`` CSV. Malformed rows raise DataError naming the line."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["date", "price"]:
            raise DataError(f"{path}: line 1: expected header 'date,price', got {header!r}")
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DataError(f"{path}: line {line}: expected 2 fields, got {len(row)}")
            try:
                stamp = _parse_timestamp(row[0])
            except ValueError:
                raise DataError(f"{path}: line {line}: bad ISO-8601 date {row[0]!r}") from None
            try:
                price = float(row[1])
            except ValueError:
                raise DataError(f"{path}: line {line}: bad price {row[1]!r}") from None
            if not math.isfinite(price):
                raise DataError(f"{path}: line {line}: non-finite price {row[1]!r}")
            if rows and stamp <= rows[-1][0]:
                raise DataError(f"{path}: line {line}: date not after the previous row")
            rows.append((stamp, price))
    return PriceSeries(tuple(rows), year_fraction_per_step)


def historical_sigma(ps: PriceSeries) -> float:
    """sqrt(Var[dS] / dt) from first differences, with the unbiased (n - 1) variance."""
    if len(ps.observations) < 3:
        raise DataError("need at least 3 observations")
    diffs = np.diff(ps.prices)
    return float(math.sqrt(np.var(diffs, ddof=1) / ps.year_fraction_per_step))


def implied_sigma(ms: MarketState, oc: OptionContract, market_price: float) -> ImpliedResult:
    """Invert the closed-form European price for sigma_s.

    ``ms.sigma_s`` is ignored. Newton steps use the analytic vega and fall
    back to bisection whenever they leave the current bracket. There is no
    upper no-arbitrage bound: with negative prices allowed a call can be
    worth more than the spot.
    """
    if oc.exercise is not Exercise.EUROPEAN:
        raise UnsupportedExerciseError("implied sigma_s is defined for European options only")
    if not math.isfinite(market_price):
        raise DomainError("market price must be finite")
    q = carry_yield(ms, oc.underlying)
    a = ms.rate - q
    tau = ms.tau
    sign = oc.kind.sign
    disc_q = math.exp(-q * tau)
    m = sign * (ms.spot - oc.strike * math.exp(-a * tau))
    floor = disc_q * max(m, 0.0)

    if market_price < floor - _BOUND_SLACK:
        raise ArbitrageViolationError(
            f"price {market_price!r} is below the lower bound {floor!r}"
        )
    tol = 1e-12 * max(1.0, abs(market_price))
    if market_price <= floor + tol:
        return ImpliedResult(sigma_s=0.0, iterations=0, residual=market_price - floor)
    if tau == 0.0:
        raise SolverError("no sigma_s reproduces a time value at expiry")

    root_g = math.sqrt(variance_factor(a, tau))

    def price_and_vega(sigma):
        h = sigma * root_g
        d = m / h
        nd = _npdf(d)
        return disc_q * (m * _ncdf(d) + h * nd), disc_q * root_g * nd

    lo, hi = 1e-12, 1.0
    iterations = 0
    while price_and_vega(hi)[0] < market_price:
        lo, hi = hi, 2.0 * hi
        iterations += 1
        if iterations >= MAX_ITERATIONS:
            raise SolverError("could not bracket sigma_s", iterations=iterations)

    # at the money the price is linear in sigma_s, which is a good start elsewhere too
    sigma = min(max(market_price / (disc_q * root_g * _npdf(0.0)), lo), hi)
    residual = math.inf
    while iterations < MAX_ITERATIONS:
        iterations += 1
        price, vega = price_and_vega(sigma)
        residual = price - market_price
        if abs(residual) <= tol:
            return ImpliedResult(sigma_s=sigma, iterations=iterations, residual=residual)
        if residual > 0.0:
            hi = sigma
        else:
            lo = sigma
        step = sigma - residual / vega if vega > 0.0 else math.nan
        sigma = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4.0 * np.finfo(float).eps * hi:
            price, _ = price_and_vega(sigma)
            return ImpliedResult(sigma_s=sigma, iterations=iterations, residual=price - market_price)
    raise SolverError(
        f"implied sigma_s did not converge in {MAX_ITERATIONS} iterations",
        iterations=iterations,
        last_change=residual,
    )

