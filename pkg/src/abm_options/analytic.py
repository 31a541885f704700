"""Closed-form European prices and Greeks under arithmetic Brownian motion.

Risk-neutral dynamics: ``dS = (r - q) S dt + sigma_s dB``. The terminal price
is Gaussian, so calls and puts have Bachelier-like closed forms written in
terms of the effective standard deviation

    h = sigma_s * sqrt((1 - exp(-2 (r - q) tau)) / (2 (r - q)))

and the standardized moneyness ``d = (S - K exp(-(r - q) tau)) / h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

from .errors import DomainError, UnsupportedExerciseError
from .market import Exercise, MarketState, OptionContract, OptionKind, Underlying, carry_yield

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# |(r - q) tau| below which the variance factor switches to its Taylor series
SERIES_SWITCH = 1e-6
# the rate-derivative of the variance factor cancels faster, so it switches later
_DERIV_SERIES_SWITCH = 1e-3


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    return arr


def _ncdf(x):
    # tail computed from |x| and reflected, so N(x) + N(-x) == 1 by construction
    if isinstance(x, float):
        tail = 0.5 * math.erfc(abs(x) / _SQRT2)
        return tail if x < 0.0 else 1.0 - tail
    x = np.asarray(x, dtype=float)
    tail = 0.5 * erfc(np.abs(x) / _SQRT2)
    out = np.where(x < 0.0, tail, 1.0 - tail)
    return out if out.ndim else float(out)


def _npdf(x):
    if isinstance(x, float):
        return _INV_SQRT_2PI * math.exp(-0.5 * x * x)
    x = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return out if out.ndim else float(out)


def std_normal_cdf(x):
    """Standard normal CDF for a scalar or array; raises DomainError on non-finite input."""
    _check_finite(x)
    return _ncdf(x)


def std_normal_pdf(x):
    """Standard normal density for a scalar or array; raises DomainError on non-finite input."""
    _check_finite(x)
    return _npdf(x)


def variance_factor(r_minus_q: float, tau: float) -> float:
    """(1 - exp(-2 a tau)) / (2 a) with a = r - q; equals tau when a == 0."""
    x = r_minus_q * tau
    if abs(x) < SERIES_SWITCH:
        return tau * (1.0 - x + (2.0 / 3.0) * x * x - (1.0 / 3.0) * x * x * x)
    return -math.expm1(-2.0 * x) / (2.0 * r_minus_q)


def variance_factor_rate_derivative(r_minus_q: float, tau: float) -> float:
    """Derivative of :func:`variance_factor` with respect to a = r - q."""
    x = r_minus_q * tau
    if abs(x) < _DERIV_SERIES_SWITCH:
        # sum_k k (-2)^k x^(k-1) / (k+1)!
        total, coef = 0.0, 1.0
        for k in range(1, 10):
            coef *= -2.0 / (k + 1)
            total += k * coef * x ** (k - 1)
        return tau * tau * total
    g = variance_factor(r_minus_q, tau)
    return (tau * math.exp(-2.0 * x) - g) / r_minus_q


def effective_stddev(sigma_s: float, r_minus_q: float, tau: float) -> float:
    """Normal standard deviation h entering the closed forms."""
    if tau < 0.0 or sigma_s < 0.0:
        raise DomainError(f"need tau >= 0 and sigma_s >= 0, got tau={tau}, sigma_s={sigma_s}")
    if sigma_s == 0.0 or tau == 0.0:
        return 0.0
    return sigma_s * math.sqrt(variance_factor(r_minus_q, tau))


@dataclass(frozen=True)
class VarianceHorizon:
    h: float
    d: float


@dataclass(frozen=True)
class PriceQuote:
    price: float
    delta: float
    gamma: float
    vega: float
    theta: float
    rho: float

    def as_dict(self) -> dict:
        return {
            "price": self.price,
            "delta": self.delta,
            "gamma": self.gamma,
            "vega": self.vega,
            "theta": self.theta,
            "rho": self.rho,
        }


def _scalar_or_array(x):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return float(x)
    arr = np.asarray(x, dtype=float)
    return arr if arr.ndim else float(arr)


def _moneyness(m, h):
    if isinstance(m, float):
        if h > 0.0:
            return m / h
        return math.copysign(math.inf, m) if m else 0.0
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(h > 0.0, m / np.where(h > 0.0, h, 1.0), np.sign(m) * np.inf)
    return d if d.ndim else float(d)


def european_values(kind, spot, strike, sigma_s: float, rate: float, q: float, tau: float):
    """Vectorized European prices over arrays of spot and/or strike.

    ``q`` is the carry yield actually applied (use ``rate`` for futures).
    """
    kind = OptionKind(kind)
    if tau < 0.0 or sigma_s < 0.0:
        raise DomainError("need tau >= 0 and sigma_s >= 0")
    a = rate - q
    h = effective_stddev(sigma_s, a, tau)
    disc_q = math.exp(-q * tau)
    m = _scalar_or_array(spot) - _scalar_or_array(strike) * math.exp(-a * tau)
    d = _moneyness(m, h)
    sign = kind.sign
    return disc_q * (sign * m * _ncdf(sign * d) + h * _npdf(d))


def bachelier_price(kind, forward, strike, sigma_f: float, rate: float, tau: float):
    """Bachelier futures option: e^{-r tau} sigma_f sqrt(tau) [d N(d) + n(d)] for a call."""
    kind = OptionKind(kind)
    if tau < 0.0 or sigma_f < 0.0:
        raise DomainError("need tau >= 0 and sigma_f >= 0")
    vol = sigma_f * math.sqrt(tau)
    m = _scalar_or_array(forward) - _scalar_or_array(strike)
    d = _moneyness(m, vol)
    sign = kind.sign
    return math.exp(-rate * tau) * (sign * m * _ncdf(sign * d) + vol * _npdf(d))


def variance_horizon(ms: MarketState, oc: OptionContract) -> VarianceHorizon:
    q = carry_yield(ms, oc.underlying)
    a = ms.rate - q
    h = effective_stddev(ms.sigma_s, a, ms.tau)
    m = ms.spot - oc.strike * math.exp(-a * ms.tau)
    return VarianceHorizon(h=h, d=_moneyness(m, h))


def price_european(ms: MarketState, oc: OptionContract) -> PriceQuote:
    """Price and analytic Greeks of a European call or put.

    Dispatches on the underlying kind: no-dividend (q = 0), continuous
    dividend yield (q from ``ms``) or futures (q = r, the Bachelier form).
    At tau == 0 or sigma_s == 0 the price collapses to the discounted
    forward intrinsic value.

    Greeks: delta/gamma in spot, vega in sigma_s, theta as d/dt in calendar
    time with maturity fixed, rho as d/dr holding q fixed (for futures q
    moves with r, giving rho = -tau * price).
    """
    if oc.exercise is not Exercise.EUROPEAN:
        raise UnsupportedExerciseError("closed forms price European exercise only; use the pde module")
    q = carry_yield(ms, oc.underlying)
    r, tau, sigma = ms.rate, ms.tau, ms.sigma_s
    a = r - q
    g = variance_factor(a, tau)
    s = math.sqrt(g)
    h = sigma * s
    disc_q = math.exp(-q * tau)
    k_fwd = oc.strike * math.exp(-a * tau)
    m = ms.spot - k_fwd
    d = _moneyness(m, h)
    nd = _npdf(d)
    is_call = oc.kind is OptionKind.CALL

    if is_call:
        cdf = _ncdf(d)
        price = disc_q * (m * cdf + h * nd)
        delta = disc_q * cdf
    else:
        cdf = _ncdf(-d)
        price = disc_q * (-m * cdf + h * nd)
        delta = -disc_q * cdf
    if oc.underlying is Underlying.FUTURES:
        price = bachelier_price(oc.kind, ms.spot, oc.strike, sigma, r, tau)

    if h > 0.0:
        gamma = disc_q * nd / h
    else:
        gamma = math.inf if m == 0.0 else 0.0
    vega = disc_q * s * nd

    # d/dtau of h; infinite at expiry, where it only matters at the money
    if s > 0.0:
        dh_dtau = sigma * math.exp(-2.0 * a * tau) / (2.0 * s)
    else:
        dh_dtau = math.inf if sigma > 0.0 else 0.0
    time_value = disc_q * nd * dh_dtau if nd > 0.0 else 0.0
    signed_carry = a * disc_q * k_fwd * cdf
    dprice_dtau = -q * price + (signed_carry if is_call else -signed_carry) + time_value
    theta = -dprice_dtau

    if oc.underlying is Underlying.FUTURES:
        rho = -tau * price
    else:
        dh_da = sigma * variance_factor_rate_derivative(a, tau) / (2.0 * s) if s > 0.0 else 0.0
        strike_term = disc_q * cdf * tau * k_fwd
        rho = (strike_term if is_call else -strike_term) + disc_q * nd * dh_da

    return PriceQuote(
        price=float(price),
        delta=float(delta),
        gamma=float(gamma),
        vega=float(vega),
        theta=float(theta),
        rho=float(rho),
    )


def _naive(ms: MarketState, strike: float, sign: int) -> float:
    r, tau = ms.rate, ms.tau
    vol = ms.sigma_s * math.sqrt(tau)
    m = ms.spot + r * tau - strike
    d = _moneyness(m, vol)
    return math.exp(-r * tau) * (sign * m * _ncdf(sign * d) + vol * _npdf(d))


def price_naive_call(ms: MarketState, strike: float) -> float:
    """Call price from the flawed risk-neutral recipe that sets the ABM drift to r.

    Kept as a negative control: it solves neither the pricing PDE nor
    put-call parity, and coincides with the correct formula only at r = 0.
    """
    return _naive(ms, strike, 1)


def price_naive_put(ms: MarketState, strike: float) -> float:
    return _naive(ms, strike, -1)


def parity_gap(ms: MarketState, strike: float, underlying: Underlying = Underlying.NO_DIVIDEND) -> float:
    """(c - p) - (S e^{-q tau} - K e^{-r tau}); zero up to rounding for these closed forms."""
    q = carry_yield(ms, underlying)
    call = price_european(ms, OptionContract(OptionKind.CALL, strike, underlying=underlying)).price
    put = price_european(ms, OptionContract(OptionKind.PUT, strike, underlying=underlying)).price
    return (call - put) - (ms.spot * math.exp(-q * ms.tau) - strike * math.exp(-ms.rate * ms.tau))


def perpetual_call(spot: float, sigma_s: float, r: float) -> float:
    """Limit of the no-dividend call price as maturity goes to infinity."""
    if not r > 0.0:
        raise DomainError(f"perpetual call needs r > 0, got {r}")
    if sigma_s < 0.0:
        raise DomainError(f"sigma_s must be >= 0, got {sigma_s}")
    if sigma_s == 0.0:
        return max(spot, 0.0)
    scale = math.sqrt(2.0 * r) / sigma_s
    x = scale * spot
    return spot * _ncdf(x) + _npdf(x) / scale


def upper_bound_crossing(
    sigma_s: float,
    r: float,
    strike: float,
    tau: float,
    *,
    q: float = 0.0,
    s_max: float = 100.0,
    step: float = 0.05,
    xtol: float = 1e-9,
) -> Optional[float]:
    """Spot at which the call price crosses the spot itself, or None.

    Scans f(S) = call(S) - S on the grid step, 2 step, ... < s_max and
    refines the first sign change with Brent's method. Crossings closer to
    zero than ``step`` are not resolved.
    """
    if step <= 0.0 or s_max <= step:
        raise DomainError("need 0 < step < s_max")
    n = int(math.ceil(s_max / step)) - 1
    grid = step * np.arange(1, n + 1)

    def f(s):
        return european_values(OptionKind.CALL, s, strike, sigma_s, r, q, tau) - s

    values = f(grid)
    flips = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0.0)[0]
    if flips.size == 0:
        return None
    i = int(flips[0])
    if values[i] == 0.0:
        return float(grid[i])
    return float(brentq(f, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
