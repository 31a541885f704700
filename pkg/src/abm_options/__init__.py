"""European and American option pricing under arithmetic Brownian motion."""

__version__ = "0.1.0"

from .analytic import (
    PriceQuote,
    bachelier_price,
    effective_stddev,
    parity_gap,
    perpetual_call,
    price_european,
    price_naive_call,
    price_naive_put,
    std_normal_cdf,
    std_normal_pdf,
    upper_bound_crossing,
)
from .calibration import PriceSeries, historical_sigma, implied_sigma, load_price_series
from .market import Exercise, MarketState, OptionContract, OptionKind, Underlying
from .oracle import McConfig, price_by_mc, price_by_quadrature, terminal_law
from .pde import GridSpec, PdeOperator, pde_residual, solve_american, solve_european
