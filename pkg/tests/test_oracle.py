import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from abm_options import McConfig, MarketState, OptionContract, price_by_mc, price_by_quadrature, price_european, terminal_law
from abm_options.errors import ConfigError, UnsupportedExerciseError
from abm_options.market import Underlying
from abm_options.oracle import MC_CHUNK, standard_normals


def test_terminal_law(benchmark_market):
    law = terminal_law(benchmark_market)
    assert law.mean == pytest.approx(5.126575602622144, rel=1e-15)
    assert law.stddev == pytest.approx(2.148115144456219, rel=1e-15)


def test_terminal_law_futures_has_no_drift(benchmark_market):
    law = terminal_law(benchmark_market, Underlying.FUTURES)
    assert law.mean == 5.0
    assert law.stddev == pytest.approx(3.0 * math.sqrt(0.5), rel=1e-15)


@pytest.mark.parametrize("kind", ["call", "put"])
def test_quadrature_benchmark(benchmark_market, kind):
    oc = OptionContract(kind, 5.0)
    assert price_by_quadrature(benchmark_market, oc) == pytest.approx(price_european(benchmark_market, oc).price, abs=1e-12)


def test_quadrature_far_kink_uses_linear_payoff():
    ms = MarketState.from_tau(spot=40.0, rate=0.05, sigma_s=0.5, tau=0.5)
    oc = OptionContract("call", -40.0)
    assert price_by_quadrature(ms, oc) == pytest.approx(40.0 + 40.0 * math.exp(-0.025), rel=1e-14)
    assert price_by_quadrature(ms, OptionContract("put", -40.0)) == 0.0


def test_quadrature_zero_sigma():
    ms = MarketState.from_tau(spot=6.0, rate=0.05, sigma_s=0.0, tau=0.5)
    assert price_by_quadrature(ms, OptionContract("call", 5.0)) == pytest.approx(6.0 - 5.0 * math.exp(-0.025), rel=1e-14)


markets = st.builds(
    MarketState.from_tau,
    spot=st.floats(-50, 50),
    rate=st.floats(-0.05, 0.2),
    sigma_s=st.floats(0.01, 20),
    tau=st.floats(0.01, 10),
    dividend_yield=st.floats(-0.05, 0.2),
)


@given(markets, st.floats(-50, 50), st.sampled_from(["call", "put"]), st.sampled_from(list(Underlying)))
def test_quadrature_matches_closed_form(ms, strike, kind, underlying):
    oc = OptionContract(kind, strike, underlying=underlying)
    assert price_by_quadrature(ms, oc) == pytest.approx(price_european(ms, oc).price, abs=1e-9)


def test_quadrature_needs_enough_nodes(benchmark_market):
    with pytest.raises(ConfigError):
        price_by_quadrature(benchmark_market, OptionContract("call", 5.0), n_nodes=8)


def test_oracles_reject_american(benchmark_market):
    oc = OptionContract("put", 5.0, exercise="american")
    with pytest.raises(UnsupportedExerciseError):
        price_by_quadrature(benchmark_market, oc)
    with pytest.raises(UnsupportedExerciseError):
        price_by_mc(benchmark_market, oc)


def test_mc_within_three_standard_errors(benchmark_market):
    oc = OptionContract("call", 5.0)
    est, se = price_by_mc(benchmark_market, oc, McConfig(200_000, seed=3))
    assert abs(est - price_european(benchmark_market, oc).price) <= 3 * se
    assert 0.0 < se < 0.01


def test_mc_is_deterministic(benchmark_market):
    oc = OptionContract("put", 5.0)
    cfg = McConfig(150_000, seed=11)
    assert price_by_mc(benchmark_market, oc, cfg) == price_by_mc(benchmark_market, oc, cfg)
    assert price_by_mc(benchmark_market, oc, cfg) != price_by_mc(benchmark_market, oc, McConfig(150_000, seed=12))


def test_normals_stream_is_prefix_stable():
    long = standard_normals(5, 3 * MC_CHUNK + 17)
    short = standard_normals(5, MC_CHUNK + 3)
    np.testing.assert_array_equal(long[: short.size], short)
    assert np.all(np.isfinite(long))
    assert abs(long.mean()) < 0.02
    assert long.std() == pytest.approx(1.0, abs=0.02)


def test_antithetic_reduces_error(benchmark_market):
    oc = OptionContract("call", 5.0)
    _, plain = price_by_mc(benchmark_market, oc, McConfig(100_000, seed=1))
    est, anti = price_by_mc(benchmark_market, oc, McConfig(100_000, seed=1, antithetic=True))
    assert anti <= plain
    assert abs(est - price_european(benchmark_market, oc).price) <= 3 * anti


def test_mc_zero_sigma_is_exact():
    ms = MarketState.from_tau(spot=6.0, rate=0.05, sigma_s=0.0, tau=0.5)
    est, se = price_by_mc(ms, OptionContract("call", 5.0))
    assert est == pytest.approx(6.0 - 5.0 * math.exp(-0.025), rel=1e-14)
    assert se == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_paths=1), dict(n_paths=2.5), dict(n_paths=11, antithetic=True), dict(seed=-1), dict(seed=2**64)],
)
def test_mc_config_validation(kwargs):
    with pytest.raises(ConfigError):
        McConfig(**kwargs)


@settings(max_examples=20, deadline=None)
@given(markets, st.floats(-50, 50), st.sampled_from(list(Underlying)), st.integers(0, 2**32))
def test_mc_agrees_with_closed_form(ms, strike, underlying, seed):
    oc = OptionContract("call", strike, underlying=underlying)
    law = terminal_law(ms, underlying)
    # deep out of the money almost no path pays and the sample SE says nothing
    assume(abs(strike - law.mean) <= 3.0 * law.stddev)
    est, se = price_by_mc(ms, oc, McConfig(20_000, seed=seed))
    # 5 SE keeps the false-failure rate per example below 1e-6
    assert abs(est - price_european(ms, oc).price) <= 5 * se + 1e-12
