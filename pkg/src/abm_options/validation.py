"""Cross-module validation battery used by ``abm-options validate`` and the tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .analytic import parity_gap, price_european, price_naive_call
from .market import MarketState, OptionContract, OptionKind, Underlying
from .oracle import price_by_quadrature
from .pde import PdeOperator, pde_residual

SWEEP_SEED = 20200422


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def sweep(n: int, seed: int = SWEEP_SEED) -> Iterator[tuple[MarketState, float, Underlying]]:
    """Random markets: S, K in [-50, 50], sigma_s in (0, 20], r, q in [-0.05, 0.2], tau in (0, 10]."""
    rng = np.random.default_rng(seed)
    kinds = list(Underlying)
    for _ in range(n):
        spot, strike = rng.uniform(-50.0, 50.0, 2)
        sigma = 20.0 * (1.0 - rng.random())
        rate, q = rng.uniform(-0.05, 0.2, 2)
        tau = 10.0 * (1.0 - rng.random())
        t0 = rng.uniform(0.0, 5.0)
        ms = MarketState.from_tau(spot, rate, sigma, tau, dividend_yield=q, valuation_time=t0)
        yield ms, float(strike), kinds[int(rng.integers(3))]


BENCHMARK = MarketState.from_tau(spot=5.0, rate=0.05, sigma_s=3.0, tau=0.5)


def check_parity(n: int = 10_000, tol: float = 1e-10) -> CheckResult:
    worst = max(abs(parity_gap(ms, k, u)) for ms, k, u in sweep(n))
    return CheckResult("parity_sweep", worst <= tol, f"max |gap| = {worst:.3e} over {n} draws (tol {tol:g})")


def check_quadrature(n: int = 2_000, tol: float = 1e-9) -> CheckResult:
    worst = 0.0
    for i, (ms, k, u) in enumerate(sweep(n)):
        oc = OptionContract(OptionKind.CALL if i % 2 else OptionKind.PUT, k, underlying=u)
        worst = max(worst, abs(price_by_quadrature(ms, oc) - price_european(ms, oc).price))
    return CheckResult("quadrature_agreement", worst <= tol, f"max |quad - analytic| = {worst:.3e} (tol {tol:g})")


def check_residual_discrimination() -> CheckResult:
    good = abs(pde_residual(lambda m: price_european(m, OptionContract(OptionKind.CALL, 5.0)).price, BENCHMARK))
    bad = abs(pde_residual(lambda m: price_naive_call(m, 5.0), BENCHMARK))
    ok = good <= 1e-5 and bad >= 1e-3
    return CheckResult(
        "residual_discrimination", ok, f"correct formula {good:.3e} (<= 1e-5), naive {bad:.3e} (>= 1e-3)"
    )


def check_futures_equivalence(tol: float = 1e-12) -> CheckResult:
    worst = 0.0
    for ms, k, _ in sweep(500, seed=SWEEP_SEED + 1):
        ms = ms.with_(dividend_yield=ms.rate)
        for kind in OptionKind:
            via_yield = price_european(ms, OptionContract(kind, k, underlying=Underlying.DIVIDEND_YIELD)).price
            via_futures = price_european(ms, OptionContract(kind, k, underlying=Underlying.FUTURES)).price
            worst = max(worst, abs(via_yield - via_futures) / max(1.0, abs(via_futures)))
    atm = price_european(
        MarketState.from_tau(0.0, 0.0, 1.0, 1.0), OptionContract(OptionKind.CALL, 0.0, underlying=Underlying.FUTURES)
    ).price
    atm_err = abs(atm - 0.398942280)
    ok = worst <= tol and atm_err <= 1e-9
    return CheckResult("futures_equivalence", ok, f"max q=r gap {worst:.3e} (tol {tol:g}); ATM price {atm:.12f}")


def check_zero_rate_coincidence(tol: float = 1e-12) -> CheckResult:
    worst = 0.0
    for ms, k, _ in sweep(500, seed=SWEEP_SEED + 2):
        ms = ms.with_(rate=0.0)
        correct = price_european(ms, OptionContract(OptionKind.CALL, k)).price
        worst = max(worst, abs(price_naive_call(ms, k) - correct) / max(1.0, correct))
    return CheckResult("zero_rate_coincidence", worst <= tol, f"max |naive - correct| = {worst:.3e} at r = 0")


def check_figure2_anchor() -> CheckResult:
    ms = BENCHMARK.with_(spot=0.0)
    oc = OptionContract(OptionKind.CALL, -5.0)
    analytic = price_european(ms, oc).price
    quad = price_by_quadrature(ms, oc)
    ok = abs(analytic - 4.88) <= 0.01 and abs(quad - 4.88) <= 0.01
    return CheckResult("figure2_anchor", ok, f"analytic {analytic:.6f}, quadrature {quad:.6f} (4.88 +- 0.01)")


CHECKS: list[Callable[[], CheckResult]] = [
    check_parity,
    check_quadrature,
    check_residual_discrimination,
    check_futures_equivalence,
    check_zero_rate_coincidence,
    check_figure2_anchor,
]


def run_all() -> list[CheckResult]:
    results = []
    for check in CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crashing check is a failing check
            results.append(CheckResult(check.__name__.removeprefix("check_"), False, f"error: {exc}"))
    return results


def all_passed(results: list[CheckResult]) -> bool:
    return bool(results) and all(r.passed for r in results)
