"""Finite differences for the ABM pricing PDE

    v_t + (r - q) S v_S + 0.5 sigma_s^2 v_SS - r v = 0.

Two tools live here: a pointwise residual check for candidate closed forms,
and a Crank-Nicolson solver on a uniform grid in S (negative prices
included) with Rannacher start-up and PSOR for early exercise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError, DomainError, GridError, SolverError
from .market import Exercise, MarketState, OptionContract, carry_yield
from .oracle import terminal_law

THETA = 0.5
PSOR_OMEGA = 1.2
PSOR_TOL = 1e-10
PSOR_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class PdeOperator:
    rate: float
    dividend_yield: float
    sigma_s: float

    @classmethod
    def futures(cls, rate: float, sigma_s: float) -> "PdeOperator":
        # q = r removes the drift term entirely
        return cls(rate=rate, dividend_yield=rate, sigma_s=sigma_s)

    @property
    def drift(self) -> float:
        return self.rate - self.dividend_yield

    def apply(self, v, v_t, v_s, v_ss, s):
        """Left-hand side minus right-hand side of the PDE."""
        return v_t + self.drift * s * v_s + 0.5 * self.sigma_s**2 * v_ss - self.rate * v


def pde_residual(
    pricer: Callable[[MarketState], float],
    ms: MarketState,
    operator: Optional[PdeOperator] = None,
    *,
    s_step: Optional[float] = None,
    t_step: float = 1e-6,
) -> float:
    """PDE residual of ``pricer`` at (ms.spot, ms.valuation_time).

    Derivatives use fourth-order central differences; the spot step
    defaults to 1e-4 * max(1, |S|). ``operator`` defaults to the
    dividend-yield operator built from ``ms``.
    """
    if ms.sigma_s <= 0.0:
        raise DomainError("residual needs sigma_s > 0")
    if ms.tau <= 2.0 * t_step:
        raise DomainError("residual is undefined at expiry, where the payoff has a kink")
    op = operator or PdeOperator(ms.rate, ms.dividend_yield, ms.sigma_s)
    hs = s_step if s_step is not None else 1e-4 * max(1.0, abs(ms.spot))

    def at_spot(k):
        return pricer(ms.with_(spot=ms.spot + k * hs))

    def at_time(k):
        return pricer(ms.with_(valuation_time=ms.valuation_time + k * t_step))

    v0 = at_spot(0)
    sp1, sm1, sp2, sm2 = at_spot(1), at_spot(-1), at_spot(2), at_spot(-2)
    v_s = (-sp2 + 8.0 * sp1 - 8.0 * sm1 + sm2) / (12.0 * hs)
    v_ss = (-sp2 + 16.0 * sp1 - 30.0 * v0 + 16.0 * sm1 - sm2) / (12.0 * hs * hs)
    tp1, tm1, tp2, tm2 = at_time(1), at_time(-1), at_time(2), at_time(-2)
    v_t = (-tp2 + 8.0 * tp1 - 8.0 * tm1 + tm2) / (12.0 * t_step)
    return float(op.apply(v0, v_t, v_s, v_ss, ms.spot))


@dataclass(frozen=True)
class GridSpec:
    """``n_tau`` time steps; ``n_s + 1`` price nodes, one spare so the strike-aligned window still covers the top."""

    n_s: int = 400
    n_tau: int = 400
    width_in_stddevs: float = 8.0

    def __post_init__(self) -> None:
        if self.n_s < 50 or self.n_tau < 50:
            raise ConfigError("grid needs n_s >= 50 and n_tau >= 50")
        if self.width_in_stddevs < 6.0:
            raise ConfigError("grid width must be at least 6 terminal standard deviations")


@dataclass(frozen=True)
class PriceGrid:
    """Solution lattice; ``values[j, i]`` is the price at ``tau_nodes[j]``, ``s_nodes[i]``."""

    s_nodes: np.ndarray
    tau_nodes: np.ndarray
    values: np.ndarray
    spot: float
    psor_sweeps: int = 0

    @property
    def price(self) -> float:
        """Value at the market spot and full time to maturity."""
        return self.value_at(self.spot)

    def value_at(self, spot: float, tau_index: int = -1) -> float:
        """Four-point Lagrange interpolation in S on one time slice."""
        s = self.s_nodes
        if not s[0] <= spot <= s[-1]:
            raise GridError(f"spot {spot} outside grid [{s[0]}, {s[-1]}]")
        ds = s[1] - s[0]
        i = int(np.clip(np.floor((spot - s[0]) / ds) - 1, 0, s.size - 4))
        xs = s[i:i + 4]
        ys = self.values[tau_index, i:i + 4]
        total = 0.0
        for k in range(4):
            w = 1.0
            for m in range(4):
                if m != k:
                    w *= (spot - xs[m]) / (xs[k] - xs[m])
            total += w * ys[k]
        return float(total)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["tau", "spot", "value"])
            for j, tau in enumerate(self.tau_nodes):
                for s, v in zip(self.s_nodes, self.values[j]):
                    out.writerow([f"{tau:.12g}", f"{s:.12g}", f"{v:.12g}"])


def _build_nodes(ms: MarketState, oc: OptionContract, spec: GridSpec) -> np.ndarray:
    law = terminal_law(ms, oc.underlying)
    lo = min(ms.spot, law.mean) - spec.width_in_stddevs * law.stddev
    hi = max(ms.spot, law.mean) + spec.width_in_stddevs * law.stddev
    ds = (hi - lo) / (spec.n_s - 1)
    if lo < oc.strike < hi:
        # slide the window down by less than one step so the kink sits on a node
        lo = oc.strike - math.ceil((oc.strike - lo) / ds) * ds
    nodes = lo + ds * np.arange(spec.n_s + 1)
    if not nodes[0] <= ms.spot <= nodes[-1]:
        raise GridError("grid does not contain the spot")
    return nodes


def _boundary(s_b: float, oc: OptionContract, r: float, q: float, tau: float, american: bool) -> float:
    sign = oc.kind.sign
    value = math.exp(-q * tau) * max(sign * (s_b - oc.strike * math.exp(-(r - q) * tau)), 0.0)
    if american:
        value = max(value, sign * (s_b - oc.strike), 0.0)
    return value


def psor(lower, diag, upper, rhs, floor, x0, omega=PSOR_OMEGA, tol=PSOR_TOL, max_sweeps=PSOR_MAX_SWEEPS):
    """Solve the tridiagonal complementarity problem x >= floor, A x >= rhs, with equality in one.

    ``lower[i]`` multiplies x[i-1] and ``upper[i]`` multiplies x[i+1].
    Returns (x, sweeps). Raises SolverError if ``max_sweeps`` is reached.
    """
    lo, dg, up, b, g = (list(map(float, v)) for v in (lower, diag, upper, rhs, floor))
    x = list(map(float, x0))
    n = len(x)
    change = math.inf
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        for i in range(n):
            y = b[i]
            if i:
                y -= lo[i] * x[i - 1]
            if i < n - 1:
                y -= up[i] * x[i + 1]
            xi = x[i]
            new = xi + omega * (y / dg[i] - xi)
            if new < g[i]:
                new = g[i]
            if abs(new - xi) > change:
                change = abs(new - xi)
            x[i] = new
        if change <= tol:
            return np.array(x), sweep
    raise SolverError(
        f"PSOR did not converge in {max_sweeps} sweeps (last max change {change:.3e})",
        iterations=max_sweeps,
        last_change=change,
    )


def _solve(ms: MarketState, oc: OptionContract, spec: GridSpec, american: bool) -> PriceGrid:
    if ms.tau <= 0.0:
        raise DomainError("PDE solve needs tau > 0")
    if ms.sigma_s <= 0.0:
        raise DomainError("PDE solve needs sigma_s > 0")
    r = ms.rate
    q = carry_yield(ms, oc.underlying)
    a = r - q
    s = _build_nodes(ms, oc, spec)
    ds = s[1] - s[0]
    taus = np.linspace(0.0, ms.tau, spec.n_tau + 1)
    sign = oc.kind.sign

    payoff = np.maximum(sign * (s - oc.strike), 0.0)
    inner = s[1:-1]
    diffusion = 0.5 * ms.sigma_s**2 / ds**2
    convection = a * inner / (2.0 * ds)
    lower = diffusion - convection
    upper = diffusion + convection
    centre = np.full(inner.size, -2.0 * diffusion - r)
    floor = payoff[1:-1]

    values = np.empty((taus.size, s.size))
    values[0] = payoff
    v = payoff.copy()
    sweeps = 0

    def step(v_old, tau_new, dt, theta):
        nonlocal sweeps
        v_lo = _boundary(s[0], oc, r, q, tau_new, american)
        v_hi = _boundary(s[-1], oc, r, q, tau_new, american)
        explicit = lower * v_old[:-2] + centre * v_old[1:-1] + upper * v_old[2:]
        rhs = v_old[1:-1] + (1.0 - theta) * dt * explicit
        rhs[0] += theta * dt * lower[0] * v_lo
        rhs[-1] += theta * dt * upper[-1] * v_hi
        sub = -theta * dt * lower
        dia = 1.0 - theta * dt * centre
        sup = -theta * dt * upper
        ab = np.zeros((3, inner.size))
        ab[0, 1:] = sup[:-1]
        ab[1] = dia
        ab[2, :-1] = sub[1:]
        x = solve_banded((1, 1), ab, rhs)
        if american:
            x, used = psor(sub, dia, sup, rhs, floor, np.maximum(x, floor))
            sweeps += used
        out = np.empty_like(v_old)
        out[0], out[-1], out[1:-1] = v_lo, v_hi, x
        return out

    for j in range(1, taus.size):
        dt = taus[j] - taus[j - 1]
        if j == 1:
            # Rannacher start: two implicit half steps damp the payoff kink
            half = step(v, taus[0] + 0.5 * dt, 0.5 * dt, 1.0)
            v = step(half, taus[1], 0.5 * dt, 1.0)
        else:
            v = step(v, taus[j], dt, THETA)
        values[j] = v

    for arr in (s, taus, values):
        arr.setflags(write=False)
    return PriceGrid(s_nodes=s, tau_nodes=taus, values=values, spot=ms.spot, psor_sweeps=sweeps)


def solve_european(ms: MarketState, oc: OptionContract, grid_spec: GridSpec = GridSpec()) -> PriceGrid:
    """Crank-Nicolson solution of the European problem."""
    return _solve(ms, oc, grid_spec, american=False)


def solve_american(ms: MarketState, oc: OptionContract, grid_spec: GridSpec = GridSpec()) -> PriceGrid:
    """Crank-Nicolson with the early-exercise constraint enforced by PSOR each step."""
    return _solve(ms, oc, grid_spec, american=True)


def solve(ms: MarketState, oc: OptionContract, grid_spec: GridSpec = GridSpec()) -> PriceGrid:
    return _solve(ms, oc, grid_spec, american=oc.exercise is Exercise.AMERICAN)

