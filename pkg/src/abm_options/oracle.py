"""Independent price oracles built on the exact Gaussian law of S_T.

Two routes, neither of which touches the closed forms:

* deterministic quadrature of the discounted payoff against the terminal
  normal density;
* Monte Carlo sampling of S_T.

Monte Carlo seeding: paths are generated in fixed-size chunks. Chunk ``j``
draws from a Philox counter-based generator keyed by
``SeedSequence(seed, spawn_key=(j,))``, so an estimate depends only on
(seed, n_paths, antithetic) and never on how chunks are scheduled.
Uniforms ``u = k 2^-53 + 2^-54`` lie strictly inside (0, 1) and become
normals through the inverse of the erf-based normal CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .analytic import effective_stddev
from .errors import ConfigError, UnsupportedExerciseError
from .market import Exercise, MarketState, OptionContract, OptionKind, Underlying, carry_yield

MC_CHUNK = 1 << 16
# standardized half-width of the quadrature window; the normal mass beyond is < 1e-32
_Z_MAX = 12.0


@dataclass(frozen=True)
class TerminalLaw:
    mean: float
    stddev: float


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self) -> None:
        if int(self.n_paths) != self.n_paths or self.n_paths < 2:
            raise ConfigError(f"n_paths must be an integer >= 2, got {self.n_paths}")
        if self.antithetic and self.n_paths % 2:
            raise ConfigError("antithetic sampling needs an even n_paths")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")


def terminal_law(ms: MarketState, underlying: Underlying = Underlying.NO_DIVIDEND) -> TerminalLaw:
    """Risk-neutral law of S_T given S_t: N(e^{a tau} S_t, (h e^{a tau})^2), a = r - q."""
    a = ms.rate - carry_yield(ms, underlying)
    grow = math.exp(a * ms.tau)
    return TerminalLaw(
        mean=grow * ms.spot,
        stddev=grow * effective_stddev(ms.sigma_s, a, ms.tau),
    )


def _require_european(oc: OptionContract) -> None:
    if oc.exercise is not Exercise.EUROPEAN:
        raise UnsupportedExerciseError("oracles price European exercise only")


@lru_cache(maxsize=None)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=None)
def _hermite(n: int):
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / math.sqrt(2.0 * math.pi)


def _gauss_legendre(f, lo: float, hi: float, n: int) -> float:
    x, w = _legendre(n)
    half = 0.5 * (hi - lo)
    return half * float(np.dot(w, f(lo + half * (x + 1.0))))


def _density(z):
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def price_by_quadrature(ms: MarketState, oc: OptionContract, n_nodes: int = 64) -> float:
    """Discounted expected payoff by Gauss quadrature.

    In standardized units the payoff is |z - z_k| on one side of the kink
    z_k and zero on the other. If the kink lies outside the +-12 window the
    payoff is linear over the whole effective support and probabilists'
    Gauss-Hermite integrates it exactly. Otherwise the window is split at
    the kink and the smooth live side is integrated with Gauss-Legendre.
    """
    _require_european(oc)
    if n_nodes < 16:
        raise ConfigError(f"n_nodes must be >= 16, got {n_nodes}")
    law = terminal_law(ms, oc.underlying)
    disc = math.exp(-ms.rate * ms.tau)
    sign = oc.kind.sign
    if law.stddev == 0.0:
        return disc * max(sign * (law.mean - oc.strike), 0.0)

    s = law.stddev
    z_k = (oc.strike - law.mean) / s
    if abs(z_k) >= _Z_MAX:
        x, w = _hermite(n_nodes)
        payoff = np.maximum(sign * (law.mean + s * x - oc.strike), 0.0)
        return disc * float(np.dot(w, payoff))

    def integrand(z):
        return sign * s * (z - z_k) * _density(z)

    if oc.kind is OptionKind.CALL:
        value = _gauss_legendre(integrand, z_k, _Z_MAX, n_nodes)
    else:
        value = _gauss_legendre(integrand, -_Z_MAX, z_k, n_nodes)
    return disc * value


def _uniforms(seed: int, chunk: int, size: int) -> np.ndarray:
    ss = np.random.SeedSequence(int(seed), spawn_key=(chunk,))
    gen = np.random.Generator(np.random.Philox(ss))
    return gen.random(size) + 2.0**-54


def standard_normals(seed: int, count: int) -> np.ndarray:
    """Deterministic stream of ``count`` standard normals for ``seed``."""
    out = np.empty(count)
    for j, start in enumerate(range(0, count, MC_CHUNK)):
        size = min(MC_CHUNK, count - start)
        out[start:start + size] = ndtri(_uniforms(seed, j, size))
    return out


def price_by_mc(ms: MarketState, oc: OptionContract, cfg: McConfig = McConfig()) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of the European price.

    With ``antithetic`` each normal z is paired with -z and the standard
    error is computed from the n_paths/2 pair averages.
    """
    _require_european(oc)
    law = terminal_law(ms, oc.underlying)
    disc = math.exp(-ms.rate * ms.tau)
    sign = oc.kind.sign
    if law.stddev == 0.0:
        return disc * max(sign * (law.mean - oc.strike), 0.0), 0.0

    def payoff(z):
        return disc * np.maximum(sign * (law.mean + law.stddev * z - oc.strike), 0.0)

    if cfg.antithetic:
        z = standard_normals(cfg.seed, cfg.n_paths // 2)
        samples = 0.5 * (payoff(z) + payoff(-z))
    else:
        samples = payoff(standard_normals(cfg.seed, cfg.n_paths))
    n = samples.size
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n))

