"""Command-line interface: price, figure, validate, implied, histvol.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import functools
import json
import sys
from dataclasses import dataclass

import click

from . import __version__
from .analytic import price_european, price_naive_call
from .calibration import TRADING_DAY, historical_sigma, implied_sigma, load_price_series
from .errors import AbmOptionsError, SolverError
from .figures import DEFAULT_STEP, figure_table, write_figure_csv
from .market import Exercise, MarketState, OptionContract, OptionKind, Underlying
from .oracle import McConfig, price_by_mc, price_by_quadrature
from .pde import GridSpec, solve
from .validation import all_passed, run_all

EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4
SCHEMA_VERSION = 1

METHODS = ("analytic", "quadrature", "mc", "pde", "naive")


class InvalidRequest(AbmOptionsError, ValueError):
    pass


@dataclass(frozen=True)
class PricingRequest:
    market: MarketState
    contract: OptionContract
    method: str = "analytic"
    n_paths: int = 100_000
    seed: int = 0
    antithetic: bool = False
    n_nodes: int = 64
    n_s: int = 400
    n_tau: int = 400
    width: float = 8.0

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidRequest(f"unknown method {self.method!r}")
        if self.method == "naive" and (
            self.contract.kind is not OptionKind.CALL or self.contract.underlying is not Underlying.NO_DIVIDEND
        ):
            raise InvalidRequest("method 'naive' only prices calls on a no-dividend underlying")
        if self.contract.exercise is Exercise.AMERICAN and self.method != "pde":
            raise InvalidRequest("american exercise requires --method pde")

    def describe(self) -> dict:
        ms, oc = self.market, self.contract
        out = {
            "kind": oc.kind.value,
            "exercise": oc.exercise.value,
            "underlying": oc.underlying.value,
            "spot": ms.spot,
            "strike": oc.strike,
            "sigma_s": ms.sigma_s,
            "rate": ms.rate,
            "dividend_yield": ms.dividend_yield,
            "tau": ms.tau,
            "valuation_time": ms.valuation_time,
            "method": self.method,
        }
        if self.method == "mc":
            out.update(n_paths=self.n_paths, seed=self.seed, antithetic=self.antithetic)
        elif self.method == "quadrature":
            out.update(n_nodes=self.n_nodes)
        elif self.method == "pde":
            out.update(n_s=self.n_s, n_tau=self.n_tau, width=self.width)
        return out


def execute(req: PricingRequest, grid_out=None) -> dict:
    ms, oc = req.market, req.contract
    if req.method == "analytic":
        return price_european(ms, oc).as_dict()
    if req.method == "naive":
        return {"price": price_naive_call(ms, oc.strike)}
    if req.method == "quadrature":
        return {"price": price_by_quadrature(ms, oc, req.n_nodes)}
    if req.method == "mc":
        price, se = price_by_mc(ms, oc, McConfig(req.n_paths, req.seed, req.antithetic))
        return {"price": price, "standard_error": se}
    grid = solve(ms, oc, GridSpec(req.n_s, req.n_tau, req.width))
    if grid_out is not None:
        grid.write_csv(grid_out)
    result = {"price": grid.price}
    if oc.exercise is Exercise.AMERICAN:
        result["psor_sweeps"] = grid.psor_sweeps
    return result


def _round(value, precision: int):
    if isinstance(value, float):
        return float(f"{value:.{precision}g}") + 0.0
    if isinstance(value, dict):
        return {k: _round(v, precision) for k, v in value.items()}
    if isinstance(value, list):
        return [_round(v, precision) for v in value]
    return value


def _text(value, precision: int) -> str:
    # + 0.0 folds negative zero into zero
    return f"{value + 0.0:.{precision}g}" if isinstance(value, float) else str(value)


def emit(ctx: click.Context, command: str, result: dict, request: dict | None = None) -> None:
    precision = ctx.obj["precision"]
    if ctx.obj["json"]:
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "result": _round(result, precision)}
        if request is not None:
            doc["request"] = _round(request, precision)
        click.echo(json.dumps(doc, sort_keys=True, indent=2, allow_nan=True))
    else:
        for key, value in result.items():
            click.echo(f"{key}: {_text(value, precision)}")


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SolverError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except (AbmOptionsError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def market_options(with_sigma: bool = True):
    def decorate(func):
        opts = [
            click.option("--kind", type=click.Choice(["call", "put"]), default="call", show_default=True),
            click.option(
                "--underlying",
                type=click.Choice(["no-dividend", "dividend-yield", "futures"]),
                default="no-dividend",
                show_default=True,
            ),
            click.option("--exercise", type=click.Choice(["european", "american"]), default="european", show_default=True),
            click.option("--spot", type=float, required=True, help="Underlying (or futures) price; may be negative."),
            click.option("--strike", type=float, required=True, help="Strike; may be negative."),
            click.option("--rate", type=float, default=0.0, show_default=True, help="Riskless rate, continuous, per year."),
            click.option("--yield", "dividend_yield", type=float, default=0.0, show_default=True,
                         help="Continuous dividend yield (dividend-yield underlying only)."),
            click.option("--tau", type=float, required=True, help="Time to maturity in years."),
            click.option("--valuation-time", type=float, default=0.0, show_default=True),
        ]
        if with_sigma:
            opts.append(click.option("--sigma", type=float, default=0.0, show_default=True,
                                     help="sigma_s: stddev of price changes per sqrt(year), in price units."))
        for opt in reversed(opts):
            func = opt(func)
        return func

    return decorate


def build_market(spot, rate, sigma, tau, dividend_yield, valuation_time) -> MarketState:
    return MarketState.from_tau(spot, rate, sigma, tau, dividend_yield=dividend_yield, valuation_time=valuation_time)


def build_contract(kind, strike, exercise, underlying) -> OptionContract:
    return OptionContract(kind, strike, exercise, underlying.replace("-", "_"))


@click.group()
@click.version_option(__version__, prog_name="abm-options")
@click.option("--json", "as_json", is_flag=True, help="Emit a stable JSON document instead of text.")
@click.option("--precision", type=click.IntRange(1, 17), default=12, show_default=True,
              help="Significant digits for numeric output.")
@click.pass_context
def cli(ctx, as_json, precision):
    """Option pricing when the underlying follows arithmetic Brownian motion."""
    ctx.ensure_object(dict)
    ctx.obj.update(json=as_json, precision=precision)


@cli.command()
@market_options()
@click.option("--method", type=click.Choice(METHODS), default="analytic", show_default=True)
@click.option("--paths", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--antithetic", is_flag=True)
@click.option("--nodes", type=int, default=64, show_default=True, help="Quadrature nodes.")
@click.option("--n-s", type=int, default=400, show_default=True)
@click.option("--n-tau", type=int, default=400, show_default=True)
@click.option("--width", type=float, default=8.0, show_default=True, help="Grid half-width in terminal stddevs.")
@click.option("--grid-out", type=click.Path(dir_okay=False), default=None, help="Write the PDE grid as CSV.")
@click.pass_context
@handle_errors
def price(ctx, kind, underlying, exercise, spot, strike, rate, dividend_yield, tau, valuation_time, sigma,
          method, paths, seed, antithetic, nodes, n_s, n_tau, width, grid_out):
    """Price a single option."""
    req = PricingRequest(
        market=build_market(spot, rate, sigma, tau, dividend_yield, valuation_time),
        contract=build_contract(kind, strike, exercise, underlying),
        method=method,
        n_paths=paths,
        seed=seed,
        antithetic=antithetic,
        n_nodes=nodes,
        n_s=n_s,
        n_tau=n_tau,
        width=width,
    )
    emit(ctx, "price", execute(req, grid_out), req.describe())


@cli.command()
@market_options(with_sigma=False)
@click.option("--price", "market_price", type=float, required=True, help="Observed option price.")
@click.pass_context
@handle_errors
def implied(ctx, kind, underlying, exercise, spot, strike, rate, dividend_yield, tau, valuation_time, market_price):
    """Implied sigma_s from an option price."""
    ms = build_market(spot, rate, 0.0, tau, dividend_yield, valuation_time)
    oc = build_contract(kind, strike, exercise, underlying)
    res = implied_sigma(ms, oc, market_price)
    emit(ctx, "implied", {"sigma_s": res.sigma_s, "iterations": res.iterations, "residual": res.residual})


@cli.command()
@click.argument("csv_path", type=click.Path(dir_okay=False))
@click.option("--dt", "year_fraction", type=float, default=TRADING_DAY, show_default=True,
              help="Years per observation step.")
@click.pass_context
@handle_errors
def histvol(ctx, csv_path, year_fraction):
    """Historical sigma_s from a date,price CSV."""
    series = load_price_series(csv_path, year_fraction)
    emit(ctx, "histvol", {"sigma_s": historical_sigma(series), "observations": len(series.observations)})


@cli.command()
@click.argument("figure_id", type=click.IntRange(1, 4))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--spot-min", type=float, default=None)
@click.option("--spot-max", type=float, default=None)
@click.option("--step", type=float, default=DEFAULT_STEP, show_default=True)
@click.pass_context
@handle_errors
def figure(ctx, figure_id, out_path, spot_min, spot_max, step):
    """Write the data behind figure 1-4 as CSV."""
    header, rows = figure_table(figure_id, spot_min, spot_max, step)
    write_figure_csv(out_path, header, rows, ctx.obj["precision"])
    emit(ctx, "figure", {"figure": figure_id, "rows": len(rows), "path": str(out_path)})


@cli.command()
@click.pass_context
def validate(ctx):
    """Run the cross-module validation battery."""
    results = run_all()
    if ctx.obj["json"]:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": "validate",
            "result": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
        }
        click.echo(json.dumps(doc, sort_keys=True, indent=2))
    else:
        for r in results:
            click.echo(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    if not all_passed(results):
        failed = ", ".join(r.name for r in results if not r.passed)
        click.echo(f"failed checks: {failed}", err=True)
        sys.exit(EXIT_NUMERICAL)


def main() -> None:
    cli(obj={})


if __name__ == "__main__":
    main()
