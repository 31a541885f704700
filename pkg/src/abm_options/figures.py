"""Data behind the four price-curve figures, as CSV tables."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analytic import european_values
from .errors import DomainError


@dataclass(frozen=True)
class FigureSpec:
    strike: float
    sigma_s: float
    rate: float
    tau: float
    spot_min: float
    spot_max: float
    with_underlying: bool

    @property
    def header(self) -> list[str]:
        return ["spot", "call", "underlying"] if self.with_underlying else ["spot", "call", "put"]


FIGURES = {
    1: FigureSpec(strike=5.0, sigma_s=3.0, rate=0.05, tau=0.5, spot_min=-15.0, spot_max=25.0, with_underlying=False),
    2: FigureSpec(strike=-5.0, sigma_s=3.0, rate=0.05, tau=0.5, spot_min=-15.0, spot_max=25.0, with_underlying=False),
    3: FigureSpec(strike=5.0, sigma_s=3.0, rate=0.05, tau=5.0, spot_min=0.0, spot_max=25.0, with_underlying=True),
    4: FigureSpec(strike=5.0, sigma_s=12.0, rate=0.05, tau=0.5, spot_min=0.0, spot_max=25.0, with_underlying=True),
}

DEFAULT_STEP = 0.05


def spot_grid(spot_min: float, spot_max: float, step: float) -> np.ndarray:
    if step <= 0.0 or spot_max < spot_min:
        raise DomainError("need step > 0 and spot_max >= spot_min")
    n = int(np.floor((spot_max - spot_min) / step + 1e-9))
    # integer multiples of step avoid accumulated drift in the spot column
    return np.round(spot_min + step * np.arange(n + 1), 10)


def figure_table(
    figure_id: int,
    spot_min: Optional[float] = None,
    spot_max: Optional[float] = None,
    step: float = DEFAULT_STEP,
) -> tuple[list[str], np.ndarray]:
    """Header and rows (one per spot) for a figure, no-dividend underlying."""
    if figure_id not in FIGURES:
        raise DomainError(f"unknown figure {figure_id}; choose one of {sorted(FIGURES)}")
    fig = FIGURES[figure_id]
    spots = spot_grid(
        fig.spot_min if spot_min is None else spot_min,
        fig.spot_max if spot_max is None else spot_max,
        step,
    )
    call = european_values("call", spots, fig.strike, fig.sigma_s, fig.rate, 0.0, fig.tau)
    third = spots if fig.with_underlying else european_values(
        "put", spots, fig.strike, fig.sigma_s, fig.rate, 0.0, fig.tau
    )
    return fig.header, np.column_stack([spots, call, third])


def write_figure_csv(path, header: list[str], rows: np.ndarray, precision: int = 12) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([f"{x:.{precision}g}" for x in row])
