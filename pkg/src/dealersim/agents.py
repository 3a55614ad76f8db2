"""Stylised trader behaviour: forecasts, CRRA allocation, sizing, pricing.

Three kinds share one decision pipeline. A forecast return becomes a price
forecast, the price forecast becomes a wealth fraction under CRRA utility,
the fraction becomes an integer share order, and the order gets a limit
price offset from the touch by a log-normal draw.

Money convention: agent cash is held as an integer count of grid ticks
(currency = ticks * delta) so settlement is exact; the decision math here
works in currency floats and only the resulting share count is integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lob import ASK, BID, snap_to_grid

FUNDAMENTALIST = "fundamentalist"
CHARTIST = "chartist"
NOISE = "noise"

# Eq. 13 denominator floor; the EWMA variance starts at zero and the
# allocation must stay defined before the first return prints.
VARIANCE_FLOOR = 1e-12

# Log-normal offset draw: shape 0.5, scale 10, so the median is exactly 10.
ZETA_MU = math.log(10.0)
ZETA_SIGMA = 0.5
ZETA_MEDIAN = 10.0


@dataclass
class StylisedAgent:
    kind: str
    gamma: float
    sigma_eta: float        # forecast noise std dev
    lookback: int           # chartists only; ignored otherwise
    stock: int
    cash_ticks: int         # currency = cash_ticks * delta
    active: bool = True     # cleared permanently on bankruptcy

    def wealth(self, price: float, delta: float) -> float:
        return self.stock * price + self.cash_ticks * delta


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    if x >= 0:
        return int(math.floor(x + 0.5))
    return -int(math.floor(-x + 0.5))


def average_return(prices, L: int) -> float:
    """Mean of the last L per-step log returns of a price series.

    Falls back to however many returns exist when the series is short;
    with fewer than two prices there is nothing to average and the result
    is 0.
    """
    n_returns = len(prices) - 1
    if L < n_returns:
        n_returns = L
    if n_returns < 1:
        return 0.0
    total = 0.0
    for i in range(-n_returns, 0):
        total += math.log(prices[i] / prices[i - 1])
    return total / n_returns


def forecast_return(agent: StylisedAgent, p: float, p_f: float, prices,
                    eta: float, eps: float = 0.0) -> float:
    """One-period return forecast by agent kind.

    ``eta`` is the agent's own forecast noise draw, ``eps`` the extra draw
    only noise traders consume; both are passed in so the caller owns the
    RNG stream.
    """
    if agent.kind == FUNDAMENTALIST:
        return (p_f - p) / p + eta
    if agent.kind == CHARTIST:
        return average_return(prices, agent.lookback) + eta
    return eps + eta


def forecast_price(p: float, r_hat: float) -> float:
    return p * math.exp(r_hat)


def crra_allocation(p_hat: float, p: float, gamma: float, variance: float) -> float:
    """Wealth fraction Z = ln(p_hat/p) / (gamma * variance), clamped to [-1, 1].

    The clamp encodes the position limits: long at most full wealth, short
    at most an equivalent amount.
    """
    return crra_allocation_from_return(math.log(p_hat / p), gamma, variance)


def crra_allocation_from_return(r_hat: float, gamma: float, variance: float) -> float:
    # ln(p * exp(r) / p) == r, so the engine skips the exp/log round trip
    if variance < VARIANCE_FLOOR:
        variance = VARIANCE_FLOOR
    z = r_hat / (gamma * variance)
    if z > 1.0:
        return 1.0
    if z < -1.0:
        return -1.0
    return z


def target_order(agent: StylisedAgent, z: float, p: float, delta: float):
    """Order closing the gap between held and desired stock value.

    Returns (side, quantity) or None. Desired value is z * wealth; the gap
    is converted to shares rounded half away from zero. A bankrupt agent
    (wealth <= 0, reachable through shorts) submits nothing; the caller is
    expected to retire it. Because z arrives clamped, an agent whose short
    moved against it is automatically ordered back toward the boundary.
    """
    wealth = agent.stock * p + agent.cash_ticks * delta
    if wealth <= 0.0:
        return None
    qty = round_half_away((z * wealth - agent.stock * p) / p)
    if qty == 0:
        return None
    if qty > 0:
        return (BID, qty)
    return (ASK, -qty)


def order_price(side: str, best_bid: float | None, best_ask: float | None,
                zeta: float, current_price: float, delta: float) -> int:
    """Limit price in ticks: the touch shifted by (zeta - median).

    Draws below the median produce aggressive prices (inside the spread or
    crossing); that is intended and such orders may execute immediately.
    A missing reference side falls back to the current price.
    """
    offset = zeta - ZETA_MEDIAN
    if side == BID:
        ref = best_bid if best_bid is not None else current_price
        return snap_to_grid(ref - offset, delta)
    ref = best_ask if best_ask is not None else current_price
    return snap_to_grid(ref + offset, delta)
