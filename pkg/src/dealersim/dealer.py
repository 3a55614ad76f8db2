"""Dealer quoting strategies: AS, inventory-rule (IR), and naive.

All three price off the same optimal-spread formula; they differ in where
the quote midpoint sits and how sizes respond to inventory:

  * AS: midpoint at an inventory-tilted reservation price, constant sizes.
  * IR: midpoint at the market price, sizes decay exponentially on the
    side of excess inventory.
  * naive: midpoint at the market price, constant sizes, never withdrawn.

Functions are pure; prices come back as grid ticks, sizes as share counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .agents import round_half_away
from .lob import snap_to_grid

AS = "as"
IR = "ir"
NAIVE = "naive"
DEALER_KINDS = (AS, IR, NAIVE)


def default_eta(phi_max: float) -> float:
    """Inventory skew making the quote size exactly 1 at q = phi_max.

    log(1/phi)/phi, a negative number: phi * exp(eta * phi) == 1.
    """
    return math.log(1.0 / phi_max) / phi_max


@dataclass
class DealerParams:
    gamma: float = 0.1
    kappa: float = 0.6
    phi_max_bid: int = 5000
    phi_max_ask: int = 5000
    # raw EWMA variance is on a per-step scale; quotes operate per session
    variance_scale: float = 24.0 * 60.0
    eta_bid: float | None = None     # None -> derived from phi_max_bid
    eta_ask: float | None = None

    def __post_init__(self):
        if self.gamma <= 0 or self.kappa <= 0:
            raise ValueError("gamma and kappa must be positive")
        if self.phi_max_bid < 1 or self.phi_max_ask < 1:
            raise ValueError("max order sizes must be at least 1")
        if self.eta_bid is None:
            self.eta_bid = default_eta(self.phi_max_bid)
        if self.eta_ask is None:
            self.eta_ask = default_eta(self.phi_max_ask)
        if self.eta_bid > 0 or self.eta_ask > 0:
            raise ValueError("inventory skew must be non-positive")


@dataclass
class Quotes:
    """One side may be withdrawn (price None) when its size rounds to 0."""
    bid_price: int | None
    bid_size: int
    ask_price: int | None
    ask_size: int


def reservation_price(p: float, q: float, gamma: float, var_scaled: float) -> float:
    """Inventory-indifferent price: p - q * gamma * sigma^2."""
    return p - q * gamma * var_scaled


def optimal_spread(gamma: float, var_scaled: float, kappa: float) -> float:
    """Total quoted spread: gamma * sigma^2 + (2/gamma) * ln(1 + gamma/kappa)."""
    return gamma * var_scaled + (2.0 / gamma) * math.log(1.0 + gamma / kappa)


def _snap_pair(low: float, high: float, delta: float) -> tuple[int, int]:
    # grid snapping can collapse the spread; keep bid strictly below ask
    bid = snap_to_grid(low, delta)
    ask = snap_to_grid(high, delta)
    if bid >= ask:
        ask = bid + 1
    return bid, ask


def as_quotes(p: float, q: float, params: DealerParams, raw_var: float,
              delta: float) -> Quotes:
    """Constant sizes around the reservation price."""
    var_scaled = raw_var * params.variance_scale
    r = reservation_price(p, q, params.gamma, var_scaled)
    half = 0.5 * optimal_spread(params.gamma, var_scaled, params.kappa)
    bid, ask = _snap_pair(r - half, r + half, delta)
    return Quotes(bid, params.phi_max_bid, ask, params.phi_max_ask)


def ir_quote_sizes(q: float, params: DealerParams) -> tuple[int, int]:
    """Integer quote sizes with exponential decay on the inventory side.

    Rounds half away from zero; a size that rounds below 1 means the side
    is withdrawn entirely.
    """
    bid = float(params.phi_max_bid)
    if q > 0:
        bid *= math.exp(params.eta_bid * q)
    ask = float(params.phi_max_ask)
    if q < 0:
        ask *= math.exp(-params.eta_ask * q)
    bid_n = round_half_away(bid)
    ask_n = round_half_away(ask)
    return (bid_n if bid_n >= 1 else 0, ask_n if ask_n >= 1 else 0)


def ir_quotes(p: float, q: float, params: DealerParams, raw_var: float,
              delta: float) -> Quotes:
    """Inventory-sized quotes around the market price (reservation = p)."""
    var_scaled = raw_var * params.variance_scale
    half = 0.5 * optimal_spread(params.gamma, var_scaled, params.kappa)
    bid, ask = _snap_pair(p - half, p + half, delta)
    bid_size, ask_size = ir_quote_sizes(q, params)
    return Quotes(bid if bid_size > 0 else None, bid_size,
                  ask if ask_size > 0 else None, ask_size)


def naive_quotes(p: float, params: DealerParams, raw_var: float,
                 delta: float) -> Quotes:
    """Constant sizes around the market price, inventory ignored."""
    var_scaled = raw_var * params.variance_scale
    half = 0.5 * optimal_spread(params.gamma, var_scaled, params.kappa)
    bid, ask = _snap_pair(p - half, p + half, delta)
    return Quotes(bid, params.phi_max_bid, ask, params.phi_max_ask)


def compute_quotes(kind: str, p: float, q: float, params: DealerParams,
                   raw_var: float, delta: float) -> Quotes:
    if kind == AS:
        return as_quotes(p, q, params, raw_var, delta)
    if kind == IR:
        return ir_quotes(p, q, params, raw_var, delta)
    if kind == NAIVE:
        return naive_quotes(p, params, raw_var, delta)
    raise ValueError(f"unknown dealer kind {kind!r}")


@dataclass
class DealerState:
    cash_ticks: int
    q: int = 0
    # (t, side, price_ticks, quantity) from the dealer's perspective
    trades: list = field(default_factory=list)

    def wealth(self, price: float, delta: float) -> float:
        return self.cash_ticks * delta + self.q * price


def replay_trades(initial_cash_ticks: int, trades) -> tuple[int, int]:
    """Recompute (cash_ticks, q) from a trade log; used as an audit."""
    cash = initial_cash_ticks
    q = 0
    for _, side, price_ticks, qty in trades:
        if side == "buy":
            cash -= price_ticks * qty
            q += qty
        else:
            cash += price_ticks * qty
            q -= qty
    return cash, q
