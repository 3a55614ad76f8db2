"""Probabilistic dealer test bed: Brownian mid, Poisson-style fills.

A single dealer quotes around a random-walk mid-price; each side fills
independently per step with probability min(1, A*exp(-kappa*delta)*dt),
where delta is the quote's distance from the mid. Four strategy variants:

  * as_unit: reservation-price quotes (time-to-horizon retained), size 1
  * as_gamma: same quotes, fill sizes drawn Gamma(shape, scale)
  * naive15: quotes centred on the mid, constant size 15
  * ir: quotes centred on the mid, Gamma fill sizes capped by
    exponentially-decaying quote sizes on the inventory side

Each run owns two RNG streams: one for the price path (shared across
variants under a common master seed, so comparisons use common paths) and
one for fills (variant-tagged).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .agents import round_half_away
from .dealer import default_eta, optimal_spread

VARIANTS = ("as_unit", "as_gamma", "naive15", "ir")


@dataclass
class ProbSimParams:
    variant: str = "as_unit"
    T: float = 1.0
    dt: float = 0.005
    sigma: float = 2.0
    A: float = 140.0
    kappa: float = 1.5
    gamma: float = 0.1
    p0: float = 100.0
    phi_max: int = 15            # naive15 constant size and ir cap
    gamma_shape: float = 2.0
    gamma_scale: float = 15.0
    eta: float | None = None     # ir skew; None -> unity at q = phi_max

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.dt <= 0 or self.T <= 0:
            raise ValueError("T and dt must be positive")
        if self.A * self.dt > 1.0:
            raise ValueError("A*dt must not exceed 1 (fill probability cap)")
        if self.gamma <= 0 or self.kappa <= 0:
            raise ValueError("gamma and kappa must be positive")
        if self.eta is None:
            self.eta = default_eta(self.phi_max)


@dataclass
class ProbRunResult:
    terminal_wealth: float
    terminal_inventory: int
    path: list = field(default_factory=list)


def fill_probability(delta_dist: float, A: float, kappa: float, dt: float) -> float:
    """min(1, A * exp(-kappa * delta) * dt) for a quote delta off the mid."""
    p = A * math.exp(-kappa * delta_dist) * dt
    return p if p < 1.0 else 1.0


def _gamma_size(rng: random.Random, shape: float, scale: float) -> int:
    n = round_half_away(rng.gammavariate(shape, scale))
    return n if n >= 1 else 1


def simulate_run(params: ProbSimParams, seed, record_path: bool = False) -> ProbRunResult:
    rng_price = random.Random(f"{seed}:price")
    rng_fill = random.Random(f"{seed}:fill:{params.variant}")

    n_steps = round(params.T / params.dt)
    dt = params.dt
    sigma2 = params.sigma * params.sigma
    step_size = params.sigma * math.sqrt(dt)
    gamma = params.gamma
    kappa = params.kappa
    A = params.A
    variant = params.variant

    p = params.p0
    q = 0
    cash = 0.0
    path = []

    for i in range(n_steps):
        remaining = params.T - i * dt
        var_eff = sigma2 * remaining
        spread = optimal_spread(gamma, var_eff, kappa)
        half = 0.5 * spread
        if variant in ("as_unit", "as_gamma"):
            mid = p - q * gamma * var_eff
        else:
            mid = p
        bid = mid - half
        ask = mid + half

        if variant == "ir":
            bid_cap = float(params.phi_max)
            if q > 0:
                bid_cap *= math.exp(params.eta * q)
            ask_cap = float(params.phi_max)
            if q < 0:
                ask_cap *= math.exp(-params.eta * q)
            bid_cap = round_half_away(bid_cap)
            ask_cap = round_half_away(ask_cap)
        else:
            bid_cap = ask_cap = params.phi_max

        delta_bid = p - bid
        if delta_bid < 0.0:
            delta_bid = 0.0
        delta_ask = ask - p
        if delta_ask < 0.0:
            delta_ask = 0.0

        # bid side: someone sells to the dealer
        if bid_cap >= 1 and rng_fill.random() < fill_probability(delta_bid, A, kappa, dt):
            if variant == "as_unit":
                size = 1
            elif variant == "naive15":
                size = params.phi_max
            else:
                size = _gamma_size(rng_fill, params.gamma_shape, params.gamma_scale)
                if variant == "ir" and size > bid_cap:
                    size = bid_cap
            cash -= bid * size
            q += size
        # ask side: someone buys from the dealer
        if ask_cap >= 1 and rng_fill.random() < fill_probability(delta_ask, A, kappa, dt):
            if variant == "as_unit":
                size = 1
            elif variant == "naive15":
                size = params.phi_max
            else:
                size = _gamma_size(rng_fill, params.gamma_shape, params.gamma_scale)
                if variant == "ir" and size > ask_cap:
                    size = ask_cap
            cash += ask * size
            q -= size

        p += step_size if rng_price.random() < 0.5 else -step_size
        if record_path:
            path.append((p, q, cash))

    return ProbRunResult(cash + q * p, q, path)


def wealth_histogram(params: ProbSimParams, n_runs: int = 1000,
                     master_seed=0, n_bins: int = 40) -> dict:
    """Terminal-wealth sample, moments, and histogram for one variant."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    wealth = np.empty(n_runs)
    inventory = np.empty(n_runs, dtype=np.int64)
    for run in range(n_runs):
        res = simulate_run(params, f"{master_seed}:{run}")
        wealth[run] = res.terminal_wealth
        inventory[run] = res.terminal_inventory
    counts, edges = np.histogram(wealth, bins=n_bins)
    return {
        "variant": params.variant,
        "n_runs": n_runs,
        "wealth": wealth,
        "inventory": inventory,
        "mean": float(wealth.mean()),
        "std": float(wealth.std(ddof=1)) if n_runs > 1 else 0.0,
        "inventory_std": float(inventory.std(ddof=1)) if n_runs > 1 else 0.0,
        "bin_edges": edges,
        "bin_counts": counts,
    }
