"""Agent-based market engine: scheduling, settlement, series recording.

One run owns one RNG stream seeded from (master seed, run index), so runs
replay exactly and sweeps can parallelise without coordination. All cash
moves through integer tick ledgers (currency = ticks * delta): a trade's
cash flow is price_ticks * quantity, an exact integer, which makes the
cash/stock conservation checks bit-exact rather than approximate.

Per-timestamp sequence:
  1. expiry draw (oldest orders across both sides removed on a hit)
  2. fundamental-value jump draw
  3. one actor: the dealer with the configured probability, else one
     stylised trader drawn uniformly; the dealer cancels her stale quotes
     and re-quotes, bid on this timestamp, ask on the next (two
     consecutive timestamps), and the step after her turn is always a
     stylised trader's
  4. settlement of any fills, straight onto the integer ledgers
  5. price update (last trade, else mid, else previous), EWMA variance
  6. series row recorded
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .agents import (
    CHARTIST,
    FUNDAMENTALIST,
    NOISE,
    ZETA_MU,
    ZETA_SIGMA,
    StylisedAgent,
    average_return,
    crra_allocation_from_return,
    order_price,
    target_order,
)
from .assets import FundamentalProcess
from .config import SimConfig, config_to_dict
from .dealer import DealerParams, DealerState, compute_quotes
from .lob import ASK, BID, OrderBook

DEALER_ID = 0
CLASS_NAMES = ("dealer", "fundamentalist", "chartist", "noise")


@dataclass
class RunOutput:
    seed: str
    n_steps: int
    price: np.ndarray            # currency, one row per timestamp
    p_f: np.ndarray
    ewma_var: np.ndarray
    dealer_q: np.ndarray
    dealer_wealth: np.ndarray
    wealth_fundamentalist: np.ndarray
    wealth_chartist: np.ndarray
    wealth_noise: np.ndarray
    trades: list                 # (t, price_ticks, qty, buyer_id, seller_id)
    dealer_trades: list          # (t, "buy"/"sell", price_ticks, qty)
    initial_total_cash_ticks: int
    initial_total_stock: int
    final_total_cash_ticks: int
    final_total_stock: int
    dealer_initial_cash_ticks: int
    final_dealer_cash_ticks: int
    final_dealer_q: int
    config: SimConfig = field(repr=False, default=None)


class MarketSimulation:
    """One seeded run of the agent-based market."""

    def __init__(self, config: SimConfig, seed: str):
        config.validate()
        self.config = config
        self.seed = str(seed)
        self.rng = random.Random(self.seed)
        cfg = config
        delta = cfg.delta
        self.delta = delta
        self.initial_ticks = round(cfg.initial_price / delta)

        self.book = OrderBook(delta, self.initial_ticks)
        self.fundamental = FundamentalProcess(
            cfg.fundamental_initial, cfg.jump_size, cfg.jump_prob)

        self.dealer_params = DealerParams(
            gamma=cfg.dealer_gamma, kappa=cfg.dealer_kappa,
            phi_max_bid=cfg.phi_max_bid, phi_max_ask=cfg.phi_max_ask,
            variance_scale=cfg.variance_scale,
            eta_bid=cfg.eta_bid, eta_ask=cfg.eta_ask)
        self.dealer = DealerState(cash_ticks=round(cfg.dealer_cash / delta))
        self.dealer_resting: set[int] = set()

        # endowments draw in a fixed order: per agent, stock then cash
        # (then lookback for chartists), fundamentalists first
        rng = self.rng
        cash_lo = round(cfg.cash_min / delta)
        cash_hi = round(cfg.cash_max / delta)
        sigma_by_kind = {FUNDAMENTALIST: cfg.sigma_f, CHARTIST: cfg.sigma_c,
                         NOISE: cfg.sigma_n}
        kinds = ([FUNDAMENTALIST] * cfg.n_fundamentalists
                 + [CHARTIST] * cfg.n_chartists
                 + [NOISE] * cfg.n_noise)
        self.agents: list[StylisedAgent] = []
        for kind in kinds:
            stock = rng.randint(cfg.stock_min, cfg.stock_max)
            cash_ticks = rng.randint(cash_lo, cash_hi)
            lookback = rng.randint(1, cfg.lookback_max) if kind == CHARTIST else 0
            self.agents.append(StylisedAgent(
                kind, cfg.stylised_gamma, sigma_by_kind[kind], lookback,
                stock, cash_ticks))

        # running class ledgers keep per-step wealth recording O(1)
        self.class_stock = [0, 0, 0, 0]
        self.class_cash = [self.dealer.cash_ticks, 0, 0, 0]
        self._class_index = {FUNDAMENTALIST: 1, CHARTIST: 2, NOISE: 3}
        for agent in self.agents:
            c = self._class_index[agent.kind]
            self.class_stock[c] += agent.stock
            self.class_cash[c] += agent.cash_ticks

        self.initial_total_cash_ticks = sum(self.class_cash)
        self.initial_total_stock = sum(self.class_stock)

        self.price_ticks_history = [self.initial_ticks]
        self.ewma_var = 0.0
        self.trades: list = []

    # -- settlement ---------------------------------------------------------

    def _settle(self, t: int, trades) -> None:
        dealer = self.dealer
        agents = self.agents
        class_index = self._class_index
        class_stock = self.class_stock
        class_cash = self.class_cash
        tape = self.trades
        for tr in trades:
            price, qty = tr.price, tr.quantity
            cash_flow = price * qty
            buyer, seller = tr.buyer_id, tr.seller_id
            tape.append((t, price, qty, buyer, seller))
            if buyer == DEALER_ID:
                dealer.cash_ticks -= cash_flow
                dealer.q += qty
                dealer.trades.append((t, "buy", price, qty))
                class_cash[0] -= cash_flow
                class_stock[0] += qty
            else:
                agent = agents[buyer - 1]
                agent.cash_ticks -= cash_flow
                agent.stock += qty
                c = class_index[agent.kind]
                class_cash[c] -= cash_flow
                class_stock[c] += qty
            if seller == DEALER_ID:
                dealer.cash_ticks += cash_flow
                dealer.q -= qty
                dealer.trades.append((t, "sell", price, qty))
                class_cash[0] += cash_flow
                class_stock[0] -= qty
            else:
                agent = agents[seller - 1]
                agent.cash_ticks += cash_flow
                agent.stock -= qty
                c = class_index[agent.kind]
                class_cash[c] += cash_flow
                class_stock[c] -= qty

    # -- actors -------------------------------------------------------------

    def _stylised_turn(self, t: int, price_ticks: int) -> bool:
        """One stylised trader acts; returns True if any trade printed."""
        rng = self.rng
        idx = rng.randrange(len(self.agents))
        agent = self.agents[idx]
        if not agent.active:
            return False
        delta = self.delta
        p = price_ticks * delta
        wealth = agent.stock * p + agent.cash_ticks * delta
        if wealth <= 0.0:
            agent.active = False       # bankrupt: out for good
            return False
        eta = rng.gauss(0.0, agent.sigma_eta)
        if agent.kind == FUNDAMENTALIST:
            r_hat = (self.fundamental.p_f - p) / p + eta
        elif agent.kind == CHARTIST:
            r_hat = average_return(self.price_ticks_history, agent.lookback) + eta
        else:
            r_hat = rng.gauss(0.0, self.config.sigma_eps) + eta
        z = crra_allocation_from_return(r_hat, agent.gamma, self.ewma_var)
        decision = target_order(agent, z, p, delta)
        if decision is None:
            return False
        side, qty = decision
        zeta = rng.lognormvariate(ZETA_MU, ZETA_SIGMA)
        book = self.book
        bb, ba = book.best_bid(), book.best_ask()
        ticks = order_price(
            side,
            bb * delta if bb is not None else None,
            ba * delta if ba is not None else None,
            zeta, p, delta)
        order = book.make_order(idx + 1, side, ticks, qty, t)
        trades = book.submit_limit_order(order)
        if trades:
            self._settle(t, trades)
            return True
        return False

    def _dealer_quote_turn(self, t: int):
        """Cancel stale quotes, compute fresh ones, place the bid.

        Returns (traded, pending) where pending carries the ask to submit
        on the following timestamp.
        """
        book = self.book
        for oid in self.dealer_resting:
            book.cancel_order(oid)
        self.dealer_resting.clear()

        p = self.price_ticks_history[-1] * self.delta
        quotes = compute_quotes(
            self.config.dealer_kind, p, self.dealer.q, self.dealer_params,
            self.ewma_var, self.delta)
        traded = False
        if quotes.bid_price is not None and quotes.bid_size >= 1:
            order = book.make_order(DEALER_ID, BID, quotes.bid_price,
                                    quotes.bid_size, t)
            trades = book.submit_limit_order(order)
            if trades:
                self._settle(t, trades)
                traded = True
            if book.is_resting(order.id):
                self.dealer_resting.add(order.id)
        pending = None
        if quotes.ask_price is not None and quotes.ask_size >= 1:
            pending = (quotes.ask_price, quotes.ask_size)
        return traded, pending

    def _dealer_ask_turn(self, t: int, pending) -> bool:
        price, size = pending
        book = self.book
        order = book.make_order(DEALER_ID, ASK, price, size, t)
        trades = book.submit_limit_order(order)
        traded = False
        if trades:
            self._settle(t, trades)
            traded = True
        if book.is_resting(order.id):
            self.dealer_resting.add(order.id)
        return traded

    # -- main loop ----------------------------------------------------------

    def run(self) -> RunOutput:
        cfg = self.config
        steps = cfg.steps
        rng = self.rng
        book = self.book
        delta = self.delta
        omega = cfg.omega
        tau = cfg.tau
        alpha = cfg.ewma_alpha
        one_minus_alpha = 1.0 - alpha
        dealer_prob = cfg.effective_dealer_turn_prob()
        dealer = self.dealer
        class_stock = self.class_stock
        class_cash = self.class_cash
        history = self.price_ticks_history
        log = math.log

        out_price = np.empty(steps)
        out_pf = np.empty(steps)
        out_var = np.empty(steps)
        out_q = np.empty(steps, dtype=np.int64)
        out_dealer_w = np.empty(steps)
        out_w_fund = np.empty(steps)
        out_w_chart = np.empty(steps)
        out_w_noise = np.empty(steps)

        pending_ask = None
        force_stylised = False

        for t in range(steps):
            # 1. expiry
            if rng.random() < omega and len(book) > 0:
                for victim in book.expire_orders(0.0, 1.0, tau):
                    if victim.agent_id == DEALER_ID:
                        self.dealer_resting.discard(victim.id)
            # 2. fundamental jump
            self.fundamental.step(rng.random())
            # 3. one actor
            tape_len_before = len(self.trades)
            if pending_ask is not None:
                self._dealer_ask_turn(t, pending_ask)
                pending_ask = None
                force_stylised = True
            elif force_stylised:
                force_stylised = False
                self._stylised_turn(t, history[-1])
            elif rng.random() < dealer_prob:
                _, pending_ask = self._dealer_quote_turn(t)
                if pending_ask is None:
                    # one-sided quote set still ends the turn here
                    force_stylised = True
            else:
                self._stylised_turn(t, history[-1])
            traded = len(self.trades) > tape_len_before
            # 4./5. price update and EWMA variance
            price_ticks = book.current_price(traded)
            prev_ticks = history[-1]
            if price_ticks != prev_ticks:
                r = log(price_ticks / prev_ticks)
            else:
                r = 0.0
            self.ewma_var = alpha * r * r + one_minus_alpha * self.ewma_var
            history.append(price_ticks)
            # 6. record
            p = price_ticks * delta
            out_price[t] = p
            out_pf[t] = self.fundamental.p_f
            out_var[t] = self.ewma_var
            out_q[t] = dealer.q
            out_dealer_w[t] = dealer.cash_ticks * delta + dealer.q * p
            out_w_fund[t] = class_cash[1] * delta + class_stock[1] * p
            out_w_chart[t] = class_cash[2] * delta + class_stock[2] * p
            out_w_noise[t] = class_cash[3] * delta + class_stock[3] * p

        final_cash = dealer.cash_ticks + sum(a.cash_ticks for a in self.agents)
        final_stock = dealer.q + sum(a.stock for a in self.agents)
        return RunOutput(
            seed=self.seed, n_steps=steps,
            price=out_price, p_f=out_pf, ewma_var=out_var,
            dealer_q=out_q, dealer_wealth=out_dealer_w,
            wealth_fundamentalist=out_w_fund, wealth_chartist=out_w_chart,
            wealth_noise=out_w_noise,
            trades=self.trades, dealer_trades=dealer.trades,
            initial_total_cash_ticks=self.initial_total_cash_ticks,
            initial_total_stock=self.initial_total_stock,
            final_total_cash_ticks=final_cash,
            final_total_stock=final_stock,
            dealer_initial_cash_ticks=round(cfg.dealer_cash / delta),
            final_dealer_cash_ticks=dealer.cash_ticks,
            final_dealer_q=dealer.q,
            config=cfg)


def run_simulation(config: SimConfig, seed: str) -> RunOutput:
    """Convenience wrapper: build, run, return."""
    return MarketSimulation(config, seed).run()


def run_seed(master_seed: str, run_index: int) -> str:
    """Per-run RNG seed string; stable across platforms and schedules."""
    return f"{master_seed}:{run_index}"


# -- persistence ------------------------------------------------------------

def write_run_output(out, out_dir) -> None:
    """Write series.csv, trades.csv, and meta.json into ``out_dir``.

    Output is a pure function of the run (no timestamps, keys sorted) so
    identical runs produce identical bytes.
    """
    import os
    os.makedirs(out_dir, exist_ok=True)
    delta = out.config.delta
    with open(os.path.join(out_dir, "series.csv"), "w") as fh:
        fh.write("t,price,p_f,ewma_var,dealer_q,dealer_wealth,"
                 "wealth_fundamentalist,wealth_chartist,wealth_noise\n")
        for t in range(out.n_steps):
            fh.write(f"{t},{out.price[t]!r},{out.p_f[t]!r},{out.ewma_var[t]!r},"
                     f"{out.dealer_q[t]},{out.dealer_wealth[t]!r},"
                     f"{out.wealth_fundamentalist[t]!r},"
                     f"{out.wealth_chartist[t]!r},{out.wealth_noise[t]!r}\n")
    with open(os.path.join(out_dir, "trades.csv"), "w") as fh:
        fh.write("t,price,quantity,buyer_id,seller_id\n")
        for t, price_ticks, qty, buyer, seller in out.trades:
            fh.write(f"{t},{price_ticks * delta!r},{qty},{buyer},{seller}\n")
    meta = {
        "seed": out.seed,
        "steps": out.n_steps,
        "version": __version__,
        "config": {k: v for k, v in config_to_dict(out.config).items()},
        "conservation": {
            "initial_total_cash_ticks": out.initial_total_cash_ticks,
            "final_total_cash_ticks": out.final_total_cash_ticks,
            "initial_total_stock": out.initial_total_stock,
            "final_total_stock": out.final_total_stock,
        },
        "dealer": {
            "final_cash_ticks": out.final_dealer_cash_ticks,
            "final_inventory": out.final_dealer_q,
            "n_trades": len(out.dealer_trades),
        },
    }
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
