"""Limit order book with price-time priority matching on a tick grid.

Prices are held as integer tick counts (currency = ticks * delta), so every
book price is an exact grid multiple by construction and settlement amounts
stay exact integers. Matching executes at the resting order's price, best
price first, FIFO within a price level. Order expiry removes the globally
oldest orders by id across both sides.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field

BID = "bid"
ASK = "ask"

# Nudges decimal-intent ties (e.g. 1000.05 at delta=0.1) upward despite the
# raw quotient sitting a few ulps below the midpoint in binary.
_TIE_EPS = 1e-9


class InvalidOrder(ValueError):
    """Order rejected before touching the book."""


def snap_to_grid(raw_price: float, delta: float) -> int:
    """Round a raw currency price to the nearest tick count.

    Ties round half away from zero; non-positive results are floored at
    one tick (prices must stay positive).
    """
    ticks = math.floor(raw_price / delta + 0.5 + _TIE_EPS)
    return ticks if ticks >= 1 else 1


@dataclass
class Order:
    id: int
    agent_id: int
    side: str
    price: int            # ticks
    quantity: int
    submitted_at: int


@dataclass(frozen=True)
class Trade:
    price: int            # ticks; always the resting order's price
    quantity: int
    buyer_id: int
    seller_id: int
    at: int


@dataclass
class BookLevel:
    orders: deque = field(default_factory=deque)


class OrderBook:
    """Price-time priority book.

    Levels are deques keyed by tick price; best-price lookup goes through
    lazily cleaned heaps. ``_orders`` maps id -> resting order and, because
    ids are validated monotone at submission, its insertion order is id
    order, which makes oldest-first expiry a prefix scan.
    """

    def __init__(self, delta: float, initial_price_ticks: int):
        if delta <= 0:
            raise ValueError("delta must be positive")
        if initial_price_ticks < 1:
            raise ValueError("initial price must be at least one tick")
        self.delta = delta
        self.prev_price = initial_price_ticks
        self.last_trade_price: int | None = None
        self._bid_levels: dict[int, deque[Order]] = {}
        self._ask_levels: dict[int, deque[Order]] = {}
        self._bid_heap: list[int] = []   # negated ticks
        self._ask_heap: list[int] = []
        self._orders: dict[int, Order] = {}
        self._next_id = 0
        self._last_submitted_id = -1

    def __len__(self) -> int:
        return len(self._orders)

    def make_order(self, agent_id: int, side: str, price_ticks: int,
                   quantity: int, t: int) -> Order:
        """Build an order carrying the next id in submission sequence."""
        if side not in (BID, ASK):
            raise InvalidOrder(f"unknown side {side!r}")
        oid = self._next_id
        self._next_id += 1
        return Order(oid, agent_id, side, price_ticks, quantity, t)

    def best_bid(self) -> int | None:
        heap, levels = self._bid_heap, self._bid_levels
        while heap and -heap[0] not in levels:
            heapq.heappop(heap)
        return -heap[0] if heap else None

    def best_ask(self) -> int | None:
        heap, levels = self._ask_heap, self._ask_levels
        while heap and heap[0] not in levels:
            heapq.heappop(heap)
        return heap[0] if heap else None

    def submit_limit_order(self, order: Order) -> list[Trade]:
        """Match an incoming limit order; rest any unfilled remainder.

        Trades execute at the resting price while the order crosses the
        opposite best, FIFO within a level. Partial fills keep the resting
        order's id (time priority preserved).
        """
        if order.quantity <= 0:
            raise InvalidOrder("quantity must be positive")
        if order.price < 1:
            raise InvalidOrder("price must be at least one tick")
        if not isinstance(order.price, int):
            raise InvalidOrder("price must be an integer tick count")
        if order.id <= self._last_submitted_id:
            raise InvalidOrder("order ids must be submitted in increasing order")
        if order.side == BID:
            opp_levels, opp_best = self._ask_levels, self.best_ask
            crosses = lambda best: best <= order.price
        elif order.side == ASK:
            opp_levels, opp_best = self._bid_levels, self.best_bid
            crosses = lambda best: best >= order.price
        else:
            raise InvalidOrder(f"unknown side {order.side!r}")
        self._last_submitted_id = order.id

        trades: list[Trade] = []
        qty = order.quantity
        while qty > 0:
            best = opp_best()
            if best is None or not crosses(best):
                break
            level = opp_levels[best]
            while level and qty > 0:
                resting = level[0]
                fill = qty if qty < resting.quantity else resting.quantity
                if order.side == BID:
                    trade = Trade(best, fill, order.agent_id, resting.agent_id, order.submitted_at)
                else:
                    trade = Trade(best, fill, resting.agent_id, order.agent_id, order.submitted_at)
                trades.append(trade)
                qty -= fill
                resting.quantity -= fill
                if resting.quantity == 0:
                    level.popleft()
                    del self._orders[resting.id]
            if not level:
                del opp_levels[best]
        if trades:
            self.last_trade_price = trades[-1].price
        if qty > 0:
            order.quantity = qty
            levels = self._bid_levels if order.side == BID else self._ask_levels
            level = levels.get(order.price)
            if level is None:
                levels[order.price] = deque((order,))
                if order.side == BID:
                    heapq.heappush(self._bid_heap, -order.price)
                else:
                    heapq.heappush(self._ask_heap, order.price)
            else:
                level.append(order)
            self._orders[order.id] = order
        return trades

    def is_resting(self, order_id: int) -> bool:
        return order_id in self._orders

    def cancel_order(self, order_id: int) -> Order | None:
        """Remove a resting order; returns None if it is no longer resting."""
        order = self._orders.pop(order_id, None)
        if order is None:
            return None
        self._remove_from_level(order)
        return order

    def _remove_from_level(self, order: Order) -> None:
        levels = self._bid_levels if order.side == BID else self._ask_levels
        level = levels[order.price]
        level.remove(order)
        if not level:
            del levels[order.price]

    def expire_orders(self, u: float, omega: float, tau: int) -> list[Order]:
        """If u < omega, drop the min(tau, book size) oldest orders by id."""
        if u >= omega or tau <= 0 or not self._orders:
            return []
        count = tau if tau < len(self._orders) else len(self._orders)
        victims = []
        it = iter(self._orders.values())
        for _ in range(count):
            victims.append(next(it))
        for order in victims:
            del self._orders[order.id]
            self._remove_from_level(order)
        return victims

    def current_price(self, traded_this_step: bool) -> int:
        """Price rule: last trade if one occurred this step, else the mid
        when both sides quote, else the previous price. Stores the result
        as the new previous price.

        An odd-tick mid rounds half a tick up (half away from zero; prices
        are positive).
        """
        if traded_this_step and self.last_trade_price is not None:
            price = self.last_trade_price
        else:
            bb, ba = self.best_bid(), self.best_ask()
            if bb is not None and ba is not None:
                price = (bb + ba + 1) // 2
            else:
                price = self.prev_price
        self.prev_price = price
        return price

    def snapshot(self, depth: int) -> dict:
        """Top-of-book view (up to ``depth`` levels per side) for logging."""
        bids = sorted(self._bid_levels.items(), key=lambda kv: -kv[0])[:depth]
        asks = sorted(self._ask_levels.items(), key=lambda kv: kv[0])[:depth]
        agg = lambda level: sum(o.quantity for o in level)
        return {
            "bids": [[p * self.delta, agg(lvl)] for p, lvl in bids],
            "asks": [[p * self.delta, agg(lvl)] for p, lvl in asks],
        }
