"""Order book unit and property tests.

The reference matcher in this file re-implements matching as a plain list
scan (no heaps, no level dicts) so the production book can be checked
against it order-for-order.
"""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dealersim.lob import ASK, BID, InvalidOrder, OrderBook, snap_to_grid

DELTA = 0.1


# ---------------------------------------------------------------------------
# brute-force reference matcher
# ---------------------------------------------------------------------------

class SlowBook:
    """O(n^2) list-scan book: same semantics, no clever data structures."""

    def __init__(self):
        self.rest = []   # [side, price, qty, id, agent_id] in arrival order

    def submit(self, oid, agent_id, side, price, qty, t):
        trades = []
        while qty > 0:
            best = None
            for o in self.rest:
                if o[0] == side:
                    continue
                if side == BID and o[1] > price:
                    continue
                if side == ASK and o[1] < price:
                    continue
                if best is None:
                    best = o
                elif side == BID and o[1] < best[1]:
                    best = o
                elif side == ASK and o[1] > best[1]:
                    best = o
                # equal price: earlier arrival (list order) already wins
            if best is None:
                break
            fill = min(qty, best[2])
            if side == BID:
                trades.append((best[1], fill, agent_id, best[4]))
            else:
                trades.append((best[1], fill, best[4], agent_id))
            qty -= fill
            best[2] -= fill
            if best[2] == 0:
                self.rest.remove(best)
        if qty > 0:
            self.rest.append([side, price, qty, oid, agent_id])
        return trades

    def expire(self, tau):
        victims = sorted(self.rest, key=lambda o: o[3])[:tau]
        for v in victims:
            self.rest.remove(v)
        return sorted(v[3] for v in victims)

    def state(self):
        return sorted((o[0], o[1], o[2], o[3]) for o in self.rest)


def book_state(book):
    out = []
    for levels, side in ((book._bid_levels, BID), (book._ask_levels, ASK)):
        for price, level in levels.items():
            for o in level:
                out.append((side, price, o.quantity, o.id))
    return sorted(out)


# ---------------------------------------------------------------------------
# matching basics
# ---------------------------------------------------------------------------

def make_book(price=10000):
    return OrderBook(DELTA, price)


def submit(book, agent, side, ticks, qty, t=0):
    order = book.make_order(agent, side, ticks, qty, t)
    return book.submit_limit_order(order)


def test_resting_order_rests():
    book = make_book()
    trades = submit(book, 1, BID, 9990, 5)
    assert trades == []
    assert book.best_bid() == 9990
    assert book.best_ask() is None
    assert len(book) == 1


def test_cross_executes_at_resting_price():
    book = make_book()
    submit(book, 1, ASK, 10010, 5)
    trades = submit(book, 2, BID, 10030, 5)
    assert len(trades) == 1
    assert trades[0].price == 10010
    assert trades[0].quantity == 5
    assert trades[0].buyer_id == 2
    assert trades[0].seller_id == 1
    assert len(book) == 0


def test_partial_fill_walks_fifo_queue():
    # two asks at the same price, arrival order: 5 then 7; a bid for 8
    # takes all of the first and 3 of the second
    book = make_book()
    submit(book, 1, ASK, 10000, 5)
    submit(book, 2, ASK, 10000, 7)
    trades = submit(book, 3, BID, 10000, 8)
    assert [(tr.price, tr.quantity, tr.seller_id) for tr in trades] == [
        (10000, 5, 1), (10000, 3, 2)]
    # remainder keeps its id and 4 lots
    assert book_state(book) == [(ASK, 10000, 4, 1)]


def test_partial_fill_keeps_time_priority():
    book = make_book()
    submit(book, 1, ASK, 10000, 10)
    submit(book, 2, BID, 10000, 4)        # leaves 6 on id 0
    submit(book, 3, ASK, 10000, 5)        # queues behind
    trades = submit(book, 4, BID, 10000, 8)
    assert [(tr.quantity, tr.seller_id) for tr in trades] == [(6, 1), (2, 3)]


def test_sweep_through_multiple_levels():
    book = make_book()
    submit(book, 1, ASK, 10000, 2)
    submit(book, 2, ASK, 10010, 2)
    submit(book, 3, ASK, 10020, 2)
    trades = submit(book, 4, BID, 10015, 5)
    assert [(tr.price, tr.quantity) for tr in trades] == [(10000, 2), (10010, 2)]
    # remainder rests as the new best bid
    assert book.best_bid() == 10015
    assert book.best_ask() == 10020


def test_no_self_cross_after_matching():
    book = make_book()
    for _ in range(50):
        submit(book, 1, random.choice((BID, ASK)), random.randint(9950, 10050),
               random.randint(1, 9))
        bb, ba = book.best_bid(), book.best_ask()
        if bb is not None and ba is not None:
            assert bb < ba


def test_rejects_bad_orders():
    book = make_book()
    with pytest.raises(InvalidOrder):
        submit(book, 1, BID, 10000, 0)
    with pytest.raises(InvalidOrder):
        submit(book, 1, BID, 0, 5)
    with pytest.raises(InvalidOrder):
        submit(book, 1, "buy", 10000, 5)
    # replaying an already-used id must fail
    o1 = book.make_order(1, BID, 9000, 1, 0)
    o2 = book.make_order(1, BID, 9000, 1, 0)
    book.submit_limit_order(o2)
    with pytest.raises(InvalidOrder):
        book.submit_limit_order(o1)


def test_cancel_removes_resting_order():
    book = make_book()
    submit(book, 1, BID, 9990, 5)
    order = book.make_order(2, BID, 9995, 3, 0)
    book.submit_limit_order(order)
    assert book.best_bid() == 9995
    got = book.cancel_order(order.id)
    assert got is order
    assert book.best_bid() == 9990
    assert book.cancel_order(order.id) is None
    assert book.cancel_order(12345) is None


# ---------------------------------------------------------------------------
# expiry
# ---------------------------------------------------------------------------

def test_expiry_removes_oldest_across_both_sides():
    book = make_book()
    submit(book, 1, BID, 9990, 1)    # id 0
    submit(book, 2, ASK, 10010, 1)   # id 1
    submit(book, 3, BID, 9980, 1)    # id 2
    submit(book, 4, ASK, 10020, 1)   # id 3
    removed = book.expire_orders(u=0.05, omega=0.1, tau=3)
    assert [o.id for o in removed] == [0, 1, 2]
    assert book_state(book) == [(ASK, 10020, 1, 3)]


def test_expiry_skipped_when_draw_misses():
    book = make_book()
    submit(book, 1, BID, 9990, 1)
    assert book.expire_orders(u=0.5, omega=0.1, tau=3) == []
    assert len(book) == 1


def test_expiry_caps_at_book_size():
    book = make_book()
    submit(book, 1, BID, 9990, 1)
    submit(book, 2, ASK, 10010, 1)
    removed = book.expire_orders(u=0.0, omega=0.1, tau=50)
    assert len(removed) == 2
    assert len(book) == 0


def test_expiry_ignores_filled_portion_ids():
    # once an order fully fills it no longer counts toward expiry
    book = make_book()
    submit(book, 1, ASK, 10000, 5)   # id 0
    submit(book, 2, BID, 10000, 5)   # id 1, fills id 0 entirely
    submit(book, 3, BID, 9990, 1)    # id 2
    removed = book.expire_orders(u=0.0, omega=0.1, tau=1)
    assert [o.id for o in removed] == [2]


# ---------------------------------------------------------------------------
# price rule
# ---------------------------------------------------------------------------

def test_price_rule_prefers_last_trade():
    book = make_book(10000)
    submit(book, 1, ASK, 10020, 5)
    submit(book, 2, BID, 10020, 2)
    assert book.current_price(traded_this_step=True) == 10020


def test_price_rule_falls_back_to_mid():
    book = make_book(10000)
    submit(book, 1, BID, 9990, 5)
    submit(book, 2, ASK, 10030, 5)
    assert book.current_price(traded_this_step=False) == 10010


def test_price_rule_mid_rounds_half_up():
    book = make_book(10000)
    submit(book, 1, BID, 10000, 1)
    submit(book, 2, ASK, 10001, 1)
    assert book.current_price(traded_this_step=False) == 10001


def test_price_rule_keeps_previous_when_book_empty():
    book = make_book(10000)
    assert book.current_price(traded_this_step=False) == 10000
    submit(book, 1, BID, 9990, 1)
    # one-sided book still falls back to previous price
    assert book.current_price(traded_this_step=False) == 10000


def test_price_rule_result_becomes_previous():
    book = make_book(10000)
    submit(book, 1, BID, 9990, 5)
    submit(book, 2, ASK, 10030, 5)
    assert book.current_price(traded_this_step=False) == 10010
    book.cancel_order(0)
    book.cancel_order(1)
    assert book.current_price(traded_this_step=False) == 10010


# ---------------------------------------------------------------------------
# grid snapping
# ---------------------------------------------------------------------------

def test_snap_examples():
    assert snap_to_grid(1000.04, DELTA) == 10000
    assert snap_to_grid(1000.06, DELTA) == 10001
    assert snap_to_grid(1000.05, DELTA) == 10001   # tie: half away from zero
    assert snap_to_grid(999.95, DELTA) == 10000
    assert snap_to_grid(1000.0, DELTA) == 10000


def test_snap_floors_at_one_tick():
    assert snap_to_grid(0.0, DELTA) == 1
    assert snap_to_grid(-5.0, DELTA) == 1
    assert snap_to_grid(0.009, DELTA) == 1


@given(st.floats(min_value=0.05, max_value=1e6, allow_nan=False))
def test_snap_within_half_tick(raw):
    ticks = snap_to_grid(raw, DELTA)
    assert ticks >= 1
    # never drifts more than half a tick plus float slack
    assert abs(ticks * DELTA - raw) <= DELTA / 2 + 1e-6


# ---------------------------------------------------------------------------
# randomized equivalence against the reference matcher
# ---------------------------------------------------------------------------

def run_pair(seed, n_orders):
    rng = random.Random(seed)
    fast = make_book()
    slow = SlowBook()
    for _ in range(n_orders):
        if rng.random() < 0.05 and len(fast) > 0:
            u, tau = 0.0, rng.randint(1, 10)
            removed = fast.expire_orders(u, omega=0.1, tau=tau)
            assert sorted(o.id for o in removed) == slow.expire(tau)
            continue
        side = rng.choice((BID, ASK))
        ticks = rng.randint(9990, 10010)
        qty = rng.randint(1, 10)
        order = fast.make_order(7, side, ticks, qty, 0)
        got = [(tr.price, tr.quantity, tr.buyer_id, tr.seller_id)
               for tr in fast.submit_limit_order(order)]
        want = slow.submit(order.id, 7, side, ticks, qty, 0)
        assert got == want
        assert book_state(fast) == slow.state()


def test_matches_reference_on_random_streams():
    for seed in range(300):
        run_pair(seed, 40)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=1, max_value=50))
def test_matches_reference_property(seed, n_orders):
    run_pair(seed, n_orders)
