import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pegsim import amm
from pegsim.amm import SwapRejected, make_pool

reserves = st.floats(min_value=1.0, max_value=1e6)


def test_spot_price():
    assert amm.spot_price(make_pool(100, 100)) == 1.0
    assert amm.spot_price(make_pool(200, 100)) == 0.5


def test_worked_swap_exact():
    pool = make_pool(100, 100, mode="exact")
    da, new = amm.execute_swap(pool, 10)
    assert da == Fraction(1000, 110)
    assert (100 - da) * 110 == 10_000
    assert new.invariant == pool.invariant
    assert amm.price_impact(make_pool(100, 100), 10) == pytest.approx(0.1, abs=0)


def test_selling_b_equal_to_reserve_halves_a():
    pool = make_pool(300, 70, mode="exact")
    assert amm.quote_out(pool, 70) == 150


def test_small_trade_price_limit():
    pool = make_pool(400, 100)
    assert amm.effective_price(pool, 1e-9) == pytest.approx(100 / 400, rel=1e-8)


def test_rejects_non_positive():
    pool = make_pool(100, 100)
    for bad in (0, -1):
        with pytest.raises(SwapRejected):
            amm.quote_out(pool, bad)
        with pytest.raises(SwapRejected):
            amm.execute_swap_a(pool, bad)
    with pytest.raises(ValueError):
        make_pool(0, 1)


def test_zero_fee_round_trip():
    pool = make_pool(1000, 800)
    da, p1 = amm.execute_swap(pool, 37.5)
    db, p2 = amm.execute_swap_a(p1, da)
    assert db == pytest.approx(37.5, rel=1e-12)
    assert p2.reserve_a == pytest.approx(1000, rel=1e-12)
    assert p2.reserve_b == pytest.approx(800, rel=1e-12)


@pytest.mark.parametrize("mode", ["float", "exact", "integer"])
def test_fee_round_trip_grows_invariant(mode):
    pool = make_pool(10_000, 8_000, fee_bps=30, mode=mode)
    da, p1 = amm.execute_swap(pool, 500)
    if mode == "integer":
        da = int(da)
    _, p2 = amm.execute_swap_a(p1, da)
    assert p1.invariant > pool.invariant
    assert p2.invariant > p1.invariant


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=10, max_value=10**9), st.integers(min_value=10, max_value=10**9),
       st.integers(min_value=1, max_value=10**9))
def test_integer_mode_never_shrinks_invariant(a, b, db):
    pool = make_pool(a, b, mode="integer")
    try:
        _, new = amm.execute_swap(pool, db)
    except SwapRejected:
        return
    assert new.invariant >= pool.invariant


@settings(max_examples=200, deadline=None)
@given(reserves, reserves, st.floats(min_value=1e-6, max_value=1e6))
def test_impact_identity_against_exact_oracle(a, b, db):
    pool = make_pool(a, b)
    exact = make_pool(Fraction(a), Fraction(b), mode="exact")
    pi = amm.price_impact(pool, db)
    pe = amm.effective_price(exact, Fraction(db))
    ps = amm.spot_price(exact)
    assert pe - ps == Fraction(db) / Fraction(a)
    assert pi == pytest.approx(float(pe - ps), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(reserves, reserves, st.floats(min_value=1e-3, max_value=1e5), st.floats(min_value=1e-3, max_value=1e5))
def test_output_increasing_and_concave(a, b, x, y):
    pool = make_pool(Fraction(a), Fraction(b), mode="exact")
    lo, hi = sorted((Fraction(x), Fraction(y)))
    if lo == hi:
        return
    mid = (lo + hi) / 2
    q = lambda v: amm.quote_out(pool, v)  # noqa: E731
    assert q(hi) > q(lo)
    assert q(mid) >= (q(lo) + q(hi)) / 2


def test_thousand_random_swaps_drift():
    rng = random.Random(5)
    pool = make_pool(1e6, 1e6)
    k0 = pool.invariant
    for _ in range(1000):
        if rng.random() < 0.5:
            _, pool = amm.execute_swap(pool, rng.uniform(1, 1e4))
        else:
            _, pool = amm.execute_swap_a(pool, rng.uniform(1, 1e4))
    assert abs(pool.invariant - k0) / k0 <= 1e-12


def test_price_targeting():
    pool = make_pool(1000, 1000)
    x = amm.collateral_to_price(pool, 1.21)
    _, up = amm.execute_swap(pool, x)
    assert amm.spot_price(up) == pytest.approx(1.21, rel=1e-12)
    y = amm.stable_to_price(pool, 0.81)
    _, down = amm.execute_swap_a(pool, y)
    assert amm.spot_price(down) == pytest.approx(0.81, rel=1e-12)
    assert amm.collateral_to_price(pool, 0.5) == 0.0


def test_trade_record_measures_impact():
    pool = make_pool(100, 100, chain_id="c1")
    out, new, rec = amm.traded(3, pool, "buy_a", 10)
    assert out == pytest.approx(1000 / 110)
    assert rec.impact == pytest.approx(0.1, rel=1e-12)
    assert rec.depth_in == 100 and rec.chain == "c1" and rec.block == 3
    with pytest.raises(ValueError):
        amm.traded(0, pool, "sideways", 1)
