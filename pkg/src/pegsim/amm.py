"""Constant-product pools: stable asset A against collateral B.

Spot price is ``B/A`` (collateral per stable).  Selling ``db`` of B returns
``da = A db / (B + db)``; the effective price ``db/da`` equals ``(B + db)/A``
so the price impact ``p_e - p_s`` is exactly ``db/A``.

Three arithmetic modes share the same code path:

* ``float``   64-bit floats (simulation speed)
* ``exact``   ``fractions.Fraction`` (oracle for identities)
* ``integer`` integer reserves, outputs rounded down so ``A B`` never shrinks
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Union

Number = Union[int, float, Fraction]
MODES = ("float", "exact", "integer")


class SwapRejected(ValueError):
    pass


@dataclass(frozen=True)
class Pool:
    reserve_a: Number
    reserve_b: Number
    fee_bps: int = 0
    chain_id: str = ""
    mode: str = "float"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown arithmetic mode {self.mode!r}")
        if not (self.reserve_a > 0 and self.reserve_b > 0):
            raise ValueError("reserves must be strictly positive")
        if not 0 <= self.fee_bps < 10_000:
            raise ValueError("fee_bps out of range")

    @property
    def invariant(self) -> Number:
        """L^2 = A * B."""
        return self.reserve_a * self.reserve_b

    @property
    def depth(self) -> float:
        """L = sqrt(A * B)."""
        return math.sqrt(self.reserve_a * self.reserve_b)


def make_pool(reserve_a, reserve_b, fee_bps: int = 0, chain_id: str = "", mode: str = "float") -> Pool:
    conv = {"float": float, "exact": Fraction, "integer": int}[mode]
    return Pool(conv(reserve_a), conv(reserve_b), fee_bps, chain_id, mode)


def _coerce(pool: Pool, x: Number) -> Number:
    if pool.mode == "exact":
        return Fraction(x)
    if pool.mode == "integer":
        if int(x) != x:
            raise SwapRejected("integer pools take integer amounts")
        return int(x)
    return float(x)


def _after_fee(pool: Pool, amount: Number) -> Number:
    if pool.fee_bps == 0:
        return amount
    if pool.mode == "float":
        return amount * (10_000 - pool.fee_bps) / 10_000
    if pool.mode == "exact":
        return amount * Fraction(10_000 - pool.fee_bps, 10_000)
    return amount * (10_000 - pool.fee_bps) // 10_000


def _out(pool: Pool, r_in: Number, r_out: Number, amount_in: Number) -> Number:
    x = _after_fee(pool, amount_in)
    if pool.mode == "integer":
        return r_out * x // (r_in + x)
    return r_out * x / (r_in + x)


def spot_price(pool: Pool) -> Number:
    """Collateral per unit of stable, B/A."""
    return pool.reserve_b / pool.reserve_a if pool.mode != "integer" else Fraction(pool.reserve_b, pool.reserve_a)


def quote_out(pool: Pool, delta_b: Number) -> Number:
    """Stable received for selling ``delta_b`` collateral."""
    if not delta_b > 0:
        raise SwapRejected("delta_b must be positive")
    delta_b = _coerce(pool, delta_b)
    return _out(pool, pool.reserve_b, pool.reserve_a, delta_b)


def quote_out_b(pool: Pool, delta_a: Number) -> Number:
    """Collateral received for selling ``delta_a`` stable."""
    if not delta_a > 0:
        raise SwapRejected("delta_a must be positive")
    delta_a = _coerce(pool, delta_a)
    return _out(pool, pool.reserve_a, pool.reserve_b, delta_a)


def price_impact(pool: Pool, delta_b: Number) -> Number:
    """p_e - p_s = delta_b / A for a fee-free sale of collateral."""
    if not delta_b > 0:
        raise SwapRejected("delta_b must be positive")
    delta_b = _coerce(pool, delta_b)
    if pool.mode == "integer":
        return Fraction(delta_b, pool.reserve_a)
    return delta_b / pool.reserve_a


def effective_price(pool: Pool, delta_b: Number) -> Number:
    """Collateral paid per stable received, (B + db)/A when fee-free."""
    da = quote_out(pool, delta_b)
    if pool.mode == "integer":
        return Fraction(_coerce(pool, delta_b), da)
    return delta_b / da


def execute_swap(pool: Pool, delta_b: Number) -> tuple[Number, Pool]:
    """Sell collateral for stable.  The fee stays in ``reserve_b``."""
    da = quote_out(pool, delta_b)
    if not 0 < da < pool.reserve_a:
        raise SwapRejected("trade would empty the pool or return nothing")
    new = replace(pool, reserve_a=pool.reserve_a - da, reserve_b=pool.reserve_b + _coerce(pool, delta_b))
    return da, new


def execute_swap_a(pool: Pool, delta_a: Number) -> tuple[Number, Pool]:
    """Sell stable for collateral.  The fee stays in ``reserve_a``."""
    db = quote_out_b(pool, delta_a)
    if not 0 < db < pool.reserve_b:
        raise SwapRejected("trade would empty the pool or return nothing")
    new = replace(pool, reserve_a=pool.reserve_a + _coerce(pool, delta_a), reserve_b=pool.reserve_b - db)
    return db, new


def collateral_to_price(pool: Pool, target: float) -> float:
    """Collateral to sell (fee-free) so the spot price rises to ``target``.

    Solves (B + x)^2 / L^2 = target; returns 0 if the price is already there.
    """
    want = math.sqrt(target * float(pool.invariant))
    return max(0.0, want - float(pool.reserve_b))


def stable_to_price(pool: Pool, target: float) -> float:
    """Stable to sell (fee-free) so the spot price falls to ``target``."""
    want = math.sqrt(float(pool.invariant) / target)
    return max(0.0, want - float(pool.reserve_a))


@dataclass(frozen=True)
class TradeRecord:
    """What the impact audit needs from one executed trade."""

    block: int
    chain: str
    side: str  # "buy_a" sells collateral, "sell_a" sells stable
    amount_in: float
    depth_in: float  # reserve of the input asset before the trade
    impact: float  # measured spot move of the traded-for asset's price
    actor: str = ""


def traded(block: int, pool: Pool, side: str, amount_in: float, actor: str = "") -> tuple[float, Pool, TradeRecord]:
    """Execute a trade and record its measured impact p_e - p_s."""
    if side == "buy_a":
        before = float(spot_price(pool))
        out, new = execute_swap(pool, amount_in)
        depth = float(pool.reserve_b)
        impact = float(amount_in) / float(out) - before
    elif side == "sell_a":
        before = float(pool.reserve_a / pool.reserve_b)
        out, new = execute_swap_a(pool, amount_in)
        depth = float(pool.reserve_a)
        impact = float(amount_in) / float(out) - before
    else:
        raise ValueError(f"unknown side {side!r}")
    return float(out), new, TradeRecord(block, pool.chain_id, side, float(amount_in), depth, impact, actor)
