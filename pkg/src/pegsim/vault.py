"""Stabilization vault: collateral accounting, SFC minting and liquidation.

Collateral ratio::

    C_t = sum_i V_i P_i / (sum_j Q_j P_peg)

Minting a locked value ``V`` at deviation ``d`` and volatility ``s``::

    Q = (V / P_peg) (1 + alpha d / (1 + gamma s^2))

Payoff of the stabilization instrument::

    Phi = sgn(P_peg - P) min(alpha |P - P_peg|, beta s)

States: Healthy for C >= 1.3, Warning for 1.2 <= C < 1.3, Liquidation below.
"""

from __future__ import annotations

import enum
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import amm
from .amm import Pool

log = logging.getLogger(__name__)

INF_RATIO = math.inf


class VaultStatus(str, enum.Enum):
    HEALTHY = "Healthy"
    WARNING = "Warning"
    LIQUIDATION = "Liquidation"


class MintRejected(ValueError):
    pass


@dataclass(frozen=True)
class VaultParams:
    c_min: float = 1.2
    c_warn: float = 1.3
    c_target: float = 1.25
    alpha: float = 0.5
    gamma: float = 2.0
    beta: float = 1.0
    p_peg: float = 1.0
    vol_window: int = 30
    rebalance_lambda: float = 0.7
    # Worst one-block relative fall of volatile collateral the gate must absorb.
    # Zero gates mints on the plain ratio.
    stress: float = 0.0
    guard_margin: float = 0.02

    def __post_init__(self) -> None:
        if self.c_min < 1.2:
            raise ValueError("c_min below the 1.2 overcollateralization floor")
        if not self.c_min < self.c_target < self.c_warn:
            raise ValueError("need c_min < c_target < c_warn")
        if self.p_peg <= 0 or self.vol_window < 2:
            raise ValueError("p_peg must be positive and vol_window >= 2")
        if min(self.alpha, self.gamma, self.beta, self.stress) < 0:
            raise ValueError("alpha, gamma, beta and stress must be non-negative")


@dataclass
class SFC:
    quantity: float
    mint_block: int
    alpha: float
    beta: float


@dataclass
class VaultState:
    positions: dict[str, float]
    prices: dict[str, float]
    liabilities: dict[str, float] = field(default_factory=dict)
    params: VaultParams = field(default_factory=VaultParams)
    stable_assets: frozenset = frozenset()
    insolvent: bool = False
    minting_halted: bool = False
    issued: list[SFC] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)

    @property
    def p_peg(self) -> float:
        return self.params.p_peg

    def collateral_value(self) -> float:
        return sum(q * self.prices[a] for a, q in self.positions.items())

    def total_liabilities(self) -> float:
        return sum(self.liabilities.values())

    def stressed_value(self) -> float:
        """Collateral value after the worst one-block fall of volatile assets."""
        f = 1.0 - self.params.stress
        return sum(
            q * self.prices[a] * (1.0 if a in self.stable_assets else f)
            for a, q in self.positions.items()
        )

    def stressed_ratio(self) -> float:
        q = self.total_liabilities()
        return INF_RATIO if q <= 0 else self.stressed_value() / (q * self.p_peg)

    def ratio_at(self, prices: dict[str, float]) -> float:
        q = self.total_liabilities()
        if q <= 0:
            return INF_RATIO
        return sum(v * prices[a] for a, v in self.positions.items()) / (q * self.p_peg)


def collateral_ratio(vault: VaultState) -> float:
    q = vault.total_liabilities()
    if q <= 0:
        return INF_RATIO
    return vault.collateral_value() / (q * vault.p_peg)


def classify_state(c_ratio: float, params: VaultParams = VaultParams()) -> VaultStatus:
    if c_ratio >= params.c_warn:
        return VaultStatus.HEALTHY
    if c_ratio >= params.c_min:
        return VaultStatus.WARNING
    return VaultStatus.LIQUIDATION


def mint_amount(value: float, p_peg: float, alpha: float, deviation: float, gamma: float, sigma: float) -> float:
    return (value / p_peg) * (1.0 + alpha * deviation / (1.0 + gamma * sigma * sigma))


def boost(alpha: float, deviation: float, gamma: float, sigma: float) -> float:
    """The stabilization boost term, damped by volatility."""
    return alpha * deviation / (1.0 + gamma * sigma * sigma)


def mint_sfc(
    vault: VaultState,
    value: float,
    deviation: float,
    sigma: float,
    asset: Optional[str] = None,
    instrument: str = "SFC",
    block: int = 0,
) -> float:
    """Lock ``value`` of collateral and issue SFC; rejects mints that breach the floor.

    ``asset`` names the deposited collateral (default: the first stable asset,
    else the first position).  The gate uses the stressed ratio when
    ``params.stress > 0``.
    """
    if value <= 0:
        raise MintRejected("locked value must be positive")
    if vault.minting_halted:
        raise MintRejected("minting halted")
    p = vault.params
    q = mint_amount(value, p.p_peg, p.alpha, deviation, p.gamma, sigma)
    if q <= 0:
        raise MintRejected("mint amount not positive")
    asset = asset or next(iter(sorted(vault.stable_assets or vault.positions)))
    units = value / vault.prices[asset]
    vault.positions[asset] = vault.positions.get(asset, 0.0) + units
    vault.liabilities[instrument] = vault.liabilities.get(instrument, 0.0) + q
    floor = p.c_min + p.guard_margin if p.stress > 0 else p.c_min
    after = vault.stressed_ratio() if p.stress > 0 else collateral_ratio(vault)
    if after < floor:
        vault.positions[asset] -= units
        vault.liabilities[instrument] -= q
        raise MintRejected(f"mint would push ratio to {after:.4f} < {floor}")
    vault.issued.append(SFC(q, block, p.alpha, p.beta))
    vault.events.append({"block": block, "event": "mint", "value": value, "sfc": q})
    return q


def sfc_payoff(price: float, p_peg: float, sigma: float, alpha: float, beta: float) -> float:
    if p_peg <= 0:
        raise ValueError("p_peg must be positive")
    gap = price - p_peg
    if gap == 0:
        return 0.0
    return math.copysign(min(alpha * abs(gap), beta * sigma), -gap)


def sfc_delta(price: float, p_peg: float, sigma: float, alpha: float, beta: float, h: float = 1e-6) -> float:
    """Central finite difference of the payoff in the price."""
    return (sfc_payoff(price + h, p_peg, sigma, alpha, beta) - sfc_payoff(price - h, p_peg, sigma, alpha, beta)) / (2 * h)


class VolatilityEstimate:
    """Sample stddev of log returns over a trailing window of prices."""

    def __init__(self, window: int = 30) -> None:
        if window < 2:
            raise ValueError("window must be at least 2")
        self.window = window
        self._returns: deque[float] = deque(maxlen=window)
        self._last: Optional[float] = None

    def update(self, price: float) -> float:
        if price <= 0:
            raise ValueError("price must be positive")
        if self._last is not None:
            self._returns.append(math.log(price / self._last))
        self._last = price
        return self.sigma

    @property
    def sigma(self) -> float:
        n = len(self._returns)
        if n < 2:
            return 0.0
        mean = sum(self._returns) / n
        return math.sqrt(sum((r - mean) ** 2 for r in self._returns) / (n - 1))


def realized_volatility(prices, window: int = 30) -> float:
    est = VolatilityEstimate(window)
    for p in prices:
        est.update(p)
    return est.sigma


# -- rebalancing -------------------------------------------------------------


def rebalance_objective(delta, grad_target, jacobian, lam: float = 0.7) -> float:
    d = np.asarray(delta, float)
    r = np.asarray(grad_target, float) - np.asarray(jacobian, float) @ d
    return float(r @ r + lam * np.abs(d).sum())


def soft_threshold(x, k):
    return np.sign(x) * np.maximum(np.abs(x) - k, 0.0)


def solve_rebalance(
    grad_target, jacobian, lam: float = 0.7, max_iter: int = 500, tol: float = 1e-12
) -> tuple[np.ndarray, dict]:
    """Proximal gradient for min ||g - J d||^2 + lam ||d||_1.

    Step 1/Lip with Lip = 2 sigma_max(J)^2, the gradient's Lipschitz constant.
    Uses Nesterov momentum with restarts; stops when the objective moves
    less than ``tol`` (relative once the objective exceeds 1).  A looser
    tolerance can stop a momentum step short on ill-conditioned J.
    """
    g = np.asarray(grad_target, float)
    J = np.atleast_2d(np.asarray(jacobian, float))
    if J.shape[0] != g.shape[0]:
        raise ValueError(f"jacobian rows {J.shape[0]} != target length {g.shape[0]}")
    n = J.shape[1]
    smax = np.linalg.norm(J, 2) if J.size else 0.0
    if not np.isfinite(smax) or smax == 0:
        return np.zeros(n), {"iterations": 0, "diagnostic": "degenerate jacobian"}
    step = 1.0 / (2.0 * smax * smax)
    x = y = np.zeros(n)
    t = 1.0
    prev = rebalance_objective(x, g, J, lam)
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * J.T @ (J @ y - g)
        x_new = soft_threshold(y - step * grad, step * lam)
        obj = rebalance_objective(x_new, g, J, lam)
        if obj > prev and t > 1.0:  # momentum overshot: restart from x
            t, y = 1.0, x
            continue
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        done = abs(prev - obj) <= tol * max(1.0, abs(obj))
        x, t, prev = x_new, t_new, min(obj, prev) if done else obj
        if done:
            break
    return x, {"iterations": it, "objective": prev}


def rebalance(
    vault: VaultState,
    grad_target,
    jacobian,
    lam: Optional[float] = None,
    execute: Optional[Callable[[np.ndarray], None]] = None,
) -> np.ndarray:
    """Solve for the trade vector and hand it to ``execute`` (DEX trades)."""
    lam = vault.params.rebalance_lambda if lam is None else lam
    delta, info = solve_rebalance(grad_target, jacobian, lam)
    if "diagnostic" in info:
        vault.events.append({"event": "rebalance-skipped", "reason": info["diagnostic"]})
        return delta
    if execute is not None and np.any(delta):
        execute(delta)
    vault.events.append({"event": "rebalance", "delta": delta.tolist(), "iterations": info["iterations"]})
    return delta


def bisect(f: Callable[[float], bool], lo: float, hi: float, iters: int = 60) -> float:
    """Smallest x in [lo, hi] with f(x) true, assuming f is monotone (False then True)."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid):
            hi = mid
        else:
            lo = mid
    return hi


# -- liquidation ---------------------------------------------------------------


def _ratio_after_buyback(vault: VaultState, pool: Pool, spend_asset: str, x: float, instrument: str) -> float:
    """Ratio after spending ``x`` units of ``spend_asset`` to buy and burn SFC."""
    got = amm.quote_out(pool, x)
    q = vault.total_liabilities() - got
    if q <= 0:
        return INF_RATIO
    value = vault.collateral_value() - x * vault.prices[spend_asset]
    return value / (q * vault.p_peg)


def liquidate_partial(
    vault: VaultState,
    pool: Pool,
    spend_asset: str,
    instrument: str = "SFC",
    target: Optional[float] = None,
    max_slippage: float = 0.5,
) -> tuple[float, Pool]:
    """Buy SFC from ``pool`` (a = SFC, b = ``spend_asset``) and burn it.

    Raises the ratio to ``target`` (default c_target) when the pool allows;
    otherwise spends as much as the slippage limit permits and flags the
    vault insolvent.  Returns (SFC burned, updated pool).
    """
    p = vault.params
    target = p.c_target if target is None else target
    c = collateral_ratio(vault)
    if c >= p.c_min:
        raise ValueError(f"ratio {c:.4f} not in liquidation")
    budget = vault.positions.get(spend_asset, 0.0)
    # Cap spending so the average price paid stays within max_slippage of peg.
    price_cap = p.p_peg * (1 + max_slippage)
    cap_x = amm.collateral_to_price(pool, price_cap)
    hi = min(budget, cap_x)
    if hi <= 0:
        vault.insolvent = vault.minting_halted = True
        return 0.0, pool
    if _ratio_after_buyback(vault, pool, spend_asset, hi, instrument) < target:
        x = hi
        vault.insolvent = vault.minting_halted = True
    else:
        x = bisect(lambda v: _ratio_after_buyback(vault, pool, spend_asset, v, instrument) >= target, 0.0, hi)
    burned, pool = amm.execute_swap(pool, x)
    vault.positions[spend_asset] -= x
    vault.liabilities[instrument] = vault.liabilities.get(instrument, 0.0) - burned
    vault.events.append({"event": "liquidate", "spent": x, "burned": burned, "ratio": collateral_ratio(vault)})
    return burned, pool


# -- solvency game ---------------------------------------------------------------

SOLVENCY_ADVERSARIES = ("idle", "price-manipulator", "mint-spammer", "liquidation-trigger")


@dataclass
class SolvencyResult:
    adversary: str
    seed: int
    violation: bool
    breaches: int  # checks (two per block) with true ratio < c_min
    flagged_breaches: int  # of those, inside an oracle-error window
    unflagged_breaches: int
    min_ratio: float
    final_ratio: float
    error_blocks: int


@dataclass
class SolvencyConfig:
    horizon: int = 48
    price0: float = 2000.0
    max_move: float = 0.03
    c0: float = 1.3
    liabilities0: float = 10_000.0
    volatile_share0: float = 0.5
    pool_depth: float = 20.0  # volatile pool value / vault value
    sfc_pool_depth: float = 10.0
    max_slippage: float = 0.02
    adversary_push: float = 0.01  # largest front-run price move the adversary can fund
    lookback: int = 2
    rebalancing: bool = True


def _recentre(pool: Pool, price: float) -> Pool:
    """External arbitrage restores the pool to ``price`` at constant depth."""
    k = float(pool.invariant)
    a = math.sqrt(k / price)
    return Pool(a, k / a, pool.fee_bps, pool.chain_id)


class VaultDesk:
    """Vault plus the two pools it trades on, and its risk policy.

    ``eth_pool`` holds volatile collateral (a) against the stable-value asset
    (b); ``sfc_pool`` holds SFC (a) against the stable-value asset (b).
    Each block the policy runs: liquidate below c_min, rebalance in Warning,
    then restore the stressed ratio above c_min + guard_margin.
    """

    def __init__(
        self,
        vault: VaultState,
        eth_pool: Pool,
        sfc_pool: Pool,
        max_slippage: float = 0.02,
        adversary_push: float = 0.0,
        volatile: str = "ETH",
        stable: str = "USD",
        instrument: str = "SFC",
    ) -> None:
        self.vault = vault
        self.eth_pool = eth_pool
        self.sfc_pool = sfc_pool
        self.max_slippage = max_slippage
        self.adversary_push = adversary_push
        self.volatile = volatile
        self.stable = stable
        self.instrument = instrument
        # Called with the volatile pool right before the vault sells into it.
        self.front_run: Optional[Callable[[Pool], Pool]] = None

    def sell_volatile(self, units: float) -> float:
        """Sell volatile collateral, keeping the average price within the slippage cap."""
        v, price = self.vault, self.vault.prices[self.volatile]
        units = min(units, v.positions.get(self.volatile, 0.0))
        if units <= 1e-12:
            return 0.0
        if self.front_run is not None:
            self.eth_pool = self.front_run(self.eth_pool)
        floor = price * (1 - self.max_slippage)

        def ok(x: float) -> bool:
            return amm.quote_out_b(self.eth_pool, x) / x >= floor

        if not ok(units):
            units = bisect(lambda x: not ok(x), 1e-12, units) * 0.999
            if units <= 1e-12 or not ok(units):
                return 0.0
        got, self.eth_pool = amm.execute_swap_a(self.eth_pool, units)
        v.positions[self.volatile] -= units
        v.positions[self.stable] += got
        return units

    def buyback(self, spend: float) -> float:
        v = self.vault
        spend = min(spend, v.positions[self.stable])
        if spend <= 1e-9:
            return 0.0
        burned, self.sfc_pool = amm.execute_swap(self.sfc_pool, spend)
        v.positions[self.stable] -= spend
        v.liabilities[self.instrument] -= burned
        return burned

    def volatile_capacity(self) -> float:
        """Volatile units sellable in one block within the slippage cap."""
        room = self.max_slippage - self.adversary_push
        return self.eth_pool.reserve_a * room / (1 - room)

    def secure(self) -> None:
        """Restore the stressed ratio above the guard: de-risk, then buy back."""
        v, p = self.vault, self.vault.params
        guard = p.c_min + p.guard_margin
        if v.stressed_ratio() >= guard:
            return
        price, m, q = v.prices[self.volatile], p.stress, v.total_liabilities()
        gain_per_unit = price * (m - self.max_slippage)
        need = (guard * q * p.p_peg - v.stressed_value()) / max(gain_per_unit, 1e-12)
        self.sell_volatile(need * 1.001)
        if v.stressed_ratio() >= guard:
            return

        def after(x: float) -> float:
            if x <= 0:
                return v.stressed_ratio()
            got = amm.quote_out(self.sfc_pool, x)
            if got >= q:
                return INF_RATIO
            return (v.stressed_value() - x) / ((q - got) * p.p_peg)

        # Buying back helps only while the marginal SFC price is below the
        # ratio, so the ratio is unimodal in the amount spent.
        lo, hi = 0.0, v.positions[self.stable] * 0.999
        for _ in range(60):
            m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
            if after(m1) < after(m2):
                lo = m1
            else:
                hi = m2
        best = lo
        if after(best) <= v.stressed_ratio():
            best = 0.0
        elif after(best) >= guard:
            best = bisect(lambda x: after(x) >= guard, 0.0, best)
        self.buyback(best)
        if v.stressed_ratio() < p.c_min:
            v.insolvent = True

    def rebalance_step(self) -> Optional[np.ndarray]:
        v, p = self.vault, self.vault.params
        price, q = v.prices[self.volatile], v.total_liabilities()
        gap = p.c_target * q * p.p_peg - v.stressed_value()
        if gap <= 0 or p.stress <= 0 or v.positions.get(self.volatile, 0.0) <= 0:
            return None
        # Target: the value shift from volatile to stable that closes the
        # stressed gap.  One trade dimension (volatile units sold); its column
        # is the value change per unit, by finite difference through the pool.
        x_needed = gap / (price * p.stress)
        h = max(1e-6, 1e-6 * v.positions[self.volatile])
        proceeds_per_unit = amm.quote_out_b(self.eth_pool, h) / h
        J = np.array([[-price], [proceeds_per_unit]])
        g = np.array([-x_needed * price, x_needed * price])
        return rebalance(v, g, J, execute=lambda d: self.sell_volatile(float(d[0])) if d[0] > 0 else None)

    def manage(self) -> VaultStatus:
        v = self.vault
        status = classify_state(collateral_ratio(v), v.params)
        if status is VaultStatus.LIQUIDATION:
            try:
                _, self.sfc_pool = liquidate_partial(v, self.sfc_pool, self.stable, self.instrument)
            except ValueError:
                pass
        elif status is VaultStatus.WARNING:
            self.rebalance_step()
        self.secure()
        return status


class _SolvencyRun:
    def __init__(self, adversary: str, oracle_error_rate: float, seed: int, cfg: SolvencyConfig) -> None:
        self.adv = adversary
        self.delta = oracle_error_rate
        self.rng = random.Random(f"solvency:{adversary}:{oracle_error_rate}:{seed}")
        self.cfg = cfg
        params = VaultParams(stress=cfg.max_move)
        value = cfg.c0 * cfg.liabilities0
        u = value * cfg.volatile_share0 / cfg.price0
        self.vault = VaultState(
            positions={"ETH": u, "USD": value * (1 - cfg.volatile_share0)},
            prices={"ETH": cfg.price0, "USD": 1.0},
            liabilities={"SFC": cfg.liabilities0},
            params=params,
            stable_assets=frozenset({"USD"}),
        )
        depth_units = cfg.pool_depth * value / (2 * cfg.price0)
        half = cfg.sfc_pool_depth * value / 2
        push = cfg.adversary_push if adversary == "liquidation-trigger" else 0.0
        self.desk = VaultDesk(
            self.vault, Pool(depth_units, depth_units * cfg.price0, 0, "vol"), Pool(half, half, 0, "sfc"),
            cfg.max_slippage, push,
        )
        if adversary == "liquidation-trigger":
            self.desk.front_run = self._sandwich
        self.true_price = cfg.price0
        self.vol = VolatilityEstimate(params.vol_window)
        self.vol.update(cfg.price0)

    def _price_move(self) -> float:
        m = self.cfg.max_move
        if self.adv == "idle":
            return 0.0
        if self.adv == "liquidation-trigger":
            return -m if self.rng.random() < 0.7 else self.rng.uniform(-m, m)
        return self.rng.uniform(-m, m)

    def _oracle(self) -> tuple[float, bool]:
        if self.delta > 0 and self.rng.random() < self.delta:
            # Injected error: the feed over-reports the collateral price.
            return self.true_price * (1 + self.rng.uniform(0.1, 0.5)), True
        return self.true_price, False

    def _mint_requests(self, erroneous: bool) -> list[tuple[float, float, str]]:
        vault_value = self.vault.collateral_value()
        if self.adv == "mint-spammer":
            return [
                (self.rng.uniform(0.01, 0.3) * vault_value, self.rng.uniform(0, 0.05),
                 self.rng.choice(["ETH", "USD"]))
                for _ in range(3)
            ]
        if self.adv == "price-manipulator" and erroneous:
            # Borrow against the over-reported collateral while the feed is wrong.
            return [(self.rng.uniform(0.1, 1.0) * vault_value, 0.05, "USD")]
        return []

    def _sandwich(self, pool: Pool) -> Pool:
        """Dump ahead of the vault's sale, within the adversary's funded push."""
        target = pool.reserve_b / pool.reserve_a * (1 - self.cfg.adversary_push)
        dump = amm.stable_to_price(pool, target)
        return amm.execute_swap_a(pool, dump)[1] if dump > 0 else pool

    def run(self) -> SolvencyResult:
        cfg, v = self.cfg, self.vault
        breaches = flagged = errors = 0
        min_ratio = collateral_ratio(v)
        last_error = -10**9
        # A breach episode (consecutive checks below c_min) is flagged when it
        # starts within ``lookback`` blocks of an injected oracle error, or
        # while the vault has not yet restored its stressed ratio (at true
        # prices) after one.
        episode: Optional[bool] = None
        tainted = False

        def check(t: int) -> None:
            nonlocal breaches, flagged, min_ratio, episode
            c_true = v.ratio_at({"ETH": self.true_price, "USD": 1.0})
            min_ratio = min(min_ratio, c_true)
            if c_true >= v.params.c_min:
                episode = None
                return
            if episode is None:
                episode = tainted or t - last_error <= cfg.lookback
            breaches += 1
            flagged += episode

        for t in range(1, cfg.horizon + 1):
            self.true_price *= 1 + self._price_move()
            self.desk.eth_pool = _recentre(self.desk.eth_pool, self.true_price)
            check(t)
            reported, err = self._oracle()
            if err:
                last_error = t
                errors += 1
                tainted = True
            v.prices["ETH"] = reported
            sigma = self.vol.update(reported)
            for value, dev, asset in self._mint_requests(err):
                # Volatile deposits are capped by what one block can unwind.
                if asset == "ETH" and v.positions["ETH"] + value / reported > self.desk.volatile_capacity():
                    continue
                try:
                    mint_sfc(v, value, dev, sigma, asset=asset, block=t)
                except MintRejected:
                    pass
            if cfg.rebalancing:
                self.desk.manage()
            check(t)
            if tainted and not err:
                v.prices["ETH"] = self.true_price
                tainted = v.stressed_ratio() < v.params.c_min
        final = v.ratio_at({"ETH": self.true_price, "USD": 1.0})
        unflagged = breaches - flagged
        return SolvencyResult(self.adv, 0, unflagged > 0, breaches, flagged, unflagged, min_ratio, final, errors)


def solvency_game(
    adversary: str, oracle_error_rate: float, seed: int, cfg: Optional[SolvencyConfig] = None
) -> SolvencyResult:
    """One seeded run; Violation iff C_t < c_min outside an oracle-error window."""
    if adversary not in SOLVENCY_ADVERSARIES:
        raise ValueError(f"unknown adversary {adversary!r}")
    if not 0 <= oracle_error_rate < 1:
        raise ValueError("oracle error rate must be in [0, 1)")
    run = _SolvencyRun(adversary, oracle_error_rate, seed, cfg or SolvencyConfig())
    res = run.run()
    res.seed = seed
    return res
