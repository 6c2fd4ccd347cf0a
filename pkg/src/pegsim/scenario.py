"""Seeded multi-chain peg simulation.

Each market chain has a constant-product pool of the pegged token (a, "STB")
against USD (b), so the spot price B/A is the token's USD price.  A hub chain
hosts the vault that issues STB against ETH and USD collateral, redeems it at
peg, and runs its own risk policy.  Arbitrage agents trade the pools from
inventory and settle the opposite leg at the hub; the settlement latency tau
is measured by running real swap sessions between each chain and the hub.

Per block, in order: ETH price step, arriving settlements, agents (hedging,
arbitrage, liquidity controller), scheduled shocks, adversary, noise traders,
vault policy, invariant checks, trace rows.
"""

from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from . import amm
from . import adaptor_sig as sig
from .amm import Pool
from .chain_sim import FEE_ASSET, EventLog, build_world
from .config import ScenarioConfig, baseline
from .group import sim_group
from .market_ops import (
    EWMAVolatility,
    LiquidityAllocation,
    arb_decide,
    hedge_weights,
    net_delta,
    pid_update,
    size_for_slippage,
    step_reward,
)
from .metrics import PEG_BAND, ScenarioTrace, TraceRow, summarize
from .swap_engine import Party, Behavior, Outcome, SwapSession, SwapSessionContext, make_session_id
from .vault import MintRejected, VaultDesk, VaultState, collateral_ratio, mint_sfc

HUB = "hub"
TOKEN = "STB"


class InvariantBreach(RuntimeError):
    def __init__(self, message: str, result: "ScenarioResult") -> None:
        super().__init__(message)
        self.result = result


@functools.lru_cache(maxsize=None)
def settlement_latency(chain_interval: int, hub_interval: int, latency: int) -> int:
    """Ticks an honest swap between a market chain and the hub takes to settle."""
    g = sim_group()
    world = build_world(["chain", HUB], {"chain": chain_interval, HUB: hub_interval},
                        default_latency=latency, fees={"lock": 1, "claim": 1})
    world.ledgers["chain"].fund("A", TOKEN, 1)
    world.ledgers[HUB].fund("B", "USD", 1)
    for c in ("chain", HUB):
        world.ledgers[c].fund("A", FEE_ASSET, 10)
        world.ledgers[c].fund("B", FEE_ASSET, 10)
    tag = f"tau:{chain_interval}:{hub_interval}:{latency}".encode()
    kp_a, kp_b = sig.keygen(g, b"A:" + tag), sig.keygen(g, b"B:" + tag)
    sid = make_session_id("chain", TOKEN, 1, HUB, "USD", 1, kp_a.pk, kp_b.pk, tag)
    ctx = SwapSessionContext(sid, "chain", TOKEN, 1, HUB, "USD", 1, "A", "B", kp_a.pk, kp_b.pk)
    session = SwapSession(world, ctx, Party("A", kp_a, Behavior()), Party("B", kp_b, Behavior()),
                          lock_fee=1, claim_fee=1)
    start = world.tick
    outcome = session.run()
    if outcome is not Outcome.BOTH_SETTLED or session.settle_tick is None:
        raise RuntimeError(f"honest latency probe ended {outcome.value}")
    return max(1, session.settle_tick - start)


@dataclass
class Inventory:
    stb: float
    usd: float


@dataclass
class Settlement:
    due: int
    chain: str
    kind: str  # "redeem" returns USD, "mint" returns STB
    units: float  # STB traded on the pool
    price: float  # effective pool price paid or received
    deviation: float
    slippage: float
    sigma: float


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trace: ScenarioTrace
    events: EventLog
    summary: dict = field(default_factory=dict)
    breach: Optional[str] = None


class Scenario:
    def __init__(self, cfg: ScenarioConfig) -> None:
        self.cfg = cfg
        self.rng = random.Random(f"scenario:{cfg.seed}")
        self.params = cfg.agents.params()
        self.peg = cfg.vault.p_peg
        self.chains = [f"chain-{i + 1}" for i in range(cfg.chains.count)]
        po = cfg.pools
        self.pools = {c: amm.make_pool(po.reserve_a, po.reserve_b, po.fee_bps, c) for c in self.chains}
        self.k = {c: float(p.invariant) for c, p in self.pools.items()}
        self.tau = {
            c: settlement_latency(b, cfg.chains.hub_interval, cfg.chains.latency)
            for c, b in zip(self.chains, cfg.chains.block_intervals)
        }

        n = len(self.chains)
        ag = cfg.agents
        self.inv = {c: Inventory(ag.capital / (2 * n * self.peg), ag.capital / (2 * n)) for c in self.chains}
        self.alloc = LiquidityAllocation([ag.capital / n] * n, ag.capital)
        self.pending: list[Settlement] = []
        self.adv_stb = self.adv_usd = cfg.adversary.capital

        va = cfg.vault
        supply = n * po.reserve_a + po.reserve_a + ag.capital / (2 * self.peg) + cfg.adversary.capital
        value = va.collateral_ratio * supply * self.peg
        self.eth = va.eth_price
        self.vault = VaultState(
            positions={"ETH": value * va.volatile_share / self.eth, "USD": value * (1 - va.volatile_share)},
            prices={"ETH": self.eth, "USD": 1.0},
            liabilities={TOKEN: supply},
            params=va.params(),
            stable_assets=frozenset({"USD"}),
        )
        depth_units = va.eth_pool_depth * value / (2 * self.eth)
        self.desk = VaultDesk(
            self.vault,
            Pool(depth_units, depth_units * self.eth, 0, "eth"),
            amm.make_pool(po.reserve_a, po.reserve_a * self.peg, 0, HUB),
            va.max_slippage,
            instrument=TOKEN,
        )
        self.vol = {c: EWMAVolatility(ag.ewma_decay) for c in self.chains}
        self.trace = ScenarioTrace()
        self.events = EventLog()
        self.block = 0
        self.withdrawn: dict[str, float] = {}
        self.stats = {
            "arb_trades": 0, "arb_checks": 0, "settlements": 0, "mint_rejections": 0,
            "max_hedge_exposure": 0.0, "min_c_ratio": collateral_ratio(self.vault),
            "front_run_trades": 0,
        }

    # -- helpers --

    def price(self, c: str) -> float:
        p = self.pools[c]
        return float(p.reserve_b) / float(p.reserve_a)

    def deviation(self, c: str) -> float:
        return (self.price(c) - self.peg) / self.peg

    def _trade(self, c: str, side: str, amount: float, actor: str) -> float:
        out, self.pools[c], rec = amm.traded(self.block, self.pools[c], side, amount, actor)
        self.trace.trades.append(rec)
        self.events.append(block=self.block, event="trade", chain=c, side=side, amount=amount, out=out, actor=actor)
        return out

    def _fail(self, msg: str) -> None:
        self.events.append(block=self.block, event="invariant_breach", detail=msg)
        result = self._result(breach=msg)
        raise InvariantBreach(msg, result)

    # -- per-block stages --

    def _eth_step(self) -> None:
        self.eth *= math.exp(self.rng.gauss(0.0, self.cfg.vault.eth_vol))
        k = float(self.desk.eth_pool.invariant)
        a = math.sqrt(k / self.eth)
        self.desk.eth_pool = Pool(a, k / a, 0, "eth")
        self.vault.prices["ETH"] = self.eth
        # Redemptions happen at peg on the hub, which holds its pool there.
        hub = self.desk.sfc_pool
        kh = float(hub.invariant)
        ah = math.sqrt(kh / self.peg)
        self.desk.sfc_pool = Pool(ah, kh / ah, 0, HUB)

    def _settle(self) -> None:
        due = [s for s in self.pending if s.due <= self.block]
        self.pending = [s for s in self.pending if s.due > self.block]
        for s in due:
            inv = self.inv[s.chain]
            tau = self.tau[s.chain]
            if s.kind == "redeem":
                owed = s.units * self.peg
                v = self.vault
                if v.positions["USD"] < owed:
                    self.desk.sell_volatile((owed - v.positions["USD"]) / self.eth * 1.05)
                paid = min(owed, v.positions["USD"])
                v.positions["USD"] -= paid
                v.liabilities[TOKEN] -= paid / self.peg
                inv.usd += paid
                inv.stb += s.units - paid / self.peg
                realized = (paid / s.units - s.price) / self.peg
            else:
                deposit = s.units * self.peg
                try:
                    got = mint_sfc(self.vault, deposit, s.deviation, s.sigma, "USD", TOKEN, self.block)
                except MintRejected as exc:
                    self.stats["mint_rejections"] += 1
                    self.events.append(block=self.block, event="mint_rejected", chain=s.chain, reason=str(exc))
                    continue
                inv.usd -= deposit
                inv.stb += got
                realized = (s.price - deposit / got) / self.peg
            self.stats["settlements"] += 1
            gas = self.cfg.agents.gas
            rate = realized / tau - gas
            bound = (abs(s.deviation) - s.slippage) / tau - gas
            fee_unit = self.cfg.pools.fee_bps / 10_000
            self.stats["arb_checks"] += 1
            self.events.append(block=self.block, event="settle", chain=s.chain, kind=s.kind,
                               units=s.units, realized_rate=rate, bound=bound)
            if rate < bound - fee_unit - 1e-12:
                self._fail(f"arbitrage on {s.chain} realized {rate:.3e} below bound {bound:.3e}")

    def _shock(self) -> None:
        for s in self.cfg.shocks:
            if s.block != self.block:
                continue
            self.trace.shocks.append(self.block)
            for c in self.chains:
                target = self.price(c) * s.multiplier
                if s.multiplier < 1:
                    x = amm.stable_to_price(self.pools[c], target)
                    if x > 0:
                        self._trade(c, "sell_a", x, "shock")
                else:
                    x = amm.collateral_to_price(self.pools[c], target)
                    if x > 0:
                        self._trade(c, "buy_a", x, "shock")
            self.events.append(block=self.block, event="shock", multiplier=s.multiplier)

    def _noise(self) -> None:
        scale = self.cfg.pools.noise
        if scale <= 0:
            return
        for c in self.chains:
            u = abs(self.rng.gauss(0.0, scale))
            sell = self.rng.random() < 0.5
            pool = self.pools[c]
            amount = u * float(pool.reserve_a if sell else pool.reserve_b)
            if amount > 0:
                self._trade(c, "sell_a" if sell else "buy_a", amount, "noise")

    def _adversary(self) -> None:
        ad = self.cfg.adversary
        n = len(self.chains)
        if ad.kind == "wash-trader":
            # Round trips within the block: volume and trade count inflate,
            # and the audit sees every leg, but no position is carried.
            for c in self.chains:
                x = min(self.adv_stb, ad.capital / n)
                if x > 0:
                    usd = self._trade(c, "sell_a", x, "adversary")
                    back = self._trade(c, "buy_a", usd, "adversary")
                    self.adv_stb += back - x
        elif ad.kind == "liquidity-withdrawer":
            first = min((s.block for s in self.cfg.shocks), default=1)
            if self.block == first and not self.withdrawn:
                for c in self.chains:
                    pool = self.pools[c]
                    frac = min(0.9, ad.capital / (n * float(pool.reserve_a)))
                    self.withdrawn[c] = frac
                    self._rescale(c, 1 - frac)
                self.events.append(block=self.block, event="liquidity_withdrawn", fractions=dict(self.withdrawn))
            elif self.withdrawn and self.block == first + self.params.grace_window:
                for c, frac in self.withdrawn.items():
                    self._rescale(c, 1 / (1 - frac))
                self.events.append(block=self.block, event="liquidity_restored")
                self.withdrawn = {}
        elif ad.kind == "overwhelming":
            for c in self.chains:
                x = min(self.adv_stb, amm.stable_to_price(self.pools[c], self.peg * 0.9))
                if x > 0:
                    self.adv_usd += self._trade(c, "sell_a", x, "adversary")
                    self.adv_stb -= x

    def _rescale(self, c: str, f: float) -> None:
        p = self.pools[c]
        self.pools[c] = Pool(p.reserve_a * f, p.reserve_b * f, p.fee_bps, c)
        self.k[c] = float(self.pools[c].invariant)

    def _front_run(self, c: str, side: str, size: float, min_out: float) -> Optional[float]:
        """Trade ahead of the agent as far as its minimum-output guard allows."""
        pool = self.pools[c]
        budget = self.adv_usd if side == "buy_a" else self.adv_stb
        quote = amm.quote_out if side == "buy_a" else amm.quote_out_b

        def after(x: float) -> float:
            _, shifted = (amm.execute_swap if side == "buy_a" else amm.execute_swap_a)(pool, x)
            return quote(shifted, size)

        if budget <= 1e-9:
            return None
        lo, hi = 0.0, min(budget, 0.5 * float(pool.reserve_b if side == "buy_a" else pool.reserve_a))
        if after(hi) >= min_out:
            lo = hi
        else:
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                if after(mid) >= min_out:
                    lo = mid
                else:
                    hi = mid
        if lo <= 1e-9:
            return None
        got = self._trade(c, side, lo, "adversary")
        if side == "buy_a":
            self.adv_usd -= lo
            self.adv_stb += got
        else:
            self.adv_stb -= lo
            self.adv_usd += got
        self.stats["front_run_trades"] += 1
        return got

    def _back_run(self, c: str, side: str, got: float) -> None:
        back = "sell_a" if side == "buy_a" else "buy_a"
        out = self._trade(c, back, got, "adversary")
        if back == "sell_a":
            self.adv_stb -= got
            self.adv_usd += out
        else:
            self.adv_usd -= got
            self.adv_stb += out

    def _arb_plan(self, c: str, pool: Pool, level: float, inv: Inventory) -> tuple[str, float, float]:
        """(side, size, slippage) for the half-deviation sizing rule."""
        P = float(pool.reserve_b) / float(pool.reserve_a)
        dev = (P - self.peg) / self.peg
        if dev < 0:
            cap = min(inv.usd, level, amm.collateral_to_price(pool, self.peg))

            def slip(x: float) -> float:
                return (x / float(amm.quote_out(pool, x)) - P) / self.peg

            side = "buy_a"
        elif dev > 0:
            cap = min(inv.stb, level / P, amm.stable_to_price(pool, self.peg))

            def slip(x: float) -> float:
                return (P - float(amm.quote_out_b(pool, x)) / x) / self.peg

            side = "sell_a"
        else:
            return "", 0.0, 0.0
        if cap <= 1e-9:
            return side, 0.0, 0.0
        size = size_for_slippage(slip, dev, cap)
        return side, size, (slip(size) if size > 0 else 0.0)

    def _arbitrage(self) -> dict[str, tuple[float, float]]:
        """Returns per chain (arb volume in USD, profit at peg)."""
        out = {}
        gas = self.cfg.agents.gas
        for i, c in enumerate(self.chains):
            tau = self.tau[c]
            inv = self.inv[c]
            dev = self.deviation(c)
            side, size, eta = self._arb_plan(c, self.pools[c], float(self.alloc.levels[i]), inv)
            decision = arb_decide(dev, eta, tau, gas, size)
            if not decision or size <= 0:
                out[c] = (0.0, 0.0)
                continue
            quote = amm.quote_out if side == "buy_a" else amm.quote_out_b
            planned = float(quote(self.pools[c], size))
            adv = None
            if self.cfg.adversary.kind == "front-runner":
                adv = self._front_run(c, side, size, planned * (1 - abs(dev) / 4))
            P = self.price(c)
            got = self._trade(c, side, size, "agent")
            if adv is not None:
                self._back_run(c, side, adv)
            if side == "buy_a":
                inv.usd -= size
                inv.stb += got
                units, p_e, notional = got, size / got, size
                kind, slippage = "redeem", (size / got - P) / self.peg
            else:
                inv.stb -= size
                inv.usd += got
                units, p_e, notional = size, got / size, got
                kind, slippage = "mint", (P - got / size) / self.peg
            d_exec = (P - self.peg) / self.peg
            self.pending.append(Settlement(
                self.block + tau, c, kind, units, p_e, d_exec, slippage, self.vol[c].sigma,
            ))
            self.stats["arb_trades"] += 1
            profit = units * abs(self.peg - p_e) - gas * tau * units * self.peg
            out[c] = (notional, profit)
        return out

    def _lookahead_profit(self, c: str, level: float, rep: int) -> float:
        rng = random.Random(f"pid:{self.cfg.seed}:{self.block}:{c}:{rep}")
        pool = self.pools[c]
        u = abs(rng.gauss(0.0, max(self.cfg.pools.noise, 1e-4)))
        if rng.random() < 0.5:
            pool = amm.execute_swap_a(pool, u * float(pool.reserve_a))[1]
        else:
            pool = amm.execute_swap(pool, u * float(pool.reserve_b))[1]
        flush = Inventory(math.inf, math.inf)
        side, size, _ = self._arb_plan(c, pool, max(level, 0.0), flush)
        if size <= 0:
            return 0.0
        if side == "buy_a":
            got = float(amm.quote_out(pool, size))
            return got * self.peg - size
        got = float(amm.quote_out_b(pool, size))
        return got - size * self.peg

    def _pid(self) -> None:
        # Central differences over paired-seed replications: the same noise
        # draws are used at L + h and L - h.
        h = self.cfg.agents.fd_step
        reps = self.cfg.agents.replications
        pg, rg = [], []
        for i, c in enumerate(self.chains):
            lvl = float(self.alloc.levels[i])
            up = [self._lookahead_profit(c, lvl + h, r) for r in range(reps)]
            dn = [self._lookahead_profit(c, lvl - h, r) for r in range(reps)]
            pg.append((sum(up) - sum(dn)) / (reps * 2 * h))
            rg.append((_var(up) - _var(dn)) / (2 * h))
        worst = max(abs(self.deviation(c)) for c in self.chains)
        self.alloc = pid_update(self.alloc, pg, rg, worst, self.params)

    def _hedge(self) -> None:
        book = self.cfg.agents.hedge_inventory * self.eth
        if book <= 0:
            return
        # Per unit of notional: ETH spot, short ETH future, USD cash.
        deltas = [1.0, -1.0, 0.0]
        w = hedge_weights(deltas, self.params.lambda1)
        notional = book / w[0]
        positions = [notional * wi for wi in w]
        exposure = net_delta(positions, deltas)
        ratio = abs(exposure) / notional
        self.stats["max_hedge_exposure"] = max(self.stats["max_hedge_exposure"], ratio)
        if ratio > 1e-3:
            self._fail(f"hedge exposure {exposure:.4g} above 1e-3 of value {notional:.4g}")

    def _check(self) -> float:
        for c in self.chains:
            k = float(self.pools[c].invariant)
            if k < self.k[c] * (1 - 1e-12):
                self._fail(f"pool invariant on {c} shrank from {self.k[c]} to {k}")
            self.k[c] = k
        c_ratio = collateral_ratio(self.vault)
        self.stats["min_c_ratio"] = min(self.stats["min_c_ratio"], c_ratio)
        if c_ratio < self.vault.params.c_min or self.vault.insolvent:
            self._fail(f"collateral ratio {c_ratio:.4f} below c_min")
        return c_ratio

    # -- driver --

    def step(self) -> None:
        self.block += 1
        self._eth_step()
        self._settle()
        # Agents act on the state the previous block left behind; shocks,
        # the adversary and noise then land before the block is recorded.
        arb: dict[str, tuple[float, float]] = {}
        if self.cfg.agents.enabled:
            self._hedge()
            arb = self._arbitrage()
            self._pid()
        self._shock()
        self._adversary()
        self._noise()
        for c in self.chains:
            self.vol[c].update(self.price(c))
        self.desk.manage()
        c_ratio = self._check()
        for c in self.chains:
            vol, profit = arb.get(c, (0.0, 0.0))
            dev = self.deviation(c)
            reward = step_reward(profit, dev, self.params) if self.cfg.agents.enabled else 0.0
            p = self.pools[c]
            self.trace.rows.append(TraceRow(
                self.block, c, self.price(c), dev, c_ratio, float(p.reserve_a), float(p.reserve_b), vol, reward,
            ))

    def run(self) -> ScenarioResult:
        self.events.append(block=0, event="start", seed=self.cfg.seed, tau=dict(self.tau))
        for _ in range(self.cfg.horizon):
            self.step()
        return self._result()

    def _result(self, breach: Optional[str] = None) -> ScenarioResult:
        res = ScenarioResult(self.cfg, self.trace, self.events, breach=breach)
        if self.trace.rows:
            res.summary = self.summary(breach)
        return res

    def summary(self, breach: Optional[str] = None) -> dict:
        shock = self.trace.shocks[0] if self.trace.shocks else None
        out = summarize(self.trace, shock, self.params.grace_window)
        excursion = longest_excursion([abs(d) for d in self.trace.worst_deviation()])
        out.update({
            "seed": self.cfg.seed,
            "agents_enabled": self.cfg.agents.enabled,
            "adversary": {"kind": self.cfg.adversary.kind, "capital": self.cfg.adversary.capital},
            "tau": dict(self.tau),
            "longest_excursion": excursion,
            "grace_window": self.params.grace_window,
            "vault": {
                "final_c_ratio": collateral_ratio(self.vault),
                "min_c_ratio": self.stats["min_c_ratio"],
                "liabilities": self.vault.total_liabilities(),
            },
            "agents": {
                "levels": [float(x) for x in self.alloc.levels],
                "frozen_blocks": self.alloc.frozen_blocks,
                "arb_trades": self.stats["arb_trades"],
                "settlements": self.stats["settlements"],
                "arb_checks": self.stats["arb_checks"],
                "mint_rejections": self.stats["mint_rejections"],
                "max_hedge_exposure": self.stats["max_hedge_exposure"],
                "front_run_trades": self.stats["front_run_trades"],
            },
            "invariant_breach": breach,
        })
        return out


def _var(xs: list[float]) -> float:
    m = sum(xs) / len(xs)
    return sum((x - m) ** 2 for x in xs) / (len(xs) - 1)


def longest_excursion(abs_dev, band: float = PEG_BAND) -> int:
    """Longest run of consecutive blocks with |dev| above the band."""
    best = run = 0
    for d in abs_dev:
        run = run + 1 if d > band else 0
        best = max(best, run)
    return best


def run_scenario(cfg: Optional[ScenarioConfig] = None, **overrides) -> ScenarioResult:
    """Run one scenario; dotted-path overrides as in ``ScenarioConfig.replace``."""
    cfg = cfg or baseline()
    if overrides:
        cfg = cfg.replace(**overrides)
    return Scenario(cfg).run()


# -- manipulation game -------------------------------------------------------------------

MANIPULATION_ADVERSARIES = ("none", "front-runner", "wash-trader", "liquidity-withdrawer", "overwhelming")


@dataclass
class ManipulationResult:
    adversary: str
    seed: int
    violation: bool
    precondition_met: bool
    longest_excursion: int
    max_abs_deviation: float
    breach: Optional[str] = None


def manipulation_game(
    adversary: str,
    seed: int,
    horizon: int = 200,
    capital: Optional[float] = None,
    agents_enabled: bool = True,
    cfg: Optional[ScenarioConfig] = None,
) -> ManipulationResult:
    """Violation iff |dev| stays above 0.5% for more than the grace window.

    The capital-adequacy precondition holds when the adversary's capital does
    not exceed the agents'; violations without it are reported, not hidden.
    """
    if adversary not in MANIPULATION_ADVERSARIES:
        raise ValueError(f"unknown adversary {adversary!r}")
    base = cfg or baseline()
    agent_capital = base.agents.capital
    if capital is None:
        capital = {"none": 0.0, "overwhelming": 1000.0 * agent_capital}.get(adversary, 0.5 * agent_capital)
    shocks = [{"block": s.block, "multiplier": s.multiplier} for s in base.shocks if s.block <= horizon]
    run_cfg = base.replace(**{
        "seed": seed, "horizon": horizon, "shocks": shocks,
        "adversary.kind": adversary, "adversary.capital": float(capital),
        "agents.enabled": agents_enabled,
    })
    try:
        res = Scenario(run_cfg).run()
    except InvariantBreach as exc:
        res = exc.result
    dev = [abs(d) for d in res.trace.worst_deviation()]
    excursion = longest_excursion(dev)
    precondition = agents_enabled and capital <= agent_capital
    return ManipulationResult(
        adversary, seed, excursion > run_cfg.agents.grace_window, precondition,
        excursion, float(max(dev)) if dev else 0.0, res.breach,
    )
