"""Stabilization-agent decision rules.

Reward per step::

    R_t = a_arb Pi_t + a_stab log(1 / max(|dev_t|, clamp))

Policies are scored by  mean - lambda var  of discounted reward sums over
seeded replications.  Liquidity per pool follows a PID-style update::

    L_i += kappa dPi/dL_i - mu dVar/dL_i + nu * integral(dev)

Arbitrage executes when (dev - slip)/tau - gas > 0.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentParams:
    gamma_discount: float = 0.95
    lambda_risk: float = 2.5
    alpha_arb: float = 1.0
    alpha_stab: float = 0.01
    kappa: float = 0.3
    mu: float = 1.1
    nu: float = 0.05
    lambda1: float = 0.7
    dev_clamp: float = 1e-6
    ewma_decay: float = 0.94
    grace_window: int = 50

    def __post_init__(self) -> None:
        if not 0 < self.gamma_discount < 1:
            raise ValueError("gamma_discount must be in (0, 1)")
        if not 0 < self.ewma_decay < 1:
            raise ValueError("ewma_decay must be in (0, 1)")
        if self.dev_clamp <= 0 or self.grace_window < 1:
            raise ValueError("dev_clamp must be positive and grace_window >= 1")
        if min(self.lambda_risk, self.kappa, self.mu, self.nu, self.lambda1) < 0:
            raise ValueError("risk weight and gains must be non-negative")


# -- rewards --------------------------------------------------------------------


def step_reward(profit: float, deviation: float, params: AgentParams = AgentParams()) -> float:
    d = max(abs(deviation), params.dev_clamp)
    return params.alpha_arb * profit + params.alpha_stab * math.log(1.0 / d)


def discounted_sum(rewards: Sequence[float], gamma: float) -> float:
    total, w = 0.0, 1.0
    for r in rewards:
        total += w * r
        w *= gamma
    return total


def policy_score(replications: Sequence[Sequence[float]], params: AgentParams = AgentParams()) -> float:
    """Mean minus lambda_risk times sample variance (n-1) of discounted sums."""
    if not replications or any(len(r) == 0 for r in replications):
        raise ValueError("need non-empty reward traces")
    sums = np.array([discounted_sum(r, params.gamma_discount) for r in replications])
    if sums.size == 1:
        warnings.warn("single replication: variance taken as 0", RuntimeWarning, stacklevel=2)
        var = 0.0
    else:
        var = float(np.var(sums, ddof=1))
    return float(sums.mean()) - params.lambda_risk * var


# -- hedging ----------------------------------------------------------------------


def hedge_objective(w, deltas, lambda1: float = 0.7) -> float:
    w = np.asarray(w, float)
    e = float(w @ np.asarray(deltas, float))
    return e * e + lambda1 * float(np.abs(w).sum())


def hedge_weights(deltas: Sequence[float], lambda1: float = 0.7) -> np.ndarray:
    """Simplex weights minimizing (w . delta)^2 + lambda1 |w|_1.

    On the simplex |w|_1 = 1, so only the exposure term matters.  If every
    delta has the same sign the optimum puts all weight on the smallest
    |delta| (split evenly on ties).  Otherwise zero exposure is reachable and
    we return the zero-exposure point closest to uniform weights.
    """
    d = np.asarray(deltas, float)
    n = d.size
    if n == 0:
        raise ValueError("need at least one instrument")
    if n == 1:
        return np.ones(1)
    if d.min() >= 0 or d.max() <= 0:
        m = np.abs(d)
        best = np.isclose(m, m.min(), rtol=0, atol=1e-15)
        return best / best.sum()
    # Project uniform weights onto {sum w = 1, w . d = 0, w >= 0} by active set.
    free = np.ones(n, bool)
    w = np.zeros(n)
    while True:
        idx = np.nonzero(free)[0]
        u = np.full(idx.size, 1.0 / idx.size)
        dc = d[idx] - d[idx].mean()
        denom = float(dc @ dc)
        if denom == 0:
            cand = u
        else:
            cand = u - (float(u @ d[idx]) / denom) * dc
        if cand.min() >= -1e-15:
            w[:] = 0
            w[idx] = np.maximum(cand, 0)
            return w / w.sum()
        free[idx[int(np.argmin(cand))]] = False
        if d[free].min() > 0 or d[free].max() < 0:
            break
    # Fallback: a two-instrument zero-exposure mix.
    pos = np.where(d > 0, d, np.inf)
    neg = np.where(d < 0, d, -np.inf)
    i, j = int(np.argmin(pos)), int(np.argmax(neg))
    w = np.zeros(n)
    w[i] = -d[j] / (d[i] - d[j])
    w[j] = d[i] / (d[i] - d[j])
    return w


def net_delta(positions: Sequence[float], deltas: Sequence[float]) -> float:
    """Total price sensitivity: sum of units times per-unit delta."""
    if len(positions) != len(deltas):
        raise ValueError("positions and deltas differ in length")
    return float(sum(q * d for q, d in zip(positions, deltas)))


@dataclass
class HedgePortfolio:
    weights: np.ndarray
    deltas: np.ndarray

    def __post_init__(self) -> None:
        if abs(self.weights.sum() - 1) > 1e-9 or self.weights.min() < 0:
            raise ValueError("weights must lie on the simplex")

    @property
    def exposure_per_unit(self) -> float:
        return float(self.weights @ self.deltas)


# -- liquidity allocation -----------------------------------------------------------


@dataclass
class LiquidityAllocation:
    levels: np.ndarray
    capital: float
    integral: float = 0.0
    frozen_blocks: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.levels = np.asarray(self.levels, float)
        if np.any(self.levels < 0) or self.levels.sum() > self.capital + 1e-9:
            raise ValueError("allocation must be non-negative and within capital")


def pid_update(
    alloc: LiquidityAllocation,
    profit_grad: Sequence[float],
    risk_grad: Sequence[float],
    deviation: float,
    params: AgentParams = AgentParams(),
    dt: float = 1.0,
) -> LiquidityAllocation:
    """One controller step; returns a new allocation."""
    pg = np.asarray(profit_grad, float)
    rg = np.asarray(risk_grad, float)
    if not (np.all(np.isfinite(pg)) and np.all(np.isfinite(rg)) and math.isfinite(deviation)):
        msg = "non-finite gradient or deviation; allocation frozen"
        log.warning(msg)
        return replace(alloc, frozen_blocks=alloc.frozen_blocks + 1, diagnostics=alloc.diagnostics + [msg])
    integral = alloc.integral + deviation * dt
    new = alloc.levels + params.kappa * pg - params.mu * rg + params.nu * integral
    new = np.clip(new, 0.0, alloc.capital)
    total = new.sum()
    if total > alloc.capital:
        new *= alloc.capital / total
    return replace(alloc, levels=new, integral=integral)


# -- arbitrage ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArbDecision:
    execute: bool
    size: float = 0.0
    margin: float = 0.0  # (dev - slip)/tau - gas

    def __bool__(self) -> bool:
        return self.execute


def arb_margin(deviation: float, slippage: float, tau: float, gas: float) -> float:
    if tau < 1:
        raise ValueError("tau must be at least one tick")
    return (abs(deviation) - slippage) / tau - gas


def size_for_slippage(slippage_of: Callable[[float], float], deviation: float, max_size: float, iters: int = 50) -> float:
    """Largest size up to ``max_size`` with slippage <= |deviation|/2, by bisection.

    ``slippage_of`` must be non-decreasing in size.
    """
    limit = abs(deviation) / 2
    if max_size <= 0:
        return 0.0
    if slippage_of(max_size) <= limit:
        return max_size
    lo, hi = 0.0, max_size
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if slippage_of(mid) <= limit:
            lo = mid
        else:
            hi = mid
    return lo


def arb_decide(
    deviation: float,
    slippage: float,
    tau: float,
    gas: float,
    size: float = 0.0,
) -> ArbDecision:
    m = arb_margin(deviation, slippage, tau, gas)
    if deviation == 0 or m <= 0:
        return ArbDecision(False, 0.0, m)
    return ArbDecision(True, size, m)


# -- volatility -------------------------------------------------------------------------


class EWMAVolatility:
    """Exponentially weighted volatility of log returns."""

    def __init__(self, decay: float = 0.94, initial: float = 0.0) -> None:
        if not 0 < decay < 1:
            raise ValueError("decay must be in (0, 1)")
        self.decay = decay
        self.var = initial * initial
        self._last: Optional[float] = None

    def update(self, price: float) -> float:
        if self._last is not None and price > 0 and self._last > 0:
            r = math.log(price / self._last)
            self.var = self.decay * self.var + (1 - self.decay) * r * r
        self._last = price
        return self.sigma

    @property
    def sigma(self) -> float:
        return math.sqrt(self.var)


def manipulation_game(adversary: str, seed: int, horizon: int = 200, **overrides):
    """Run one seeded manipulation game; see ``scenario.manipulation_game``."""
    from .scenario import manipulation_game as run

    return run(adversary, seed, horizon, **overrides)
