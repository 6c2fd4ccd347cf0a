"""Scenario configuration: a fixed YAML schema, strict about unknown keys.

Every validation error names the source and line of the offending key, e.g.
``baseline.yaml:14: vault.c_min = 0.9 is below the 1.2 floor``.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from .market_ops import AgentParams
from .vault import VaultParams

class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 reads 1e6 or 1.0e6 (no exponent sign) as strings; accept them as floats.
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^[-+]?(?:[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?|\.[0-9_]+(?:[eE][-+]?[0-9]+)?
    |[0-9][0-9_]*[eE][-+]?[0-9]+|\.(?:inf|Inf|INF)|[-+]\.(?:inf|Inf|INF)|\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."),
)

ADVERSARIES = ("none", "front-runner", "wash-trader", "liquidity-withdrawer", "overwhelming")


class ConfigError(ValueError):
    pass


@dataclass
class ChainsConfig:
    count: int = 3
    block_intervals: list = field(default_factory=lambda: [1, 2, 3])
    hub_interval: int = 1
    latency: int = 1


@dataclass
class PoolsConfig:
    reserve_a: float = 1000.0
    reserve_b: float = 1000.0
    fee_bps: int = 0
    noise: float = 0.0005  # std of noise trade size, as a fraction of the input reserve


@dataclass
class VaultConfig:
    c_min: float = 1.2
    c_warn: float = 1.3
    c_target: float = 1.25
    alpha: float = 0.5
    gamma: float = 2.0
    beta: float = 1.0
    p_peg: float = 1.0
    stress: float = 0.03
    collateral_ratio: float = 1.5
    volatile_share: float = 0.5
    eth_price: float = 2000.0
    eth_vol: float = 0.01
    eth_pool_depth: float = 20.0  # volatile pool value over vault value
    max_slippage: float = 0.02

    def params(self) -> VaultParams:
        return VaultParams(
            c_min=self.c_min, c_warn=self.c_warn, c_target=self.c_target, alpha=self.alpha,
            gamma=self.gamma, beta=self.beta, p_peg=self.p_peg, stress=self.stress,
        )


@dataclass
class AgentsConfig:
    enabled: bool = True
    capital: float = 150.0  # total, split evenly over chains; half stable, half USD
    gas: float = 2.5e-5  # per unit notional per tick of settlement latency
    hedge_inventory: float = 5.0  # ETH held by the market maker
    fd_step: float = 5.0
    replications: int = 4
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

    def params(self) -> AgentParams:
        names = {f.name for f in dataclasses.fields(AgentParams)}
        return AgentParams(**{k: v for k, v in dataclasses.asdict(self).items() if k in names})


@dataclass
class AdversaryConfig:
    kind: str = "none"
    capital: float = 0.0  # stable units the adversary can deploy


@dataclass
class ShockConfig:
    block: int = 100
    multiplier: float = 0.95


@dataclass
class ScenarioConfig:
    seed: int = 7
    horizon: int = 300
    chains: ChainsConfig = field(default_factory=ChainsConfig)
    pools: PoolsConfig = field(default_factory=PoolsConfig)
    vault: VaultConfig = field(default_factory=VaultConfig)
    agents: AgentsConfig = field(default_factory=AgentsConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    shocks: list = field(default_factory=lambda: [ShockConfig()])

    def replace(self, **changes: Any) -> "ScenarioConfig":
        """Copy with dotted-path overrides, e.g. ``replace(**{"agents.enabled": False})``."""
        data = to_dict(self)
        for path, value in changes.items():
            node = data
            *head, last = path.split(".")
            for part in head:
                node = node[part]
            if last not in node:
                raise ConfigError(f"unknown key {path}")
            node[last] = value
        return from_dict(data)


SECTIONS = {
    "chains": ChainsConfig,
    "pools": PoolsConfig,
    "vault": VaultConfig,
    "agents": AgentsConfig,
    "adversary": AdversaryConfig,
}


def to_dict(cfg: ScenarioConfig) -> dict:
    return dataclasses.asdict(cfg)


# -- validation ----------------------------------------------------------------------


def _lines(node: yaml.Node, prefix: str = "", out: Optional[dict] = None) -> dict[str, int]:
    """Map dotted key paths to 1-based source lines."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}{k.value}"
            out[path] = k.start_mark.line + 1
            _lines(v, path + ".", out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            path = f"{prefix}{i}"
            out[path] = v.start_mark.line + 1
            _lines(v, path + ".", out)
    return out


class _Reporter:
    def __init__(self, source: str, lines: dict[str, int]) -> None:
        self.source = source
        self.lines = lines

    def fail(self, path: str, msg: str) -> None:
        line = self.lines.get(path)
        while line is None and "." in path:
            path = path.rsplit(".", 1)[0]
            line = self.lines.get(path)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: {msg}")


def _coerce(value: Any, default: Any, path: str, rep: _Reporter) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            rep.fail(path, f"{path} must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            rep.fail(path, f"{path} must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            rep.fail(path, f"{path} must be a number")
        if not math.isfinite(value):
            rep.fail(path, f"{path} must be finite")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            rep.fail(path, f"{path} must be a string")
        return value
    return value


def _section(cls, data: Any, path: str, rep: _Reporter):
    if not isinstance(data, dict):
        rep.fail(path, f"{path} must be a mapping")
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        sub = f"{path}.{key}"
        if key not in known:
            rep.fail(sub, f"unknown key {sub}")
        kwargs[key] = _coerce(value, getattr(defaults, key), sub, rep)
    return cls(**kwargs)


def _check_ranges(cfg: ScenarioConfig, rep: _Reporter) -> None:
    ch, po, va, ag, ad = cfg.chains, cfg.pools, cfg.vault, cfg.agents, cfg.adversary
    if cfg.horizon < 1:
        rep.fail("horizon", "horizon must be at least 1 block")
    if not 0 <= cfg.seed < 2**64:
        rep.fail("seed", "seed must be a u64")
    if ch.count < 1:
        rep.fail("chains.count", "chains.count must be at least 1")
    if len(ch.block_intervals) != ch.count or any(
        isinstance(b, bool) or not isinstance(b, int) or b < 1 for b in ch.block_intervals
    ):
        rep.fail("chains.block_intervals", "chains.block_intervals needs one positive integer per chain")
    if ch.hub_interval < 1 or ch.latency < 0:
        rep.fail("chains", "hub_interval must be >= 1 and latency >= 0")
    if po.reserve_a <= 0 or po.reserve_b <= 0:
        rep.fail("pools", "pool reserves must be positive")
    if not 0 <= po.fee_bps < 10_000:
        rep.fail("pools.fee_bps", "pools.fee_bps must be in [0, 10000)")
    if not 0 <= po.noise < 0.1:
        rep.fail("pools.noise", "pools.noise must be in [0, 0.1)")
    if va.c_min < 1.2:
        rep.fail("vault.c_min", f"vault.c_min = {va.c_min} is below the 1.2 floor")
    try:
        va.params()
    except ValueError as exc:
        rep.fail("vault", f"vault: {exc}")
    if va.collateral_ratio < va.c_warn:
        rep.fail("vault.collateral_ratio", "vault.collateral_ratio must start at or above c_warn")
    if not 0 <= va.volatile_share <= 1 or va.eth_price <= 0 or not 0 <= va.eth_vol < 0.2:
        rep.fail("vault", "vault: volatile_share in [0, 1], eth_price > 0, eth_vol in [0, 0.2)")
    if va.eth_pool_depth <= 0 or not 0 < va.max_slippage < 0.5:
        rep.fail("vault", "vault: eth_pool_depth > 0 and max_slippage in (0, 0.5)")
    try:
        ag.params()
    except ValueError as exc:
        rep.fail("agents", f"agents: {exc}")
    if ag.capital < 0 or ag.gas < 0 or ag.hedge_inventory < 0 or ag.fd_step <= 0 or ag.replications < 2:
        rep.fail("agents", "agents: capital, gas, hedge_inventory >= 0; fd_step > 0; replications >= 2")
    if ad.kind not in ADVERSARIES:
        rep.fail("adversary.kind", f"adversary.kind must be one of {', '.join(ADVERSARIES)}")
    if ad.capital < 0:
        rep.fail("adversary.capital", "adversary.capital must be non-negative")
    for i, s in enumerate(cfg.shocks):
        if not 1 <= s.block <= cfg.horizon or not 0 < s.multiplier < 2:
            rep.fail(f"shocks.{i}", f"shocks[{i}]: block in [1, horizon], multiplier in (0, 2)")


def from_dict(data: Any, source: str = "<config>", lines: Optional[dict] = None) -> ScenarioConfig:
    rep = _Reporter(source, lines or {})
    if data is None:
        data = {}
    if not isinstance(data, dict):
        rep.fail("", "top level must be a mapping")
    kwargs: dict[str, Any] = {}
    defaults = ScenarioConfig()
    for key, value in data.items():
        if key in SECTIONS:
            kwargs[key] = _section(SECTIONS[key], value, key, rep)
        elif key == "shocks":
            if not isinstance(value, list):
                rep.fail(key, "shocks must be a list")
            kwargs[key] = [_section(ShockConfig, s, f"shocks.{i}", rep) for i, s in enumerate(value)]
        elif key in ("seed", "horizon"):
            kwargs[key] = _coerce(value, getattr(defaults, key), key, rep)
        else:
            rep.fail(str(key), f"unknown key {key}")
    cfg = ScenarioConfig(**kwargs)
    _check_ranges(cfg, rep)
    return cfg


def loads(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        node = yaml.compose(text, Loader=_Loader)
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{source}{line}: {getattr(exc, 'problem', exc)}") from None
    lines = _lines(node) if node is not None else {}
    return from_dict(data, source, lines)


def load(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return loads(text, path.name)


def baseline_text() -> str:
    return resources.files("pegsim").joinpath("scenarios/baseline.yaml").read_text()


def baseline() -> ScenarioConfig:
    return loads(baseline_text(), "baseline.yaml")
