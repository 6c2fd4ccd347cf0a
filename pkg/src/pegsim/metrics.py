"""Concentration, peg-stability and impact analytics over simulation traces."""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .amm import TradeRecord

TRACE_HEADER = ("block", "chain", "price", "deviation", "c_ratio", "reserve_a", "reserve_b", "arb_volume", "reward")
PEG_BAND = 0.005


# -- concentration ------------------------------------------------------------


def raw_hhi(shares: Iterable[float]) -> float:
    """sum(s_i^2) * 10,000 with no normalization check.

    Evaluated exactly on each share's shortest decimal form, so decimal inputs
    like 0.7 give 4900.0 rather than 4899.999999999999.
    """
    return float(sum(Fraction(repr(float(s))) ** 2 for s in shares) * 10_000)


def hhi(shares: Sequence[float], tol: float = 1e-9) -> float:
    shares = list(shares)
    if not shares or any(s < 0 for s in shares):
        raise ValueError("shares must be non-empty and non-negative")
    total = math.fsum(shares)
    if abs(total - 1.0) > tol:
        raise ValueError(f"shares sum to {total}, not 1")
    return raw_hhi(shares)


def hhi_band(index: float) -> str:
    if index < 1500:
        return "competitive"
    if index <= 2500:
        return "moderate"
    return "high"


def shares_from_reserves(reserves: dict[str, float]) -> dict[str, float]:
    """Stable-side liquidity per chain over the cross-chain total."""
    total = math.fsum(reserves.values())
    if total <= 0:
        raise ValueError("no liquidity")
    return {k: v / total for k, v in sorted(reserves.items())}


# -- peg statistics -------------------------------------------------------------


def upper_envelope(values: Sequence[float]) -> np.ndarray:
    """Suffix maximum of |x|: the smallest non-increasing curve above the series."""
    a = np.abs(np.asarray(values, float))
    return np.maximum.accumulate(a[::-1])[::-1]


def half_life(values: Sequence[float], floor: float = 0.0) -> Optional[float]:
    """Half-life of decay, from a log-linear fit to the envelope of |x|.

    The fit runs from the envelope peak through the first point at or below
    ``floor`` (or 5% of the peak, whichever is larger); None if fewer than two
    points remain.
    """
    env = upper_envelope(values)
    if env.size == 0 or env[0] <= 0:
        return None
    stop = max(floor, 0.05 * env[0])
    n = int(np.argmax(env <= stop)) + 1 if np.any(env <= stop) else env.size
    seg = env[:n]
    seg = seg[seg > 0]
    if seg.size < 2:
        return None
    k = np.polyfit(np.arange(seg.size), np.log(seg), 1)[0]
    return math.log(2) / -float(k) if k < 0 else math.inf


def blocks_to_reenter(deviation: Sequence[float], start: int, band: float = PEG_BAND) -> Optional[int]:
    """Blocks after ``start`` until |dev| is back inside the band for good."""
    dev = np.abs(np.asarray(deviation, float))
    if start >= dev.size:
        return None
    outside = np.nonzero(dev[start:] > band)[0]
    if outside.size == 0:
        return 0
    last = int(outside[-1]) + 1
    return last if start + last < dev.size else None


def monotone_envelope(deviation: Sequence[float], start: int, band: float = PEG_BAND, chunk: int = 5) -> bool:
    """Chunk maxima of |dev| after ``start`` never rise while outside the band,
    and never leave the band again once inside."""
    dev = np.abs(np.asarray(deviation, float))[start:]
    maxima = [float(dev[i:i + chunk].max()) for i in range(0, dev.size, chunk)]
    inside = False
    for prev, cur in zip(maxima, maxima[1:]):
        if prev <= band:
            inside = True
        if inside and cur > band:
            return False
        if not inside and cur > prev:
            return False
    return True


def peg_stats(
    deviation: Sequence[float], shocks: Sequence[int] = (), band: float = PEG_BAND
) -> dict:
    dev = np.abs(np.asarray(deviation, float))
    if dev.size == 0:
        raise ValueError("empty trace")
    out = {"max_abs_deviation": float(dev.max()), "time_above_band": int((dev > band).sum())}
    if shocks:
        s = shocks[0]
        out["half_life"] = half_life(dev[s:], floor=band)
        out["recovery_blocks"] = blocks_to_reenter(dev, s, band)
    return out


# -- correction model -----------------------------------------------------------


@dataclass(frozen=True)
class CorrectionFit:
    alpha: float
    beta: float
    r2: float
    n: int


def fit_correction_model(deviation: Sequence[float], arb_volume: Sequence[float], lead: int = 0) -> CorrectionFit:
    """Least squares for  dev[t+1] - dev[t] = -alpha dev[t] + beta vol[t + lead].

    ``lead = 1`` pairs each step with the volume traded during it when
    ``vol[t]`` is the volume of block t and ``dev[t]`` is measured at its end.
    """
    d = np.asarray(deviation, float)
    v = np.asarray(arb_volume, float)
    if d.shape != v.shape:
        raise ValueError("deviation and volume lengths differ")
    n = d.size - 1 - lead
    if n < 2:
        raise ValueError("trace too short")
    y = d[1:n + 1] - d[:n]
    X = np.column_stack([-d[:n], v[lead:lead + n]])
    if np.count_nonzero(X[:, 1]) < 20:
        raise ValueError("need at least 20 blocks with nonzero arbitrage volume")
    if np.linalg.matrix_rank(X) < 2:
        raise ValueError("degenerate regressors")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / sst if sst > 0 else 1.0
    return CorrectionFit(float(coef[0]), float(coef[1]), r2, n)


# -- impact bound -----------------------------------------------------------------


def impact_bound(delta: float, depth: float, eps: float = 0.01) -> float:
    return (delta / depth) * (1.0 + math.sqrt(math.log(1.0 / eps) / (2.0 * depth)))


def audit_impact_bound(trades: Iterable[TradeRecord], eps: float = 0.01, rel_tol: float = 1e-12) -> list[TradeRecord]:
    """Trades whose measured impact exceeds the bound for their input depth."""
    return [
        t for t in trades
        if t.impact > impact_bound(t.amount_in, t.depth_in, eps) * (1 + rel_tol)
    ]


# -- traces -------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    block: int
    chain: str
    price: float
    deviation: float
    c_ratio: float
    reserve_a: float
    reserve_b: float
    arb_volume: float
    reward: float


class TraceSchemaError(ValueError):
    pass


@dataclass
class ScenarioTrace:
    rows: list[TraceRow] = field(default_factory=list)
    trades: list[TradeRecord] = field(default_factory=list)
    shocks: list[int] = field(default_factory=list)
    swaps: list[dict] = field(default_factory=list)

    def chains(self) -> list[str]:
        return sorted({r.chain for r in self.rows})

    def series(self, name: str, chain: Optional[str] = None) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows if chain is None or r.chain == chain], float)

    def worst_deviation(self) -> np.ndarray:
        """Per block, the deviation with the largest magnitude across chains."""
        by_block: dict[int, float] = {}
        for r in self.rows:
            cur = by_block.get(r.block)
            if cur is None or abs(r.deviation) > abs(cur):
                by_block[r.block] = r.deviation
        return np.array([by_block[b] for b in sorted(by_block)])

    def block_volume(self) -> np.ndarray:
        vol: dict[int, float] = {}
        for r in self.rows:
            vol[r.block] = vol.get(r.block, 0.0) + r.arb_volume
        return np.array([vol[b] for b in sorted(vol)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in self.rows:
            w.writerow([r.block, r.chain] + [repr(float(getattr(r, f))) for f in TRACE_HEADER[2:]])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "ScenarioTrace":
        rows = validate_trace_csv(text)
        return cls(rows)


def validate_trace_csv(text: str) -> list[TraceRow]:
    """Parse and check: fixed header, numeric fields, one row per chain per block,
    non-decreasing block index."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise TraceSchemaError("empty trace") from None
    if tuple(header) != TRACE_HEADER:
        raise TraceSchemaError(f"bad header {header}")
    rows: list[TraceRow] = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(TRACE_HEADER):
            raise TraceSchemaError(f"line {lineno}: expected {len(TRACE_HEADER)} fields")
        try:
            row = TraceRow(int(rec[0]), rec[1], *(float(x) for x in rec[2:]))
        except ValueError as exc:
            raise TraceSchemaError(f"line {lineno}: {exc}") from None
        if rows and row.block < rows[-1].block:
            raise TraceSchemaError(f"line {lineno}: block index decreases")
        rows.append(row)
    chains = sorted({r.chain for r in rows})
    per_block: dict[int, list[str]] = {}
    for r in rows:
        per_block.setdefault(r.block, []).append(r.chain)
    for b, cs in per_block.items():
        if sorted(cs) != chains:
            raise TraceSchemaError(f"block {b}: expected one row per chain")
    return rows


def summarize(trace: ScenarioTrace, shock_block: Optional[int], window: int, eps: float = 0.01) -> dict:
    dev = trace.worst_deviation()
    blocks = sorted({r.block for r in trace.rows})
    start = blocks.index(shock_block) if shock_block in blocks else None
    stats = peg_stats(dev, [start] if start is not None else [])
    violations = audit_impact_bound(trace.trades, eps)
    out = {
        "blocks": len(blocks),
        "chains": trace.chains(),
        "peg": stats,
        "impact_audit": {
            "trades": len(trace.trades),
            "violations": len(violations),
            "fraction": len(violations) / len(trace.trades) if trace.trades else 0.0,
            "eps": eps,
        },
    }
    if start is not None:
        rec = stats.get("recovery_blocks")
        out["recovery"] = {
            "shock_block": shock_block,
            "window": window,
            "blocks_to_reenter": rec,
            "recovered": rec is not None and rec <= window,
            "monotone_envelope": monotone_envelope(dev, start),
        }
    try:
        fit = fit_correction_model(dev, trace.block_volume(), lead=1)
        out["correction_fit"] = asdict(fit)
    except ValueError as exc:
        out["correction_fit"] = {"error": str(exc)}
    last = {r.chain: r for r in trace.rows if r.block == blocks[-1]} if blocks else {}
    if last:
        shares = shares_from_reserves({c: r.reserve_a for c, r in last.items()})
        out["hhi"] = {"index": hhi(list(shares.values())), "band": hhi_band(hhi(list(shares.values())))}
    return out
