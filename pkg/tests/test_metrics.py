import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pegsim.amm import TradeRecord
from pegsim.metrics import (
    ScenarioTrace, TraceRow, TraceSchemaError, audit_impact_bound, blocks_to_reenter,
    fit_correction_model, half_life, hhi, hhi_band, impact_bound, monotone_envelope, peg_stats,
    raw_hhi, shares_from_reserves, summarize, upper_envelope, validate_trace_csv,
)


def test_hhi_values():
    assert hhi([0.7, 0.3]) == pytest.approx(5800)
    assert raw_hhi([0.7]) == 4900
    assert hhi([0.4, 0.3, 0.3]) == 3400
    assert raw_hhi([0.2] * 6) == 2400
    assert hhi([1.0]) == 10_000
    with pytest.raises(ValueError):
        hhi([0.2] * 6)
    with pytest.raises(ValueError):
        hhi([])


def test_hhi_bands():
    assert hhi_band(1499) == "competitive"
    assert hhi_band(1500) == "moderate"
    assert hhi_band(2500) == "moderate"
    assert hhi_band(2501) == "high"


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=10))
def test_hhi_between_uniform_and_monopoly(values):
    shares = shares_from_reserves({str(i): v for i, v in enumerate(values)})
    h = hhi(list(shares.values()))
    assert 10_000 / len(values) - 1e-6 <= h <= 10_000 + 1e-6


def test_half_life_of_exponential():
    t = np.arange(60)
    hl = half_life(0.05 * 0.9 ** t)
    assert hl == pytest.approx(math.log(2) / math.log(1 / 0.9), rel=1e-9)
    assert hl == pytest.approx(6.58, abs=0.005)
    assert half_life([0.0, 0.0]) is None


def test_envelope_is_suffix_max():
    assert upper_envelope([1, -3, 2, 0]).tolist() == [3, 3, 2, 0]


def test_reentry_and_monotone_envelope():
    dev = [0.0] * 5 + [0.05, 0.03, 0.02, 0.01, 0.004, 0.001] + [0.0] * 10
    assert blocks_to_reenter(dev, 5) == 4
    assert monotone_envelope(dev, 5)
    bumpy = [0.05] + [0.01] * 4 + [0.02] * 5 + [0.04] * 5
    assert not monotone_envelope(bumpy, 0)
    reexit = [0.02] * 5 + [0.001] * 5 + [0.01] * 5
    assert not monotone_envelope(reexit, 0)
    assert blocks_to_reenter([0.1] * 5, 0) is None


def test_peg_stats():
    s = peg_stats([0.0, 0.02, -0.01, 0.001], shocks=[1])
    assert s["max_abs_deviation"] == 0.02
    assert s["time_above_band"] == 2
    assert s["recovery_blocks"] == 2


def test_correction_model_recovery():
    rng = np.random.default_rng(0)
    n = 200
    vol = rng.uniform(0, 1, n)
    dev = np.zeros(n)
    dev[0] = 0.05
    for t in range(n - 2):
        dev[t + 1] = dev[t] - 0.1 * dev[t] + 0.01 * vol[t + 1]
    fit = fit_correction_model(dev, vol, lead=1)
    assert fit.alpha == pytest.approx(0.1, abs=1e-6)
    assert fit.beta == pytest.approx(0.01, abs=1e-6)
    assert fit.r2 == pytest.approx(1.0)


def test_correction_model_rejects_thin_data():
    with pytest.raises(ValueError):
        fit_correction_model([0.1, 0.05, 0.02], [1, 1, 1])
    with pytest.raises(ValueError):
        fit_correction_model(np.ones(50), np.zeros(50))


def test_impact_bound_example():
    b = impact_bound(10, 100, 0.01)
    assert b == pytest.approx(0.1 * (1 + math.sqrt(math.log(100) / 200)))
    assert b == pytest.approx(0.1152, abs=1e-4)
    ok = TradeRecord(1, "c", "buy_a", 10, 100, 0.1)
    bad = TradeRecord(1, "c", "buy_a", 10, 100, 0.2)
    assert audit_impact_bound([ok, bad]) == [bad]


def _trace():
    rows = []
    for b in range(1, 31):
        for c in ("c1", "c2"):
            dev = 0.05 * 0.8 ** max(0, b - 10) if b >= 10 else 0.0
            rows.append(TraceRow(b, c, 1 + dev, dev, 1.3, 1000.0 if c == "c1" else 500.0, 1000.0,
                                 1.0 if b >= 10 else 0.0, 0.0))
    return ScenarioTrace(rows, shocks=[10])


def test_trace_csv_round_trip():
    tr = _trace()
    text = tr.to_csv()
    back = ScenarioTrace.from_csv(text)
    assert back.rows == tr.rows
    assert back.to_csv() == text


def test_trace_schema_errors():
    text = _trace().to_csv()
    lines = text.splitlines()
    with pytest.raises(TraceSchemaError):
        validate_trace_csv("")
    with pytest.raises(TraceSchemaError):
        validate_trace_csv("wrong,header\n")
    with pytest.raises(TraceSchemaError):
        validate_trace_csv("\n".join([lines[0], lines[3], lines[1]]))
    with pytest.raises(TraceSchemaError):
        validate_trace_csv("\n".join(lines[:2] + lines[3:]))
    with pytest.raises(TraceSchemaError):
        validate_trace_csv("\n".join([lines[0], lines[1].replace("c1", "c1,x")]))


def test_summarize():
    s = summarize(_trace(), 10, 50)
    assert s["blocks"] == 30
    assert s["recovery"]["recovered"]
    assert s["recovery"]["monotone_envelope"]
    assert s["hhi"]["index"] == pytest.approx(10_000 * ((2 / 3) ** 2 + (1 / 3) ** 2))
    assert s["impact_audit"]["trades"] == 0
