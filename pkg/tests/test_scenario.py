import pytest

from pegsim.config import baseline
from pegsim.market_ops import manipulation_game as market_manipulation_game
from pegsim.scenario import (
    InvariantBreach, Scenario, longest_excursion, manipulation_game, run_scenario, settlement_latency,
)


@pytest.fixture(scope="module")
def base_run():
    return run_scenario()


def test_baseline_recovers(base_run):
    rec = base_run.summary["recovery"]
    assert rec["shock_block"] == 100
    assert rec["recovered"] and rec["monotone_envelope"]
    assert base_run.summary["peg"]["max_abs_deviation"] == pytest.approx(0.05, abs=0.005)
    assert base_run.breach is None


def test_baseline_fit_has_positive_correction(base_run):
    assert base_run.summary["correction_fit"]["alpha"] > 0


def test_settlements_checked_against_efficiency_bound(base_run):
    agents = base_run.summary["agents"]
    assert agents["settlements"] > 0
    assert agents["arb_checks"] == agents["settlements"]
    settles = [e for e in base_run.events if e.get("event") == "settle"]
    assert all(e["realized_rate"] >= e["bound"] - 1e-12 for e in settles)


def test_hedge_stays_neutral(base_run):
    assert base_run.summary["agents"]["max_hedge_exposure"] <= 1e-3


def test_trace_shape(base_run):
    tr = base_run.trace
    assert len(tr.rows) == 300 * 3
    assert tr.chains() == ["chain-1", "chain-2", "chain-3"]
    assert min(tr.series("c_ratio")) >= 1.2


def test_ablation_fails_recovery():
    res = run_scenario(**{"agents.enabled": False})
    rec = res.summary["recovery"]
    assert not (rec["recovered"] and rec["monotone_envelope"])


def test_settlement_latency_from_swap_sessions():
    tau = settlement_latency(1, 1, 1)
    assert tau >= 1
    assert settlement_latency(3, 1, 1) >= tau


def test_longest_excursion():
    assert longest_excursion([0.0, 0.01, 0.02, 0.0, 0.01]) == 2
    assert longest_excursion([]) == 0


def test_invariant_breach_carries_partial_result():
    s = Scenario(baseline().replace(horizon=20, shocks=[]))
    orig = s._check

    def broken():
        orig()
        if s.block == 5:
            s._fail("synthetic breach")

    s._check = broken
    with pytest.raises(InvariantBreach) as exc:
        s.run()
    assert exc.value.result.breach == "synthetic breach"
    assert exc.value.result.summary["invariant_breach"] == "synthetic breach"


@pytest.mark.parametrize("adversary", ["none", "front-runner", "wash-trader", "liquidity-withdrawer"])
def test_manipulation_adequate_capital_holds(adversary):
    r = manipulation_game(adversary, 1, horizon=160)
    assert r.precondition_met
    assert not r.violation


def test_manipulation_overwhelming_is_reported():
    r = market_manipulation_game("overwhelming", 2, horizon=120)
    assert not r.precondition_met
    assert r.violation


def test_manipulation_without_agents_violates():
    r = manipulation_game("none", 3, horizon=200, agents_enabled=False)
    assert r.violation and not r.precondition_met


def test_unknown_adversary():
    with pytest.raises(ValueError):
        manipulation_game("gremlin", 0)
