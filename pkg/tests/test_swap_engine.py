import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from pegsim import adaptor_sig as sig
from pegsim.chain_sim import FEE_ASSET, Tx, TxRejected, build_world
from pegsim.group import sim_group
from pegsim.swap_engine import (
    ADVERSARIAL, Behavior, ClaimProof, Outcome, Party, Phase, PhaseError, SwapSession,
    SwapSessionContext, adversarial_atomicity_game, make_session_id, run_atomicity_games,
)


def make_session(beh_a=None, beh_b=None, fund_b=50, interceptor=None, salt=b"t"):
    g = sim_group()
    world = build_world(["cx", "cy"], {"cx": 2, "cy": 1}, default_latency=1, fees={"lock": 1, "claim": 1})
    world.ledgers["cx"].fund("A", "X", 100)
    world.ledgers["cy"].fund("B", "Y", fund_b)
    for c in ("cx", "cy"):
        for p in ("A", "B"):
            world.ledgers[c].fund(p, FEE_ASSET, 10)
    ka, kb = sig.keygen(g, b"A" + salt), sig.keygen(g, b"B" + salt)
    sid = make_session_id("cx", "X", 100, "cy", "Y", 50, ka.pk, kb.pk, salt)
    ctx = SwapSessionContext(sid, "cx", "X", 100, "cy", "Y", 50, "A", "B", ka.pk, kb.pk)
    world.interceptor = interceptor
    s = SwapSession(world, ctx, Party("A", ka, beh_a or Behavior()), Party("B", kb, beh_b or Behavior()),
                    lock_fee=1, claim_fee=1, rng=random.Random(0))
    return world, s


def balances(world):
    return (world.ledgers["cx"].balance("A", "X"), world.ledgers["cx"].balance("B", "X"),
            world.ledgers["cy"].balance("A", "Y"), world.ledgers["cy"].balance("B", "Y"))


def test_honest_swap_settles():
    world, s = make_session()
    assert s.open_swap().phase is Phase.COMMITTED
    assert s.ctx.timeout_x > 0 and s.ctx.timeout_y > 0
    assert s.exchange_partials().phase is Phase.PARTIALS_EXCHANGED
    assert s.reveal_and_claim("A").phase is Phase.SETTLED
    assert s.finish() is Outcome.BOTH_SETTLED
    assert balances(world) == (0, 100, 50, 0)


def test_timeout_ratio_two_to_one():
    world, s = make_session()
    start = world.tick
    s.open_swap()
    # Heights are fixed at open time: Y expires after ~T ticks, X after ~2T.
    assert s.ctx.timeout_x * world.clock.block_intervals["cx"] - start >= 2 * s.timeout_ticks - 2
    assert s.ctx.timeout_y * world.clock.block_intervals["cy"] - start <= s.timeout_ticks + 2


def test_insolvent_counterparty_aborts_before_locks():
    world, s = make_session(fund_b=10)
    assert s.open_swap().phase is Phase.ABORTED
    assert s.state.reason == "counterparty-insolvent"
    assert not world.ledgers["cx"].locks and not world.ledgers["cy"].locks


def test_only_first_mover_reveals():
    _, s = make_session()
    s.open_swap()
    s.exchange_partials()
    with pytest.raises(PhaseError):
        s.reveal_and_claim("B")


def test_phase_order_enforced():
    _, s = make_session()
    with pytest.raises(PhaseError):
        s.exchange_partials()


@pytest.mark.parametrize("mode", ["foreign", "random", "tamper_asset", "withhold"])
def test_bad_partial_aborts_and_refunds(mode):
    world, s = make_session(beh_b=Behavior(partial_mode=mode))
    outcome = s.run()
    assert s.state.phase in (Phase.ABORTED, Phase.REFUNDED)
    assert outcome is Outcome.BOTH_REFUNDED
    assert balances(world) == (100, 0, 0, 50)


def test_dropout_after_reveal_still_settles():
    world, s = make_session(beh_a=Behavior(crash_after_reveal=True), beh_b=Behavior(lose_nonce=True))
    assert s.run() is Outcome.BOTH_SETTLED
    assert balances(world) == (0, 100, 50, 0)
    assert any(r["event"] == "nonce-recovered" for r in s.state.transcript)


def test_no_reveal_refunds_both():
    world, s = make_session(beh_a=Behavior(withhold_reveal=True))
    assert s.run() is Outcome.BOTH_REFUNDED
    assert balances(world) == (100, 0, 0, 50)
    assert all(lock.status == "refunded" for lg in world.ledgers.values() for lock in lg.locks.values())


def test_blackout_refunds():
    world, s = make_session(interceptor=lambda w, m: [])
    assert s.run() is Outcome.BOTH_REFUNDED
    assert balances(world) == (100, 0, 0, 50)


def test_mempool_observer_cannot_claim():
    """Copying A's claim or guessing nonces never produces a claim for someone else."""
    world, s = make_session()
    s.open_swap()
    s.exchange_partials()
    s.reveal_and_claim("A")
    claim = next(tx for tx in world.ledgers["cy"].history if tx.kind == "claim")
    ly = world.ledgers["cy"]
    # Already claimed, and the beneficiary check blocks a copy by anyone else.
    with pytest.raises(TxRejected):
        ly.submit_tx(Tx("claim", "B", dict(claim.payload), fee=1))
    cond = world.ledgers["cx"].locks[s.ctx.lock_x].condition
    proof = claim.payload["proof"]
    # A's proof does not satisfy the X lock, which needs B's settlement.
    assert not cond.verify(proof)
    g = sim_group()
    rng = random.Random(3)
    for _ in range(200):
        forged = ClaimProof(proof.R_a, proof.R_b, rng.randrange(g.order), proof.settlement)
        assert not cond.verify(forged)


def test_honest_and_blackout_strategies():
    assert adversarial_atomicity_game("honest", 1).outcome is Outcome.BOTH_SETTLED
    assert adversarial_atomicity_game("blackout", 2).outcome in (Outcome.BOTH_REFUNDED, Outcome.BOTH_SETTLED)


def test_unknown_strategy():
    with pytest.raises(ValueError):
        adversarial_atomicity_game("telepath", 0)


def test_atomicity_sample_has_no_violations():
    results = run_atomicity_games(300)
    counts = Counter(r.outcome for r in results)
    assert counts[Outcome.VIOLATION] == 0
    assert counts[Outcome.BOTH_REFUNDED] >= 0.3 * len(results)
    assert {r.strategy for r in results} == set(ADVERSARIAL)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6),
       st.sampled_from(["withhold", "random", "foreign", "tamper_asset"]))
def test_malformed_partials_never_settle(seed, mode):
    _, s = make_session(beh_b=Behavior(partial_mode=mode), salt=str(seed).encode())
    s.rng = random.Random(seed)
    assert s.run() is not Outcome.BOTH_SETTLED
    assert s.state.phase is not Phase.SETTLED


def test_refund_safety_on_every_adversarial_outcome():
    for i in range(60):
        strat = ADVERSARIAL[i % len(ADVERSARIAL)]
        r = adversarial_atomicity_game(strat, 1000 + i)
        assert r.outcome is not Outcome.VIOLATION
        if r.outcome is Outcome.BOTH_REFUNDED:
            assert r.phase in (Phase.ABORTED, Phase.REFUNDED)
