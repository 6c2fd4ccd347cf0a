"""Two-party cross-chain atomic swaps over ``chain_sim``.

Party A (first mover) locks asset X on chain ``x``; party B locks Y on chain
``y``.  A's refund window is twice B's, and A is the designated revealer.

Protocol::

    open_swap           solvency gate; exchange nonce commitments H(R_p);
                        A locks X; B checks A's lock and locks Y; A checks it.
    exchange_partials   reveal R_p (checked against commitments);
                        s_p = r_p + e sk_p with e = H(R_A + R_B || X || Y);
                        A checks the joint equation.
    reveal_and_claim    A claims Y with its settlement proof, which opens R_A.
                        Anyone watching chain y now knows r_A; B (recomputing
                        its own nonce from s_B if needed) claims X.

Each lock's condition requires (a) openings of both nonce commitments,
(b) the revealer's nonce ``r_A`` with ``r_A G = R_A`` and (c) a valid
settlement proof from the beneficiary.  Without ``r_A`` nobody can claim X,
and ``r_A`` only becomes public through A's claim on chain y.

Messages between parties go through ``World.send`` and may be dropped,
delayed, duplicated or forged by an interceptor.  Transactions reach chains
within their fixed link latency (the synchrony assumption honest parties rely
on when they check timeouts).
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import adaptor_sig as sig
from .adaptor_sig import KeyPair, SettlementProof, SwapPartial
from .chain_sim import FEE_ASSET, Message, Tx, World, build_world
from .group import Group, Point, encode_parts, sim_group


class Phase(enum.IntEnum):
    INIT = 0
    COMMITTED = 1
    PARTIALS_EXCHANGED = 2
    REVEALED = 3
    SETTLED = 4
    REFUNDED = 5
    ABORTED = 6


TERMINAL = {Phase.SETTLED, Phase.REFUNDED}


class Outcome(str, enum.Enum):
    BOTH_SETTLED = "BothSettled"
    BOTH_REFUNDED = "BothRefunded"
    VIOLATION = "Violation"
    # Only a misbehaving party lost funds; not an atomicity failure.
    FORFEIT = "Forfeit"


class PhaseError(RuntimeError):
    pass


def asset_id(chain: str, asset: str, amount: float) -> bytes:
    return encode_parts(b"asset", [chain.encode(), asset.encode(), repr(amount).encode()])


@dataclass
class SwapSessionContext:
    session_id: bytes
    chain_x: str
    asset_x: str
    amount_x: float
    chain_y: str
    asset_y: str
    amount_y: float
    party_a: str
    party_b: str
    pk_a: Point
    pk_b: Point
    timeout_x: int = 0
    timeout_y: int = 0
    commit_a: Optional[bytes] = None
    commit_b: Optional[bytes] = None
    joint_R: Optional[Point] = None
    used_nonces: set = field(default_factory=set)

    @property
    def x_id(self) -> bytes:
        return asset_id(self.chain_x, self.asset_x, self.amount_x) + self.session_id

    @property
    def y_id(self) -> bytes:
        return asset_id(self.chain_y, self.asset_y, self.amount_y) + self.session_id

    @property
    def lock_x(self) -> str:
        return self.session_id.hex() + ":x"

    @property
    def lock_y(self) -> str:
        return self.session_id.hex() + ":y"


def make_session_id(
    chain_x: str, asset_x: str, amount_x: float, chain_y: str, asset_y: str, amount_y: float,
    pk_a: Point, pk_b: Point, salt: bytes,
) -> bytes:
    import hashlib

    data = encode_parts(
        b"pegsim/session",
        [asset_id(chain_x, asset_x, amount_x), asset_id(chain_y, asset_y, amount_y),
         pk_a.encode(), pk_b.encode(), salt],
    )
    return hashlib.sha256(data).digest()[:16]


@dataclass(frozen=True)
class ClaimProof:
    R_a: Point
    R_b: Point
    revealer_nonce: int
    settlement: SettlementProof


@dataclass(frozen=True)
class SwapLockCondition:
    """Claim predicate attached to a lock; evaluated by the ledger."""

    session_id: bytes
    x_id: bytes
    y_id: bytes
    pk_a: Point
    pk_b: Point
    commit_a: bytes
    commit_b: bytes
    beneficiary: str  # "A" or "B"

    def verify(self, proof: Any) -> bool:
        if not isinstance(proof, ClaimProof):
            return False
        try:
            g = self.pk_a.group
            if sig.nonce_commitment(proof.R_a) != self.commit_a:
                return False
            if sig.nonce_commitment(proof.R_b) != self.commit_b:
                return False
            if g.base_mul(proof.revealer_nonce) != proof.R_a:
                return False
            st = proof.settlement
            own_R, pk = (proof.R_a, self.pk_a) if self.beneficiary == "A" else (proof.R_b, self.pk_b)
            if st.R_p != own_R or st.session_id != self.session_id:
                return False
            e = sig.swap_challenge(proof.R_a + proof.R_b, self.x_id, self.y_id)
            return sig.verify_settlement(st, pk, e)
        except (AttributeError, TypeError, ValueError):
            return False


@dataclass
class Behavior:
    """Deviations from the honest protocol; the default is fully honest."""

    refuse_lock: bool = False
    partial_mode: Optional[str] = None  # withhold | random | foreign | tamper_asset
    early_claims: int = 0
    frontrun: bool = False
    withhold_reveal: bool = False
    ignore_reveal_safety: bool = False
    reveal_delay: int = 0
    crash_after_reveal: bool = False
    lose_nonce: bool = False
    skip_claim: bool = False

    @property
    def honest(self) -> bool:
        return self == Behavior() or self == Behavior(lose_nonce=True) or self == Behavior(
            crash_after_reveal=True
        )


@dataclass
class Party:
    name: str
    kp: KeyPair
    behavior: Behavior = field(default_factory=Behavior)
    nonce: Optional[int] = None
    R: Optional[Point] = None
    peer_commit: Optional[bytes] = None
    peer_R: Optional[Point] = None
    partial: Optional[SwapPartial] = None
    peer_partial: Optional[SwapPartial] = None
    verified: bool = False
    claimed: bool = False
    crashed: bool = False


@dataclass
class SwapState:
    phase: Phase
    transcript: list[dict] = field(default_factory=list)
    reason: str = ""


class SwapSession:
    """Drives one swap between two parties on a shared ``World``."""

    def __init__(
        self,
        world: World,
        ctx: SwapSessionContext,
        a: Party,
        b: Party,
        phase_ticks: int = 12,
        timeout_ticks: int = 80,
        lock_fee: float = 0,
        claim_fee: float = 0,
        rng: Optional[random.Random] = None,
    ) -> None:
        self.world = world
        self.ctx = ctx
        self.a = a
        self.b = b
        self.phase_ticks = phase_ticks
        self.timeout_ticks = timeout_ticks
        self.lock_fee = lock_fee
        self.claim_fee = claim_fee
        self.rng = rng or random.Random(0)
        self.state = SwapState(Phase.INIT)
        self.group: Group = ctx.pk_a.group
        self.start_tick = world.tick
        self.reveal_tick: Optional[int] = None
        self.settle_tick: Optional[int] = None
        # Fixed before any counters in the behaviors get consumed.
        self.honest = {a.name: a.behavior.honest, b.name: b.behavior.honest}

    # -- bookkeeping --

    def _record(self, event: str, **fields: Any) -> None:
        rec = {"tick": self.world.tick, "session": self.ctx.session_id.hex(), "event": event, **fields}
        self.state.transcript.append(rec)
        self.world.log.append(**rec)

    def _set_phase(self, phase: Phase, reason: str = "") -> None:
        if self.state.phase in TERMINAL:
            raise PhaseError(f"session already terminal ({self.state.phase.name})")
        backwards = phase < self.state.phase and self.state.phase is not Phase.ABORTED
        if backwards and phase is not Phase.ABORTED:
            raise PhaseError("phase must progress monotonically")
        self.state.phase = phase
        self.state.reason = reason
        self._record("phase", phase=phase.name, reason=reason)

    def _abort(self, reason: str) -> SwapState:
        self._set_phase(Phase.ABORTED, reason)
        return self.state

    def _send(self, src: Party, dst: Party, kind: str, value: Any) -> None:
        if src.crashed:
            return
        self.world.send(src.name, dst.name, {"type": kind, "session": self.ctx.session_id, "value": value})

    def _poll(self, party: Party) -> None:
        """Consume inbox messages for this session, keeping the first of each type."""
        for msg in self.world.take_inbox(party.name):
            body = msg.payload
            if not isinstance(body, dict) or body.get("session") != self.ctx.session_id:
                continue
            kind, value = body.get("type"), body.get("value")
            if kind == "commit" and party.peer_commit is None and isinstance(value, bytes):
                party.peer_commit = value
            elif kind == "nonce" and party.peer_R is None and isinstance(value, Point):
                if value.group is self.group and sig.nonce_commitment(value) == party.peer_commit:
                    party.peer_R = value
            elif kind == "partial" and party.peer_partial is None and isinstance(value, SwapPartial):
                party.peer_partial = value

    def _wait(self, cond: Callable[[], bool], ticks: Optional[int] = None) -> bool:
        deadline = self.world.tick + (ticks or self.phase_ticks)

        def check() -> bool:
            self._poll(self.a)
            self._poll(self.b)
            return cond()

        return self.world.run_until(check, deadline)

    def _lock_condition(self, view: Party, beneficiary: str) -> SwapLockCondition:
        own, peer = view.R and sig.nonce_commitment(view.R), view.peer_commit
        commit_a, commit_b = (own, peer) if view is self.a else (peer, own)
        c = self.ctx
        return SwapLockCondition(c.session_id, c.x_id, c.y_id, c.pk_a, c.pk_b, commit_a, commit_b, beneficiary)

    def _lock_ok(self, chain: str, lock_id: str, view: Party, owner: Party, beneficiary: str,
                 asset: str, amount: float, timeout: int) -> bool:
        lock = self.world.ledgers[chain].locks.get(lock_id)
        return (
            lock is not None
            and lock.status == "open"
            and lock.owner == owner.name
            and lock.asset == asset
            and lock.amount == amount
            and lock.timeout == timeout
            and lock.condition == self._lock_condition(view, beneficiary)
        )

    # -- phase 1 --

    def open_swap(self) -> SwapState:
        c, w, a, b = self.ctx, self.world, self.a, self.b
        self._record("open", chain_x=c.chain_x, chain_y=c.chain_y, amount_x=c.amount_x, amount_y=c.amount_y)
        lx, ly = w.ledgers[c.chain_x], w.ledgers[c.chain_y]
        if ly.balance(b.name, c.asset_y) < c.amount_y or ly.balance(b.name, FEE_ASSET) < self.lock_fee:
            return self._abort("counterparty-insolvent")
        if lx.balance(a.name, c.asset_x) < c.amount_x or lx.balance(a.name, FEE_ASSET) < self.lock_fee:
            return self._abort("initiator-insolvent")

        # Timeouts are fixed up front so both parties agree on them.
        c.timeout_y = w.height_after(c.chain_y, self.timeout_ticks)
        c.timeout_x = w.height_after(c.chain_x, 2 * self.timeout_ticks)

        for p in (a, b):
            p.nonce = sig.derive_nonce(p.kp, c.session_id, b"swap-nonce")
            p.R = self.group.base_mul(p.nonce)
        self._send(a, b, "commit", sig.nonce_commitment(a.R))
        self._send(b, a, "commit", sig.nonce_commitment(b.R))
        if not self._wait(lambda: a.peer_commit is not None and b.peer_commit is not None):
            return self._abort("commitments-missing")
        c.commit_a, c.commit_b = sig.nonce_commitment(a.R), a.peer_commit
        self._record("commitments", commit_a=c.commit_a, commit_b=c.commit_b)

        if a.behavior.refuse_lock:
            return self._abort("initiator-refused-lock")
        w.submit(a.name, c.chain_x, Tx("lock", a.name, {
            "lock_id": c.lock_x, "beneficiary": b.name, "asset": c.asset_x, "amount": c.amount_x,
            "timeout": c.timeout_x, "condition": self._lock_condition(a, "B"),
        }, fee=self.lock_fee))
        self._record("lock-submitted", party="A", chain=c.chain_x)

        def a_locked() -> bool:
            return self._lock_ok(c.chain_x, c.lock_x, b, a, "B", c.asset_x, c.amount_x, c.timeout_x)

        if not self._wait(a_locked, 3 * self.phase_ticks):
            return self._abort("initiator-lock-not-seen")
        # B must still have room for its (earlier) timeout after its lock lands.
        if w.ticks_to_height(c.chain_y, c.timeout_y) <= self.phase_ticks or b.behavior.refuse_lock:
            return self._abort("counterparty-did-not-lock")
        w.submit(b.name, c.chain_y, Tx("lock", b.name, {
            "lock_id": c.lock_y, "beneficiary": a.name, "asset": c.asset_y, "amount": c.amount_y,
            "timeout": c.timeout_y, "condition": self._lock_condition(b, "A"),
        }, fee=self.lock_fee))
        self._record("lock-submitted", party="B", chain=c.chain_y)

        def b_locked() -> bool:
            return self._lock_ok(c.chain_y, c.lock_y, a, b, "A", c.asset_y, c.amount_y, c.timeout_y)

        if not self._wait(b_locked, 3 * self.phase_ticks):
            return self._abort("counterparty-lock-not-seen")
        self._install_watchers()
        self._set_phase(Phase.COMMITTED)
        return self.state

    # -- phase 2 --

    def _make_partial(self, p: Party) -> Optional[SwapPartial]:
        mode = p.behavior.partial_mode
        honest = sig.swap_partial_sign(p.kp, self.ctx, p.nonce, p.R + p.peer_R)
        if mode is None:
            return honest
        g = self.group
        if mode == "withhold":
            return None
        if mode == "random":
            return SwapPartial(self.rng.randrange(g.order), p.R, self.ctx.session_id)
        if mode == "foreign":
            other = SwapSessionContext(
                bytes(16), self.ctx.chain_x, self.ctx.asset_x, self.ctx.amount_x, self.ctx.chain_y,
                self.ctx.asset_y, self.ctx.amount_y, self.ctx.party_a, self.ctx.party_b,
                self.ctx.pk_a, self.ctx.pk_b,
            )
            forged = sig.swap_partial_sign(p.kp, other, p.nonce, p.R + p.peer_R)
            return SwapPartial(forged.s_p, forged.R_p, self.ctx.session_id)
        if mode == "tamper_asset":
            e = sig.swap_challenge(p.R + p.peer_R, self.ctx.x_id + b"!", self.ctx.y_id)
            return SwapPartial(g.scalar(p.nonce + e * p.kp.sk), p.R, self.ctx.session_id)
        raise ValueError(f"unknown partial mode {mode!r}")

    def exchange_partials(self) -> SwapState:
        if self.state.phase is not Phase.COMMITTED:
            raise PhaseError("exchange_partials requires phase Committed")
        a, b, c = self.a, self.b, self.ctx
        self._send(a, b, "nonce", a.R)
        self._send(b, a, "nonce", b.R)
        if not self._wait(lambda: a.peer_R is not None and b.peer_R is not None):
            return self._abort("nonces-missing")
        c.joint_R = a.R + a.peer_R
        for p, q in ((a, b), (b, a)):
            p.partial = self._make_partial(p)
            if p.partial is not None:
                self._send(p, q, "partial", p.partial)
        if not self._wait(lambda: a.peer_partial is not None and b.peer_partial is not None):
            return self._abort("partials-missing")
        b.verified = (
            b.peer_partial.R_p == b.peer_R
            and sig.joint_verify((b.peer_partial, b.partial), (c.pk_a, c.pk_b), c)
        )
        a.verified = (
            a.peer_partial.R_p == a.peer_R
            and a.partial is not None
            and sig.joint_verify((a.partial, a.peer_partial), (c.pk_a, c.pk_b), c)
        )
        self._record("partials", a_ok=a.verified, b_ok=b.verified)
        if not a.verified:
            return self._abort("joint-verify-failed")
        self._set_phase(Phase.PARTIALS_EXCHANGED)
        return self.state

    # -- phase 3 --

    def _reveal_is_safe(self) -> bool:
        c, w = self.ctx, self.world
        lat = w.clock.link_latency(self.a.name, c.chain_y)
        interval = w.clock.block_intervals[c.chain_y]
        return w.ticks_to_height(c.chain_y, c.timeout_y) > lat + 2 * interval

    def reveal_and_claim(self, revealing_party: str = "A") -> SwapState:
        if self.state.phase is not Phase.PARTIALS_EXCHANGED:
            raise PhaseError("reveal_and_claim requires phase PartialsExchanged")
        if revealing_party != "A":
            raise PhaseError("only the first mover may reveal; it claims on the shorter timeout")
        a, c, w = self.a, self.ctx, self.world
        if a.behavior.withhold_reveal:
            return self._abort("revealer-withheld")
        if a.behavior.reveal_delay:
            w.advance(a.behavior.reveal_delay)
        if not self._reveal_is_safe() and not a.behavior.ignore_reveal_safety:
            return self._abort("reveal-window-closed")
        settlement = sig.settle_reveal(a.partial, a.nonce)
        proof = ClaimProof(a.R, a.peer_R, a.nonce, settlement)
        w.submit(a.name, c.chain_y, Tx("claim", a.name, {"lock_id": c.lock_y, "proof": proof}, fee=self.claim_fee))
        self.reveal_tick = w.tick
        self._record("reveal", party="A", chain=c.chain_y)
        self._set_phase(Phase.REVEALED)
        if a.behavior.crash_after_reveal:
            a.crashed = True
            self._record("crash", party="A")
        lx, ly = w.ledgers[c.chain_x], w.ledgers[c.chain_y]

        def both_claimed() -> bool:
            return (lx.locks.get(c.lock_x) is not None and lx.locks[c.lock_x].status == "claimed"
                    and ly.locks[c.lock_y].status == "claimed")

        horizon = w.ticks_to_height(c.chain_x, c.timeout_x) + 1
        if w.run_until(both_claimed, w.tick + horizon):
            self.settle_tick = w.tick
            self._set_phase(Phase.SETTLED)
        return self.state

    # -- watchers (run as world hooks every tick) --

    def _install_watchers(self) -> None:
        sid = self.ctx.session_id.hex()
        self.world.hooks[f"swap:{sid}:B"] = self._b_watch
        if self.b.behavior.early_claims or self.b.behavior.frontrun:
            self.world.hooks[f"swap:{sid}:Badv"] = self._b_adversary

    def _revealed_nonce(self) -> Optional[int]:
        c, g = self.ctx, self.group
        for tx in self.world.ledgers[c.chain_y].visible_txs():
            if tx.kind == "claim" and tx.payload.get("lock_id") == c.lock_y:
                proof = tx.payload.get("proof")
                if isinstance(proof, ClaimProof) and proof.R_a == self.b.peer_R:
                    if g.base_mul(proof.revealer_nonce) == proof.R_a:
                        return proof.revealer_nonce
        return None

    def _b_watch(self, world: World) -> None:
        b, c = self.b, self.ctx
        if b.claimed or b.behavior.skip_claim or b.peer_R is None or b.partial is None:
            return
        lock = world.ledgers[c.chain_x].locks.get(c.lock_x)
        if lock is None or lock.status != "open":
            return
        r_a = self._revealed_nonce()
        if r_a is None:
            return
        e = sig.swap_challenge(b.peer_R + b.R, c.x_id, c.y_id)
        r_b = b.nonce
        if b.behavior.lose_nonce:
            r_b = sig.recover_nonce(b.partial, b.kp, e)
            self._record("nonce-recovered", party="B")
        settlement = sig.settle_reveal(b.partial, r_b)
        proof = ClaimProof(b.peer_R, b.R, r_a, settlement)
        world.submit(b.name, c.chain_x, Tx("claim", b.name, {"lock_id": c.lock_x, "proof": proof}, fee=self.claim_fee))
        b.claimed = True
        self._record("claim-submitted", party="B", chain=c.chain_x)

    def _b_adversary(self, world: World) -> None:
        """Malicious B: premature claims on X and copies of A's claim on Y."""
        b, c, g = self.b, self.ctx, self.group
        if self.reveal_tick is None and b.behavior.early_claims and b.partial is not None and b.peer_R is not None:
            if self.rng.random() < 0.3:
                b.behavior.early_claims -= 1
                guess = self.rng.choice([b.nonce, self.rng.randrange(1, g.order), 0])
                e = sig.swap_challenge(b.peer_R + b.R, c.x_id, c.y_id)
                st = SettlementProof(b.R, b.nonce, b.partial.s_p, g.scalar(e * b.kp.sk), c.session_id)
                proof = ClaimProof(b.peer_R, b.R, guess, st)
                world.submit(b.name, c.chain_x, Tx("claim", b.name, {"lock_id": c.lock_x, "proof": proof}, fee=self.claim_fee))
                self._record("early-claim", party="B")
        if b.behavior.frontrun:
            for tx in world.ledgers[c.chain_y].mempool:
                if tx.kind == "claim" and tx.sender == self.a.name:
                    copy = Tx("claim", b.name, dict(tx.payload), fee=tx.fee)
                    world.submit(b.name, c.chain_y, copy)
                    b.behavior.frontrun = False
                    self._record("frontrun", party="B")
                    break

    # -- completion --

    def finish(self) -> Outcome:
        """Run past both timeouts, then classify the final lock states."""
        c, w = self.ctx, self.world
        if c.timeout_x:
            w.advance(max(w.ticks_to_height(c.chain_x, c.timeout_x), w.ticks_to_height(c.chain_y, c.timeout_y)) + 1)
        sid = c.session_id.hex()
        w.hooks.pop(f"swap:{sid}:B", None)
        w.hooks.pop(f"swap:{sid}:Badv", None)
        lx = w.ledgers[c.chain_x].locks.get(c.lock_x)
        ly = w.ledgers[c.chain_y].locks.get(c.lock_y)
        x_claimed = lx is not None and lx.status == "claimed"
        y_claimed = ly is not None and ly.status == "claimed"
        if x_claimed and y_claimed:
            outcome = Outcome.BOTH_SETTLED
        elif not x_claimed and not y_claimed:
            outcome = Outcome.BOTH_REFUNDED
        else:
            victim = self.a if x_claimed else self.b
            outcome = Outcome.VIOLATION if self.honest[victim.name] else Outcome.FORFEIT
        if self.state.phase not in TERMINAL:
            if outcome is Outcome.BOTH_SETTLED:
                self._set_phase(Phase.SETTLED)
            elif outcome is Outcome.BOTH_REFUNDED and (lx is not None or ly is not None):
                self._set_phase(Phase.REFUNDED, "timeouts")
        self._record("outcome", outcome=outcome.value)
        return outcome

    def run(self) -> Outcome:
        if self.open_swap().phase is Phase.COMMITTED:
            if self.exchange_partials().phase is Phase.PARTIALS_EXCHANGED:
                self.reveal_and_claim("A")
        return self.finish()


# ---------------------------------------------------------------------------
# Adversarial atomicity game

STRATEGIES = (
    "honest", "blackout", "dropper", "reorderer", "delayer",
    "partial-forger", "early-claimer", "frontrunner", "dropout", "late-revealer",
)
ADVERSARIAL = STRATEGIES[1:]


@dataclass
class GameResult:
    outcome: Outcome
    strategy: str
    seed: int
    phase: Phase
    reason: str
    refunds: int


def _interceptor(strategy: str, rng: random.Random, start: int) -> Optional[Callable]:
    if strategy == "blackout":
        cut = start + rng.randrange(0, 60)

        def blackout(world: World, msg: Message):
            return [] if world.tick >= cut else [(0, msg.payload)]

        return blackout
    if strategy == "dropper":
        p = rng.uniform(0.1, 0.6)
        return lambda world, msg: [] if rng.random() < p else [(0, msg.payload)]
    if strategy == "reorderer":
        stale: list = []

        def reorder(world: World, msg: Message):
            out = [(rng.randrange(0, 6), msg.payload)]
            if stale and rng.random() < 0.5:
                out.append((rng.randrange(0, 6), rng.choice(stale)))
            body = msg.payload
            if isinstance(body, dict):
                stale.append({**body, "session": bytes(16)})
            return out

        return reorder
    if strategy == "delayer":
        scale = rng.choice([3, 10, 40])
        return lambda world, msg: [(rng.randrange(0, scale), msg.payload)]
    return None


def adversarial_atomicity_game(strategy: str, seed: int, group: Optional[Group] = None) -> GameResult:
    """One seeded swap under ``strategy``; returns the classified outcome."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    g = group or sim_group()
    rng = random.Random(f"atomicity:{strategy}:{seed}")
    intervals = {"chain-x": rng.randint(1, 3), "chain-y": rng.randint(1, 3)}
    latency = {}
    for party in ("A", "B"):
        for chain in intervals:
            latency[(party, chain)] = rng.randint(0, 2)
    latency[("A", "B")] = rng.randint(0, 3)
    latency[("B", "A")] = rng.randint(0, 3)
    fees = {"lock": 1, "claim": 1}
    world = build_world(list(intervals), intervals, latency, fees=fees)
    world.ledgers["chain-x"].fund("A", "X", 100)
    world.ledgers["chain-y"].fund("B", "Y", 50)
    for chain in intervals:
        world.ledgers[chain].fund("A", FEE_ASSET, 10)
        world.ledgers[chain].fund("B", FEE_ASSET, 10)

    seed_bytes = f"{strategy}:{seed}".encode()
    kp_a = sig.keygen(g, b"A:" + seed_bytes)
    kp_b = sig.keygen(g, b"B:" + seed_bytes)
    beh_a, beh_b = Behavior(), Behavior()
    if strategy == "partial-forger":
        beh_b.partial_mode = rng.choice(["withhold", "random", "foreign", "tamper_asset"])
    elif strategy == "early-claimer":
        beh_b.early_claims = rng.randint(1, 5)
        beh_b.partial_mode = rng.choice([None, "withhold", "random"])
    elif strategy == "frontrunner":
        beh_b.frontrun = True
        beh_b.early_claims = rng.randint(0, 2)
    elif strategy == "dropout":
        beh_a.crash_after_reveal = True
        beh_b.lose_nonce = rng.random() < 0.5
    elif strategy == "late-revealer":
        beh_a.reveal_delay = rng.randint(40, 120)
        beh_a.ignore_reveal_safety = rng.random() < 0.5

    sid = make_session_id("chain-x", "X", 100, "chain-y", "Y", 50, kp_a.pk, kp_b.pk, seed_bytes)
    ctx = SwapSessionContext(sid, "chain-x", "X", 100, "chain-y", "Y", 50, "A", "B", kp_a.pk, kp_b.pk)
    world.interceptor = _interceptor(strategy, rng, world.tick)
    session = SwapSession(
        world, ctx, Party("A", kp_a, beh_a), Party("B", kp_b, beh_b),
        lock_fee=1, claim_fee=1, rng=rng,
    )
    outcome = session.run()
    refunds = sum(
        1 for lg in world.ledgers.values() for lock in lg.locks.values() if lock.status == "refunded"
    )
    return GameResult(outcome, strategy, seed, session.state.phase, session.state.reason, refunds)


def run_atomicity_games(n_runs: int, base_seed: int = 0, adversarial_only: bool = True) -> list[GameResult]:
    pool = ADVERSARIAL if adversarial_only else STRATEGIES
    return [
        adversarial_atomicity_game(pool[(base_seed + i) % len(pool)], base_seed + i)
        for i in range(n_runs)
    ]
