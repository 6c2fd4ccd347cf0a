"""Deterministic discrete-event simulation of independent ledgers.

Time is measured in abstract ticks.  Each chain mines a block every
``block_interval`` ticks; messages between endpoints (parties and chains) are
delivered after a per-link latency.  Within a tick the order is fixed:

1. tick hooks, in sorted hook-id order;
2. message deliveries, ordered by (due tick, destination, sequence number),
   repeated until nothing else is due (so zero-latency replies land the same
   tick);
3. block production, in sorted chain-id order.

Locks carry a ``condition`` object with a ``verify(proof) -> bool`` method;
the ledger treats it as opaque.  A lock is claimable by its beneficiary in
blocks with height < timeout and refunded automatically in the first block
with height >= timeout, so no lock is both claimable and refundable at the
same height.
"""

from __future__ import annotations

import heapq
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

log = logging.getLogger(__name__)

TX_KINDS = ("transfer", "lock", "claim", "refund", "mint", "burn")
FEE_ASSET = "GAS"


class TxRejected(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


@dataclass
class Tx:
    kind: str
    sender: str
    payload: dict = field(default_factory=dict)
    fee: float = 0
    tx_id: str = ""


@dataclass
class Lock:
    lock_id: str
    owner: str
    beneficiary: str
    asset: str
    amount: float
    timeout: int
    condition: Any = None
    status: str = "open"  # open | claimed | refunded
    claim_tx: Optional[str] = None


@dataclass
class BlockSummary:
    chain_id: str
    height: int
    applied: list[str] = field(default_factory=list)
    dropped: list[tuple[str, str]] = field(default_factory=list)
    refunded: list[str] = field(default_factory=list)


def _jsonable(v: Any) -> Any:
    if isinstance(v, bytes):
        return v.hex()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    encode = getattr(v, "encode", None)
    if callable(encode):
        return _jsonable(encode())
    return repr(v)


class EventLog:
    """Append-only list of structured records; serialized as JSON lines."""

    def __init__(self, records: Optional[list[dict]] = None) -> None:
        self.records: list[dict] = records if records is not None else []

    def append(self, **record: Any) -> None:
        self.records.append(record)

    def extend(self, other: "EventLog") -> None:
        self.records.extend(other.records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def since(self, start: int) -> "EventLog":
        return EventLog(self.records[start:])

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(_jsonable(r), sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.records
        )

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())


class Ledger:
    def __init__(
        self,
        chain_id: str,
        fees: Optional[dict[str, float]] = None,
        log: Optional[EventLog] = None,
    ) -> None:
        self.chain_id = chain_id
        self.height = 0
        self.accounts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(int))
        self.mempool: list[Tx] = []
        self.pending_timelocks: list[tuple[int, str]] = []
        self.locks: dict[str, Lock] = {}
        self.fees = {k: 0 for k in TX_KINDS}
        self.fees.update(fees or {})
        self.fees_collected: dict[str, float] = defaultdict(int)
        self.minted: dict[str, float] = defaultdict(int)
        self.burned: dict[str, float] = defaultdict(int)
        self.history: list[Tx] = []
        self.log = log if log is not None else EventLog()
        self._seq = 0
        self.clock_tick = 0

    # -- queries --

    def balance(self, account: str, asset: str) -> float:
        return self.accounts[account][asset] if account in self.accounts else 0

    def supply(self, asset: str) -> float:
        """Balances + open locks + collected fees."""
        total = sum(bal.get(asset, 0) for bal in self.accounts.values())
        total += sum(l.amount for l in self.locks.values() if l.status == "open" and l.asset == asset)
        total += self.fees_collected.get(asset, 0)
        return total

    def visible_txs(self) -> list[Tx]:
        """Everything an observer can see: mined history plus the mempool."""
        return self.history + self.mempool

    def fund(self, account: str, asset: str, amount: float) -> None:
        """Genesis allocation (outside the mint/burn accounting)."""
        self.accounts[account][asset] += amount

    # -- transactions --

    def _outflow(self, tx: Tx) -> dict[str, float]:
        out: dict[str, float] = defaultdict(int)
        out[FEE_ASSET] += tx.fee
        if tx.kind in ("transfer", "lock", "burn"):
            out[tx.payload["asset"]] += tx.payload["amount"]
        return out

    def _check(self, tx: Tx, height: int) -> Optional[str]:
        if tx.kind not in TX_KINDS:
            return "unknown-kind"
        if tx.fee < self.fees[tx.kind]:
            return "fee-too-low"
        p = tx.payload
        if tx.kind in ("transfer", "lock", "burn", "mint"):
            if not p.get("amount", 0) > 0:
                return "non-positive-amount"
        for asset, amount in self._outflow(tx).items():
            if amount and self.balance(tx.sender, asset) < amount:
                return "insufficient-balance"
        if tx.kind == "lock":
            if p["lock_id"] in self.locks:
                return "duplicate-lock"
            if p["timeout"] <= height:
                return "timeout-in-past"
        elif tx.kind in ("claim", "refund"):
            lock = self.locks.get(p.get("lock_id"))
            if lock is None:
                return "no-such-lock"
            if lock.status != "open":
                return "lock-closed"
            if tx.kind == "claim":
                if height >= lock.timeout:
                    return "claim-after-timeout"
                if tx.sender != lock.beneficiary:
                    return "not-beneficiary"
                cond = lock.condition
                if cond is not None and not cond.verify(p.get("proof")):
                    return "bad-proof"
            else:
                if height < lock.timeout:
                    return "refund-before-timeout"
                if tx.sender != lock.owner:
                    return "not-owner"
        return None

    def submit_tx(self, tx: Tx) -> str:
        """Validate against current state and append to the mempool.

        Claims are checked against the next block height, since that is where
        they would be applied.
        """
        reason = self._check(tx, self.height + 1)
        if reason is not None:
            self.log.append(
                tick=self.clock_tick, chain=self.chain_id, event="reject", kind=tx.kind,
                sender=tx.sender, reason=reason,
            )
            raise TxRejected(reason)
        self._seq += 1
        tx.tx_id = f"{self.chain_id}:{self._seq}"
        self.mempool.append(tx)
        self.log.append(
            tick=self.clock_tick, chain=self.chain_id, event="submit", tx=tx.tx_id,
            kind=tx.kind, sender=tx.sender,
        )
        return tx.tx_id

    def _apply(self, tx: Tx, height: int) -> None:
        p = tx.payload
        acct = self.accounts
        acct[tx.sender][FEE_ASSET] -= tx.fee
        self.fees_collected[FEE_ASSET] += tx.fee
        if tx.kind == "transfer":
            acct[tx.sender][p["asset"]] -= p["amount"]
            acct[p["to"]][p["asset"]] += p["amount"]
        elif tx.kind == "lock":
            acct[tx.sender][p["asset"]] -= p["amount"]
            lock = Lock(
                p["lock_id"], tx.sender, p["beneficiary"], p["asset"], p["amount"],
                p["timeout"], p.get("condition"),
            )
            self.locks[lock.lock_id] = lock
            heapq.heappush(self.pending_timelocks, (lock.timeout, lock.lock_id))
        elif tx.kind == "claim":
            lock = self.locks[p["lock_id"]]
            lock.status = "claimed"
            lock.claim_tx = tx.tx_id
            acct[lock.beneficiary][lock.asset] += lock.amount
        elif tx.kind == "refund":
            lock = self.locks[p["lock_id"]]
            lock.status = "refunded"
            acct[lock.owner][lock.asset] += lock.amount
        elif tx.kind == "mint":
            acct[p.get("to", tx.sender)][p["asset"]] += p["amount"]
            self.minted[p["asset"]] += p["amount"]
        elif tx.kind == "burn":
            acct[tx.sender][p["asset"]] -= p["amount"]
            self.burned[p["asset"]] += p["amount"]

    def mine_block(self) -> BlockSummary:
        height = self.height + 1
        summary = BlockSummary(self.chain_id, height)
        pending, self.mempool = self.mempool, []
        for tx in pending:
            reason = self._check(tx, height)
            if reason is not None:
                summary.dropped.append((tx.tx_id, reason))
                log.debug("%s dropped %s: %s", self.chain_id, tx.tx_id, reason)
                continue
            self._apply(tx, height)
            self.history.append(tx)
            summary.applied.append(tx.tx_id)
        while self.pending_timelocks and self.pending_timelocks[0][0] <= height:
            _, lock_id = heapq.heappop(self.pending_timelocks)
            lock = self.locks[lock_id]
            if lock.status == "open":
                lock.status = "refunded"
                self.accounts[lock.owner][lock.asset] += lock.amount
                summary.refunded.append(lock_id)
        self.height = height
        self.log.append(
            tick=self.clock_tick, chain=self.chain_id, event="block", height=height,
            applied=summary.applied, dropped=[list(d) for d in summary.dropped],
            refunded=summary.refunded,
        )
        return summary


# ---------------------------------------------------------------------------


@dataclass
class Message:
    src: str
    dst: str
    payload: Any
    sent: int
    due: int
    seq: int


class Clock:
    def __init__(
        self,
        block_intervals: dict[str, int],
        latency: Optional[dict[tuple[str, str], int]] = None,
        default_latency: int = 0,
    ) -> None:
        if any(v < 1 for v in block_intervals.values()):
            raise ValueError("block intervals must be >= 1 tick")
        self.tick = 0
        self.block_intervals = dict(block_intervals)
        self.latency = dict(latency or {})
        self.default_latency = default_latency

    def link_latency(self, src: str, dst: str) -> int:
        return self.latency.get((src, dst), self.default_latency)


# An interceptor sees each party-to-party message at send time and returns a
# list of (extra_delay, payload) deliveries; [] drops the message.
Interceptor = Callable[["World", Message], list[tuple[int, Any]]]


class World:
    def __init__(
        self,
        ledgers: dict[str, Ledger],
        clock: Clock,
        log: Optional[EventLog] = None,
    ) -> None:
        self.ledgers = ledgers
        self.clock = clock
        self.log = log if log is not None else EventLog()
        for ledger in ledgers.values():
            ledger.log = self.log
        self.inbox: dict[str, list[Message]] = defaultdict(list)
        self.hooks: dict[str, Callable[["World"], None]] = {}
        self.interceptor: Optional[Interceptor] = None
        self._queue: list[tuple[int, str, int, Message]] = []
        self._seq = 0

    @property
    def tick(self) -> int:
        return self.clock.tick

    def send(self, src: str, dst: str, payload: Any) -> None:
        base = self.tick + self.clock.link_latency(src, dst)
        msg = Message(src, dst, payload, self.tick, base, 0)
        deliveries = [(0, payload)]
        if self.interceptor is not None and dst not in self.ledgers:
            deliveries = self.interceptor(self, msg)
        if not deliveries:
            self.log.append(tick=self.tick, event="drop", src=src, dst=dst)
        for extra, body in deliveries:
            self._seq += 1
            m = Message(src, dst, body, self.tick, base + max(0, extra), self._seq)
            heapq.heappush(self._queue, (m.due, dst, m.seq, m))

    def submit(self, src: str, chain_id: str, tx: Tx) -> None:
        tx.sender = tx.sender or src
        self.send(src, chain_id, tx)

    def _deliver(self, msg: Message) -> None:
        ledger = self.ledgers.get(msg.dst)
        if ledger is None:
            self.inbox[msg.dst].append(msg)
            self.log.append(tick=self.tick, event="deliver", src=msg.src, dst=msg.dst, seq=msg.seq)
            return
        try:
            ledger.submit_tx(msg.payload)
        except TxRejected:
            pass

    def step(self) -> None:
        self.clock.tick += 1
        t = self.clock.tick
        for ledger in self.ledgers.values():
            ledger.clock_tick = t
        for hook_id in sorted(self.hooks):
            self.hooks[hook_id](self)
        while self._queue and self._queue[0][0] <= t:
            _, _, _, msg = heapq.heappop(self._queue)
            self._deliver(msg)
        for chain_id in sorted(self.ledgers):
            if t % self.clock.block_intervals[chain_id] == 0:
                self.ledgers[chain_id].mine_block()

    def advance(self, n_ticks: int) -> EventLog:
        start = len(self.log)
        for _ in range(n_ticks):
            self.step()
        return self.log.since(start)

    def run_until(self, predicate: Callable[[], bool], deadline: int) -> bool:
        """Step until ``predicate()`` holds or the clock reaches ``deadline``."""
        while not predicate():
            if self.tick >= deadline:
                return False
            self.step()
        return True

    def take_inbox(self, party: str) -> list[Message]:
        msgs, self.inbox[party] = self.inbox[party], []
        return msgs

    def ticks_to_height(self, chain_id: str, height: int) -> int:
        """Ticks from now until ``chain_id`` mines block ``height``."""
        ledger = self.ledgers[chain_id]
        interval = self.clock.block_intervals[chain_id]
        blocks = height - ledger.height
        if blocks <= 0:
            return 0
        return (blocks - 1) * interval + (interval - self.tick % interval)

    def height_after(self, chain_id: str, ticks: int) -> int:
        """Height that ``chain_id`` will have ``ticks`` ticks from now."""
        interval = self.clock.block_intervals[chain_id]
        now = self.tick
        return self.ledgers[chain_id].height + (now + ticks) // interval - now // interval


def build_world(
    chain_ids: list[str],
    block_intervals: dict[str, int],
    latency: Optional[dict[tuple[str, str], int]] = None,
    default_latency: int = 0,
    fees: Optional[dict[str, float]] = None,
) -> World:
    log = EventLog()
    ledgers = {c: Ledger(c, fees=fees, log=log) for c in sorted(chain_ids)}
    return World(ledgers, Clock(block_intervals, latency, default_latency), log)
