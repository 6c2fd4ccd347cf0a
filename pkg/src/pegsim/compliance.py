"""Identity commitments and Merkle membership proofs for permitted assets.

This gives binding commitments and sound membership checks.  It does not give
zero knowledge: a verifier sees the asset id and the path.  The call shapes
(commit, root, prove, verify, check) are what a real proof system would sit
behind.

Hashing is SHA-256 with one-byte domain prefixes: 0x00 for leaves, 0x01 for
internal nodes, 0x02 for identity commitments.  Odd levels duplicate their
last node.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Optional

LEAF = b"\x00"
NODE = b"\x01"
IDENTITY = b"\x02"


class NotAMember(KeyError):
    pass


def _h(*parts: bytes) -> bytes:
    return hashlib.sha256(b"".join(parts)).digest()


def _lp(b: bytes) -> bytes:
    return len(b).to_bytes(4, "big") + b


def commit_identity(w: bytes, r: bytes) -> bytes:
    """c_w = H(0x02 || len(w) || w || len(r) || r)."""
    return _h(IDENTITY, _lp(w), _lp(r))


def leaf_hash(asset_id: str) -> bytes:
    return _h(LEAF, asset_id.encode())


def node_hash(left: bytes, right: bytes) -> bytes:
    return _h(NODE, left, right)


def canonical_leaves(assets: Iterable[str]) -> list[str]:
    leaves = sorted(set(assets))
    if not leaves:
        raise ValueError("empty asset set")
    return leaves


def _levels(leaves: list[str]) -> list[list[bytes]]:
    level = [leaf_hash(a) for a in leaves]
    levels = [level]
    while len(level) > 1:
        if len(level) % 2:
            level = level + [level[-1]]
            levels[-1] = level
        level = [node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
        levels.append(level)
    return levels


def merkle_root(assets: Iterable[str]) -> bytes:
    return _levels(canonical_leaves(assets))[-1][0]


@dataclass(frozen=True)
class PathStep:
    sibling: bytes
    sibling_on_left: bool


def prove_membership(assets: Iterable[str], asset_id: str) -> list[PathStep]:
    leaves = canonical_leaves(assets)
    try:
        idx = leaves.index(asset_id)
    except ValueError:
        raise NotAMember(asset_id) from None
    path = []
    for level in _levels(leaves)[:-1]:
        sib = idx ^ 1
        path.append(PathStep(level[sib], sib < idx))
        idx //= 2
    return path


def verify_membership(root: bytes, asset_id: str, path: list[PathStep]) -> bool:
    try:
        h = leaf_hash(asset_id)
        for step in path:
            h = node_hash(step.sibling, h) if step.sibling_on_left else node_hash(h, step.sibling)
    except (AttributeError, TypeError):
        return False
    return h == root


@dataclass
class AssetMerkleTree:
    leaves: list[str]
    root: bytes = b""
    depth: int = 0

    @classmethod
    def build(cls, assets: Iterable[str]) -> "AssetMerkleTree":
        leaves = canonical_leaves(assets)
        levels = _levels(leaves)
        return cls(leaves, levels[-1][0], len(levels) - 1)

    def prove(self, asset_id: str) -> list[PathStep]:
        return prove_membership(self.leaves, asset_id)

    def __contains__(self, asset_id: str) -> bool:
        return asset_id in self.leaves


@dataclass(frozen=True)
class ComplianceTx:
    assets: tuple[str, ...]
    sender: bytes  # identity commitment
    receiver: bytes
    proofs: tuple[tuple[PathStep, ...], ...] = ()


@dataclass
class ComplianceRegistry:
    commitments: set[bytes] = field(default_factory=set)

    def register(self, c: bytes) -> None:
        self.commitments.add(c)


@dataclass(frozen=True)
class ComplianceResult:
    ok: bool
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def check_tx_compliance(
    tx: ComplianceTx,
    root: bytes,
    sender: bytes,
    receiver: bytes,
    registry: ComplianceRegistry,
) -> ComplianceResult:
    """Every asset must verify against ``root``; both parties must be registered."""
    if sender not in registry.commitments or tx.sender != sender:
        return ComplianceResult(False, "SenderNotRegistered")
    if receiver not in registry.commitments or tx.receiver != receiver:
        return ComplianceResult(False, "ReceiverNotRegistered")
    if len(tx.proofs) != len(tx.assets) or not tx.assets:
        return ComplianceResult(False, "MissingProof")
    for asset, path in zip(tx.assets, tx.proofs):
        if not verify_membership(root, asset, list(path)):
            return ComplianceResult(False, "AssetNotPermitted")
    return ComplianceResult(True)


def make_tx(tree: AssetMerkleTree, assets: Iterable[str], sender: bytes, receiver: bytes) -> ComplianceTx:
    """Attach membership proofs; off-tree assets get an empty path."""
    assets = tuple(assets)
    proofs = tuple(tuple(tree.prove(a)) if a in tree else () for a in assets)
    return ComplianceTx(assets, sender, receiver, proofs)
