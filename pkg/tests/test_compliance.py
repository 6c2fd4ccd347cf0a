import hashlib
import random

import pytest
from hypothesis import given, settings, strategies as st

from pegsim.compliance import (
    AssetMerkleTree, ComplianceRegistry, NotAMember, PathStep, check_tx_compliance, commit_identity,
    leaf_hash, make_tx, merkle_root, prove_membership, verify_membership,
)

ASSETS = [f"asset-{i}" for i in range(8)]


def sha(b: bytes) -> bytes:
    return hashlib.sha256(b).digest()


def test_commitment_binding_and_blinding():
    assert commit_identity(b"alice", b"r1") == commit_identity(b"alice", b"r1")
    assert commit_identity(b"alice", b"r1") != commit_identity(b"alice", b"r2")
    # Length prefixes keep the field boundary unambiguous.
    assert commit_identity(b"ab", b"c") != commit_identity(b"a", b"bc")
    assert commit_identity(b"w", b"r") == sha(b"\x02" + b"\x00\x00\x00\x01w" + b"\x00\x00\x00\x01r")


def test_root_matches_hashlib_oracle():
    leaves = [sha(b"\x00" + a.encode()) for a in ("a", "b", "c")]
    left = sha(b"\x01" + leaves[0] + leaves[1])
    right = sha(b"\x01" + leaves[2] + leaves[2])  # odd level duplicates the last node
    assert merkle_root(["c", "a", "b"]) == sha(b"\x01" + left + right)


def test_single_leaf():
    assert merkle_root(["only"]) == leaf_hash("only")
    assert prove_membership(["only"], "only") == []
    assert verify_membership(leaf_hash("only"), "only", [])


def test_empty_set_rejected():
    with pytest.raises(ValueError):
        merkle_root([])


def test_eight_leaf_exhaustive_with_bit_flips():
    root = merkle_root(ASSETS)
    for a in ASSETS:
        path = prove_membership(ASSETS, a)
        assert len(path) == 3
        assert verify_membership(root, a, path)
        for i, step in enumerate(path):
            for bit in range(256):
                sib = bytearray(step.sibling)
                sib[bit // 8] ^= 1 << (bit % 8)
                forged = list(path)
                forged[i] = PathStep(bytes(sib), step.sibling_on_left)
                assert not verify_membership(root, a, forged)
            flipped = list(path)
            flipped[i] = PathStep(step.sibling, not step.sibling_on_left)
            assert not verify_membership(root, a, flipped)
        assert not verify_membership(root, a, path[:-1])
        assert not verify_membership(root, a + "x", path)


def test_non_member_and_forged_paths():
    root = merkle_root(ASSETS)
    with pytest.raises(NotAMember):
        prove_membership(ASSETS, "stranger")
    rng = random.Random(0)
    for _ in range(10_000):
        depth = rng.randint(0, 4)
        path = [PathStep(rng.randbytes(32), rng.random() < 0.5) for _ in range(depth)]
        target = rng.choice(["stranger", rng.choice(ASSETS)])
        assert not verify_membership(root, target, path)


def test_verify_tolerates_garbage_paths():
    assert not verify_membership(merkle_root(ASSETS), ASSETS[0], [None])


@settings(max_examples=100)
@given(st.lists(st.text(min_size=1, max_size=8), min_size=1, max_size=20, unique=True), st.randoms())
def test_root_independent_of_order(assets, rnd):
    shuffled = list(assets)
    rnd.shuffle(shuffled)
    assert merkle_root(assets) == merkle_root(shuffled)
    tree = AssetMerkleTree.build(shuffled)
    for a in assets:
        assert verify_membership(tree.root, a, tree.prove(a))


def test_tx_checks():
    tree = AssetMerkleTree.build(ASSETS)
    alice, bob = commit_identity(b"alice", b"1"), commit_identity(b"bob", b"2")
    reg = ComplianceRegistry()
    reg.register(alice)
    reg.register(bob)
    ok = check_tx_compliance(make_tx(tree, ASSETS[:2], alice, bob), tree.root, alice, bob, reg)
    assert ok and ok.reason is None
    bad = check_tx_compliance(make_tx(tree, ["asset-0", "junk"], alice, bob), tree.root, alice, bob, reg)
    assert not bad and bad.reason == "AssetNotPermitted"
    eve = commit_identity(b"eve", b"3")
    r = check_tx_compliance(make_tx(tree, ASSETS[:1], eve, bob), tree.root, eve, bob, reg)
    assert r.reason == "SenderNotRegistered"
    r = check_tx_compliance(make_tx(tree, ASSETS[:1], alice, eve), tree.root, alice, eve, reg)
    assert r.reason == "ReceiverNotRegistered"


def test_tx_matches_set_oracle():
    rng = random.Random(4)
    permitted = set(ASSETS)
    universe = ASSETS + [f"other-{i}" for i in range(8)]
    tree = AssetMerkleTree.build(ASSETS)
    ids = [commit_identity(f"user{i}".encode(), b"r") for i in range(4)]
    reg = ComplianceRegistry()
    for c in ids[:3]:
        reg.register(c)
    for _ in range(500):
        assets = rng.sample(universe, rng.randint(1, 4))
        s, r = rng.choice(ids), rng.choice(ids)
        expect = s in reg.commitments and r in reg.commitments and set(assets) <= permitted
        got = check_tx_compliance(make_tx(tree, assets, s, r), tree.root, s, r, reg)
        assert bool(got) == expect
