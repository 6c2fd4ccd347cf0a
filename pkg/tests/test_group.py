import hashlib

import pytest
from hypothesis import given, settings, strategies as st

from pegsim.group import encode_parts, get_group, scalar_from_hash, secp256k1, sim_group, toy_group

P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
G = (0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
     0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8)


def affine_add(a, b):
    # Textbook affine formulas, independent of the Jacobian code under test.
    if a is None:
        return b
    if b is None:
        return a
    if a[0] == b[0] and (a[1] + b[1]) % P == 0:
        return None
    if a == b:
        lam = 3 * a[0] * a[0] * pow(2 * a[1], -1, P) % P
    else:
        lam = (b[1] - a[1]) * pow(b[0] - a[0], -1, P) % P
    x = (lam * lam - a[0] - b[0]) % P
    return x, (lam * (a[0] - x) - a[1]) % P


def affine_mul(k, pt):
    out = None
    while k:
        if k & 1:
            out = affine_add(out, pt)
        pt = affine_add(pt, pt)
        k >>= 1
    return out


def test_secp256k1_known_multiples():
    g = secp256k1()
    two = g.base_mul(2).raw
    assert two == (0xC6047F9441ED7D6D3045406E95C07CD85C778E4B8CEF3CA7ABAC09B95C709EE5,
                   0x1AE168FEA63DC339A3C58419466CEAEEF7F632653266D0E1236431A950CFE52A)
    assert g.base_mul(N).is_identity
    assert g.base_mul(N - 1) == -g.generator


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=N - 1))
def test_secp256k1_matches_affine_oracle(k):
    g = secp256k1()
    assert g.base_mul(k).raw == affine_mul(k, G)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=N - 1), st.integers(min_value=0, max_value=N - 1))
def test_secp256k1_homomorphism(a, b):
    g = secp256k1()
    assert g.base_mul(a) + g.base_mul(b) == g.base_mul(a + b)
    assert a * g.base_mul(b) == g.base_mul(a * b)


@pytest.mark.parametrize("name", ["secp256k1", "toy", "sim"])
def test_encoding_round_trip(name):
    g = get_group(name)
    for k in (1, 2, 3, 12345, g.order - 1):
        pt = g.base_mul(k)
        assert g.decode_point(pt.encode()) == pt
        assert g.decode_scalar(g.encode_scalar(k)) == k % g.order


def test_decode_rejects_bad_inputs():
    g = secp256k1()
    with pytest.raises(ValueError):
        g.decode_point(b"\x04" + bytes(32))
    with pytest.raises(ValueError):
        g.decode_scalar(N.to_bytes(32, "big"))
    t = toy_group()
    non_residue = next(x for x in range(2, t.p) if pow(x, (t.p - 1) // 2, t.p) != 1)
    with pytest.raises(ValueError):
        t.decode_point(non_residue.to_bytes(2, "big"))


def test_toy_group_exhaustive():
    t = toy_group()
    elems = t.elements()
    raw = [e.raw for e in elems]
    assert len(set(raw)) == t.order == 1019
    # The subgroup is exactly the quadratic residues mod 2039.
    residues = {x * x % t.p for x in range(1, t.p)}
    assert set(raw) == residues
    for k in range(t.order):
        assert t.base_mul(k) == elems[k]
    assert all((e + (-e)).is_identity for e in elems)


def test_sim_group_generator_order():
    g = sim_group()
    assert g.base_mul(g.order).is_identity
    assert not g.generator.is_identity


def test_hash_to_scalar_independent_oracle():
    g = secp256k1()
    tag, parts = b"pegsim/test", [b"a", b"", b"xyz"]
    data = b"".join(len(f).to_bytes(8, "big") + f for f in [tag, *parts])
    expect = int.from_bytes(hashlib.sha512(data).digest(), "big") % N
    assert scalar_from_hash(g, tag, parts) == expect
    assert encode_parts(tag, parts) == data


def test_hash_to_scalar_is_unambiguous():
    g = secp256k1()
    assert g.scalar_from_hash(b"t", [b"ab", b"c"]) != g.scalar_from_hash(b"t", [b"a", b"bc"])
    assert g.scalar_from_hash(b"t1", [b"x"]) != g.scalar_from_hash(b"t2", [b"x"])
    with pytest.raises(ValueError):
        g.scalar_from_hash(b"t", [])


def test_unknown_group():
    with pytest.raises(ValueError):
        get_group("p256")
