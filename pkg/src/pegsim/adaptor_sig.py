"""Schnorr signatures, adaptor pre-signatures and two-party swap partials.

Plain Schnorr and adaptor signatures share one challenge function,
``e = H(R_total || pk || m)``.  An adapted signature ``(s, R)`` under adaptor
point ``T`` is therefore also an ordinary Schnorr signature ``(s, R + T)``.

Swap partials use a single session challenge ``e = H(R_A + R_B || X || Y)``
for both parties, so the joint equation

    (s_A + s_B) G == (R_A + R_B) + e (pk_A + pk_B)

and the per-party settlement check ``s'_p G == e pk_p`` hold together.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Protocol

from .group import Group, Point, Scalar, encode_parts

TAG_CHALLENGE = b"pegsim/schnorr-challenge"
TAG_SWAP_CHALLENGE = b"pegsim/swap-challenge"
TAG_KEYGEN = b"pegsim/keygen"
TAG_NONCE = b"pegsim/nonce"
TAG_NONCE_COMMIT = b"pegsim/nonce-commit"


class SignatureError(ValueError):
    """Raised when an operation's algebraic precondition does not hold."""


class NonceReuseError(SignatureError):
    pass


@dataclass(frozen=True)
class KeyPair:
    sk: Scalar
    pk: Point

    @property
    def group(self) -> Group:
        return self.pk.group


@dataclass(frozen=True)
class Signature:
    s: Scalar
    R: Point


@dataclass(frozen=True)
class PreSignature:
    s_prime: Scalar
    R: Point
    T: Point


@dataclass(frozen=True)
class SwapPartial:
    s_p: Scalar
    R_p: Point
    session_id: bytes


@dataclass(frozen=True)
class SettlementProof:
    """Secret revelation for one party: ``s'_p = s_p - r_p``."""

    R_p: Point
    r_p: Scalar
    s_p: Scalar
    s_prime: Scalar
    session_id: bytes


class SessionLike(Protocol):
    session_id: bytes
    x_id: bytes
    y_id: bytes
    used_nonces: set


def _nonzero_scalar(group: Group, tag: bytes, parts: list[bytes]) -> Scalar:
    counter = 0
    while True:
        k = group.scalar_from_hash(tag, [*parts, counter.to_bytes(4, "big")])
        if k:
            return k
        counter += 1


def keygen(group: Group, seed: bytes) -> KeyPair:
    if not seed:
        raise ValueError("seed must be non-empty")
    sk = _nonzero_scalar(group, TAG_KEYGEN, [seed])
    return KeyPair(sk, group.base_mul(sk))


def keypair_from_secret(group: Group, sk: Scalar) -> KeyPair:
    sk = group.scalar(sk)
    return KeyPair(sk, group.base_mul(sk))


def derive_nonce(kp: KeyPair, *context: bytes) -> Scalar:
    """Deterministic nonce from the secret key and a caller-chosen context."""
    g = kp.group
    return _nonzero_scalar(g, TAG_NONCE, [g.encode_scalar(kp.sk), *context])


def challenge(R_total: Point, pk: Point, m: bytes) -> Scalar:
    g = pk.group
    return g.scalar_from_hash(TAG_CHALLENGE, [R_total.encode(), pk.encode(), m])


# -- plain Schnorr ----------------------------------------------------------


def schnorr_sign(kp: KeyPair, m: bytes, nonce_seed: bytes = b"") -> Signature:
    g = kp.group
    r = derive_nonce(kp, b"schnorr", m, nonce_seed)
    R = g.base_mul(r)
    e = challenge(R, kp.pk, m)
    return Signature(g.scalar(r + e * kp.sk), R)


def schnorr_verify(pk: Point, m: bytes, sig: Signature) -> bool:
    g = pk.group
    if sig.R.group is not g or not 0 <= sig.s < g.order:
        return False
    e = challenge(sig.R, pk, m)
    return g.base_mul(sig.s) == sig.R + e * pk


# -- adaptor signatures -----------------------------------------------------


def pre_sign(kp: KeyPair, m: bytes, T: Point, nonce_seed: bytes) -> PreSignature:
    g = kp.group
    if T.is_identity:
        raise SignatureError("adaptor point must not be the identity")
    r = derive_nonce(kp, b"adaptor", m, T.encode(), nonce_seed)
    R = g.base_mul(r)
    e = challenge(R + T, kp.pk, m)
    return PreSignature(g.scalar(r + e * kp.sk), R, T)


def pre_verify(pk: Point, m: bytes, T: Point, pre: PreSignature) -> bool:
    g = pk.group
    try:
        if pre.T != T or T.is_identity or not 0 <= pre.s_prime < g.order:
            return False
        e = challenge(pre.R + T, pk, m)
        return g.base_mul(pre.s_prime) == pre.R + e * pk
    except (AttributeError, TypeError):
        return False


def adapt(pre: PreSignature, t: Scalar) -> Signature:
    g = pre.R.group
    if g.base_mul(t) != pre.T:
        raise SignatureError("secret does not match adaptor point")
    return Signature(g.scalar(pre.s_prime + t), pre.R)


def verify_adapted(pk: Point, m: bytes, T: Point, sig: Signature) -> bool:
    """Full adaptor verification ``s G == R + T + e pk``."""
    g = pk.group
    if not 0 <= sig.s < g.order:
        return False
    e = challenge(sig.R + T, pk, m)
    return g.base_mul(sig.s) == sig.R + T + e * pk


def extract_secret(sig: Signature, pre: PreSignature) -> Scalar:
    g = pre.R.group
    if sig.R != pre.R:
        raise SignatureError("signature and pre-signature use different nonces")
    t = g.scalar(sig.s - pre.s_prime)
    if g.base_mul(t) != pre.T:
        raise SignatureError("signature does not complete this pre-signature")
    return t


# -- swap partial signatures ------------------------------------------------


def nonce_commitment(R: Point) -> bytes:
    return hashlib.sha256(encode_parts(TAG_NONCE_COMMIT, [R.encode()])).digest()


def swap_challenge(joint_R: Point, x_id: bytes, y_id: bytes) -> Scalar:
    g = joint_R.group
    return g.scalar_from_hash(TAG_SWAP_CHALLENGE, [joint_R.encode(), x_id, y_id])


def swap_partial_sign(
    kp: KeyPair, session: SessionLike, own_nonce: Scalar, joint_R: Point
) -> SwapPartial:
    g = kp.group
    key = (kp.pk.encode(), own_nonce)
    if key in session.used_nonces:
        raise NonceReuseError("nonce already used in this session")
    session.used_nonces.add(key)
    e = swap_challenge(joint_R, session.x_id, session.y_id)
    return SwapPartial(g.scalar(own_nonce + e * kp.sk), g.base_mul(own_nonce), session.session_id)


def joint_verify(
    partials: tuple[SwapPartial, SwapPartial],
    pks: tuple[Point, Point],
    session: SessionLike,
) -> bool:
    a, b = partials
    try:
        if a.session_id != session.session_id or b.session_id != session.session_id:
            return False
        g = pks[0].group
        joint_R = a.R_p + b.R_p
        e = swap_challenge(joint_R, session.x_id, session.y_id)
        return g.base_mul(a.s_p + b.s_p) == joint_R + e * (pks[0] + pks[1])
    except (AttributeError, TypeError):
        return False


def settle_reveal(partial: SwapPartial, r_p: Scalar) -> SettlementProof:
    g = partial.R_p.group
    if g.base_mul(r_p) != partial.R_p:
        raise SignatureError("revealed nonce does not open R_p")
    return SettlementProof(
        partial.R_p, g.scalar(r_p), partial.s_p, g.scalar(partial.s_p - r_p), partial.session_id
    )


def verify_settlement(proof: SettlementProof, pk: Point, e: Scalar) -> bool:
    g = pk.group
    try:
        return (
            g.base_mul(proof.r_p) == proof.R_p
            and g.scalar(proof.s_p - proof.r_p) == proof.s_prime
            and g.base_mul(proof.s_prime) == e * pk
        )
    except (AttributeError, TypeError):
        return False


def recover_nonce(partial: SwapPartial, kp: KeyPair, e: Scalar) -> Scalar:
    """Recompute a lost nonce from one's own published partial: r = s - e sk."""
    return kp.group.scalar(partial.s_p - e * kp.sk)


@dataclass
class Transcript:
    """Ordered, length-prefixed record of protocol messages."""

    records: list[tuple[str, bytes]] = field(default_factory=list)

    def append(self, label: str, *fields: bytes) -> None:
        self.records.append((label, encode_parts(label.encode(), fields)))

    def serialize(self) -> bytes:
        return b"".join(len(r).to_bytes(8, "big") + r for _, r in self.records)


def encode_partial(p: SwapPartial) -> bytes:
    g = p.R_p.group
    return encode_parts(b"partial", [g.encode_scalar(p.s_p), p.R_p.encode(), p.session_id])


def encode_presig(p: PreSignature) -> bytes:
    g = p.R.group
    return encode_parts(b"presig", [g.encode_scalar(p.s_prime), p.R.encode(), p.T.encode()])
