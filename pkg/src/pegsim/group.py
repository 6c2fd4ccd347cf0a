"""Prime-order groups for Schnorr and adaptor-signature arithmetic.

Three instantiations share one interface:

* ``secp256k1()`` -- the production elliptic-curve group (256-bit order).
* ``toy_group()`` -- the order-1019 subgroup of Z_2039^*, small enough to
  enumerate every scalar in tests.
* ``sim_group()`` -- the order-q subgroup of a 128-bit safe-prime field.  It is
  not production strength, but discrete logs are far out of reach of the
  simulated adversaries and exponentiation is cheap, so the adversarial game
  harnesses run on it.

Scalars are plain ``int`` values reduced modulo ``group.order``.  Points are
``Point`` instances and support ``+``, ``-``, unary ``-``, ``k * P`` and
``==``.
"""

from __future__ import annotations

import hashlib
from functools import cached_property
from typing import Iterable, Optional, Sequence

Scalar = int

PRODUCTION_CURVE = "production-curve"
TOY = "toy"
SIM_FIELD = "sim-field"


class Point:
    """Group element bound to the group that produced it."""

    __slots__ = ("group", "raw")

    def __init__(self, group: "Group", raw) -> None:
        self.group = group
        self.raw = raw

    def __add__(self, other: "Point") -> "Point":
        return self.group.add(self, other)

    def __neg__(self) -> "Point":
        return self.group.neg(self)

    def __sub__(self, other: "Point") -> "Point":
        return self.group.add(self, self.group.neg(other))

    def __rmul__(self, k: int) -> "Point":
        return self.group.mul(k, self)

    def __mul__(self, k: int) -> "Point":
        return self.group.mul(k, self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        return self.group.name == other.group.name and self.raw == other.raw

    def __hash__(self) -> int:
        return hash((self.group.name, self.raw))

    def __repr__(self) -> str:
        return f"Point({self.group.name}, {self.encode().hex()})"

    @property
    def is_identity(self) -> bool:
        return self == self.group.identity

    def encode(self) -> bytes:
        return self.group.encode_point(self)


class Group:
    """Common interface; subclasses provide the element arithmetic."""

    name: str
    tag: str
    order: int

    @property
    def generator(self) -> Point:
        raise NotImplementedError

    @property
    def identity(self) -> Point:
        raise NotImplementedError

    def add(self, a: Point, b: Point) -> Point:
        raise NotImplementedError

    def neg(self, a: Point) -> Point:
        raise NotImplementedError

    def mul(self, k: int, p: Point) -> Point:
        raise NotImplementedError

    def encode_point(self, p: Point) -> bytes:
        raise NotImplementedError

    def decode_point(self, data: bytes) -> Point:
        raise NotImplementedError

    # Scalars

    @cached_property
    def scalar_len(self) -> int:
        return (self.order.bit_length() + 7) // 8

    def scalar(self, x: int) -> Scalar:
        return x % self.order

    def encode_scalar(self, k: Scalar) -> bytes:
        return (k % self.order).to_bytes(self.scalar_len, "big")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_len:
            raise ValueError("bad scalar length")
        k = int.from_bytes(data, "big")
        if k >= self.order:
            raise ValueError("scalar out of range")
        return k

    def base_mul(self, k: int) -> Point:
        return self.mul(k, self.generator)

    def scalar_from_hash(self, domain_tag: bytes, parts: Sequence[bytes]) -> Scalar:
        return scalar_from_hash(self, domain_tag, parts)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def encode_parts(domain_tag: bytes, parts: Iterable[bytes]) -> bytes:
    """Length-prefixed concatenation: 8-byte big-endian length before each field."""
    out = bytearray()
    for field in (domain_tag, *parts):
        out += len(field).to_bytes(8, "big")
        out += field
    return bytes(out)


def scalar_from_hash(group: Group, domain_tag: bytes, parts: Sequence[bytes]) -> Scalar:
    """Hash ``parts`` under ``domain_tag`` to a scalar.

    SHA-512 output (64 bytes) is reduced mod q; for a 256-bit order the bias
    is below 2^-256.
    """
    if not parts:
        raise ValueError("parts must be non-empty")
    digest = hashlib.sha512(encode_parts(domain_tag, parts)).digest()
    return int.from_bytes(digest, "big") % group.order


# ---------------------------------------------------------------------------
# Subgroup of a prime field (Schnorr group): p = 2q + 1, elements are the
# quadratic residues, "addition" is multiplication mod p.


class PrimeFieldGroup(Group):
    def __init__(self, name: str, tag: str, p: int, q: int, g: int) -> None:
        if (p - 1) % q:
            raise ValueError("q must divide p - 1")
        if pow(g, q, p) != 1 or g % p == 1:
            raise ValueError("g must have order q")
        self.name = name
        self.tag = tag
        self.p = p
        self.order = q
        self._g = Point(self, g % p)
        self._id = Point(self, 1)
        self._width = (p.bit_length() + 7) // 8

    @property
    def generator(self) -> Point:
        return self._g

    @property
    def identity(self) -> Point:
        return self._id

    def add(self, a: Point, b: Point) -> Point:
        return Point(self, (a.raw * b.raw) % self.p)

    def neg(self, a: Point) -> Point:
        return Point(self, pow(a.raw, -1, self.p))

    def mul(self, k: int, p: Point) -> Point:
        return Point(self, pow(p.raw, k % self.order, self.p))

    def encode_point(self, p: Point) -> bytes:
        return p.raw.to_bytes(self._width, "big")

    def decode_point(self, data: bytes) -> Point:
        if len(data) != self._width:
            raise ValueError("bad point length")
        x = int.from_bytes(data, "big")
        if not 0 < x < self.p or pow(x, self.order, self.p) != 1:
            raise ValueError("not a subgroup element")
        return Point(self, x)

    def elements(self) -> list[Point]:
        """Every group element, indexed by discrete log (toy sizes only)."""
        if self.order > 1 << 20:
            raise ValueError("group too large to enumerate")
        out, x = [], 1
        for _ in range(self.order):
            out.append(Point(self, x))
            x = x * self._g.raw % self.p
        return out


# ---------------------------------------------------------------------------
# secp256k1

_P = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F
_N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_GX = 0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798
_GY = 0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8

_Jac = tuple  # (X, Y, Z); Z == 0 is the point at infinity
_INF: _Jac = (1, 1, 0)


def _jac_double(a: _Jac) -> _Jac:
    x, y, z = a
    if z == 0 or y == 0:
        return _INF
    p = _P
    yy = y * y % p
    s = 4 * x * yy % p
    m = 3 * x * x % p
    x3 = (m * m - 2 * s) % p
    y3 = (m * (s - x3) - 8 * yy * yy) % p
    z3 = 2 * y * z % p
    return (x3, y3, z3)


def _jac_add_affine(a: _Jac, bx: int, by: int) -> _Jac:
    x1, y1, z1 = a
    if z1 == 0:
        return (bx, by, 1)
    p = _P
    z1z1 = z1 * z1 % p
    u2 = bx * z1z1 % p
    s2 = by * z1 * z1z1 % p
    h = (u2 - x1) % p
    r = (s2 - y1) % p
    if h == 0:
        if r == 0:
            return _jac_double(a)
        return _INF
    hh = h * h % p
    hhh = h * hh % p
    v = x1 * hh % p
    x3 = (r * r - hhh - 2 * v) % p
    y3 = (r * (v - x3) - y1 * hhh) % p
    z3 = z1 * h % p
    return (x3, y3, z3)


def _to_affine(a: _Jac) -> Optional[tuple[int, int]]:
    x, y, z = a
    if z == 0:
        return None
    zi = pow(z, -1, _P)
    zi2 = zi * zi % _P
    return (x * zi2 % _P, y * zi2 * zi % _P)


class Secp256k1(Group):
    name = "secp256k1"
    tag = PRODUCTION_CURVE
    order = _N
    p = _P

    def __init__(self) -> None:
        self._g = Point(self, (_GX, _GY))
        self._id = Point(self, None)

    @property
    def generator(self) -> Point:
        return self._g

    @property
    def identity(self) -> Point:
        return self._id

    @cached_property
    def _base_table(self) -> list[list[Optional[tuple[int, int]]]]:
        # table[i][j] = j * 16^i * G, affine; 64 windows of 4 bits.
        table = []
        base: _Jac = (_GX, _GY, 1)
        for _ in range(64):
            row: list[Optional[tuple[int, int]]] = [None]
            acc: _Jac = _INF
            bx, by = _to_affine(base)
            for _ in range(15):
                acc = _jac_add_affine(acc, bx, by)
                row.append(_to_affine(acc))
            table.append(row)
            for _ in range(4):
                base = _jac_double(base)
        return table

    def add(self, a: Point, b: Point) -> Point:
        if a.raw is None:
            return b
        if b.raw is None:
            return a
        return Point(self, _to_affine(_jac_add_affine((a.raw[0], a.raw[1], 1), *b.raw)))

    def neg(self, a: Point) -> Point:
        if a.raw is None:
            return a
        return Point(self, (a.raw[0], (-a.raw[1]) % _P))

    def mul(self, k: int, pt: Point) -> Point:
        k %= _N
        if k == 0 or pt.raw is None:
            return self._id
        if pt.raw == (_GX, _GY):
            acc: _Jac = _INF
            table = self._base_table
            i = 0
            while k:
                entry = table[i][k & 15]
                if entry is not None:
                    acc = _jac_add_affine(acc, *entry)
                k >>= 4
                i += 1
            return Point(self, _to_affine(acc))
        px, py = pt.raw
        acc = _INF
        for bit in bin(k)[2:]:
            acc = _jac_double(acc)
            if bit == "1":
                acc = _jac_add_affine(acc, px, py)
        return Point(self, _to_affine(acc))

    def encode_point(self, pt: Point) -> bytes:
        if pt.raw is None:
            return bytes(33)
        x, y = pt.raw
        return (b"\x03" if y & 1 else b"\x02") + x.to_bytes(32, "big")

    def decode_point(self, data: bytes) -> Point:
        if len(data) != 33:
            raise ValueError("bad point length")
        if data == bytes(33):
            return self._id
        if data[0] not in (2, 3):
            raise ValueError("bad point prefix")
        x = int.from_bytes(data[1:], "big")
        if x >= _P:
            raise ValueError("x out of range")
        y2 = (pow(x, 3, _P) + 7) % _P
        y = pow(y2, (_P + 1) // 4, _P)
        if y * y % _P != y2:
            raise ValueError("x not on curve")
        if y & 1 != data[0] - 2:
            y = _P - y
        return Point(self, (x, y))


# ---------------------------------------------------------------------------

_TOY_P, _TOY_Q = 2039, 1019
_SIM_Q = 0x7FFFFFFFFFFFFFFFFFFFFFFFFFFFE1D3
_SIM_P = 2 * _SIM_Q + 1

_cache: dict[str, Group] = {}


def secp256k1() -> Secp256k1:
    return _cache.setdefault("secp256k1", Secp256k1())  # type: ignore[return-value]


def toy_group() -> PrimeFieldGroup:
    return _cache.setdefault(  # type: ignore[return-value]
        "toy", PrimeFieldGroup("toy-1019", TOY, _TOY_P, _TOY_Q, 4)
    )


def sim_group() -> PrimeFieldGroup:
    return _cache.setdefault(  # type: ignore[return-value]
        "sim", PrimeFieldGroup("sim-127", SIM_FIELD, _SIM_P, _SIM_Q, 4)
    )


def get_group(name: str) -> Group:
    factories = {"secp256k1": secp256k1, "toy": toy_group, "sim": sim_group}
    try:
        return factories[name]()
    except KeyError:
        raise ValueError(f"unknown group {name!r}") from None
