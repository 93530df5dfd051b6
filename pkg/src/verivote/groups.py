"""Prime-order subgroup arithmetic, ElGamal, and DSA signatures.

All values live in the order-q subgroup of Z_p* generated by g, with
exponents reduced mod q. Big integers serialize as lowercase decimal
strings at every file boundary.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from gmpy2 import mpz, powmod as _gmpy_powmod

from .rng import Prng

MIN_MODULUS_BITS = 256
MILLER_RABIN_ROUNDS = 64


class GroupError(ValueError):
    pass


class MembershipError(GroupError):
    """Value is not a member of the order-q subgroup."""


class ParameterError(GroupError):
    """Group parameters fail validation."""


def powmod(base: int, exp: int, mod: int) -> int:
    return int(_gmpy_powmod(mpz(base), mpz(exp), mpz(mod)))


def invmod(value: int, mod: int) -> int:
    return pow(value, -1, mod)


def _sieve(limit: int) -> list[int]:
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = b"\x00" * len(flags[i * i :: i])
    return [i for i in range(limit) if flags[i]]


_SMALL_PRIMES = _sieve(4000)


def is_probable_prime(n: int, rng: Prng, rounds: int = MILLER_RABIN_ROUNDS) -> bool:
    """Miller-Rabin with ``rounds`` bases drawn from ``rng``."""
    if n < 2:
        return False
    for prime in _SMALL_PRIMES:
        if n == prime:
            return True
        if n % prime == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = powmod(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = powmod(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupElement:
    value: int


@dataclass(frozen=True)
class Exponent:
    value: int


@dataclass(frozen=True)
class GroupParams:
    """Schnorr group: prime p, prime q dividing p-1, g generating order q."""

    p: int
    q: int
    g: int
    bits: int

    def element(self, value: int) -> GroupElement:
        """Checked constructor: rejects values outside the subgroup."""
        if not 1 <= value <= self.p - 1:
            raise MembershipError(f"value {value} outside [1, p-1]")
        if powmod(value, self.q, self.p) != 1:
            raise MembershipError(f"value {value} not in the order-{self.q} subgroup")
        return GroupElement(value)

    def exponent(self, value: int) -> Exponent:
        return Exponent(value % self.q)

    @property
    def generator(self) -> GroupElement:
        return GroupElement(self.g)

    @property
    def identity(self) -> GroupElement:
        return GroupElement(1)

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        return GroupElement(a.value * b.value % self.p)

    def power(self, base: GroupElement, e: Exponent) -> GroupElement:
        return GroupElement(powmod(base.value, e.value, self.p))

    def inverse(self, a: GroupElement) -> GroupElement:
        return GroupElement(invmod(a.value, self.p))


@dataclass(frozen=True)
class ElGamalKeyPair:
    sk: Exponent
    pk: GroupElement


@dataclass(frozen=True)
class Ciphertext:
    c1: GroupElement
    c2: GroupElement


def validate_params(params: GroupParams, rng: Prng) -> None:
    """Raise ParameterError unless (p, q, g) form a valid Schnorr group."""
    if not is_probable_prime(params.p, rng):
        raise ParameterError("p is not prime")
    if not is_probable_prime(params.q, rng):
        raise ParameterError("q is not prime")
    if (params.p - 1) % params.q != 0:
        raise ParameterError("q does not divide p-1")
    if not 1 < params.g < params.p:
        raise ParameterError("generator out of range")
    if powmod(params.g, params.q, params.p) != 1:
        raise ParameterError("g does not generate the order-q subgroup")


def generate_params(bits: int, rng: Prng) -> GroupParams:
    """Deterministically search a Schnorr group with a ``bits``-bit modulus.

    The subgroup order q is a 256-bit prime; p = q*m + 1.
    """
    if bits < MIN_MODULUS_BITS:
        raise ParameterError(f"modulus must be at least {MIN_MODULUS_BITS} bits")
    q_bits = min(256, bits // 2)
    while True:
        q = rng.getrandbits(q_bits) | (1 << (q_bits - 1)) | 1
        if is_probable_prime(q, rng):
            break
    m_bits = bits - q_bits
    while True:
        m = rng.getrandbits(m_bits) | (1 << (m_bits - 1))
        p = q * m + 1
        if p.bit_length() != bits:
            continue
        if is_probable_prime(p, rng):
            break
    while True:
        h = rng.randrange(2, p - 1)
        g = powmod(h, (p - 1) // q, p)
        if g != 1:
            break
    params = GroupParams(p=p, q=q, g=g, bits=bits)
    validate_params(params, rng)
    return params


def random_exponent(params: GroupParams, rng: Prng) -> Exponent:
    return Exponent(rng.below(params.q))


def keygen(params: GroupParams, rng: Prng) -> ElGamalKeyPair:
    sk = random_exponent(params, rng)
    return ElGamalKeyPair(sk=sk, pk=params.power(params.generator, sk))


def encode_to_group(params: GroupParams, e: Exponent | int) -> GroupElement:
    """Map an exponent to the subgroup as g^e mod p."""
    value = e.value if isinstance(e, Exponent) else e % params.q
    return GroupElement(powmod(params.g, value, params.p))


def encrypt(params: GroupParams, pk: GroupElement, m: GroupElement, r: Exponent) -> Ciphertext:
    """ElGamal: (g^r, pk^r * m)."""
    c1 = params.power(params.generator, r)
    c2 = params.mul(params.power(pk, r), m)
    return Ciphertext(c1=c1, c2=c2)


def decrypt(params: GroupParams, sk: Exponent, ct: Ciphertext) -> GroupElement:
    return params.mul(ct.c2, params.inverse(params.power(ct.c1, sk)))


def reencrypt(params: GroupParams, pk: GroupElement, ct: Ciphertext, r: Exponent) -> Ciphertext:
    c1 = params.mul(ct.c1, params.power(params.generator, r))
    c2 = params.mul(ct.c2, params.power(pk, r))
    return Ciphertext(c1=c1, c2=c2)


def homomorphic_mul(params: GroupParams, a: Ciphertext, b: Ciphertext) -> Ciphertext:
    return Ciphertext(c1=params.mul(a.c1, b.c1), c2=params.mul(a.c2, b.c2))


# --- DSA ------------------------------------------------------------------


@dataclass(frozen=True)
class DsaKeyPair:
    x: Exponent
    y: GroupElement


@dataclass(frozen=True)
class Signature:
    r: int
    s: int


def dsa_keygen(params: GroupParams, rng: Prng) -> DsaKeyPair:
    x = Exponent(rng.randrange(1, params.q))
    return DsaKeyPair(x=x, y=params.power(params.generator, x))


def _message_digest(message: bytes, q: int) -> int:
    return int.from_bytes(hashlib.sha256(message).digest(), "big") % q


def dsa_sign(params: GroupParams, x: Exponent, message: bytes, rng: Prng) -> Signature:
    h = _message_digest(message, params.q)
    while True:
        k = rng.randrange(1, params.q)
        r = powmod(params.g, k, params.p) % params.q
        if r == 0:
            continue
        s = invmod(k, params.q) * (h + x.value * r) % params.q
        if s == 0:
            continue
        return Signature(r=r, s=s)


def dsa_verify(params: GroupParams, y: GroupElement, message: bytes, sig: Signature) -> bool:
    if not (0 < sig.r < params.q and 0 < sig.s < params.q):
        return False
    h = _message_digest(message, params.q)
    w = invmod(sig.s, params.q)
    u1 = h * w % params.q
    u2 = sig.r * w % params.q
    v = powmod(params.g, u1, params.p) * powmod(y.value, u2, params.p) % params.p % params.q
    return v == sig.r
