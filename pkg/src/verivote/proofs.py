"""Fiat-Shamir sigma protocols: Schnorr, Chaum-Pedersen, and the
same-exponent proof for teller commitment pairs.

Challenges are SHA-256 over a length-prefixed transcript, reduced mod q.
Every proof is bound to a caller-supplied context label so transcripts
cannot be replayed across elections, phases, or rows.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .groups import Ciphertext, Exponent, GroupElement, GroupParams, MembershipError, powmod
from .rng import Prng


class Transcript:
    """Ordered list of labeled byte strings hashed into a challenge."""

    def __init__(self, domain: str):
        self._parts: list[bytes] = [domain.encode()]

    def add(self, label: str, value: int | str | bytes) -> None:
        if isinstance(value, int):
            data = str(value).encode()
        elif isinstance(value, str):
            data = value.encode()
        else:
            data = value
        self._parts.append(label.encode())
        self._parts.append(data)

    def challenge(self, q: int) -> int:
        digest = hashlib.sha256()
        for part in self._parts:
            digest.update(len(part).to_bytes(4, "big"))
            digest.update(part)
        return int.from_bytes(digest.digest(), "big") % q


@dataclass(frozen=True)
class SchnorrProof:
    """Knowledge of x with X = g^x: commitment A = g^u, response z = u + c*x."""

    commitment: GroupElement
    response: Exponent


def _schnorr_challenge(params: GroupParams, statement: GroupElement,
                       commitment: GroupElement, label: str) -> int:
    t = Transcript("schnorr")
    t.add("label", label)
    t.add("p", params.p)
    t.add("g", params.g)
    t.add("statement", statement.value)
    t.add("commitment", commitment.value)
    return t.challenge(params.q)


def schnorr_prove(params: GroupParams, statement: GroupElement, witness: Exponent,
                  label: str, rng: Prng) -> SchnorrProof:
    u = rng.below(params.q)
    commitment = GroupElement(powmod(params.g, u, params.p))
    c = _schnorr_challenge(params, statement, commitment, label)
    z = (u + c * witness.value) % params.q
    return SchnorrProof(commitment=commitment, response=Exponent(z))


def schnorr_verify(params: GroupParams, statement: GroupElement,
                   proof: SchnorrProof, label: str) -> bool:
    c = _schnorr_challenge(params, statement, proof.commitment, label)
    lhs = powmod(params.g, proof.response.value, params.p)
    rhs = proof.commitment.value * powmod(statement.value, c, params.p) % params.p
    return lhs == rhs


@dataclass(frozen=True)
class ChaumPedersenProof:
    """Equality of discrete logs: log_g X1 = log_h X2."""

    commitment_g: GroupElement
    commitment_h: GroupElement
    response: Exponent


def _cp_challenge(params: GroupParams, base_g: GroupElement, base_h: GroupElement,
                  x1: GroupElement, x2: GroupElement, a1: GroupElement,
                  a2: GroupElement, label: str) -> int:
    t = Transcript("chaum-pedersen")
    t.add("label", label)
    t.add("p", params.p)
    t.add("base_g", base_g.value)
    t.add("base_h", base_h.value)
    t.add("x1", x1.value)
    t.add("x2", x2.value)
    t.add("a1", a1.value)
    t.add("a2", a2.value)
    return t.challenge(params.q)


def chaum_pedersen_prove(params: GroupParams, base_g: GroupElement, base_h: GroupElement,
                         x1: GroupElement, x2: GroupElement, witness: Exponent,
                         label: str, rng: Prng) -> ChaumPedersenProof:
    u = rng.below(params.q)
    a1 = GroupElement(powmod(base_g.value, u, params.p))
    a2 = GroupElement(powmod(base_h.value, u, params.p))
    c = _cp_challenge(params, base_g, base_h, x1, x2, a1, a2, label)
    z = (u + c * witness.value) % params.q
    return ChaumPedersenProof(commitment_g=a1, commitment_h=a2, response=Exponent(z))


def chaum_pedersen_verify(params: GroupParams, base_g: GroupElement, base_h: GroupElement,
                          x1: GroupElement, x2: GroupElement, proof: ChaumPedersenProof,
                          label: str) -> bool:
    c = _cp_challenge(params, base_g, base_h, x1, x2,
                      proof.commitment_g, proof.commitment_h, label)
    p = params.p
    if powmod(base_g.value, proof.response.value, p) != \
            proof.commitment_g.value * powmod(x1.value, c, p) % p:
        return False
    if powmod(base_h.value, proof.response.value, p) != \
            proof.commitment_h.value * powmod(x2.value, c, p) % p:
        return False
    return True


@dataclass(frozen=True)
class SameExponentPairProof:
    """Well-formedness of a teller commitment pair.

    Shows C1 = (g^s1, pk_T^s1 * g^r) and C2 = (g^s2, pk_T^s2 * pk_i^r)
    carry the same exponent r.
    """

    commitment1: Ciphertext
    commitment2: Ciphertext
    z_r: Exponent
    z_s1: Exponent
    z_s2: Exponent


def _sep_challenge(params: GroupParams, pk_t: GroupElement, pk_i: GroupElement,
                   ct1: Ciphertext, ct2: Ciphertext, a1: Ciphertext, a2: Ciphertext,
                   label: str) -> int:
    t = Transcript("same-exponent-pair")
    t.add("label", label)
    t.add("p", params.p)
    t.add("pk_t", pk_t.value)
    t.add("pk_i", pk_i.value)
    for tag, ct in (("ct1", ct1), ("ct2", ct2), ("a1", a1), ("a2", a2)):
        t.add(tag + ".c1", ct.c1.value)
        t.add(tag + ".c2", ct.c2.value)
    return t.challenge(params.q)


def same_exponent_prove(params: GroupParams, pk_t: GroupElement, pk_i: GroupElement,
                        ct1: Ciphertext, ct2: Ciphertext, r: Exponent, s1: Exponent,
                        s2: Exponent, label: str, rng: Prng) -> SameExponentPairProof:
    p, q, g = params.p, params.q, params.g
    t_r = rng.below(q)
    u1 = rng.below(q)
    u2 = rng.below(q)
    a1 = Ciphertext(
        c1=GroupElement(powmod(g, u1, p)),
        c2=GroupElement(powmod(pk_t.value, u1, p) * powmod(g, t_r, p) % p),
    )
    a2 = Ciphertext(
        c1=GroupElement(powmod(g, u2, p)),
        c2=GroupElement(powmod(pk_t.value, u2, p) * powmod(pk_i.value, t_r, p) % p),
    )
    c = _sep_challenge(params, pk_t, pk_i, ct1, ct2, a1, a2, label)
    return SameExponentPairProof(
        commitment1=a1,
        commitment2=a2,
        z_r=Exponent((t_r + c * r.value) % q),
        z_s1=Exponent((u1 + c * s1.value) % q),
        z_s2=Exponent((u2 + c * s2.value) % q),
    )


def same_exponent_verify(params: GroupParams, pk_t: GroupElement, pk_i: GroupElement,
                         ct1: Ciphertext, ct2: Ciphertext, proof: SameExponentPairProof,
                         label: str) -> bool:
    p, g = params.p, params.g
    a1, a2 = proof.commitment1, proof.commitment2
    c = _sep_challenge(params, pk_t, pk_i, ct1, ct2, a1, a2, label)
    zr, zs1, zs2 = proof.z_r.value, proof.z_s1.value, proof.z_s2.value
    # A1 o C1^c == (g^zs1, pk_T^zs1 * g^zr)
    if a1.c1.value * powmod(ct1.c1.value, c, p) % p != powmod(g, zs1, p):
        return False
    if a1.c2.value * powmod(ct1.c2.value, c, p) % p != \
            powmod(pk_t.value, zs1, p) * powmod(g, zr, p) % p:
        return False
    # A2 o C2^c == (g^zs2, pk_T^zs2 * pk_i^zr)
    if a2.c1.value * powmod(ct2.c1.value, c, p) % p != powmod(g, zs2, p):
        return False
    if a2.c2.value * powmod(ct2.c2.value, c, p) % p != \
            powmod(pk_t.value, zs2, p) * powmod(pk_i.value, zr, p) % p:
        return False
    return True


# --- CSV cell serialization -------------------------------------------------

def schnorr_to_cell(proof: SchnorrProof) -> str:
    return f"{proof.commitment.value}:{proof.response.value}"


def schnorr_from_cell(params: GroupParams, cell: str) -> SchnorrProof:
    a, z = cell.split(":")
    return SchnorrProof(commitment=params.element(int(a)),
                        response=params.exponent(int(z)))


def chaum_pedersen_to_cell(proof: ChaumPedersenProof) -> str:
    return f"{proof.commitment_g.value}:{proof.commitment_h.value}:{proof.response.value}"


def chaum_pedersen_from_cell(params: GroupParams, cell: str) -> ChaumPedersenProof:
    a1, a2, z = cell.split(":")
    return ChaumPedersenProof(commitment_g=params.element(int(a1)),
                              commitment_h=params.element(int(a2)),
                              response=params.exponent(int(z)))


def same_exponent_to_cell(proof: SameExponentPairProof) -> str:
    return ":".join(str(v) for v in (
        proof.commitment1.c1.value, proof.commitment1.c2.value,
        proof.commitment2.c1.value, proof.commitment2.c2.value,
        proof.z_r.value, proof.z_s1.value, proof.z_s2.value,
    ))


def same_exponent_from_cell(params: GroupParams, cell: str) -> SameExponentPairProof:
    parts = [int(v) for v in cell.split(":")]
    if len(parts) != 7:
        raise MembershipError("malformed same-exponent proof cell")
    return SameExponentPairProof(
        commitment1=Ciphertext(params.element(parts[0]), params.element(parts[1])),
        commitment2=Ciphertext(params.element(parts[2]), params.element(parts[3])),
        z_r=params.exponent(parts[4]),
        z_s1=params.exponent(parts[5]),
        z_s2=params.exponent(parts[6]),
    )
