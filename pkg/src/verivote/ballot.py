"""Vote-to-group encoding and the published per-voter vote record:
encrypted vote with an encryption proof and a DSA signature.

Record files are the one place group elements are serialized as
fixed-width base64 rather than decimal: a full-size record must stay
near 4 kB, which decimal digits cannot do at a 3072-bit modulus.
"""

from __future__ import annotations

import base64
import csv
import io
from dataclasses import dataclass

from .groups import (
    Ciphertext,
    DsaKeyPair,
    Exponent,
    GroupElement,
    GroupParams,
    MembershipError,
    Signature,
    dsa_sign,
    dsa_verify,
    encode_to_group,
    encrypt,
)
from .proofs import SchnorrProof, schnorr_from_cell, schnorr_prove, schnorr_to_cell, schnorr_verify
from .rng import Prng


class BallotError(Exception):
    pass


class UnknownVoteText(BallotError):
    pass


class DecodeFailure(BallotError):
    """A decrypted vote element has no entry in the vote map."""


@dataclass(frozen=True)
class VoteMapEntry:
    text: str
    exponent: Exponent
    element: GroupElement


class VoteMap:
    """Bidirectional map between canonical vote texts and group elements."""

    def __init__(self, entries: list[VoteMapEntry]):
        self.entries = entries
        self.by_text = {e.text: e for e in entries}
        self.by_element = {e.element.value: e for e in entries}

    def encode(self, text: str) -> GroupElement:
        entry = self.by_text.get(text)
        if entry is None:
            raise UnknownVoteText(f"vote text not in map: {text!r}")
        return entry.element

    def decode(self, element: GroupElement) -> str:
        entry = self.by_element.get(element.value)
        if entry is None:
            raise DecodeFailure("group element does not map to any vote text")
        return entry.text


def build_vote_map(params: GroupParams, texts: list[str], rng: Prng) -> VoteMap:
    """Fresh distinct random exponent per distinct canonical text."""
    entries: list[VoteMapEntry] = []
    used: set[int] = set()
    for text in sorted(set(texts)):
        while True:
            v = rng.below(params.q)
            if v not in used:
                used.add(v)
                break
        entries.append(VoteMapEntry(text=text, exponent=Exponent(v),
                                    element=encode_to_group(params, v)))
    return VoteMap(entries)


def vote_map_to_csv(vmap: VoteMap) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["vote_text", "v", "encoded"])
    for entry in vmap.entries:
        writer.writerow([entry.text, entry.exponent.value, entry.element.value])
    return out.getvalue().encode("utf-8")


def vote_map_from_csv(params: GroupParams, data: bytes) -> VoteMap:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    next(reader)
    entries = [VoteMapEntry(text=cells[0], exponent=params.exponent(int(cells[1])),
                            element=params.element(int(cells[2])))
               for cells in reader]
    return VoteMap(entries)


@dataclass(frozen=True)
class VoteRecord:
    """The published tuple for one cast ballot."""

    voter_pk: GroupElement
    tracker_ct: Ciphertext
    beta: GroupElement
    vote_ct: Ciphertext
    signature: Signature
    proof: SchnorrProof


def canonical_ciphertext_bytes(ct: Ciphertext) -> bytes:
    return f"{ct.c1.value}:{ct.c2.value}".encode()


def _proof_label(base_label: str) -> str:
    return base_label + "|vote-encryption"


def build_record(params: GroupParams, pk_t: GroupElement, text: str, vmap: VoteMap,
                 tracker_ct: Ciphertext, beta: GroupElement, voter_pk: GroupElement,
                 dsa_key: DsaKeyPair, label: str, rng: Prng) -> VoteRecord:
    """Encrypt the mapped vote under the election key, prove knowledge of
    the encryption randomness, and sign the ciphertext."""
    element = vmap.encode(text)
    r = Exponent(rng.below(params.q))
    vote_ct = encrypt(params, pk_t, element, r)
    proof = schnorr_prove(params, vote_ct.c1, r,
                          _binding_label(label, pk_t, vote_ct, voter_pk), rng)
    signature = dsa_sign(params, dsa_key.x, canonical_ciphertext_bytes(vote_ct), rng)
    return VoteRecord(voter_pk=voter_pk, tracker_ct=tracker_ct, beta=beta,
                      vote_ct=vote_ct, signature=signature, proof=proof)


def _binding_label(label: str, pk_t: GroupElement, vote_ct: Ciphertext,
                   voter_pk: GroupElement) -> str:
    # binds the encryption proof to the election key, the ciphertext and
    # the voter, so a proof cannot be replayed on another record
    return f"{_proof_label(label)}|{pk_t.value}|{vote_ct.c1.value}|{vote_ct.c2.value}|{voter_pk.value}"


def verify_record(params: GroupParams, pk_t: GroupElement, record: VoteRecord,
                  dsa_pk: GroupElement, label: str) -> tuple[bool, str]:
    """Subgroup membership, encryption proof, signature. Does not decrypt."""
    try:
        for value in (record.voter_pk.value, record.tracker_ct.c1.value,
                      record.tracker_ct.c2.value, record.beta.value,
                      record.vote_ct.c1.value, record.vote_ct.c2.value):
            params.element(value)
    except MembershipError:
        return False, "bad-element"
    if not schnorr_verify(params, record.vote_ct.c1, record.proof,
                          _binding_label(label, pk_t, record.vote_ct, record.voter_pk)):
        return False, "bad-proof"
    if not dsa_verify(params, dsa_pk, canonical_ciphertext_bytes(record.vote_ct),
                      record.signature):
        return False, "bad-signature"
    return True, ""


# --- record file serialization ----------------------------------------------

RECORD_HEADER = ["pk", "tr_c1", "tr_c2", "beta", "v_c1", "v_c2",
                 "sig_r", "sig_s", "proof"]


def element_width(params: GroupParams) -> int:
    return (params.p.bit_length() + 7) // 8


def element_to_b64(params: GroupParams, element: GroupElement) -> str:
    return base64.b64encode(
        element.value.to_bytes(element_width(params), "big")).decode("ascii")


def element_from_b64(params: GroupParams, cell: str) -> GroupElement:
    return params.element(int.from_bytes(base64.b64decode(cell), "big"))


def records_to_csv(params: GroupParams, records: list[VoteRecord]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RECORD_HEADER)
    for rec in records:
        writer.writerow([
            element_to_b64(params, rec.voter_pk),
            element_to_b64(params, rec.tracker_ct.c1),
            element_to_b64(params, rec.tracker_ct.c2),
            element_to_b64(params, rec.beta),
            element_to_b64(params, rec.vote_ct.c1),
            element_to_b64(params, rec.vote_ct.c2),
            rec.signature.r,
            rec.signature.s,
            schnorr_to_cell(rec.proof),
        ])
    return out.getvalue().encode("utf-8")


def records_from_csv(params: GroupParams, data: bytes) -> list[VoteRecord]:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    next(reader)
    records = []
    for cells in reader:
        records.append(VoteRecord(
            voter_pk=element_from_b64(params, cells[0]),
            tracker_ct=Ciphertext(element_from_b64(params, cells[1]),
                                  element_from_b64(params, cells[2])),
            beta=element_from_b64(params, cells[3]),
            vote_ct=Ciphertext(element_from_b64(params, cells[4]),
                               element_from_b64(params, cells[5])),
            signature=Signature(r=int(cells[6]), s=int(cells[7])),
            proof=schnorr_from_cell(params, cells[8]),
        ))
    return records
