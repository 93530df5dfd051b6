"""Tracker commitments: unique 8-digit trackers encoded into the group,
the publicly recomputable tracker table, per-voter beta construction via
homomorphic combination and threshold decryption, alpha assembly from
teller reveals, commitment opening, and the trapdoor fake-alpha operation.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .groups import (
    Ciphertext,
    Exponent,
    GroupElement,
    GroupParams,
    encode_to_group,
    encrypt,
    homomorphic_mul,
    invmod,
    powmod,
)
from .proofs import same_exponent_verify
from .teller import (
    AlphaReveal,
    CommitmentShare,
    PartialDecryption,
    ProofFailure,
    Teller,
    combine_partials,
)

TRACKER_MIN = 10**7
TRACKER_MAX = 10**8  # exclusive
TRACKER_SPACE = TRACKER_MAX - TRACKER_MIN
TRIVIAL_RANDOMNESS = 1


class TrackerError(Exception):
    pass


class TrackerSpaceError(TrackerError):
    pass


class DuplicateTrackerError(TrackerError):
    pass


class OpeningFailed(TrackerError):
    """Commitment does not open to any tracker in the table."""


class RevealMismatch(TrackerError):
    def __init__(self, teller: int):
        super().__init__(f"teller {teller}: revealed value does not re-encrypt "
                         f"to its published ciphertext")
        self.teller = teller


@dataclass(frozen=True)
class Tracker:
    number: int
    element: GroupElement


@dataclass(frozen=True)
class TrackerTableRow:
    tracker: Tracker
    ciphertext: Ciphertext


def generate_trackers(params: GroupParams, count: int, rng) -> list[Tracker]:
    """Pairwise-distinct random 8-digit trackers, deterministic given seed."""
    if count > TRACKER_SPACE:
        raise TrackerSpaceError(f"cannot draw {count} distinct 8-digit trackers")
    seen: set[int] = set()
    trackers: list[Tracker] = []
    while len(trackers) < count:
        n = TRACKER_MIN + rng.below(TRACKER_SPACE)
        if n in seen:
            continue
        seen.add(n)
        trackers.append(Tracker(number=n, element=encode_to_group(params, n)))
    return trackers


def trivial_encrypt(params: GroupParams, pk_t: GroupElement,
                    element: GroupElement) -> Ciphertext:
    """Encryption with randomness fixed to 1, recomputable by anyone."""
    return encrypt(params, pk_t, element, Exponent(TRIVIAL_RANDOMNESS))


def build_tracker_table(params: GroupParams, pk_t: GroupElement,
                        trackers: list[Tracker],
                        allow_duplicates: bool = False) -> list[TrackerTableRow]:
    numbers = [t.number for t in trackers]
    if not allow_duplicates and len(set(numbers)) != len(numbers):
        raise DuplicateTrackerError("tracker list contains repeats")
    return [TrackerTableRow(tracker=t, ciphertext=trivial_encrypt(params, pk_t, t.element))
            for t in trackers]


def table_lookup(table: list[TrackerTableRow]) -> dict[int, Tracker]:
    """Reverse map from encoded group value to tracker."""
    return {row.tracker.element.value: row.tracker for row in table}


def table_to_csv(table: list[TrackerTableRow]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["tracker", "encoded", "c1", "c2"])
    for row in table:
        writer.writerow([row.tracker.number, row.tracker.element.value,
                         row.ciphertext.c1.value, row.ciphertext.c2.value])
    return out.getvalue().encode("utf-8")


def table_from_csv(params: GroupParams, data: bytes) -> list[TrackerTableRow]:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    next(reader)
    table = []
    for cells in reader:
        tracker = Tracker(number=int(cells[0]), element=params.element(int(cells[1])))
        ct = Ciphertext(params.element(int(cells[2])), params.element(int(cells[3])))
        table.append(TrackerTableRow(tracker=tracker, ciphertext=ct))
    return table


@dataclass(frozen=True)
class BetaTranscript:
    """Everything published to justify one voter's beta."""

    beta: GroupElement
    combined: Ciphertext
    partials: list[PartialDecryption]


def combine_commitment_ciphertext(params: GroupParams, shares: list[CommitmentShare],
                                  tracker_ct: Ciphertext) -> Ciphertext:
    """Homomorphic product of the keyed share ciphertexts with the voter's
    mixed tracker ciphertext: decrypts to pk_i^(sum r_j) * g^n."""
    acc = tracker_ct
    for share in shares:
        acc = homomorphic_mul(params, acc, share.enc_keyed)
    return acc


def verify_share_proofs(params: GroupParams, pk_t: GroupElement, pk_i: GroupElement,
                        shares: list[CommitmentShare], label_for) -> None:
    for share in shares:
        ok = same_exponent_verify(params, pk_t, pk_i, share.enc_exp,
                                  share.enc_keyed, share.proof,
                                  label_for(share))
        if not ok:
            raise ProofFailure(share.teller, "commitment share proof failed")


def build_beta(params: GroupParams, pk_t: GroupElement, pk_i: GroupElement,
               shares: list[CommitmentShare], tracker_ct: Ciphertext,
               tellers: list[Teller], threshold: int,
               public_shares: dict[int, GroupElement], share_label_for,
               decrypt_label: str, verify: bool = True) -> BetaTranscript:
    """beta_i = pk_i^(sum_j r_{i,j}) * g^n, threshold-decrypted from the
    homomorphic combination, with the decryption transcript retained."""
    if verify:
        verify_share_proofs(params, pk_t, pk_i, shares, share_label_for)
    combined = combine_commitment_ciphertext(params, shares, tracker_ct)
    partials = [t.partial_decrypt(combined, decrypt_label) for t in tellers]
    beta = combine_partials(params, combined, partials, threshold,
                            public_shares, decrypt_label, verify=verify)
    return BetaTranscript(beta=beta, combined=combined, partials=partials)


def assemble_alpha(params: GroupParams, pk_t: GroupElement,
                   reveals: list[AlphaReveal],
                   published: dict[int, CommitmentShare]) -> GroupElement:
    """alpha_i = prod_j g^{r_{i,j}} after checking each reveal re-encrypts
    to the teller's published enc_exp ciphertext."""
    acc = 1
    for reveal in reveals:
        share = published[reveal.teller]
        if encrypt(params, pk_t, reveal.value, reveal.randomness) != share.enc_exp:
            raise RevealMismatch(reveal.teller)
        acc = acc * reveal.value.value % params.p
    return GroupElement(acc)


def open_commitment(params: GroupParams, sk: Exponent, alpha: GroupElement,
                    beta: GroupElement, table: list[TrackerTableRow]) -> Tracker:
    """Decrypt (alpha, beta) under the voter's key and reverse-map the
    plaintext through the tracker table."""
    m = beta.value * invmod(powmod(alpha.value, sk.value, params.p), params.p) % params.p
    tracker = table_lookup(table).get(m)
    if tracker is None:
        raise OpeningFailed("commitment does not open to a published tracker")
    return tracker


def forge_alpha(params: GroupParams, sk: Exponent, beta: GroupElement,
                target: Tracker) -> GroupElement:
    """Trapdoor operation: alpha' = (beta / g^{n'})^(sk^-1 mod q) opens the
    same beta to the chosen tracker."""
    quotient = beta.value * invmod(target.element.value, params.p) % params.p
    sk_inv = invmod(sk.value, params.q)
    return GroupElement(powmod(quotient, sk_inv, params.p))
