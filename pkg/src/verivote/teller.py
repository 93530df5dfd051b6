"""Teller nodes: verifiable DKG for a k-of-t threshold ElGamal key,
partial decryption with correctness proofs, Lagrange recombination, and
per-voter commitment shares for the tracker commitment pipeline.

Teller-to-teller traffic is modeled as explicit message passing driven by
``run_dkg``; each teller owns its secrets and never sees another's.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .groups import (
    Ciphertext,
    Exponent,
    GroupElement,
    GroupParams,
    encrypt,
    invmod,
    powmod,
)
from .proofs import (
    ChaumPedersenProof,
    SameExponentPairProof,
    chaum_pedersen_prove,
    chaum_pedersen_verify,
    same_exponent_prove,
)
from .rng import Prng


class TellerError(Exception):
    pass


class DkgComplaint(TellerError):
    """A teller's share is inconsistent with its Feldman commitments."""

    def __init__(self, accused: int):
        super().__init__(f"share from teller {accused} fails its commitment check")
        self.accused = accused


class ThresholdError(TellerError):
    pass


class ProofFailure(TellerError):
    def __init__(self, teller: int, what: str):
        super().__init__(f"teller {teller}: {what}")
        self.teller = teller


class RevealPhaseError(TellerError):
    """Alpha share requested before the mixing phase gate was opened."""


@dataclass(frozen=True)
class TellerConfig:
    total: int
    threshold: int

    def __post_init__(self):
        if not 1 <= self.threshold <= self.total:
            raise ValueError("need 1 <= threshold <= total tellers")


@dataclass(frozen=True)
class PartialDecryption:
    teller: int
    value: GroupElement
    proof: ChaumPedersenProof


@dataclass(frozen=True)
class CommitmentShare:
    """Published per-(voter, teller) pair: encryptions of g^r and pk_i^r
    under the election key, with a proof both use the same r."""

    voter: str
    teller: int
    enc_exp: Ciphertext
    enc_keyed: Ciphertext
    proof: SameExponentPairProof


@dataclass(frozen=True)
class AlphaReveal:
    """Opening of a teller's enc_exp ciphertext: the g^r value plus the
    encryption randomness that lets anyone re-encrypt and compare."""

    teller: int
    value: GroupElement
    randomness: Exponent


def _poly_eval(coeffs: list[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def feldman_share_valid(params: GroupParams, commitments: list[GroupElement],
                        receiver: int, share: int) -> bool:
    """Check g^share == prod commitments[m]^(receiver^m)."""
    expected = 1
    xpow = 1
    for commitment in commitments:
        expected = expected * powmod(commitment.value, xpow, params.p) % params.p
        xpow = xpow * receiver % params.q
    return powmod(params.g, share, params.p) == expected


def lagrange_coefficient(indices: list[int], j: int, q: int) -> int:
    """Lagrange basis coefficient at 0 for index j over the given set."""
    num, den = 1, 1
    for l in indices:
        if l == j:
            continue
        num = num * l % q
        den = den * (l - j) % q
    return num * invmod(den, q) % q


class Teller:
    """One teller's state machine: DKG participant, partial decryptor,
    and commitment-share generator."""

    def __init__(self, params: GroupParams, config: TellerConfig, index: int, rng: Prng):
        if not 1 <= index <= config.total:
            raise ValueError("teller index out of range")
        self.params = params
        self.config = config
        self.index = index
        self._rng = rng
        self._coeffs: list[int] | None = None
        self._share: int | None = None
        self.election_pk: GroupElement | None = None
        self.public_shares: dict[int, GroupElement] = {}
        # voter -> (r, g^r, enc randomness of enc_exp)
        self._commitment_secrets: dict[str, tuple[int, int, int]] = {}
        self._reveals_allowed = False

    def reseed(self, rng: Prng) -> None:
        """Swap in a fresh labeled stream, typically at a phase boundary."""
        self._rng = rng

    # --- DKG ---------------------------------------------------------------

    def dkg_commitments(self) -> list[GroupElement]:
        if self._coeffs is None:
            self._coeffs = [self._rng.below(self.params.q)
                            for _ in range(self.config.threshold)]
        return [GroupElement(powmod(self.params.g, c, self.params.p))
                for c in self._coeffs]

    def dkg_share_for(self, receiver: int) -> int:
        if self._coeffs is None:
            raise TellerError("commitments not generated yet")
        return _poly_eval(self._coeffs, receiver, self.params.q)

    def dkg_finalize(self, commitments: dict[int, list[GroupElement]],
                     shares: dict[int, int]) -> None:
        """Validate received shares against senders' commitments, then fix
        this teller's secret share and everyone's public shares."""
        p, q = self.params.p, self.params.q
        for sender in sorted(commitments):
            if not feldman_share_valid(self.params, commitments[sender],
                                       self.index, shares[sender]):
                raise DkgComplaint(sender)
        self._share = sum(shares.values()) % q
        pk = 1
        for sender in sorted(commitments):
            pk = pk * commitments[sender][0].value % p
        self.election_pk = GroupElement(pk)
        for j in range(1, self.config.total + 1):
            acc = 1
            for sender in sorted(commitments):
                xpow = 1
                for commitment in commitments[sender]:
                    acc = acc * powmod(commitment.value, xpow, p) % p
                    xpow = xpow * j % q
            self.public_shares[j] = GroupElement(acc)

    @property
    def secret_share(self) -> int:
        if self._share is None:
            raise TellerError("DKG not complete")
        return self._share

    # --- decryption ----------------------------------------------------------

    def partial_decrypt(self, ct: Ciphertext, label: str) -> PartialDecryption:
        share = Exponent(self.secret_share)
        d = self.params.power(ct.c1, share)
        proof = chaum_pedersen_prove(
            self.params, self.params.generator, ct.c1,
            self.public_shares[self.index], d, share, label, self._rng)
        return PartialDecryption(teller=self.index, value=d, proof=proof)

    # --- commitment shares ---------------------------------------------------

    def gen_commitment_share(self, voter: str, voter_pk: GroupElement,
                             label: str, zero_randomness: bool = False) -> CommitmentShare:
        if self.election_pk is None:
            raise TellerError("DKG not complete")
        if voter in self._commitment_secrets:
            raise TellerError(f"commitment share for {voter} already generated")
        q = self.params.q
        r = 0 if zero_randomness else self._rng.below(q)
        s1 = self._rng.below(q)
        s2 = self._rng.below(q)
        g_r = powmod(self.params.g, r, self.params.p)
        keyed = powmod(voter_pk.value, r, self.params.p)
        enc_exp = encrypt(self.params, self.election_pk, GroupElement(g_r), Exponent(s1))
        enc_keyed = encrypt(self.params, self.election_pk, GroupElement(keyed), Exponent(s2))
        proof = same_exponent_prove(
            self.params, self.election_pk, voter_pk, enc_exp, enc_keyed,
            Exponent(r), Exponent(s1), Exponent(s2), label, self._rng)
        self._commitment_secrets[voter] = (r, g_r, s1)
        return CommitmentShare(voter=voter, teller=self.index,
                               enc_exp=enc_exp, enc_keyed=enc_keyed, proof=proof)

    def allow_reveals(self) -> None:
        self._reveals_allowed = True

    def reveal_alpha_share(self, voter: str) -> AlphaReveal:
        if not self._reveals_allowed:
            raise RevealPhaseError("alpha reveals are gated until mixing completes")
        _, g_r, s1 = self._commitment_secrets[voter]
        return AlphaReveal(teller=self.index, value=GroupElement(g_r),
                           randomness=Exponent(s1))

    # --- checkpointing ---------------------------------------------------------

    def save(self, path: Path) -> None:
        """Write this teller's own secrets as decimal key/value lines."""
        lines = [
            f"index={self.index}",
            f"total={self.config.total}",
            f"threshold={self.config.threshold}",
            f"reveals_allowed={int(self._reveals_allowed)}",
        ]
        if self._share is not None:
            lines.append(f"share={self._share}")
        if self.election_pk is not None:
            lines.append(f"election_pk={self.election_pk.value}")
        for j in sorted(self.public_shares):
            lines.append(f"public_share.{j}={self.public_shares[j].value}")
        for voter in sorted(self._commitment_secrets):
            r, g_r, s1 = self._commitment_secrets[voter]
            lines.append(f"r.{voter}={r}")
            lines.append(f"gr.{voter}={g_r}")
            lines.append(f"s.{voter}={s1}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path, params: GroupParams, rng: Prng) -> "Teller":
        fields: dict[str, str] = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if line:
                key, value = line.split("=", 1)
                fields[key] = value
        config = TellerConfig(total=int(fields["total"]), threshold=int(fields["threshold"]))
        teller = cls(params, config, int(fields["index"]), rng)
        teller._reveals_allowed = bool(int(fields["reveals_allowed"]))
        if "share" in fields:
            teller._share = int(fields["share"])
        if "election_pk" in fields:
            teller.election_pk = GroupElement(int(fields["election_pk"]))
        voters = set()
        for key, value in fields.items():
            if key.startswith("public_share."):
                teller.public_shares[int(key.split(".", 1)[1])] = GroupElement(int(value))
            elif key.startswith("r."):
                voters.add(key.split(".", 1)[1])
        for voter in voters:
            teller._commitment_secrets[voter] = (
                int(fields[f"r.{voter}"]),
                int(fields[f"gr.{voter}"]),
                int(fields[f"s.{voter}"]),
            )
        return teller


@dataclass(frozen=True)
class DkgResult:
    public_key: GroupElement
    public_shares: dict[int, GroupElement]


def run_dkg(tellers: list[Teller]) -> DkgResult:
    """Drive the message exchange: commitments broadcast, point shares sent
    pairwise, every share validated on receipt. A failed validation raises
    DkgComplaint naming the sender and aborts setup."""
    commitments = {t.index: t.dkg_commitments() for t in tellers}
    for receiver in tellers:
        shares = {sender.index: sender.dkg_share_for(receiver.index)
                  for sender in tellers}
        receiver.dkg_finalize(commitments, shares)
    first = tellers[0]
    for other in tellers[1:]:
        if other.election_pk != first.election_pk:
            raise TellerError("tellers disagree on the election key")
    return DkgResult(public_key=first.election_pk, public_shares=dict(first.public_shares))


def combine_partials(params: GroupParams, ct: Ciphertext,
                     partials: list[PartialDecryption], threshold: int,
                     public_shares: dict[int, GroupElement], label: str,
                     verify: bool = True) -> GroupElement:
    """Recombine >= threshold partial decryptions into the plaintext."""
    indices = sorted({d.teller for d in partials})
    if len(indices) < threshold:
        raise ThresholdError(
            f"need {threshold} distinct partial decryptions, got {len(indices)}")
    if verify:
        for d in partials:
            ok = chaum_pedersen_verify(
                params, params.generator, ct.c1,
                public_shares[d.teller], d.value, d.proof, label)
            if not ok:
                raise ProofFailure(d.teller, "partial decryption proof failed")
    by_index = {d.teller: d for d in partials}
    acc = 1
    for j in indices:
        lam = lagrange_coefficient(indices, j, params.q)
        acc = acc * powmod(by_index[j].value.value, lam, params.p) % params.p
    return params.mul(ct.c2, GroupElement(invmod(acc, params.p)))
