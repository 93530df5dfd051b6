"""Election lifecycle state machine: setup, vote import at the legacy CSV
boundary, mixing and decryption, tracker notification, tally, and the
voter-facing vote check.

The orchestrator holds voter key custody (the legacy provider never sees
private keys) and knows voters only by pseudonym. All randomness flows
from one master seed via labeled derivation, so a whole election replays
bit-exactly, whether run in one process or stepped through the CLI.
"""

from __future__ import annotations

import configparser
import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import naming
from .ballot import (
    VoteMap,
    VoteMapEntry,
    VoteRecord,
    build_record,
    build_vote_map,
    records_from_csv,
    records_to_csv,
    vote_map_to_csv,
)
from .groups import (
    Ciphertext,
    ElGamalKeyPair,
    DsaKeyPair,
    Exponent,
    GroupElement,
    GroupParams,
    dsa_keygen,
    encode_to_group,
    generate_params,
    keygen,
)
from .ledger import BulletinBoard, QuorumConfig
from .mixnet import MixNode, mix_file_name, rows_from_csv, run_mix, verify_mix
from .proofs import (
    chaum_pedersen_to_cell,
    same_exponent_from_cell,
    same_exponent_to_cell,
)
from .rng import Prng
from .teller import (
    CommitmentShare,
    PartialDecryption,
    Teller,
    TellerConfig,
    combine_partials,
    run_dkg,
)
from .trackers import (
    Tracker,
    assemble_alpha,
    build_tracker_table,
    combine_commitment_ciphertext,
    generate_trackers,
    open_commitment,
    table_from_csv,
    table_lookup,
    table_to_csv,
    verify_share_proofs,
)


class Phase(enum.Enum):
    CREATED = "created"
    KEYS_READY = "keys-ready"
    TRACKERS_MIXED = "trackers-mixed"
    COMMITMENTS_ISSUED = "commitments-issued"
    VOTES_IMPORTED = "votes-imported"
    MIXED = "mixed"
    NOTIFIED = "notified"
    TALLIED = "tallied"


_PHASE_ORDER = list(Phase)


class PhaseError(Exception):
    def __init__(self, op: str, phase: Phase, wanted: list[Phase]):
        names = ", ".join(p.value for p in wanted)
        super().__init__(f"{op} requires phase in [{names}], current is {phase.value}")


class VoteImportError(Exception):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MixHalted(Exception):
    """Mixing aborted before publication (audit or decode failure)."""


class NotifyError(Exception):
    pass


class IntegrityAlarm(Exception):
    """A voter's opened tracker is missing from the published mix output."""


@dataclass
class ElectionConfig:
    election_id: str
    voters: int
    tellers: int = 4
    threshold: int = 3
    ledger_nodes: int = 4
    ledger_quorum: int = 3
    bits: int = 512
    seed: int = 1
    seats: dict[str, int] = field(default_factory=dict)

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        parser.optionxform = str  # race names in [seats] are case-sensitive
        parser["election"] = {
            "id": self.election_id,
            "voters": str(self.voters),
            "tellers": str(self.tellers),
            "threshold": str(self.threshold),
            "ledger_nodes": str(self.ledger_nodes),
            "ledger_quorum": str(self.ledger_quorum),
            "bits": str(self.bits),
            "seed": str(self.seed),
        }
        if self.seats:
            parser["seats"] = {race: str(n) for race, n in sorted(self.seats.items())}
        out = io.StringIO()
        parser.write(out)
        return out.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ElectionConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser.read_string(text)
        section = parser["election"]
        seats = {}
        if parser.has_section("seats"):
            seats = {race: int(n) for race, n in parser["seats"].items()}
        return cls(
            election_id=section["id"],
            voters=section.getint("voters"),
            tellers=section.getint("tellers"),
            threshold=section.getint("threshold"),
            ledger_nodes=section.getint("ledger_nodes"),
            ledger_quorum=section.getint("ledger_quorum"),
            bits=section.getint("bits"),
            seed=section.getint("seed"),
            seats=seats,
        )


@dataclass
class Hooks:
    """Test hooks for directed adversarial and degenerate-configuration
    trials. All default to honest behavior."""

    trackers: list[int] | None = None
    allow_duplicate_trackers: bool = False
    zero_commitment_randomness: bool = False
    forge_beta_partial: int | None = None
    mix_cheat: tuple[str, int, int] | None = None  # (mix phase, node, row)
    mix_identity: bool = False
    skip_internal_checks: bool = False


@dataclass
class VoterRow:
    pseudonym: str
    keypair: ElGamalKeyPair
    dsa: DsaKeyPair
    beta: GroupElement | None = None
    alpha: GroupElement | None = None
    voted_races: set[str] = field(default_factory=set)


@dataclass
class TallyResult:
    counts: dict[str, dict[str, int]]
    winners: dict[str, list[str]]
    total: int


@dataclass
class VoteCheck:
    tracker: int | None
    votes: dict[str, str]
    status: str  # "ok" or "no-recorded-ballot"


def _csv_bytes(header: list[str], rows: list[list]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue().encode("utf-8")


def _race_name_ok(race: str) -> bool:
    return race != "" and all(c.isalnum() or c in "._-" for c in race)


class ElectionOrchestrator:
    """Drives one election through its phases over a workspace directory."""

    def __init__(self, config: ElectionConfig, workspace: Path,
                 hooks: Hooks | None = None):
        self.config = config
        self.workspace = Path(workspace)
        self.hooks = hooks or Hooks()
        self.wbb = BulletinBoard(
            self.workspace / "wbb",
            QuorumConfig(config.ledger_nodes, config.ledger_quorum))
        self.phase = Phase.CREATED
        self.params: GroupParams | None = None
        self.election_pk: GroupElement | None = None
        self.public_shares: dict[int, GroupElement] = {}
        self.tellers: list[Teller] = []
        self.registry: dict[str, VoterRow] = {}
        self.races: list[str] = []
        self.votemaps: dict[str, VoteMap] = {}
        self._master = Prng(config.seed, config.election_id)

    # --- lifecycle helpers ---------------------------------------------------

    @property
    def election_id(self) -> str:
        return self.config.election_id

    def _require(self, op: str, wanted: list[Phase]) -> None:
        if self.phase not in wanted:
            raise PhaseError(op, self.phase, wanted)

    def _advance(self, phase: Phase) -> None:
        if _PHASE_ORDER.index(phase) <= _PHASE_ORDER.index(self.phase):
            raise PhaseError("advance", self.phase, [phase])
        self.phase = phase

    def _reseed_tellers(self, phase_label: str) -> None:
        for teller in self.tellers:
            teller.reseed(self._master.derive(f"teller/{teller.index}/{phase_label}"))

    def _pseudonyms(self) -> list[str]:
        return list(self.registry)

    def _mix_nodes(self, phase: str) -> list[MixNode]:
        nodes = []
        for j in range(1, self.config.tellers + 1):
            cheat_row = None
            if self.hooks.mix_cheat is not None:
                cheat_phase, cheat_node, row = self.hooks.mix_cheat
                if cheat_phase == phase and cheat_node == j:
                    cheat_row = row
            nodes.append(MixNode(j, self._master.derive(f"mix/{phase}/node{j}"),
                                 identity=self.hooks.mix_identity,
                                 cheat_row=cheat_row))
        return nodes

    # --- setup -----------------------------------------------------------------

    def setup(self) -> None:
        """Generate parameters and keys, mix the tracker table, build the
        commitments, and publish the setup artifacts. Nothing is published
        until all cryptographic material for the phase exists."""
        self._require("setup", [Phase.CREATED])
        cfg = self.config
        self.params = generate_params(cfg.bits, self._master.derive("params"))

        teller_config = TellerConfig(total=cfg.tellers, threshold=cfg.threshold)
        self.tellers = [
            Teller(self.params, teller_config, j,
                   self._master.derive(f"teller/{j}/setup"))
            for j in range(1, cfg.tellers + 1)
        ]
        dkg = run_dkg(self.tellers)
        self.election_pk = dkg.public_key
        self.public_shares = dkg.public_shares

        width = max(3, len(str(cfg.voters)))
        for i in range(1, cfg.voters + 1):
            pseudonym = f"V{i:0{width}d}"
            rng = self._master.derive(f"voter/{pseudonym}")
            self.registry[pseudonym] = VoterRow(
                pseudonym=pseudonym,
                keypair=keygen(self.params, rng),
                dsa=dsa_keygen(self.params, rng),
            )
        self._advance(Phase.KEYS_READY)

        if self.hooks.trackers is not None:
            if len(self.hooks.trackers) != cfg.voters:
                raise ValueError("injected tracker list must match voter count")
            trackers = [Tracker(n, encode_to_group(self.params, n))
                        for n in self.hooks.trackers]
        else:
            trackers = generate_trackers(self.params, cfg.voters,
                                         self._master.derive("trackers"))
        table = build_tracker_table(self.params, self.election_pk, trackers,
                                    allow_duplicates=self.hooks.allow_duplicate_trackers)

        self._publish_params()
        self.wbb.publish(self.election_id, naming.TRACKERS_FILE, table_to_csv(table))

        mixed_cts = run_mix(self.params, self.election_pk,
                            self._mix_nodes(naming.TRACKER_MIX_PHASE),
                            [(row.ciphertext,) for row in table],
                            self.wbb, self.election_id, naming.TRACKER_MIX_PHASE)
        if not self.hooks.skip_internal_checks:
            verdict = verify_mix(self.params, self.election_pk, self.wbb,
                                 self.election_id, naming.TRACKER_MIX_PHASE,
                                 cfg.tellers, [(row.ciphertext,) for row in table])
            if not verdict.ok:
                raise MixHalted(f"tracker mix audit failed: {verdict.reason}")
        self._advance(Phase.TRACKERS_MIXED)

        # assign mixed tracker ciphertexts to voters by row order
        assignments = {pseudonym: mixed_cts[i][0]
                       for i, pseudonym in enumerate(self._pseudonyms())}

        shares: dict[str, list[CommitmentShare]] = {}
        for pseudonym in self._pseudonyms():
            voter = self.registry[pseudonym]
            shares[pseudonym] = [
                teller.gen_commitment_share(
                    pseudonym, voter.keypair.pk,
                    naming.share_label(self.election_id, pseudonym, teller.index),
                    zero_randomness=self.hooks.zero_commitment_randomness)
                for teller in self.tellers
            ]

        beta_partials: dict[str, list[PartialDecryption]] = {}
        for pseudonym in self._pseudonyms():
            voter = self.registry[pseudonym]
            if not self.hooks.skip_internal_checks:
                verify_share_proofs(
                    self.params, self.election_pk, voter.keypair.pk,
                    shares[pseudonym],
                    lambda s: naming.share_label(self.election_id, s.voter, s.teller))
            combined = combine_commitment_ciphertext(
                self.params, shares[pseudonym], assignments[pseudonym])
            label = naming.beta_label(self.election_id, pseudonym)
            partials = [t.partial_decrypt(combined, label) for t in self.tellers]
            if self.hooks.forge_beta_partial is not None:
                partials = [self._forge_partial(d)
                            if d.teller == self.hooks.forge_beta_partial else d
                            for d in partials]
            voter.beta = combine_partials(
                self.params, combined, partials, cfg.threshold,
                self.public_shares, label,
                verify=not self.hooks.skip_internal_checks)
            beta_partials[pseudonym] = partials

        self._publish_commitments(shares, beta_partials)
        self._advance(Phase.COMMITMENTS_ISSUED)
        self.save()

    def _forge_partial(self, d: PartialDecryption) -> PartialDecryption:
        forged = self.params.mul(d.value, self.params.generator)
        return PartialDecryption(teller=d.teller, value=forged, proof=d.proof)

    def _publish_params(self) -> None:
        cfg = self.config
        rows = [
            ["election", self.election_id],
            ["bits", cfg.bits],
            ["p", self.params.p],
            ["q", self.params.q],
            ["g", self.params.g],
            ["pk", self.election_pk.value],
            ["tellers", cfg.tellers],
            ["threshold", cfg.threshold],
            ["ledger_nodes", cfg.ledger_nodes],
            ["ledger_quorum", cfg.ledger_quorum],
            ["voters", cfg.voters],
        ]
        for j in sorted(self.public_shares):
            rows.append([f"teller_pk_{j}", self.public_shares[j].value])
        self.wbb.publish(self.election_id, naming.PARAMS_FILE,
                         _csv_bytes(["key", "value"], rows))

    def _publish_commitments(self, shares: dict[str, list[CommitmentShare]],
                             beta_partials: dict[str, list[PartialDecryption]]) -> None:
        share_rows = []
        for pseudonym in self._pseudonyms():
            for share in shares[pseudonym]:
                share_rows.append([
                    pseudonym, share.teller,
                    share.enc_exp.c1.value, share.enc_exp.c2.value,
                    share.enc_keyed.c1.value, share.enc_keyed.c2.value,
                    same_exponent_to_cell(share.proof),
                ])
        self.wbb.publish(
            self.election_id, naming.COMMITMENT_SHARES_FILE,
            _csv_bytes(["pseudonym", "teller", "e1_c1", "e1_c2", "e2_c1", "e2_c2",
                        "proof"], share_rows))

        beta_rows = [[p, self.registry[p].beta.value] for p in self._pseudonyms()]
        self.wbb.publish(self.election_id, naming.BETAS_FILE,
                         _csv_bytes(["pseudonym", "beta"], beta_rows))

        proof_rows = []
        for pseudonym in self._pseudonyms():
            for d in beta_partials[pseudonym]:
                proof_rows.append([pseudonym, d.teller, d.value.value,
                                   chaum_pedersen_to_cell(d.proof)])
        self.wbb.publish(self.election_id, naming.BETA_PROOFS_FILE,
                         _csv_bytes(["pseudonym", "teller", "partial", "proof"],
                                    proof_rows))

        voter_rows = [[p, self.registry[p].keypair.pk.value,
                       self.registry[p].dsa.y.value, self.registry[p].beta.value]
                      for p in self._pseudonyms()]
        self.wbb.publish(self.election_id, naming.VOTERS_FILE,
                         _csv_bytes(["pseudonym", "pk", "dsa_pk", "beta"], voter_rows))

    # --- vote import -------------------------------------------------------------

    def import_votes(self, data: bytes) -> int:
        """Ingest the legacy end-of-election export. One latest row per
        (pseudonym, race) is retained; builds vote maps, encrypts and signs
        each ballot, and publishes the record files."""
        self._require("import_votes", [Phase.COMMITMENTS_ISSUED])
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise VoteImportError(f"not valid UTF-8: {exc}") from None
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise VoteImportError("empty file") from None
        if header != ["pseudonym", "race", "vote_text"]:
            raise VoteImportError(
                "header must be exactly pseudonym,race,vote_text", line=1)
        latest: dict[tuple[str, str], str] = {}
        for line_no, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != 3:
                raise VoteImportError(f"expected 3 columns, got {len(cells)}",
                                      line=line_no)
            pseudonym, race, vote_text = cells
            if pseudonym not in self.registry:
                raise VoteImportError(f"unknown pseudonym {pseudonym!r}", line=line_no)
            if not _race_name_ok(race):
                raise VoteImportError(f"invalid race name {race!r}", line=line_no)
            if vote_text == "":
                raise VoteImportError("empty vote_text", line=line_no)
            latest[(pseudonym, race)] = vote_text

        self.races = sorted({race for _, race in latest})
        assignments = self._tracker_assignments()
        for race in self.races:
            texts = [text for (_, r), text in latest.items() if r == race]
            self.votemaps[race] = build_vote_map(
                self.params, texts, self._master.derive(f"votemap/{race}"))
        for race in self.races:
            records: list[VoteRecord] = []
            for pseudonym in self._pseudonyms():
                key = (pseudonym, race)
                if key not in latest:
                    continue
                voter = self.registry[pseudonym]
                voter.voted_races.add(race)
                records.append(build_record(
                    self.params, self.election_pk, latest[key],
                    self.votemaps[race], assignments[pseudonym], voter.beta,
                    voter.keypair.pk, voter.dsa,
                    naming.ballot_label(self.election_id, race, pseudonym),
                    self._master.derive(f"ballot/{race}/{pseudonym}")))
            self.wbb.publish(self.election_id, naming.records_file(race),
                             records_to_csv(self.params, records))
        self._advance(Phase.VOTES_IMPORTED)
        self.save()
        return len(latest)

    def _tracker_assignments(self) -> dict[str, Ciphertext]:
        out_name = mix_file_name(naming.TRACKER_MIX_PHASE, self.config.tellers, "out")
        rows = rows_from_csv(self.params,
                             self.wbb.get_verified(self.election_id, out_name))
        return {pseudonym: rows[i][0]
                for i, pseudonym in enumerate(self._pseudonyms())}

    # --- mixing and decryption ------------------------------------------------------

    def mix_and_decrypt(self) -> list[tuple[int, str, str]]:
        """Mix the (tracker, vote) ciphertext pairs per race, audit the mix,
        threshold-decrypt with proofs, and publish the plaintext list."""
        self._require("mix_and_decrypt", [Phase.VOTES_IMPORTED])
        self._reseed_tellers("mix")
        mixed_rows: list[tuple[int, str, str]] = []
        proof_rows: list[list] = []
        table = table_from_csv(self.params, self.wbb.get_verified(
            self.election_id, naming.TRACKERS_FILE))
        lookup = table_lookup(table)
        for race in self.races:
            records = records_from_csv(self.params, self.wbb.get_verified(
                self.election_id, naming.records_file(race)))
            pairs = [(rec.tracker_ct, rec.vote_ct) for rec in records]
            phase = naming.vote_mix_phase(race)
            out = run_mix(self.params, self.election_pk, self._mix_nodes(phase),
                          pairs, self.wbb, self.election_id, phase)
            if not self.hooks.skip_internal_checks:
                verdict = verify_mix(self.params, self.election_pk, self.wbb,
                                     self.election_id, phase,
                                     self.config.tellers, pairs)
                if not verdict.ok:
                    raise MixHalted(
                        f"vote mix audit failed at node {verdict.node}: {verdict.reason}")
            for i, (tracker_ct, vote_ct) in enumerate(out):
                tracker_el = self._decrypt_published(
                    tracker_ct, naming.decrypt_label(self.election_id, phase, i,
                                                     "tracker"),
                    proof_rows, race, i, "tracker")
                vote_el = self._decrypt_published(
                    vote_ct, naming.decrypt_label(self.election_id, phase, i, "vote"),
                    proof_rows, race, i, "vote")
                tracker = lookup.get(tracker_el.value)
                if tracker is None:
                    raise MixHalted(
                        f"race {race} row {i}: decrypted tracker not in table")
                vmap = self.votemaps[race]
                if vote_el.value not in vmap.by_element:
                    raise MixHalted(
                        f"race {race} row {i}: decrypted vote not in vote map")
                mixed_rows.append((tracker.number, race, vmap.decode(vote_el)))
        for race in self.races:
            self.wbb.publish(self.election_id, naming.vote_map_file(race),
                             vote_map_to_csv(self.votemaps[race]))
        self.wbb.publish(self.election_id, naming.MIXED_FILE,
                         _csv_bytes(["tracker", "race", "vote_text"],
                                    [list(row) for row in mixed_rows]))
        self.wbb.publish(self.election_id, naming.MIXED_PROOFS_FILE,
                         _csv_bytes(["race", "row", "component", "teller",
                                     "partial", "proof"], proof_rows))
        self._advance(Phase.MIXED)
        self.save()
        return mixed_rows

    def _decrypt_published(self, ct: Ciphertext, label: str, proof_rows: list[list],
                           race: str, row: int, component: str) -> GroupElement:
        partials = [t.partial_decrypt(ct, label) for t in self.tellers]
        plaintext = combine_partials(self.params, ct, partials,
                                     self.config.threshold, self.public_shares,
                                     label,
                                     verify=not self.hooks.skip_internal_checks)
        for d in partials:
            proof_rows.append([race, row, component, d.teller, d.value.value,
                               chaum_pedersen_to_cell(d.proof)])
        return plaintext

    # --- notification ---------------------------------------------------------------

    def notify(self) -> bytes:
        """Collect and check every teller's alpha reveals, assemble each
        voter's alpha, and export alphas.csv for the legacy provider."""
        self._require("notify", [Phase.MIXED])
        self._reseed_tellers("notify")
        for teller in self.tellers:
            teller.allow_reveals()
        published = self._published_shares()
        for pseudonym in self._pseudonyms():
            voter = self.registry[pseudonym]
            reveals = []
            for teller in self.tellers:
                reveals.append(teller.reveal_alpha_share(pseudonym))
            if len({r.teller for r in reveals}) != self.config.tellers:
                raise NotifyError("alpha assembly requires a reveal from every teller")
            voter.alpha = assemble_alpha(self.params, self.election_pk, reveals,
                                         published[pseudonym])
        data = _csv_bytes(
            ["pseudonym", "alpha", "beta"],
            [[p, self.registry[p].alpha.value, self.registry[p].beta.value]
             for p in self._pseudonyms()])
        self.wbb.publish(self.election_id, naming.ALPHAS_FILE, data)
        self._advance(Phase.NOTIFIED)
        self.save()
        return data

    def _published_shares(self) -> dict[str, dict[int, CommitmentShare]]:
        """Reload the published commitment shares (public data) keyed by
        voter and teller, for reveal validation."""
        data = self.wbb.get_verified(self.election_id, naming.COMMITMENT_SHARES_FILE)
        reader = csv.reader(io.StringIO(data.decode("utf-8")))
        next(reader)
        out: dict[str, dict[int, CommitmentShare]] = {}
        for cells in reader:
            share = CommitmentShare(
                voter=cells[0], teller=int(cells[1]),
                enc_exp=Ciphertext(self.params.element(int(cells[2])),
                                   self.params.element(int(cells[3]))),
                enc_keyed=Ciphertext(self.params.element(int(cells[4])),
                                     self.params.element(int(cells[5]))),
                proof=same_exponent_from_cell(self.params, cells[6]))
            out.setdefault(share.voter, {})[share.teller] = share
        return out

    # --- tally -------------------------------------------------------------------------

    def tally(self) -> TallyResult:
        """Plurality count per race over the published mixed list."""
        self._require("tally", [Phase.MIXED, Phase.NOTIFIED])
        mixed = self._mixed_rows()
        counts: dict[str, dict[str, int]] = {}
        for _, race, text in mixed:
            counts.setdefault(race, {})
            counts[race][text] = counts[race].get(text, 0) + 1
        winners: dict[str, list[str]] = {}
        for race, race_counts in counts.items():
            seats = self.config.seats.get(race, 1)
            ordered = sorted(race_counts.items(), key=lambda kv: (-kv[1], kv[0]))
            if len(ordered) <= seats:
                winners[race] = [text for text, _ in ordered]
            else:
                boundary = ordered[seats - 1][1]
                winners[race] = [text for text, n in ordered if n >= boundary]
        rows = []
        for race in sorted(counts):
            ordered = sorted(counts[race].items(), key=lambda kv: (-kv[1], kv[0]))
            for text, n in ordered:
                rows.append([race, text, n, int(text in winners[race])])
        self.wbb.publish(self.election_id, naming.TALLY_FILE,
                         _csv_bytes(["race", "vote_text", "count", "winner"], rows))
        self._advance(Phase.TALLIED)
        self.save()
        return TallyResult(counts=counts, winners=winners, total=len(mixed))

    def _mixed_rows(self) -> list[tuple[int, str, str]]:
        data = self.wbb.get_verified(self.election_id, naming.MIXED_FILE)
        reader = csv.reader(io.StringIO(data.decode("utf-8")))
        next(reader)
        return [(int(cells[0]), cells[1], cells[2]) for cells in reader]

    # --- voter-facing verification --------------------------------------------------------

    def verify_vote(self, pseudonym: str, alpha: int, beta: int) -> VoteCheck:
        """Open the commitment with the stored trapdoor key and look the
        tracker up in the published mixed list."""
        self._require("verify_vote", [Phase.MIXED, Phase.NOTIFIED, Phase.TALLIED])
        if pseudonym not in self.registry:
            raise KeyError(f"unknown pseudonym {pseudonym!r}")
        voter = self.registry[pseudonym]
        table = table_from_csv(self.params, self.wbb.get_verified(
            self.election_id, naming.TRACKERS_FILE))
        tracker = open_commitment(self.params, voter.keypair.sk,
                                  self.params.element(alpha),
                                  self.params.element(beta), table)
        votes = {race: text for n, race, text in self._mixed_rows()
                 if n == tracker.number}
        if not votes:
            if voter.voted_races:
                raise IntegrityAlarm(
                    f"voter {pseudonym} cast a ballot but tracker "
                    f"{tracker.number} is absent from the mixed list")
            return VoteCheck(tracker=tracker.number, votes={},
                             status="no-recorded-ballot")
        return VoteCheck(tracker=tracker.number, votes=votes, status="ok")

    def status(self) -> dict:
        return {
            "election": self.election_id,
            "phase": self.phase.value,
            "published": self.wbb.file_names(self.election_id),
        }

    # --- persistence ---------------------------------------------------------------------

    def _state_dir(self) -> Path:
        return self.workspace / "state"

    def save(self) -> None:
        state_dir = self._state_dir()
        (state_dir / "tellers").mkdir(parents=True, exist_ok=True)
        meta = {
            "phase": self.phase.value,
            "races": self.races,
        }
        if self.params is not None:
            meta["params"] = {"p": str(self.params.p), "q": str(self.params.q),
                              "g": str(self.params.g), "bits": self.params.bits}
            meta["election_pk"] = str(self.election_pk.value)
            meta["public_shares"] = {str(j): str(e.value)
                                     for j, e in self.public_shares.items()}
        (state_dir / "election.json").write_text(
            json.dumps(meta, sort_keys=True, indent=1), encoding="utf-8")

        rows = []
        for voter in self.registry.values():
            rows.append([
                voter.pseudonym,
                voter.keypair.sk.value, voter.keypair.pk.value,
                voter.dsa.x.value, voter.dsa.y.value,
                voter.beta.value if voter.beta else "",
                voter.alpha.value if voter.alpha else "",
                ";".join(sorted(voter.voted_races)),
            ])
        (state_dir / "registry.csv").write_bytes(_csv_bytes(
            ["pseudonym", "el_sk", "el_pk", "dsa_x", "dsa_y", "beta", "alpha",
             "voted_races"], rows))

        map_rows = []
        for race in sorted(self.votemaps):
            for entry in self.votemaps[race].entries:
                map_rows.append([race, entry.text, entry.exponent.value])
        (state_dir / "votemaps.csv").write_bytes(_csv_bytes(
            ["race", "vote_text", "v"], map_rows))

        for teller in self.tellers:
            teller.save(state_dir / "tellers" / f"teller-{teller.index}.txt")

    @classmethod
    def load(cls, workspace: Path, hooks: Hooks | None = None,
             config_path: Path | None = None) -> "ElectionOrchestrator":
        workspace = Path(workspace)
        if config_path is None:
            config_path = workspace / "election.ini"
        config = ElectionConfig.from_ini(
            Path(config_path).read_text(encoding="utf-8"))
        orch = cls(config, workspace, hooks)
        state_dir = orch._state_dir()
        meta = json.loads((state_dir / "election.json").read_text(encoding="utf-8"))
        orch.phase = Phase(meta["phase"])
        orch.races = meta["races"]
        if "params" in meta:
            p = meta["params"]
            orch.params = GroupParams(p=int(p["p"]), q=int(p["q"]), g=int(p["g"]),
                                      bits=int(p["bits"]))
            orch.election_pk = GroupElement(int(meta["election_pk"]))
            orch.public_shares = {int(j): GroupElement(int(v))
                                  for j, v in meta["public_shares"].items()}
        with (state_dir / "registry.csv").open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                voter = VoterRow(
                    pseudonym=row["pseudonym"],
                    keypair=ElGamalKeyPair(sk=Exponent(int(row["el_sk"])),
                                           pk=GroupElement(int(row["el_pk"]))),
                    dsa=DsaKeyPair(x=Exponent(int(row["dsa_x"])),
                                   y=GroupElement(int(row["dsa_y"]))),
                    beta=GroupElement(int(row["beta"])) if row["beta"] else None,
                    alpha=GroupElement(int(row["alpha"])) if row["alpha"] else None,
                    voted_races=set(row["voted_races"].split(";"))
                    if row["voted_races"] else set(),
                )
                orch.registry[voter.pseudonym] = voter
        votemaps_path = state_dir / "votemaps.csv"
        if votemaps_path.exists() and orch.params is not None:
            by_race: dict[str, list[tuple[str, int]]] = {}
            with votemaps_path.open(newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    by_race.setdefault(row["race"], []).append(
                        (row["vote_text"], int(row["v"])))
            for race, pairs in by_race.items():
                entries = [VoteMapEntry(text=text, exponent=Exponent(v),
                                        element=encode_to_group(orch.params, v))
                           for text, v in pairs]
                orch.votemaps[race] = VoteMap(entries)
        tellers_dir = state_dir / "tellers"
        if tellers_dir.exists() and orch.params is not None:
            paths = sorted(tellers_dir.glob("teller-*.txt"),
                           key=lambda p: int(p.stem.split("-")[1]))
            orch.tellers = [
                Teller.load(path, orch.params,
                            orch._master.derive(f"teller/{i + 1}/resume"))
                for i, path in enumerate(paths)
            ]
        return orch

    @classmethod
    def create(cls, config: ElectionConfig, workspace: Path,
               hooks: Hooks | None = None,
               config_path: Path | None = None) -> "ElectionOrchestrator":
        workspace = Path(workspace)
        workspace.mkdir(parents=True, exist_ok=True)
        if config_path is None:
            config_path = workspace / "election.ini"
        Path(config_path).write_text(config.to_ini(), encoding="utf-8")
        orch = cls(config, workspace, hooks)
        orch.save()
        return orch
