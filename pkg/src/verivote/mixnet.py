"""Verifiable re-encryption mix: a chain of nodes each applying two
independent shuffle stages, audited by randomized partial checking.

Per node and mid-list row, a public challenge bit (derived from the
bulletin-board entry hash of the node's committed output) selects exactly
one of the two links to open: input->mid or mid->out. Opened links are
checked by re-computing the re-encryption; each revealed half-permutation
must be injective.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass

from .groups import Ciphertext, Exponent, GroupElement, GroupParams, MembershipError, reencrypt
from .ledger import BulletinBoard
from .rng import Prng

MixTuple = tuple[Ciphertext, ...]


class MixConfigError(Exception):
    pass


@dataclass
class NodeShuffleSecret:
    perm_a: list[int]
    perm_b: list[int]
    exps_a: list[tuple[int, ...]]
    exps_b: list[tuple[int, ...]]


@dataclass(frozen=True)
class Opening:
    row: int
    bit: int
    link: int
    exponents: tuple[int, ...]


@dataclass
class NodeAudit:
    node: int
    bits: list[int]
    openings: list[Opening]


@dataclass
class MixVerification:
    ok: bool
    node: int | None = None
    row: int | None = None
    stage: str | None = None
    reason: str = ""


class MixNode:
    """One mix node. ``identity=True`` is a test hook producing the identity
    permutation with zero exponents; ``cheat_row`` substitutes one output
    ciphertext after the honest shuffle (adversarial test hook)."""

    def __init__(self, index: int, rng: Prng, identity: bool = False,
                 cheat_row: int | None = None):
        self.index = index
        self._rng = rng
        self.identity = identity
        self.cheat_row = cheat_row

    def _stage(self, params: GroupParams, pk: GroupElement,
               rows: list[MixTuple]) -> tuple[list[MixTuple], list[int], list[tuple[int, ...]]]:
        n = len(rows)
        arity = len(rows[0]) if rows else 0
        if self.identity:
            perm = list(range(n))
            exps = [tuple(0 for _ in range(arity)) for _ in range(n)]
        else:
            perm = self._rng.permutation(n)
            exps = [tuple(self._rng.below(params.q) for _ in range(arity))
                    for _ in range(n)]
        shuffled = [
            tuple(reencrypt(params, pk, ct, Exponent(e))
                  for ct, e in zip(rows[perm[i]], exps[i]))
            for i in range(n)
        ]
        return shuffled, perm, exps

    def shuffle(self, params: GroupParams, pk: GroupElement,
                rows: list[MixTuple]) -> tuple[list[MixTuple], list[MixTuple], NodeShuffleSecret]:
        arities = {len(row) for row in rows}
        if len(arities) > 1:
            raise MixConfigError("row arity must be uniform within a batch")
        mid, perm_a, exps_a = self._stage(params, pk, rows)
        n = len(rows)
        # stage b maps mid index i to output position perm_b[i]
        if self.identity:
            perm_b = list(range(n))
            exps_b = [tuple(0 for _ in row) for row in mid]
        else:
            perm_b = self._rng.permutation(n)
            exps_b = [tuple(self._rng.below(params.q) for _ in row) for row in mid]
        out: list[MixTuple] = [()] * n
        for i in range(n):
            out[perm_b[i]] = tuple(
                reencrypt(params, pk, ct, Exponent(e))
                for ct, e in zip(mid[i], exps_b[i]))
        if self.cheat_row is not None and n > 1:
            # replace one committed output with a re-encryption of a different
            # mid row; the audit catches this iff that row's out-link is opened
            victim = next(i for i in range(n) if perm_b[i] == self.cheat_row)
            source = (victim + 1) % n
            out[self.cheat_row] = tuple(
                reencrypt(params, pk, ct, Exponent(self._rng.below(params.q)))
                for ct in mid[source])
        return mid, out, NodeShuffleSecret(perm_a, perm_b, exps_a, exps_b)


def mix_file_name(phase: str, node: int, kind: str) -> str:
    return f"mix-{phase}-node{node}-{kind}.csv"


def rows_to_csv(rows: list[MixTuple], arity: int) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header: list[str] = []
    for k in range(arity):
        header += [f"c1_{k}", f"c2_{k}"]
    writer.writerow(header)
    for row in rows:
        cells: list[int] = []
        for ct in row:
            cells += [ct.c1.value, ct.c2.value]
        writer.writerow(cells)
    return out.getvalue().encode("utf-8")


def rows_from_csv(params: GroupParams, data: bytes) -> list[MixTuple]:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    header = next(reader)
    arity = len(header) // 2
    rows: list[MixTuple] = []
    for cells in reader:
        cts = []
        for k in range(arity):
            cts.append(Ciphertext(params.element(int(cells[2 * k])),
                                  params.element(int(cells[2 * k + 1]))))
        rows.append(tuple(cts))
    return rows


def audit_to_csv(audit: NodeAudit) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "bit", "link", "exponents"])
    for opening in audit.openings:
        writer.writerow([opening.row, opening.bit, opening.link,
                         ":".join(str(e) for e in opening.exponents)])
    return out.getvalue().encode("utf-8")


def audit_from_csv(node: int, data: bytes) -> NodeAudit:
    reader = csv.reader(io.StringIO(data.decode("utf-8")))
    next(reader)
    openings = []
    for cells in reader:
        exps = tuple(int(e) for e in cells[3].split(":")) if cells[3] else ()
        openings.append(Opening(row=int(cells[0]), bit=int(cells[1]),
                                link=int(cells[2]), exponents=exps))
    return NodeAudit(node=node, bits=[o.bit for o in openings], openings=openings)


def derive_challenge_bits(seed_hex: str, node: int, count: int) -> list[int]:
    bits = []
    for i in range(count):
        digest = hashlib.sha256(f"{seed_hex}|node{node}|row{i}".encode()).digest()
        bits.append(digest[-1] & 1)
    return bits


def run_mix(params: GroupParams, pk: GroupElement, nodes: list[MixNode],
            rows: list[MixTuple], wbb: BulletinBoard, election: str,
            phase: str) -> list[MixTuple]:
    """Chain the nodes, publishing each node's lists and audit openings."""
    if len(nodes) < 2:
        raise MixConfigError("a mix needs at least two nodes")
    arity = len(rows[0]) if rows else 1
    current = rows
    for node in nodes:
        wbb.publish(election, mix_file_name(phase, node.index, "in"),
                    rows_to_csv(current, arity))
        mid, out, secret = node.shuffle(params, pk, current)
        wbb.publish(election, mix_file_name(phase, node.index, "mid"),
                    rows_to_csv(mid, arity))
        out_name = mix_file_name(phase, node.index, "out")
        wbb.publish(election, out_name, rows_to_csv(out, arity))
        seed = wbb.entry_hash_for(election, out_name)
        bits = derive_challenge_bits(seed, node.index, len(current))
        openings = []
        for i, bit in enumerate(bits):
            if bit == 0:
                openings.append(Opening(row=i, bit=0, link=secret.perm_a[i],
                                        exponents=secret.exps_a[i]))
            else:
                openings.append(Opening(row=i, bit=1, link=secret.perm_b[i],
                                        exponents=secret.exps_b[i]))
        audit = NodeAudit(node=node.index, bits=bits, openings=openings)
        wbb.publish(election, mix_file_name(phase, node.index, "audit"),
                    audit_to_csv(audit))
        current = out
    return current


def _reencrypts_to(params: GroupParams, pk: GroupElement, source: MixTuple,
                   target: MixTuple, exponents: tuple[int, ...]) -> bool:
    if len(source) != len(target) or len(source) != len(exponents):
        return False
    for ct, expected, e in zip(source, target, exponents):
        if reencrypt(params, pk, ct, Exponent(e)) != expected:
            return False
    return True


def verify_mix(params: GroupParams, pk: GroupElement, wbb: BulletinBoard,
               election: str, phase: str, node_count: int,
               expected_input: list[MixTuple] | None = None) -> MixVerification:
    """Recompute challenges from the ledger and check every opened link."""
    prev_out: list[MixTuple] | None = expected_input
    for node in range(1, node_count + 1):
        try:
            rows_in = rows_from_csv(params, wbb.get_verified(
                election, mix_file_name(phase, node, "in")))
            mid = rows_from_csv(params, wbb.get_verified(
                election, mix_file_name(phase, node, "mid")))
            out = rows_from_csv(params, wbb.get_verified(
                election, mix_file_name(phase, node, "out")))
            audit = audit_from_csv(node, wbb.get_verified(
                election, mix_file_name(phase, node, "audit")))
        except MembershipError as exc:
            return MixVerification(False, node, None, "parse", str(exc))
        if prev_out is not None and rows_in != prev_out:
            return MixVerification(False, node, None, "chain",
                                   "input does not match previous output")
        if not len(rows_in) == len(mid) == len(out):
            return MixVerification(False, node, None, "shape", "list lengths differ")
        seed = wbb.entry_hash_for(election, mix_file_name(phase, node, "out"))
        expected_bits = derive_challenge_bits(seed, node, len(rows_in))
        if audit.bits != expected_bits:
            return MixVerification(False, node, None, "challenge",
                                   "published bits do not match transcript")
        if [o.row for o in audit.openings] != list(range(len(rows_in))):
            return MixVerification(False, node, None, "audit", "openings not dense")
        links_in = set()
        links_out = set()
        for opening in audit.openings:
            if not 0 <= opening.link < len(rows_in):
                return MixVerification(False, node, opening.row, "audit",
                                       "link index out of range")
            if opening.bit == 0:
                if opening.link in links_in:
                    return MixVerification(False, node, opening.row, "in-mid",
                                           "revealed half-permutation not injective")
                links_in.add(opening.link)
                if not _reencrypts_to(params, pk, rows_in[opening.link],
                                      mid[opening.row], opening.exponents):
                    return MixVerification(False, node, opening.row, "in-mid",
                                           "opened link fails re-encryption check")
            else:
                if opening.link in links_out:
                    return MixVerification(False, node, opening.row, "mid-out",
                                           "revealed half-permutation not injective")
                links_out.add(opening.link)
                if not _reencrypts_to(params, pk, mid[opening.row],
                                      out[opening.link], opening.exponents):
                    return MixVerification(False, node, opening.row, "mid-out",
                                           "opened link fails re-encryption check")
        prev_out = out
    return MixVerification(True)
