"""Append-only bulletin board: a file data lake plus a SHA-256 hash chain
replicated across simulated quorum nodes with threshold acknowledgement.

The ledger stores only hashes; file bytes live in the lake and are
re-hashed on every read. Nothing here can rewrite or remove a committed
entry.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path

GENESIS_HASH = "0" * 64
EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


class LedgerError(Exception):
    pass


class AppendOnlyError(LedgerError):
    pass


class PublishFailedError(LedgerError):
    pass


class IntegrityViolation(LedgerError):
    def __init__(self, election: str, name: str):
        super().__init__(f"integrity violation: {election}/{name}")
        self.name = name


class UnavailableError(LedgerError):
    pass


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    election: str
    name: str
    sha256: str
    prev_hash: str

    def canonical(self) -> bytes:
        return "\n".join(
            [str(self.seq), self.election, self.name, self.sha256, self.prev_hash]
        ).encode("utf-8")

    def entry_hash(self) -> str:
        return sha256_hex(self.canonical())


@dataclass(frozen=True)
class QuorumConfig:
    nodes: int
    threshold: int

    def __post_init__(self):
        if not 1 <= self.threshold <= self.nodes:
            raise ValueError("need 1 <= threshold <= nodes")
        if 3 * self.threshold <= 2 * self.nodes:
            raise ValueError("ack threshold must exceed two thirds of nodes")


class LedgerNode:
    """One replica: per-election chains persisted as a CSV file."""

    def __init__(self, index: int, path: Path | None = None):
        self.index = index
        self.path = path
        self.up = True
        self.chains: dict[str, list[LedgerEntry]] = {}
        if path is not None and path.exists():
            self._load()

    def _load(self) -> None:
        with self.path.open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                entry = LedgerEntry(seq=int(row["seq"]), election=row["election"],
                                    name=row["name"], sha256=row["sha256"],
                                    prev_hash=row["prev_hash"])
                self.chains.setdefault(entry.election, []).append(entry)

    def append(self, entry: LedgerEntry) -> None:
        self.chains.setdefault(entry.election, []).append(entry)
        if self.path is not None:
            new_file = not self.path.exists()
            with self.path.open("a", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                if new_file:
                    writer.writerow(["seq", "election", "name", "sha256", "prev_hash"])
                writer.writerow([entry.seq, entry.election, entry.name,
                                 entry.sha256, entry.prev_hash])

    def entries(self, election: str) -> list[LedgerEntry]:
        return self.chains.get(election, [])


@dataclass
class FileReport:
    name: str
    agreement: int
    quorum_hash: str | None
    lake_ok: bool | None
    detail: str = ""


@dataclass
class LedgerAuditReport:
    node_chain_ok: dict[int, bool]
    files: list[FileReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.node_chain_ok.values()) and all(
            f.quorum_hash is not None and f.lake_ok for f in self.files)


class BulletinBoard:
    """Data lake + replicated hash ledger behind one publish/read facade."""

    def __init__(self, root: Path, quorum: QuorumConfig):
        self.root = Path(root)
        self.quorum = quorum
        nodes_dir = self.root / "nodes"
        nodes_dir.mkdir(parents=True, exist_ok=True)
        self.nodes = [LedgerNode(i, nodes_dir / f"node-{i}.csv")
                      for i in range(1, quorum.nodes + 1)]

    # --- internals -----------------------------------------------------------

    def _lake_path(self, election: str, name: str) -> Path:
        return self.root / "lake" / election / name

    def _quorum_entries(self, election: str) -> list[LedgerEntry]:
        """Longest chain agreed upon by >= threshold nodes, entry by entry."""
        agreed: list[LedgerEntry] = []
        seq = 0
        while True:
            candidates: dict[LedgerEntry, int] = {}
            for node in self.nodes:
                entries = node.entries(election)
                if len(entries) > seq:
                    candidates[entries[seq]] = candidates.get(entries[seq], 0) + 1
            winner = next((e for e, n in candidates.items()
                           if n >= self.quorum.threshold), None)
            if winner is None:
                return agreed
            agreed.append(winner)
            seq += 1

    def _quorum_entry_for(self, election: str, name: str) -> tuple[LedgerEntry, int]:
        matches: dict[LedgerEntry, int] = {}
        for node in self.nodes:
            for entry in node.entries(election):
                if entry.name == name:
                    matches[entry] = matches.get(entry, 0) + 1
        for entry, count in matches.items():
            if count >= self.quorum.threshold:
                return entry, count
        raise UnavailableError(
            f"no quorum of {self.quorum.threshold} nodes agrees on {election}/{name}")

    # --- public operations ---------------------------------------------------

    def publish(self, election: str, name: str, data: bytes) -> LedgerEntry:
        if any(entry.name == name for node in self.nodes
               for entry in node.entries(election)):
            raise AppendOnlyError(f"{election}/{name} already published")
        up_nodes = [node for node in self.nodes if node.up]
        if len(up_nodes) < self.quorum.threshold:
            raise PublishFailedError(
                f"only {len(up_nodes)} of {self.quorum.nodes} nodes up; "
                f"need {self.quorum.threshold} acks")
        chain = self._quorum_entries(election)
        prev = chain[-1].entry_hash() if chain else GENESIS_HASH
        entry = LedgerEntry(seq=len(chain), election=election, name=name,
                            sha256=sha256_hex(data), prev_hash=prev)
        path = self._lake_path(election, name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        for node in up_nodes:
            node.append(entry)
        return entry

    def get_verified(self, election: str, name: str) -> bytes:
        entry, _ = self._quorum_entry_for(election, name)
        path = self._lake_path(election, name)
        if not path.exists():
            raise IntegrityViolation(election, name)
        data = path.read_bytes()
        if sha256_hex(data) != entry.sha256:
            raise IntegrityViolation(election, name)
        return data

    def exists(self, election: str, name: str) -> bool:
        try:
            self._quorum_entry_for(election, name)
            return True
        except UnavailableError:
            return False

    def file_names(self, election: str) -> list[str]:
        return [entry.name for entry in self._quorum_entries(election)]

    def head_hash(self, election: str) -> str:
        chain = self._quorum_entries(election)
        return chain[-1].entry_hash() if chain else GENESIS_HASH

    def entry_hash_for(self, election: str, name: str) -> str:
        entry, _ = self._quorum_entry_for(election, name)
        return entry.entry_hash()

    def set_node_up(self, index: int, up: bool) -> None:
        self.nodes[index - 1].up = up

    def audit(self, election: str) -> LedgerAuditReport:
        """Re-validate every chain link and every file hash."""
        quorum_chain = self._quorum_entries(election)
        node_ok: dict[int, bool] = {}
        for node in self.nodes:
            ok = True
            prev = GENESIS_HASH
            entries = node.entries(election)
            for seq, entry in enumerate(entries):
                if entry.seq != seq or entry.prev_hash != prev:
                    ok = False
                    break
                prev = entry.entry_hash()
            if ok and len(entries) < len(quorum_chain):
                ok = False  # replica is missing committed entries
            if ok:
                for mine, agreed in zip(entries, quorum_chain):
                    if mine != agreed:
                        ok = False
                        break
            node_ok[node.index] = ok
        report = LedgerAuditReport(node_chain_ok=node_ok)
        for entry in quorum_chain:
            _, agreement = self._quorum_entry_for(election, entry.name)
            path = self._lake_path(election, entry.name)
            if not path.exists():
                report.files.append(FileReport(entry.name, agreement, entry.sha256,
                                               None, "missing from data lake"))
                continue
            lake_ok = sha256_hex(path.read_bytes()) == entry.sha256
            detail = "" if lake_ok else "lake bytes do not match quorum hash"
            report.files.append(FileReport(entry.name, agreement, entry.sha256,
                                           lake_ok, detail))
        return report

    def export_ledger(self, election: str) -> bytes:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["seq", "name", "sha256", "prev_hash"])
        for entry in self._quorum_entries(election):
            writer.writerow([entry.seq, entry.name, entry.sha256, entry.prev_hash])
        return out.getvalue().encode("utf-8")
