"""Published file names and context-label builders shared by the
orchestrator and the universal verifier."""

from __future__ import annotations

PARAMS_FILE = "params.csv"
TRACKERS_FILE = "trackers.csv"
COMMITMENT_SHARES_FILE = "commitment-shares.csv"
BETAS_FILE = "betas.csv"
BETA_PROOFS_FILE = "betas.csv.proofs"
VOTERS_FILE = "voters.csv"
ALPHAS_FILE = "alphas.csv"
MIXED_FILE = "mixed.csv"
MIXED_PROOFS_FILE = "mixed.csv.proofs"
TALLY_FILE = "tally.csv"

TRACKER_MIX_PHASE = "trackers"


def vote_mix_phase(race: str) -> str:
    return f"votes-{race}"


def vote_map_file(race: str) -> str:
    return f"vote-map-{race}.csv"


def records_file(race: str) -> str:
    return f"records-{race}.csv"


def share_label(election: str, voter: str, teller: int) -> str:
    return f"{election}|commitment|{voter}|teller{teller}"


def beta_label(election: str, voter: str) -> str:
    return f"{election}|beta|{voter}"


def ballot_label(election: str, race: str, voter: str) -> str:
    return f"{election}|ballot|{race}|{voter}"


def decrypt_label(election: str, phase: str, row: int, component: str) -> str:
    return f"{election}|decrypt|{phase}|row{row}|{component}"
