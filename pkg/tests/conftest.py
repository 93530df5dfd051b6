"""Shared fixtures: the exhaustively checkable toy group, a mid-size group
fast enough for whole-election sweeps, and an election factory."""

from __future__ import annotations

import contextlib
import csv
import io
from pathlib import Path

import pytest

import verivote.orchestrator as orchestrator_module
from verivote.groups import GroupParams
from verivote.orchestrator import ElectionConfig, ElectionOrchestrator, Hooks

# p = 2q + 1 would be tiny here; this group is small enough to enumerate:
# the order-11 subgroup of Z_23* generated by 4.
TOY = GroupParams(p=23, q=11, g=4, bits=5)

# 96-bit modulus, 48-bit prime order: large enough that 8-digit trackers
# encode injectively and accidental proof collisions never occur, small
# enough that a whole election runs in tens of milliseconds.
SMALL = GroupParams(
    p=39614081257145820333142442783,
    q=281474976710677,
    g=5484329739722420110555599119,
    bits=96,
)


@pytest.fixture
def toy():
    return TOY


@pytest.fixture
def small():
    return SMALL


@contextlib.contextmanager
def small_group():
    """Route parameter generation to the fixed mid-size group."""
    original = orchestrator_module.generate_params
    orchestrator_module.generate_params = lambda bits, rng: SMALL
    try:
        yield
    finally:
        orchestrator_module.generate_params = original


def votes_csv(rows: list[tuple[str, str, str]]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["pseudonym", "race", "vote_text"])
    writer.writerows(rows)
    return out.getvalue().encode("utf-8")


def spread_votes(pseudonyms: list[str], candidates: list[str],
                 race: str = "council") -> list[tuple[str, str, str]]:
    return [(p, race, candidates[i % len(candidates)])
            for i, p in enumerate(pseudonyms)]


def run_election(workspace: Path, seed: int = 1, voters: int = 6,
                 candidates: list[str] | None = None,
                 hooks: Hooks | None = None,
                 through: str = "tally",
                 votes: bytes | None = None,
                 **config_kwargs) -> ElectionOrchestrator:
    """Create and drive a small-group election through the given phase."""
    candidates = candidates or ["ALDER", "BRIAR", "CLOVER"]
    config = ElectionConfig(election_id=config_kwargs.pop("election_id", "test"),
                            voters=voters, seed=seed, **config_kwargs)
    with small_group():
        orch = ElectionOrchestrator.create(config, workspace, hooks)
        orch.setup()
    if through == "setup":
        return orch
    if votes is None:
        votes = votes_csv(spread_votes(list(orch.registry), candidates))
    orch.import_votes(votes)
    if through == "import":
        return orch
    orch.mix_and_decrypt()
    if through == "mix":
        return orch
    orch.notify()
    if through == "notify":
        return orch
    orch.tally()
    return orch
