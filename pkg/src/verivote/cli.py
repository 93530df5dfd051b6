"""Command-line driver for the election lifecycle, auditing, and voter
vote checks.

Exit codes: 0 success / all checks pass, 1 usage error, 2 verification
failure, 3 phase or threshold error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .ledger import IntegrityViolation, LedgerError, PublishFailedError
from .mixnet import MixConfigError
from .orchestrator import (
    ElectionConfig,
    ElectionOrchestrator,
    IntegrityAlarm,
    MixHalted,
    PhaseError,
    VoteImportError,
)
from .teller import ThresholdError
from .trackers import OpeningFailed
from .verification import verify_election

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_PHASE = 3


class _CliParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def _build_parser() -> _CliParser:
    parser = _CliParser(prog="verivote")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--workspace", required=True, type=Path)
        cmd.add_argument("--config", type=Path, default=None,
                         help="election config path (default: "
                              "<workspace>/election.ini)")
        cmd.add_argument("--json", action="store_true",
                         help="machine-readable report on stdout")
        return cmd

    init = add("init", "write an election config and empty workspace")
    init.add_argument("--election-id", required=True)
    init.add_argument("--voters", type=int, required=True)
    init.add_argument("--tellers", type=int, default=4)
    init.add_argument("--threshold", type=int, default=3)
    init.add_argument("--ledger-nodes", type=int, default=4)
    init.add_argument("--ledger-quorum", type=int, default=3)
    init.add_argument("--bits", type=int, default=512)
    init.add_argument("--seed", type=int, default=1)

    add("setup", "generate keys, trackers, and commitments")

    imp = add("import-votes", "ingest the legacy plaintext vote export")
    imp.add_argument("--votes", required=True, type=Path,
                     help="CSV with header pseudonym,race,vote_text")

    add("mix", "mix, audit, and decrypt the cast ballots")
    add("notify", "assemble and export voter alpha values")
    add("tally", "count the mixed votes and publish the result")
    add("publish-status", "print phase and published artifacts")
    add("verify-election", "run the universal verification checks")
    add("ledger-audit", "audit ledger chains and file hashes")

    vv = add("verify-vote", "open a voter's commitment and show their vote")
    vv.add_argument("--pseudonym", required=True)
    vv.add_argument("--alpha", required=True)
    vv.add_argument("--beta", required=True)

    demo = add("demo", "run a complete seeded 20-voter election and audit")
    demo.add_argument("--seed", type=int, default=1)
    return parser


def _emit(args, payload: dict, human: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in human:
            print(line)


def _load(args) -> ElectionOrchestrator:
    return ElectionOrchestrator.load(args.workspace, config_path=args.config)


def _cmd_init(args) -> int:
    config = ElectionConfig(
        election_id=args.election_id, voters=args.voters, tellers=args.tellers,
        threshold=args.threshold, ledger_nodes=args.ledger_nodes,
        ledger_quorum=args.ledger_quorum, bits=args.bits, seed=args.seed)
    ElectionOrchestrator.create(config, args.workspace, config_path=args.config)
    _emit(args, {"workspace": str(args.workspace), "election": config.election_id},
          [f"initialized {config.election_id} in {args.workspace}"])
    return EXIT_OK


def _cmd_setup(args) -> int:
    orch = _load(args)
    orch.setup()
    _emit(args, {"phase": orch.phase.value},
          [f"setup complete; phase {orch.phase.value}"])
    return EXIT_OK


def _cmd_import(args) -> int:
    orch = _load(args)
    count = orch.import_votes(args.votes.read_bytes())
    _emit(args, {"ballots": count}, [f"imported {count} ballots"])
    return EXIT_OK


def _cmd_mix(args) -> int:
    orch = _load(args)
    rows = orch.mix_and_decrypt()
    _emit(args, {"rows": len(rows)}, [f"mixed and decrypted {len(rows)} rows"])
    return EXIT_OK


def _cmd_notify(args) -> int:
    orch = _load(args)
    data = orch.notify()
    count = max(0, len(data.decode("utf-8").strip().splitlines()) - 1)
    _emit(args, {"alphas": count}, [f"alphas.csv exported for {count} voters"])
    return EXIT_OK


def _cmd_tally(args) -> int:
    orch = _load(args)
    result = orch.tally()
    lines = []
    for race in sorted(result.counts):
        for text, n in sorted(result.counts[race].items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{race}: {text} = {n}")
        lines.append(f"{race}: winners: {', '.join(result.winners[race])}")
    _emit(args, {"counts": result.counts, "winners": result.winners,
                 "total": result.total}, lines)
    return EXIT_OK


def _cmd_status(args) -> int:
    orch = _load(args)
    status = orch.status()
    _emit(args, status,
          [f"election {status['election']}, phase {status['phase']}"]
          + [f"  {name}" for name in status["published"]])
    return EXIT_OK


def _cmd_verify_election(args) -> int:
    orch = _load(args)
    report = verify_election(orch.wbb, orch.election_id)
    payload = {"election": report.election, "ok": report.ok,
               "checks": [{"check": c.name, "status": c.status, "locus": c.detail}
                          for c in report.checks]}
    lines = report.lines()
    lines.append("all checks passed" if report.ok else
                 f"FAILED checks: {', '.join(report.failed_checks())}")
    _emit(args, payload, lines)
    return EXIT_OK if report.ok else EXIT_VERIFICATION


def _cmd_ledger_audit(args) -> int:
    orch = _load(args)
    audit = orch.wbb.audit(orch.election_id)
    export_path = Path(args.workspace) / f"ledger-{orch.election_id}.csv"
    export_path.write_bytes(orch.wbb.export_ledger(orch.election_id))
    ok = audit.ok
    payload = {
        "ok": ok,
        "nodes": {str(j): v for j, v in audit.node_chain_ok.items()},
        "files": [{"name": f.name, "agreement": f.agreement, "ok": bool(f.lake_ok)}
                  for f in audit.files],
    }
    lines = [f"node {j}: {'ok' if v else 'INCONSISTENT'}"
             for j, v in audit.node_chain_ok.items()]
    lines += [f"{f.name}: agreement {f.agreement}, "
              f"{'ok' if f.lake_ok else 'HASH MISMATCH'}" for f in audit.files]
    lines.append(f"ledger exported to {export_path}")
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_VERIFICATION


def _cmd_verify_vote(args) -> int:
    orch = _load(args)
    check = orch.verify_vote(args.pseudonym, int(args.alpha), int(args.beta))
    payload = {"pseudonym": args.pseudonym, "tracker": check.tracker,
               "votes": check.votes, "status": check.status}
    if check.status == "ok":
        lines = [f"tracker {check.tracker}"]
        lines += [f"{race}: {text}" for race, text in sorted(check.votes.items())]
    else:
        lines = [f"tracker {check.tracker}: no recorded ballot (did not vote)"]
    _emit(args, payload, lines)
    return EXIT_OK


def _demo_votes(pseudonyms: list[str], seed: int) -> bytes:
    from .rng import Prng
    rng = Prng(seed, "demo-votes")
    candidates = ["ASH", "BIRCH", "CEDAR", "DAMSON"]
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["pseudonym", "race", "vote_text"])
    for pseudonym in pseudonyms:
        writer.writerow([pseudonym, "council", candidates[rng.below(len(candidates))]])
    return out.getvalue().encode("utf-8")


def _cmd_demo(args) -> int:
    config = ElectionConfig(election_id="demo", voters=20, seed=args.seed)
    orch = ElectionOrchestrator.create(config, args.workspace,
                                       config_path=args.config)
    orch.setup()
    orch = _load(args)
    ballots = orch.import_votes(_demo_votes(list(orch.registry), args.seed))
    orch.mix_and_decrypt()
    orch.notify()
    result = orch.tally()
    report = verify_election(orch.wbb, orch.election_id)
    lines = [f"imported {ballots} ballots"]
    for race in sorted(result.counts):
        for text, n in sorted(result.counts[race].items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{race}: {text} = {n}")
        lines.append(f"{race}: winners: {', '.join(result.winners[race])}")
    lines += report.lines()
    lines.append("all checks passed" if report.ok else
                 f"FAILED checks: {', '.join(report.failed_checks())}")
    _emit(args, {"ballots": ballots, "counts": result.counts,
                 "winners": result.winners, "ok": report.ok}, lines)
    return EXIT_OK if report.ok else EXIT_VERIFICATION


_COMMANDS = {
    "init": _cmd_init,
    "setup": _cmd_setup,
    "import-votes": _cmd_import,
    "mix": _cmd_mix,
    "notify": _cmd_notify,
    "tally": _cmd_tally,
    "publish-status": _cmd_status,
    "verify-election": _cmd_verify_election,
    "ledger-audit": _cmd_ledger_audit,
    "verify-vote": _cmd_verify_vote,
    "demo": _cmd_demo,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, VoteImportError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PhaseError, ThresholdError, PublishFailedError, MixConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHASE
    except (MixHalted, IntegrityAlarm, IntegrityViolation, OpeningFailed,
            LedgerError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
