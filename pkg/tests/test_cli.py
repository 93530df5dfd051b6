"""CLI exit codes, reports, and artifact determinism."""

import csv
import io
import json

from verivote.cli import main

from conftest import small_group, votes_csv


def run_cli(*args):
    return main(list(args))


def test_demo_runs_and_audits(tmp_path, capsys):
    with small_group():
        code = run_cli("demo", "--workspace", str(tmp_path / "w"), "--seed", "42")
    out = capsys.readouterr().out
    assert code == 0
    assert "all checks passed" in out
    assert "council:" in out


def test_demo_deterministic_artifacts(tmp_path):
    with small_group():
        assert run_cli("demo", "--workspace", str(tmp_path / "a"), "--seed", "7") == 0
        assert run_cli("demo", "--workspace", str(tmp_path / "b"), "--seed", "7") == 0
    files_a = sorted(p.relative_to(tmp_path / "a")
                     for p in (tmp_path / "a" / "wbb").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b")
                     for p in (tmp_path / "b" / "wbb").rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_stepped_lifecycle_and_verify_vote(tmp_path, capsys):
    workspace = str(tmp_path / "w")
    votes_path = tmp_path / "votes.csv"
    votes_path.write_bytes(votes_csv([("V001", "q", "A"), ("V002", "q", "B"),
                                      ("V003", "q", "A")]))
    with small_group():
        assert run_cli("init", "--workspace", workspace, "--election-id", "e2e",
                       "--voters", "3", "--seed", "5") == 0
        assert run_cli("setup", "--workspace", workspace) == 0
        assert run_cli("import-votes", "--workspace", workspace,
                       "--votes", str(votes_path)) == 0
        assert run_cli("mix", "--workspace", workspace) == 0
        assert run_cli("notify", "--workspace", workspace) == 0
        assert run_cli("tally", "--workspace", workspace) == 0
        assert run_cli("verify-election", "--workspace", workspace) == 0
    capsys.readouterr()

    alphas = (tmp_path / "w" / "wbb" / "lake" / "e2e" / "alphas.csv").read_text()
    row = next(csv.DictReader(io.StringIO(alphas)))
    code = run_cli("verify-vote", "--workspace", workspace,
                   "--pseudonym", row["pseudonym"],
                   "--alpha", row["alpha"], "--beta", row["beta"])
    out = capsys.readouterr().out
    assert code == 0
    assert "tracker" in out and "q: A" in out


def test_verify_election_exit_two_after_tamper(tmp_path, capsys):
    with small_group():
        assert run_cli("demo", "--workspace", str(tmp_path / "w")) == 0
        lake = tmp_path / "w" / "wbb" / "lake" / "demo" / "tally.csv"
        lake.write_bytes(lake.read_bytes() + b"#")
        code = run_cli("verify-election", "--workspace", str(tmp_path / "w"))
    out = capsys.readouterr().out
    assert code == 2
    assert "file-hashes" in out


def test_phase_error_exit_three(tmp_path, capsys):
    workspace = str(tmp_path / "w")
    with small_group():
        assert run_cli("init", "--workspace", workspace, "--election-id", "e",
                       "--voters", "2") == 0
        code = run_cli("mix", "--workspace", workspace)
    capsys.readouterr()
    assert code == 3


def test_usage_error_exit_one(tmp_path, capsys):
    code = run_cli("setup")  # missing --workspace
    capsys.readouterr()
    assert code == 1
    code = run_cli("import-votes", "--workspace", str(tmp_path),
                   "--votes", str(tmp_path / "missing.csv"))
    capsys.readouterr()
    assert code == 1


def test_json_reports(tmp_path, capsys):
    with small_group():
        code = run_cli("demo", "--workspace", str(tmp_path / "w"),
                       "--seed", "3", "--json")
        out = capsys.readouterr().out
        payload = json.loads(out)
        assert code == 0
        assert payload["ok"] is True
        assert payload["ballots"] == 20

        code = run_cli("verify-election", "--workspace", str(tmp_path / "w"),
                       "--json")
        out = capsys.readouterr().out
        payload = json.loads(out)
        assert payload["ok"] is True
        names = [c["check"] for c in payload["checks"]]
        assert "tally-recount" in names and "vote-mix-audit" in names


def test_config_flag_overrides_default_location(tmp_path, capsys):
    workspace = str(tmp_path / "w")
    config_path = str(tmp_path / "elsewhere.ini")
    with small_group():
        assert run_cli("init", "--workspace", workspace, "--config", config_path,
                       "--election-id", "cfg", "--voters", "2") == 0
        assert not (tmp_path / "w" / "election.ini").exists()
        assert run_cli("setup", "--workspace", workspace,
                       "--config", config_path) == 0
    capsys.readouterr()
    assert (tmp_path / "w" / "wbb" / "lake" / "cfg" / "params.csv").exists()


def test_publish_status_and_ledger_audit(tmp_path, capsys):
    with small_group():
        assert run_cli("demo", "--workspace", str(tmp_path / "w")) == 0
        capsys.readouterr()
        assert run_cli("publish-status", "--workspace", str(tmp_path / "w")) == 0
        out = capsys.readouterr().out
        assert "phase tallied" in out
        assert "mixed.csv" in out
        assert run_cli("ledger-audit", "--workspace", str(tmp_path / "w")) == 0
        out = capsys.readouterr().out
        assert "node 1: ok" in out


def test_reports_never_print_secret_keys(tmp_path, capsys):
    with small_group():
        run_cli("demo", "--workspace", str(tmp_path / "w"), "--seed", "11")
    out = capsys.readouterr().out
    import verivote.orchestrator as om
    orch = om.ElectionOrchestrator.load(tmp_path / "w")
    for voter in orch.registry.values():
        assert str(voter.keypair.sk.value) not in out
        assert str(voter.dsa.x.value) not in out
    for teller in orch.tellers:
        assert str(teller.secret_share) not in out
