import json
import subprocess
import sys
from pathlib import Path

import pytest

from timedplan.cli import main


SCENARIO = "scenarios/two_agent_services.cfg"


def test_validate_ok(capsys):
    assert main(["validate", SCENARIO]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert "start cell 15" in out and "start cell 21" in out


def test_validate_missing_file(capsys):
    assert main(["validate", "nope.cfg"]) == 1
    assert "invalid" in capsys.readouterr().out


def test_validate_names_failed_property(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text(
        Path(SCENARIO).read_text().replace("dt = 1/20", "dt = 3"), encoding="utf-8"
    )
    assert main(["validate", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "TimeStepOutOfRange" in out


def test_synthesize_writes_run_dir(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["synthesize", SCENARIO, "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "plan found" in printed
    for name in ("manifest.json", "plan.json", "plan.txt", "certificate.json"):
        assert (out / name).exists(), name
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["ok"] is True and cert["total_misses"] == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["route"] in ("independent", "joint-product")
    assert manifest["seed"] == 0
    txt = (out / "plan.txt").read_text()
    assert "--- agent 1 ---" in txt and "--- cycle ---" in txt


def test_synthesize_infeasible_exits_2(tmp_path, capsys):
    cfg = tmp_path / "tight.cfg"
    cfg.write_text(
        Path(SCENARIO)
        .read_text()
        .replace("phi.1 = F[1/20, 1/4] p1", "phi.1 = F[0, 1/100] p1"),
        encoding="utf-8",
    )
    assert main(["synthesize", str(cfg), "--out", str(tmp_path / "r")]) == 2
    assert "infeasible" in capsys.readouterr().out


def test_synthesize_budget_exits_3(tmp_path, capsys):
    assert (
        main(
            [
                "synthesize",
                SCENARIO,
                "--out",
                str(tmp_path / "r"),
                "--max-states",
                "2",
            ]
        )
        == 3
    )
    assert "budget" in capsys.readouterr().out


def test_simulate_round_trip(tmp_path, capsys):
    run = tmp_path / "run"
    assert main(["synthesize", SCENARIO, "--out", str(run)]) == 0
    sim = tmp_path / "sim"
    code = main(
        [
            "simulate",
            SCENARIO,
            "--plan",
            str(run / "plan.json"),
            "--out",
            str(sim),
            "--substeps",
            "8",
        ]
    )
    printed = capsys.readouterr().out
    assert code == 0, printed
    assert "all" in printed and "landings" in printed
    for name in ("trajectory.csv", "lyapunov.csv", "reachable_cells.csv"):
        assert (sim / name).exists(), name
    rows = (sim / "reachable_cells.csv").read_text().strip().splitlines()
    assert rows[0] == "quantum,agent,planned_cell,landed_cell,ok"
    assert all(r.endswith("yes") for r in rows[1:])


def test_simulate_rejects_foreign_plan(tmp_path, capsys):
    run = tmp_path / "run"
    assert main(["synthesize", SCENARIO, "--out", str(run)]) == 0
    other = tmp_path / "other.cfg"
    other.write_text(
        Path(SCENARIO).read_text().replace("seed = 0", "seed = 7"), encoding="utf-8"
    )
    code = main(
        [
            "simulate",
            str(other),
            "--plan",
            str(run / "plan.json"),
            "--out",
            str(tmp_path / "s"),
        ]
    )
    assert code == 1
    assert "PlanMismatch" in capsys.readouterr().out


def test_stats_prints_layers(tmp_path, capsys):
    out = tmp_path / "st"
    assert main(["stats", SCENARIO, "--steps", "3", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "layers: 1," in printed
    assert (out / "stats.csv").read_text().startswith("step,reachable")
    assert (out / "stats.txt").exists()


def test_threads_env_validated(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("TIMEDPLAN_THREADS", "zero")
    code = main(["synthesize", SCENARIO, "--out", str(tmp_path / "r")])
    assert code == 1
    assert "TIMEDPLAN_THREADS" in capsys.readouterr().err


def test_console_script_version():
    got = subprocess.run(
        [sys.executable, "-m", "timedplan.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert got.returncode == 0
    assert "timedplan" in got.stdout
