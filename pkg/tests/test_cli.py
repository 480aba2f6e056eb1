import json

import pytest

from evobot.cli import main
from test_genotype import FULL_GENOTYPE

FAST_EVO = [
    "--set", "evolution.pop_size=6",
    "--set", "evolution.generations=2",
    "--set", "fitness.max_steps=80",
]


def run_cli(*argv):
    return main(list(argv))


def test_parse_prints_counts(tmp_path, capsys):
    path = tmp_path / "genomes.txt"
    path.write_text(f"# sample genotypes\nX\n\n{FULL_GENOTYPE}\n")
    assert run_cli("parse", str(path)) == 0
    out = capsys.readouterr().out
    assert "line 2: parts=2 joints=1 neurons=0 hidden=0 connections=0" in out
    assert "line 4: parts=9 joints=8 neurons=3 hidden=0 connections=2" in out


def test_parse_invalid_exits_3(tmp_path, capsys):
    path = tmp_path / "genomes.txt"
    path.write_text("X\nrrQX\n")
    assert run_cli("parse", str(path)) == 3
    captured = capsys.readouterr()
    assert "INVALID" in captured.out
    assert "evobot-error kind=runtime" in captured.err


def test_unknown_command_is_usage_error(capsys):
    assert run_cli("frobnicate") == 1
    assert "evobot-error kind=usage" in capsys.readouterr().err


def test_evolve_rejects_tiny_population(capsys):
    assert run_cli("evolve", "--set", "evolution.pop_size=1") == 2
    assert "evobot-error kind=config" in capsys.readouterr().err


def test_unknown_config_key_rejected(capsys):
    assert run_cli("evolve", "--set", "evolution.popsize=9") == 2
    assert "evobot-error kind=config" in capsys.readouterr().err


def test_evolve_standard_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    code = run_cli("evolve", *FAST_EVO, "--seed", "3", "--out", str(out))
    assert code == 0
    assert (out / "runlog.csv").exists()
    assert (out / "snapshots.txt").exists()
    assert (out / "best_controller.txt").exists()
    assert (out / "effective.cfg").exists()
    assert "best fitness" in capsys.readouterr().out


def test_evolve_seed_reproducible(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli("evolve", *FAST_EVO, "--seed", "9", "--out", str(out)) == 0
        outs.append((out / "runlog.csv").read_bytes())
    assert outs[0] == outs[1]
    out_c = tmp_path / "c"
    assert run_cli("evolve", *FAST_EVO, "--seed", "10", "--out", str(out_c)) == 0
    assert (out_c / "runlog.csv").read_bytes() != outs[0]


def test_evolve_ecology_mode(tmp_path):
    out = tmp_path / "eco"
    code = run_cli(
        "evolve",
        "--set", "evolution.mode=ecology",
        "--set", "ecology.n_robots=3",
        "--set", "ecology.steps=30",
        "--out", str(out),
    )
    assert code == 0
    blob = json.loads((out / "ecology.json").read_text())
    assert blob["status"] in ("completed", "extinct")
    assert len(blob["alive_per_step"]) == blob["steps_run"]


def test_evolve_coevolution_mode(tmp_path):
    out = tmp_path / "coev"
    code = run_cli(
        "evolve",
        "--set", "evolution.mode=coevolution",
        "--set", "evolution.pop_size=4",
        "--set", "evolution.generations=2",
        "--set", "fitness.max_steps=60",
        "--out", str(out),
    )
    assert code == 0
    assert (out / "runlog_robots.csv").exists()
    assert (out / "runlog_layouts.csv").exists()
    assert (out / "best_layout.txt").exists()


def test_dump_config_round_trips(tmp_path, capsys):
    assert run_cli("evolve", "--set", "evolution.sigma=0.123", "--dump-config") == 0
    dumped = capsys.readouterr().out
    cfg_file = tmp_path / "echo.cfg"
    cfg_file.write_text(dumped)
    assert run_cli("evolve", "--config", str(cfg_file), "--dump-config") == 0
    assert capsys.readouterr().out == dumped


def test_simulate_roundtrip(tmp_path, capsys):
    run_dir = tmp_path / "train"
    assert run_cli("evolve", *FAST_EVO, "--seed", "5", "--out", str(run_dir)) == 0
    capsys.readouterr()
    sim_dir = tmp_path / "sim"
    code = run_cli(
        "simulate",
        str(run_dir / "best_controller.txt"),
        "--set", "fitness.max_steps=80",
        "--out", str(sim_dir),
    )
    assert code == 0
    assert "fitness=" in capsys.readouterr().out
    traj = (sim_dir / "trajectory.csv").read_text().splitlines()
    header = next(ln for ln in traj if not ln.startswith("#"))
    assert header.startswith("t,x,y,heading,clearance,motor_l,motor_r,s0")
    assert (sim_dir / "results.csv").exists()


def test_simulate_missing_controller(tmp_path, capsys):
    assert run_cli("simulate", str(tmp_path / "nope.txt")) == 3
    assert "evobot-error kind=runtime" in capsys.readouterr().err


def test_diagnose_command(tmp_path, capsys):
    from evobot.estimation import SimParams, run_reference, write_trace
    from support import diagnosis_fcfg, diagnosis_world, steering_controller

    st = run_reference(
        steering_controller(), SimParams(), diagnosis_world(3), 0, fcfg=diagnosis_fcfg(60)
    )
    trace_path = tmp_path / "trace.csv"
    write_trace(st, trace_path)
    out = tmp_path / "diag"
    code = run_cli(
        "diagnose",
        str(trace_path),
        "--set", "estimation.pop_size=6",
        "--set", "estimation.generations=3",
        "--out", str(out),
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 9
    assert "NothingFail" in lines[0]
    assert (out / "diagnosis.csv").exists()
    assert (out / "diagnosis.txt").exists()


def test_experiment_writes_three_csvs(tmp_path, capsys):
    out = tmp_path / "exp"
    code = run_cli(
        "experiment",
        "--set", "experiment.environments=flat/no-obs,flat/obs",
        "--set", "experiment.trials_per_env=2",
        "--set", "experiment.evolution_steps=60",
        "--set", "experiment.assessment_steps=80",
        "--set", "experiment.failure_trials=1",
        "--set", "evolution.pop_size=6",
        "--set", "evolution.generations=2",
        "--out", str(out),
    )
    assert code == 0
    for name in ("table.csv", "curves.csv", "failures.csv"):
        assert (out / name).exists(), name
    table = (out / "table.csv").read_text().splitlines()
    assert len(table) == 3  # header + two environments
