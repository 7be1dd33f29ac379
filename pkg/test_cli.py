"""Tests for the command-line front end and manifest replay"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import config
from main import EXIT_NUMERIC, EXIT_PRECONDITION, EXIT_USAGE, run
from storage import read_manifest


def test_dim(tmp_path, capsys):
    print("=" * 60)
    print("CLI: dim and tau")
    print("=" * 60)
    assert run(["dim", "--ratios", "0.333333,0.333333", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    printed = next(line for line in out.splitlines() if line.startswith("s = "))
    assert float(printed[len("s = "):]) == pytest.approx(0.630930, abs=2e-6)

    manifest = read_manifest(tmp_path / "manifest.txt")
    assert manifest.subcommand == "dim"
    assert manifest.parameters["ratios"] == "0.333333,0.333333"
    assert manifest.version == config.VERSION
    assert set(manifest.outputs) == {"dim.csv"}
    print(f"✓ dim --ratios 0.333333,0.333333 prints {printed}")


def test_tau(tmp_path, capsys):
    assert run(["tau", "--t", "1.0", "--out", str(tmp_path)]) == 0
    assert "tau(1) = 0.016497" in capsys.readouterr().out
    assert read_manifest(tmp_path / "manifest.txt").parameters["t"] == "1"


def test_render_replay(tmp_path, capsys):
    print("=" * 60)
    print("CLI: render and replay")
    print("=" * 60)
    first = tmp_path / "first"
    second = tmp_path / "second"
    code = run(["render", "--lambda", "0.25", "--window", "-2,2,-2,2", "--size", "16x12",
                "--rate", "n", "--horizon", "60", "--out", str(first)])
    assert code == 0
    manifest = read_manifest(first / "manifest.txt")
    assert manifest.parameters["window"] == "-2,2,-2,2"
    assert "partition.ppm" in manifest.outputs

    code = run(["--replay", str(first / "manifest.txt"), "--out", str(second), "--threads", "3"])
    assert code == 0
    assert "replay reproduced every output" in capsys.readouterr().out
    assert (first / "partition.ppm").read_bytes() == (second / "partition.ppm").read_bytes()
    assert (first / "manifest.txt").read_bytes() == (second / "manifest.txt").read_bytes()
    print("✓ replay with 3 threads is byte-identical")


def test_classify_writes_orbit(tmp_path, capsys):
    assert run(["classify", "--lambda", "1", "--z0", "1", "--horizon", "20", "--out", str(tmp_path)]) == 0
    assert "FastEscaping" in capsys.readouterr().out
    assert (tmp_path / "orbit.csv").read_text().startswith("n,re,im,log_modulus")


def test_besicovitch_seeded(tmp_path):
    assert run(["besicovitch", "--count", "200", "--seed", "7", "--out", str(tmp_path / "a")]) == 0
    assert run(["besicovitch", "--count", "200", "--seed", "7", "--out", str(tmp_path / "b")]) == 0
    assert read_manifest(tmp_path / "a" / "manifest.txt").seed == 7
    assert (tmp_path / "a" / "besicovitch.csv").read_bytes() == (tmp_path / "b" / "besicovitch.csv").read_bytes()


def test_config_file(tmp_path, capsys):
    settings = tmp_path / "run.env"
    settings.write_text("ratios=0.5,0.5\n")
    assert run(["--config", str(settings), "dim", "--out", str(tmp_path)]) == 0
    assert "s = 1.000000" in capsys.readouterr().out

    # flags win over the file
    assert run(["--config", str(settings), "dim", "--ratios", "0.25,0.25", "--out", str(tmp_path)]) == 0
    assert "s = 0.500000" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    print("=" * 60)
    print("CLI: exit codes")
    print("=" * 60)
    assert run(["dim", "--bogus", "1"]) == EXIT_USAGE
    assert run([]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run(["tau", "--t", "2", "--out", str(tmp_path)]) == EXIT_PRECONDITION
    assert run(["dim", "--out", str(tmp_path)]) == EXIT_PRECONDITION

    cap = config.SCHEDULE_CAP
    settings = tmp_path / "cap.env"
    settings.write_text("SCHEDULE_CAP=1\n")
    code = run(["--config", str(settings), "schedule", "--stages", "0.3x2,0.3x2", "--out", str(tmp_path)])
    assert code == EXIT_NUMERIC
    assert "numeric failure" in capsys.readouterr().err
    assert config.SCHEDULE_CAP == cap
    print("✓ usage 64, precondition 2, numeric failure 3")


def test_config_overrides_last_one_run(tmp_path):
    """Settings reach defaults bound in the parser and are undone afterwards"""
    base = config.FAST_BASE_R
    settings = tmp_path / "fast.env"
    settings.write_text("FAST_BASE_R=7.5\n")
    assert run(["--config", str(settings), "classify", "--lambda", "1", "--z0", "1", "--horizon", "10",
                "--out", str(tmp_path)]) == 0
    manifest = read_manifest(tmp_path / "manifest.txt")
    assert manifest.parameters["fast-base"] == "7.5"
    assert manifest.parameters["env.FAST_BASE_R"] == "7.5"
    assert config.FAST_BASE_R == base

    assert run(["classify", "--lambda", "1", "--z0", "1", "--horizon", "10", "--out", str(tmp_path)]) == 0
    assert read_manifest(tmp_path / "manifest.txt").parameters["fast-base"] == format(base, ".17g")


if __name__ == "__main__":
    # capsys and tmp_path need pytest
    sys.exit(pytest.main([__file__, "-q"]))
