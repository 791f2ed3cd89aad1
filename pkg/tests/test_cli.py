"""Test the magprec command-line interface."""

import json
from pathlib import Path

import pandas as pd
import pytest

from magprec.cli import EXIT_CONFIG, EXIT_DEGENERATE, EXIT_OK, build_parser, main
from magprec.config import Settings
from magprec.verification.suite import CheckReport, Depth


def test_precision_report(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that the default run prints a report at the magnetometer point."""
    assert main(["precision"]) == EXIT_OK

    out = capsys.readouterr().out
    assert "Precision report" in out
    assert "Resolved configuration:" in out
    assert "gain vs CSS" in out


def test_precision_writes_csv(tmp_path: Path) -> None:
    """Test that --out writes one row per particle number."""
    target = tmp_path / "precision.csv"
    code = main(["precision", "--n", "1e4,1e6", "--db", "-3", "--out", str(target)])

    assert code == EXIT_OK
    frame = pd.read_csv(target)
    assert list(frame.columns) == [
        "n",
        "geometry",
        "t",
        "mu",
        "squeezing_db",
        "msqe_times_T",
        "gain_vs_css",
    ]
    assert frame["n"].tolist() == [10_000, 1_000_000]
    assert frame["squeezing_db"].tolist() == pytest.approx([-3.0, -3.0], abs=1e-6)


def test_coherent_probe_under_schedule_has_no_twist(tmp_path: Path) -> None:
    """Test that a schedule never feeds μ to an unsqueezed geometry."""
    target = tmp_path / "css.csv"
    code = main(
        ["precision", "--geometry", "css-y", "--schedule", "b", "--gamma", "1", "--omega", "1",
         "--n", "100", "--out", str(target)]
    )

    assert code == EXIT_OK
    assert pd.read_csv(target)["mu"].tolist() == [0.0]


def test_two_noise_sources_is_config_error(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that --alpha together with --epsilon exits with code 2."""
    assert main(["precision", "--alpha", "1,0,0", "--epsilon", "0.1"]) == EXIT_CONFIG
    assert "Invalid configuration" in capsys.readouterr().err


def test_mu_and_db_are_mutually_exclusive() -> None:
    """Test that argparse rejects --mu with --db."""
    with pytest.raises(SystemExit) as excinfo:
        build_parser().parse_args(["precision", "--mu", "0.01", "--db", "-3"])
    assert excinfo.value.code == 2


def test_ghz_at_zero_frequency_is_degenerate(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a flat parity signal exits with code 3."""
    code = main(["precision", "--geometry", "ghz", "--omega", "0", "--gamma", "1", "--n", "10"])

    assert code == EXIT_DEGENERATE
    assert "Degenerate signal" in capsys.readouterr().err


def test_bounds_report(capsys: pytest.CaptureFixture[str]) -> None:
    """Test the bounds summary with a mixed-noise fraction."""
    assert main(["bounds", "--epsilon", "0.05", "--gamma", "1", "--omega", "1"]) == EXIT_OK

    out = capsys.readouterr().out
    assert "mixed-noise floor 2γε = 0.1" in out
    assert "crossover N*" in out


def test_check_command(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that the fast equivalence suite passes from the command line."""
    assert main(["check", "--depth", "fast", "--seed", "3"]) == EXIT_OK
    assert "All checks passed" in capsys.readouterr().out


def test_check_seed_from_config_file(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test that the check command takes its seed from the config file when no flag is given."""
    seeds: list[int | None] = []

    def record(depth: Depth, seed: int | None = None, settings: Settings | None = None) -> CheckReport:
        seeds.append(seed)
        return CheckReport(depth=depth, seed=seed or 0, draws=0)

    monkeypatch.setattr("magprec.cli.run_checks", record)
    config = tmp_path / "run.toml"
    config.write_text("[check]\nseed = 11\n")

    assert main(["check", "--config", str(config)]) == EXIT_OK
    assert main(["check", "--config", str(config), "--seed", "5"]) == EXIT_OK
    assert seeds == [11, 5]
    assert "seed 11" in capsys.readouterr().out


def test_numerical_failure_exits_as_degenerate(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that an arithmetic error inside a command maps to exit code 3."""

    def explode(*_: object, **__: object) -> CheckReport:
        raise ZeroDivisionError("float division by zero")

    monkeypatch.setattr("magprec.cli.run_checks", explode)

    assert main(["check"]) == EXIT_DEGENERATE


def test_figure_to_json(tmp_path: Path) -> None:
    """Test that a figure table is written as JSON records."""
    target = tmp_path / "fig2.json"
    code = main(["figure", "fig2-time", "--n", "1e6", "--format", "json", "--out", str(target)])

    assert code == EXIT_OK
    records = json.loads(target.read_text())
    assert records
    assert {"t", "msqe_a", "msqe_b", "msqe_css"} <= set(records[0])


def test_scan_grid(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a 5×3 scan produces fifteen rows with an n column."""
    target = tmp_path / "scan.csv"
    code = main(
        ["scan", "--gamma", "1", "--omega", "1", "--n", "1000", "--t-range", "1e-2:1:5",
         "--mu-range", "1e-4:1e-2:3", "--out", str(target)]
    )

    assert code == EXIT_OK
    frame = pd.read_csv(target, keep_default_na=False)
    assert list(frame.columns) == ["n", "t", "mu", "msqe", "error"]
    assert len(frame) == 15
    assert "Scanned 15 points" in capsys.readouterr().err


def test_optimize_coherent_probe(capsys: pytest.CaptureFixture[str]) -> None:
    """Test that the optimizer reports a converged CSS optimum."""
    code = main(["optimize", "--geometry", "css-x", "--gamma", "1", "--omega", "1", "--n", "100"])

    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "Optimization report" in out
    assert "t*=" in out


def test_config_file_sections(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test that a TOML file feeds the resolved configuration."""
    config = tmp_path / "run.toml"
    config.write_text('[defaults]\ngamma = 2.0\n\n[precision]\nn = "50"\ngeometry = "css-x"\n')

    assert main(["precision", "--config", str(config)]) == EXIT_OK
    out = capsys.readouterr().out
    assert '"gamma": 2.0' in out
    assert "N=50" in out


def test_malformed_config_file_is_config_error(tmp_path: Path) -> None:
    """Test that unparsable TOML exits with code 2."""
    config = tmp_path / "broken.toml"
    config.write_text("[defaults\ngamma = \n")

    assert main(["precision", "--config", str(config)]) == EXIT_CONFIG


def test_missing_config_file_is_config_error(tmp_path: Path) -> None:
    """Test that a nonexistent config path exits with code 2."""
    assert main(["precision", "--config", str(tmp_path / "absent.toml")]) == EXIT_CONFIG
