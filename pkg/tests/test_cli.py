"""Tests for the command-line interface and exit codes."""

import json

import numpy as np
import pytest

from tests.conftest import analytic_table
from thermo_homogenization.cli import (
    EXIT_FAILURE,
    EXIT_INTERRUPTED,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    main,
)
from thermo_homogenization.commands import get_registry
from thermo_homogenization.config import Config
from thermo_homogenization.macrosolver import MMSResult
from thermo_homogenization.tables import save_table

ALL_COMMANDS = [
    "cell solve", "compare", "geom probe", "macro run", "mesh check",
    "mesh gen", "micro run", "mms", "table build", "table query",
]


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def run_cli(tmp_path):
    """Invoke main() quietly with a log file inside tmp_path."""
    def _run(*argv):
        return main(["--quiet", "--log-file", str(tmp_path / "cli.log"), *argv])
    return _run


@pytest.fixture
def table_file(tmp_path):
    return save_table(analytic_table(), tmp_path / "table.json")


def stderr_error(captured):
    """Last JSON line written to stderr."""
    lines = [line for line in captured.err.splitlines() if line.startswith("{")]
    return json.loads(lines[-1])


class TestRegistry:
    """Tests for command discovery."""

    def test_all_commands_registered(self):
        assert get_registry().list_commands() == ALL_COMMANDS

    def test_groups(self):
        groups = get_registry().groups()
        assert groups["table"] == ["table build", "table query"]
        assert groups["compare"] == ["compare"]

    def test_unknown_command(self):
        assert get_registry().create_command("table drop", Config(), None) is None


class TestArguments:
    """Argument parsing and usage errors."""

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "thermo-homog" in capsys.readouterr().out

    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--frobnicate", "mms"])
        assert exc.value.code == EXIT_VALIDATION
        assert "usage:" in capsys.readouterr().err

    def test_missing_action(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["table"])
        assert exc.value.code == EXIT_VALIDATION

    def test_no_command(self, run_cli):
        assert run_cli() == EXIT_VALIDATION

    def test_list_profiles(self, run_cli, capsys):
        assert run_cli("--list-profiles") == EXIT_OK
        out = capsys.readouterr().out
        assert "benchmark" in out and "quick" in out

    def test_unknown_profile(self, run_cli, capsys):
        assert run_cli("--profile", "nope", "mms") == EXIT_VALIDATION
        assert stderr_error(capsys.readouterr())["error"] == "ValidationError"

    def test_bad_config_key(self, run_cli, tmp_path, capsys):
        config_file = tmp_path / "run.yaml"
        config_file.write_text("macro:\n  steps: 3\n")
        assert run_cli("--config", str(config_file), "mms") == EXIT_VALIDATION
        assert stderr_error(capsys.readouterr())["details"]["unknown"] == ["macro.steps"]


class TestTableQuery:
    """table query on a saved table."""

    def test_query_node(self, run_cli, table_file, capsys):
        assert run_cli("table", "query", "--table", str(table_file), "--h", "0") == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["h"] == pytest.approx(0.0, abs=1e-15)
        assert record["phi"] == pytest.approx(1.0 - np.pi / 16.0, rel=1e-12)
        assert np.allclose(record["Hstar"], [0.0, 0.0])

    def test_query_outside_range(self, run_cli, table_file, capsys):
        code = run_cli("table", "query", "--table", str(table_file), "--h", "0.03")
        assert code == EXIT_NUMERICAL
        assert stderr_error(capsys.readouterr())["error"] == "AdmissibilityError"

    def test_no_table(self, run_cli, capsys):
        assert run_cli("table", "query", "--h", "0") == EXIT_VALIDATION
        assert "table" in stderr_error(capsys.readouterr())["message"]

    def test_incompatible_table(self, run_cli, table_file, tmp_path, capsys):
        config_file = tmp_path / "run.yaml"
        config_file.write_text("params:\n  lame_mu: 2.0\n")
        code = run_cli(
            "--config", str(config_file), "table", "query", "--table", str(table_file), "--h", "0"
        )
        assert code == EXIT_NUMERICAL
        assert stderr_error(capsys.readouterr())["error"] == "TableError"


class TestMacroRun:
    """macro run exit codes."""

    def test_band_violation(self, run_cli, tmp_path, capsys):
        table = save_table(analytic_table(bound=0.0025, n=5), tmp_path / "narrow.json")
        config_file = tmp_path / "run.yaml"
        config_file.write_text(
            "params:\n  theta0: 1.0\n"
            "macro:\n  mesh:\n    nx: 2\n    ny: 2\n  dt: 1.0e-3\n  t_end: 1.0e-2\n"
        )
        argv = [
            "--config", str(config_file), "--out", str(tmp_path / "out"),
            "macro", "run", "--table", str(table),
        ]
        assert run_cli(*argv) == EXIT_NUMERICAL

        error = stderr_error(capsys.readouterr())
        assert error["error"] == "AdmissibilityError"
        assert {"node", "t", "h"} <= set(error["details"])
        assert error["details"]["t"] == pytest.approx(0.003)

        manifest = json.loads((tmp_path / "out" / "macro" / "outputs.json").read_text())
        assert manifest["status"] == "aborted"


class TestGeomProbe:
    """geom probe on the default circle."""

    def test_probe(self, run_cli, tmp_path, capsys):
        points = tmp_path / "points.csv"
        points.write_text("# x, y\n0.75, 0.5\n0.02, 0.02\n")
        assert run_cli("geom", "probe", "--points", str(points), "--h", "0.02") == EXIT_OK
        on_interface, far = json.loads(capsys.readouterr().out)

        assert on_interface["s"] == pytest.approx([0.77, 0.5], abs=1e-12)
        assert on_interface["J"] == pytest.approx(1.08, rel=1e-6)
        assert on_interface["L_eigs"] == pytest.approx([-4.0, 0.0], abs=1e-9)
        assert on_interface["kappa"] == pytest.approx(-1.0 / 0.27, rel=1e-12)

        assert far["P"] is None and far["kappa"] is None
        assert far["s"] == pytest.approx([0.02, 0.02])
        assert np.allclose(far["F"], np.eye(2))

    def test_wrong_width(self, run_cli, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text("0.1, 0.2, 0.3\n")
        assert run_cli("geom", "probe", "--points", str(points)) == EXIT_VALIDATION

    def test_height_outside_band(self, run_cli, tmp_path):
        points = tmp_path / "points.csv"
        points.write_text("0.75, 0.5\n")
        assert run_cli("geom", "probe", "--points", str(points), "--h", "0.05") == EXIT_NUMERICAL


class TestMesh:
    """mesh gen and mesh check."""

    def test_macro_mesh_round_trip(self, run_cli, tmp_path, capsys):
        out = tmp_path / "out"
        assert run_cli("--out", str(out), "mesh", "gen", "--kind", "macro") == EXIT_OK
        record = json.loads(capsys.readouterr().out)
        assert record["n_nodes"] == 81

        assert run_cli("mesh", "check", "--mesh", str(out / "macro.mesh"), "--macro") == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["negative_triangles"] == 0
        assert report["area"] == pytest.approx(1.0)

    def test_missing_mesh(self, run_cli, tmp_path):
        assert run_cli("mesh", "check", "--mesh", str(tmp_path / "none.mesh")) == EXIT_VALIDATION


class TestExitCodes:
    """Failures raised inside commands map to exit codes."""

    def test_convergence_failure(self, run_cli, mocker, capsys):
        result = MMSResult(sizes=[0.25, 0.125], errors=[1.0, 0.9])
        mocker.patch("thermo_homogenization.commands.mms.mms_study", return_value=result)
        assert run_cli("mms", "--levels", "4", "8") == EXIT_NUMERICAL
        assert stderr_error(capsys.readouterr())["error"] == "ConvergenceError"

    def test_success_writes_artifact(self, run_cli, mocker, tmp_path):
        result = MMSResult(sizes=[0.25, 0.125], errors=[1.0, 0.25])
        mocker.patch("thermo_homogenization.commands.mms.mms_study", return_value=result)
        assert run_cli("--out", str(tmp_path / "out"), "mms", "--levels", "4", "8") == EXIT_OK
        record = json.loads((tmp_path / "out" / "mms.json").read_text())
        assert record["orders"] == pytest.approx([2.0])

    def test_interrupt(self, run_cli, mocker):
        mocker.patch("thermo_homogenization.commands.mms.mms_study", side_effect=KeyboardInterrupt)
        assert run_cli("mms") == EXIT_INTERRUPTED

    def test_unexpected_error(self, run_cli, mocker):
        mocker.patch(
            "thermo_homogenization.commands.mms.mms_study", side_effect=RuntimeError("boom")
        )
        assert run_cli("mms") == EXIT_FAILURE
