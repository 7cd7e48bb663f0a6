"""
Tests for the command-line driver and the pipeline behind it:
exit codes, output formats and option handling.
"""
import io
import json
import sys

import pytest

from conftest import fixture_text
from services.cli_service import build_parser, config_from_args, main, run
from services.config import EXIT_INPUT_ERROR, EXIT_NO_UNIFIER, EXIT_UNIFIER, FIXTURES_DIR
from services.errors import InputError
from services.pipeline_service import RunConfig, select_mode, solve, solve_file

# ── Helpers ──────────────────────────────────────────────────────────


def fixture_path(name):
    return str(FIXTURES_DIR / f"{name}.lf")


class TestExitCodes:
    """0 unifier, 1 no unifier, 2 bad input."""

    def test_unifier(self, capsys):
        assert main([fixture_path("conat")]) == EXIT_UNIFIER
        assert "H := omega" in capsys.readouterr().out

    def test_no_unifier(self, capsys):
        assert main([fixture_path("no_solution")]) == EXIT_NO_UNIFIER
        assert "no unifier" in capsys.readouterr().out

    def test_missing_file(self, tmp_path, capsys):
        assert main([str(tmp_path / "missing.lf")]) == EXIT_INPUT_ERROR
        assert capsys.readouterr().out == ""

    def test_undecodable_file(self, tmp_path, capsys):
        path = tmp_path / "binary.lf"
        path.write_bytes(b"\xff\xfe")
        assert main([str(path)]) == EXIT_INPUT_ERROR
        assert capsys.readouterr().out == ""

    def test_parse_error(self):
        assert run(RunConfig(), text="?- = .") == (EXIT_INPUT_ERROR, "")

    def test_first_order_mode_on_higher_order_problem(self):
        assert main([fixture_path("stream"), "--mode", "fo"]) == EXIT_INPUT_ERROR

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "ratunif" in capsys.readouterr().out


class TestOutput:
    """Text, JSON, trace and check options."""

    def test_json(self, capsys):
        assert main([fixture_path("conat"), "--json"]) == EXIT_UNIFIER
        data = json.loads(capsys.readouterr().out)
        assert data["result"] == "unifier"
        assert data["check"]["ok"] is True

    def test_trace(self, capsys):
        main([fixture_path("conat"), "--trace"])
        assert "by R-EXP" in capsys.readouterr().out

    def test_check_off(self, capsys):
        main([fixture_path("conat"), "--json", "--check-depth", "off"])
        assert "check" not in json.loads(capsys.readouterr().out)

    def test_stdin(self, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.StringIO(fixture_text("stream")))
        assert main(["-"]) == EXIT_UNIFIER
        assert "S := [_z1] [_z2] " in capsys.readouterr().out


class TestArguments:
    """Parsing flags into a RunConfig."""

    def test_defaults(self):
        cfg = config_from_args(build_parser().parse_args(["p.lf"]))
        assert cfg.path == "p.lf"
        assert cfg.mode == "auto"
        assert cfg.output == "text"
        assert cfg.check_depth == 25

    def test_overrides(self):
        args = build_parser().parse_args(
            ["p.lf", "--mode", "ho", "--json", "--check-depth", "off", "--max-steps", "10",
             "--schedule", "lifo", "--abstraction", "scope"]
        )
        cfg = config_from_args(args)
        assert (cfg.mode, cfg.output, cfg.check_depth) == ("ho", "json", None)
        assert (cfg.max_steps, cfg.schedule, cfg.abstraction) == (10, "lifo", "scope")

    def test_bad_check_depth(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["p.lf", "--check-depth", "deep"])


class TestPipeline:
    """Mode selection and the solve entry points."""

    def test_auto_mode(self, problem):
        assert select_mode(problem("conat").delta, "auto") == "fo"
        assert select_mode(problem("stream").delta, "auto") == "ho"

    def test_unknown_mode(self, problem):
        with pytest.raises(InputError):
            select_mode(problem("conat").delta, "xo")

    def test_solve_file(self):
        outcome = solve_file(FIXTURES_DIR / "conat.lf")
        assert outcome.found

    def test_solve_file_undecodable(self, tmp_path):
        path = tmp_path / "binary.lf"
        path.write_bytes(b"\xff\xfe")
        with pytest.raises(InputError):
            solve_file(path)

    def test_solve_file_missing(self, tmp_path):
        with pytest.raises(InputError):
            solve_file(tmp_path / "missing.lf")

    def test_higher_order_mode_on_first_order_problem(self):
        outcome = solve(fixture_text("conat"), RunConfig(mode="ho"))
        assert outcome.found and outcome.mode == "ho"
