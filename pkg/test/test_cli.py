# test/test_cli.py

import json

import pytest

from hcspdc.cli import EXIT_ERROR, EXIT_INVALID, EXIT_OK, run
from hcspdc.dc_format import parse_formula
from hcspdc.parser import parse_process
from hcspdc.trajectory import Trajectory

from conftest import corpus_path


@pytest.fixture
def source(tmp_path):
    """Write HCSP text to a temporary file and return its path."""
    def write(text: str, name: str = "prog.hcsp") -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


class TestUsage:
    def test_no_command(self):
        assert run([]) == EXIT_ERROR

    def test_unknown_command(self):
        assert run(["prove", "x.hcsp"]) == EXIT_ERROR

    def test_missing_file(self, tmp_path):
        assert run(["parse", str(tmp_path / "nope.hcsp")]) == EXIT_ERROR

    def test_syntax_error(self, source, capsys):
        assert run(["parse", source("x :=")]) == EXIT_ERROR
        assert "syntax error" in capsys.readouterr().err


class TestTermCommands:
    def test_parse(self, capsys):
        assert run(["parse", corpus_path("05_seq.hcsp")]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "x := 1; y := x + 1"

    def test_parse_reports_ill_formed_terms(self, source, capsys):
        assert run(["parse", source("X"), "--format", "json"]) == EXIT_INVALID
        out = json.loads(capsys.readouterr().out)
        assert out["wellformed"] is False and out["violations"]

    def test_desugar(self, source, capsys):
        assert run(["desugar", source("wait 1")]) == EXIT_OK
        assert "wait" not in capsys.readouterr().out

    def test_gnf_json(self, source, capsys):
        assert run(["gnf", source("x := 1 || y := 2"), "--format", "json"]) == EXIT_OK
        out = json.loads(capsys.readouterr().out)
        assert parse_process(out["after"]) == parse_process("x := 1; y := 2 |~| y := 2; x := 1")

    def test_elim_par_out_of_fuel(self):
        assert run(["elim-par", corpus_path("16_handshake.hcsp"), "--fuel", "1"]) == EXIT_INVALID

    def test_elim_par(self):
        assert run(["elim-par", corpus_path("14_par_assign.hcsp")]) == EXIT_OK

    def test_elim_par_handshake_with_default_fuel(self):
        assert run(["elim-par", corpus_path("16_handshake.hcsp")]) == EXIT_OK


class TestRunsAndFormulas:
    """simulate, compile and check-trace chained through files."""

    def test_simulate_writes_a_trajectory(self, tmp_path):
        out = str(tmp_path / "run.traj")
        assert run(["simulate", corpus_path("07_clock.hcsp"), "-o", out, "--seed", "3"]) == EXIT_OK
        tr = Trajectory.load(out)
        assert tr.final["x"] == pytest.approx(2.0, abs=1e-6)

    def test_init_flag_overrides_the_header(self, tmp_path):
        out = str(tmp_path / "run.traj")
        assert run(["simulate", corpus_path("07_clock.hcsp"), "-o", out, "--init", "x=1.5"]) == EXIT_OK
        assert Trajectory.load(out).T == pytest.approx(0.5, abs=1e-6)

    def test_compile_then_check_the_run(self, tmp_path, capsys):
        sem, traj = tmp_path / "sem.dc", str(tmp_path / "run.traj")
        prog = corpus_path("03_assign.hcsp")
        assert run(["compile", prog, "-o", str(sem), "--pretty"]) == EXIT_OK
        parse_formula(sem.read_text())
        assert run(["simulate", prog, "-o", traj]) == EXIT_OK
        assert run(["check-trace", str(sem), traj, "--format", "json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["verdict"] == "true"

    def test_check_trace_false(self, tmp_path, capsys):
        formula, traj = tmp_path / "f.dc", str(tmp_path / "run.traj")
        formula.write_text("(= (var x) 5)")
        assert run(["simulate", corpus_path("03_assign.hcsp"), "-o", traj]) == EXIT_OK
        assert run(["check-trace", str(formula), traj]) == EXIT_INVALID
        assert capsys.readouterr().out.strip().endswith(": false")

    def test_bad_formula_file(self, tmp_path):
        formula, traj = tmp_path / "f.dc", str(tmp_path / "run.traj")
        formula.write_text("(and true")
        assert run(["simulate", corpus_path("03_assign.hcsp"), "-o", traj]) == EXIT_OK
        assert run(["check-trace", str(formula), traj]) == EXIT_ERROR


class TestProofs:
    def test_corpus_scripts(self):
        assert run(["check-proof", corpus_path("weaken.proof")]) == EXIT_OK
        assert run(["check-proof", corpus_path("bad_weaken.proof")]) == EXIT_INVALID

    def test_counterexample_is_written(self, tmp_path):
        cex = str(tmp_path / "cex.traj")
        assert run(["check-proof", corpus_path("bad_weaken.proof"), "--counterexample", cex]) == EXIT_INVALID
        assert Trajectory.load(cex).segments

    def test_derive_then_check(self, tmp_path, capsys):
        proof = str(tmp_path / "seq.proof")
        assert run(["derive", corpus_path("05_seq.hcsp"), "-o", proof]) == EXIT_OK
        assert run(["check-proof", proof, "--format", "json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["verdict"] == "valid"

    def test_assumptions_can_be_refused(self, tmp_path):
        proof = str(tmp_path / "seq.proof")
        assert run(["derive", corpus_path("05_seq.hcsp"), "-o", proof, "--strategy", "assumed"]) == EXIT_OK
        assert run(["check-proof", proof]) == EXIT_OK
        assert run(["check-proof", proof, "--no-assumptions"]) == EXIT_INVALID

    def test_derive_for_a_given_postcondition(self, tmp_path):
        proof = str(tmp_path / "any.proof")
        assert run(["derive", corpus_path("03_assign.hcsp"), "--post", "true", "-o", proof]) == EXIT_OK
        assert run(["check-proof", proof]) == EXIT_OK
