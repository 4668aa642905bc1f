#!/usr/bin/env python3
"""
Tests for the command-line front end: golden reports, exit codes and the
orchestrator's status mapping.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import json
from pathlib import Path

import pytest
from app.cli import main
from app.config import Settings, get_settings
from app.orchestrator import Orchestrator
from app.schemas import CommandRequest, QuadraticFormSpec, TableCochainSpec
from app.services.em_cocycles import decode_logs, delta2, Cochain2, Cochain3
from app.services.gf2_core import Gf2Matrix
from app.services.quadratic_forms import agree_everywhere, pullback

DATA = Path(__file__).resolve().parent.parent / "data"
FIXTURES = DATA / "fixtures"
GOLDEN = DATA / "golden"


def _fixture(name: str) -> str:
    return str(FIXTURES / name)


def _fixture_json(name: str):
    return json.loads((FIXTURES / name).read_text())


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out, json.loads(out)


class TestGoldenReports:
    """Byte-identical reports for the stored golden files."""

    @pytest.mark.parametrize(
        "argv, golden",
        [
            (["classify", "--input", "q2q2.json"], "classify_q2q2.json"),
            (["equiv", "--input", "q1.json", "--input2", "q2.json"], "equiv_q1_q2.json"),
            (["verify-cocycle", "--input", "hwy_n2_a12.json"], "verify_cocycle_hwy_n2_a12.json"),
        ],
    )
    def test_golden(self, capsys, argv, golden):
        resolved = [_fixture(a) if a.endswith(".json") else a for a in argv]
        code = main(resolved)
        out = capsys.readouterr().out
        assert code == 0
        assert out == (GOLDEN / golden).read_text()

    def test_deterministic(self, capsys):
        first = _run(capsys, "smatrix", "--input", _fixture("q2.json"))[1]
        second = _run(capsys, "smatrix", "--input", _fixture("q2.json"))[1]
        assert first == second

    def test_json_flag_is_accepted(self, capsys):
        plain = _run(capsys, "classify", "--input", _fixture("q2q2.json"))[1]
        flagged = _run(capsys, "classify", "--input", _fixture("q2q2.json"), "--json")[1]
        assert flagged == plain

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = _run(capsys, "classify", "--input", _fixture("q1.json"), "--output", str(target))
        assert code == 0
        assert target.read_text() == out


class TestCommands:
    """Each command's payload and exit code."""

    def test_classify_q1(self, capsys):
        code, _, report = _run(capsys, "classify", "--input", _fixture("q1.json"))
        assert code == 0
        assert report["result"]["decomposition"] == ["q1"]
        assert report["result"]["tau_plus"] == 2

    def test_classify_degenerate(self, capsys):
        code, _, report = _run(capsys, "classify", "--input", _fixture("degenerate.json"))
        assert code == 2
        assert report["status"] == "invalid-input"

    def test_missing_file(self, capsys):
        code, _, report = _run(capsys, "classify", "--input", _fixture("missing.json"))
        assert code == 2
        assert report["status"] == "invalid-input"

    def test_verify_trivial_cocycle_has_certificate(self, capsys):
        code, _, report = _run(capsys, "verify-cocycle", "--input", _fixture("hwy_n2_zero.json"))
        assert code == 0
        result = report["result"]
        assert result["fs_exponent"] == 2
        cert = result["certificate"]
        h = Cochain2(cert["n"], decode_logs(cert["h"], cert["n"], 2))
        assert delta2(h) == Cochain3.trivial(2)

    def test_verify_nontrivial_cocycle(self, capsys):
        code, _, report = _run(capsys, "verify-cocycle", "--input", _fixture("hwy_n1_a1.json"))
        assert code == 0
        assert report["result"]["fs_exponent"] == 4
        assert report["result"]["certificate"] is None

    def test_verify_table_cocycle(self, capsys):
        code, _, report = _run(capsys, "verify-cocycle", "--input", _fixture("table_n1_nontrivial.json"))
        assert code == 0
        assert report["result"]["restriction_vector"] == [-1]

    def test_verify_corrupted_table(self, capsys):
        code, _, report = _run(capsys, "verify-cocycle", "--input", _fixture("table_n2_corrupted.json"))
        assert code == 3
        assert report["status"] == "verification-failed"
        assert report["result"]["is_cocycle"] is False

    def test_verify_with_braiding(self, capsys):
        code, _, report = _run(
            capsys, "verify-cocycle",
            "--input", _fixture("table_n2_trivial.json"),
            "--input2", _fixture("braiding_c2.json"),
        )
        assert code == 0
        assert report["result"]["hexagons"] is True
        assert report["result"]["trace"] == {"linear": [1, 1], "n": 2, "quad": [[1, 2]]}

    def test_equiv_witness(self, capsys):
        code, _, report = _run(capsys, "equiv", "--input", _fixture("q1q1.json"), "--input2", _fixture("q2q2.json"))
        assert code == 0
        result = report["result"]
        assert result["verdict"] == "equivalent"
        q = QuadraticFormSpec.model_validate(_fixture_json("q1q1.json")).to_form()
        r = QuadraticFormSpec.model_validate(_fixture_json("q2q2.json")).to_form()
        f = Gf2Matrix.from_rows(result["f"], 4)
        assert agree_everywhere(q, pullback(r, f))
        assert result["mu"] is not None

    def test_equiv_same_file(self, capsys):
        code, _, report = _run(capsys, "equiv", "--input", _fixture("q2.json"), "--input2", _fixture("q2.json"))
        assert code == 0
        assert report["result"]["verdict"] == "equivalent"

    @pytest.mark.parametrize("dim, counts", [(2, (3, 1)), (4, (10, 6))])
    def test_enumerate(self, capsys, dim, counts):
        code, _, report = _run(capsys, "enumerate", "--dim", str(dim))
        assert code == 0
        result = report["result"]
        assert (result["arf0"], result["arf1"], result["classes"]) == counts + (2,)
        assert result["orbits_verified"] is True

    def test_enumerate_cap(self, capsys):
        code, _, report = _run(capsys, "enumerate", "--dim", "14")
        assert code == 2
        assert report["status"] == "invalid-input"

    def test_max_n_lowers_the_cap(self, capsys):
        code, _, _ = _run(capsys, "enumerate", "--dim", "4", "--max-n", "2")
        assert code == 2
        code, _, _ = _run(capsys, "enumerate", "--dim", "2", "--max-n", "40")
        assert code == 2

    def test_smatrix(self, capsys):
        code, _, report = _run(capsys, "smatrix", "--input", _fixture("q1.json"))
        assert code == 0
        result = report["result"]
        assert result["S"] == [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]]
        assert result["T"] == [1, 1, 1, -1]
        assert result["tau_plus"] == sum(result["T"])
        assert result["decomposition"] == ["q1"]

    def test_smatrix_q2(self, capsys):
        _, _, report = _run(capsys, "smatrix", "--input", _fixture("q2.json"))
        assert report["result"]["T"] == [1, -1, -1, -1]
        assert report["result"]["xi"] == -1

    def test_smatrix_degenerate(self, capsys):
        code, _, _ = _run(capsys, "smatrix", "--input", _fixture("degenerate.json"))
        assert code == 2


class TestOrchestrator:
    """Direct requests without the argument parser."""

    def setup_method(self):
        self.orchestrator = Orchestrator()

    def test_malformed_form(self):
        req = CommandRequest(command="classify", input={"n": 2, "linear": [1], "quad": []})
        report = self.orchestrator.respond(req)
        assert report.status == "invalid-input"
        assert report.exit_code == 2

    def test_missing_input(self):
        report = self.orchestrator.respond(CommandRequest(command="smatrix"))
        assert report.status == "invalid-input"

    def test_inputs_are_canonical(self):
        req = CommandRequest(command="classify", input={"quad": [[3, 4], [1, 2]], "linear": [0, 0, 0, 0], "n": 4})
        report = self.orchestrator.respond(req)
        assert report.status == "ok"
        assert report.inputs["input"]["quad"] == [[1, 2], [3, 4]]

    def test_braiding_dimension_mismatch(self):
        braiding = TableCochainSpec.from_cochain(Cochain2.trivial(1)).canonical()
        req = CommandRequest(
            command="verify-cocycle", input=_fixture_json("hwy_n2_zero.json"), input2=braiding
        )
        assert self.orchestrator.respond(req).status == "invalid-input"

    def test_failed_hexagons(self):
        table = Cochain2.trivial(2).values.copy()
        table[3, 3] = 1
        braiding = TableCochainSpec.from_cochain(Cochain2(2, table)).canonical()
        req = CommandRequest(
            command="verify-cocycle", input=_fixture_json("table_n2_trivial.json"), input2=braiding
        )
        report = self.orchestrator.respond(req)
        assert report.status == "verification-failed"
        assert report.result["hexagons"] is False


class TestSettings:
    """Environment caps are clamped, and unusable values fall back to the compiled caps."""

    def setup_method(self):
        get_settings.cache_clear()

    def teardown_method(self):
        get_settings.cache_clear()

    def test_defaults(self, monkeypatch):
        for name in ("FS2_MAX_FORM_DIM", "FS2_MAX_SCAN_N", "FS2_MAX_SOLVER_N"):
            monkeypatch.delenv(name, raising=False)
        settings = Settings.from_env()
        assert (settings.max_form_dim, settings.max_scan_n, settings.max_solver_n) == (12, 4, 6)

    @pytest.mark.parametrize("raw, expected", [("2", 2), ("9", 4), ("abc", 4), ("-1", 4), ("", 4)])
    def test_scan_cap_values(self, monkeypatch, raw, expected):
        monkeypatch.setenv("FS2_MAX_SCAN_N", raw)
        assert Settings.from_env().max_scan_n == expected

    def test_malformed_env_keeps_exit_codes(self, capsys, monkeypatch):
        monkeypatch.setenv("FS2_MAX_SCAN_N", "abc")
        monkeypatch.setenv("FS2_MAX_FORM_DIM", "twelve")
        code, _, report = _run(capsys, "verify-cocycle", "--input", _fixture("hwy_n2_a12.json"))
        assert code == 0
        assert report["status"] == "ok"

    def test_lowered_cap_rejects_input(self, capsys, monkeypatch):
        monkeypatch.setenv("FS2_MAX_SCAN_N", "1")
        code, _, report = _run(capsys, "verify-cocycle", "--input", _fixture("hwy_n2_a12.json"))
        assert code == 2
        assert report["status"] == "invalid-input"
