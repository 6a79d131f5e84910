"""Command line interface: schemas, exit codes, pipelines, determinism."""

import json
import os
import subprocess
import sys
from fractions import Fraction

import pytest

from jordanium.algebra import build_spin
from jordanium.cli import main
from jordanium.connections import gauge_potential, potential_to_dict
from jordanium.derivations import derivation_basis, structure_constants
from jordanium.linalg import Mat

REPORT_KEYS = {"tool", "version", "command", "inputs_digest", "results", "timing_ms"}


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run_cli(capsys, *argv)
    return code, json.loads(out)


class TestReportEnvelope:
    def test_schema_and_pass(self, capsys):
        code, rep = report(capsys, "algebra", "check", "--algebra", "j13")
        assert code == 0
        assert set(rep) == REPORT_KEYS
        assert rep["tool"] == "jordanium"
        assert rep["command"] == "algebra check"
        assert rep["results"]["jordan"] is True
        assert isinstance(rep["timing_ms"], int)
        assert len(rep["inputs_digest"]) == 64

    def test_pretty_adds_stderr_summary(self, capsys):
        code, out, err = run_cli(
            capsys, "--pretty", "algebra", "check", "--algebra", "jspin3"
        )
        assert code == 0
        assert out.startswith("{\n")
        assert "algebra check: pass" in err

    def test_digest_tracks_inputs(self, capsys):
        _, rep1 = report(capsys, "algebra", "check", "--algebra", "j13")
        _, rep2 = report(capsys, "algebra", "check", "--algebra", "jspin3")
        assert rep1["inputs_digest"] != rep2["inputs_digest"]


class TestAliases:
    @pytest.mark.parametrize(
        "alias,label,dim",
        [
            ("j13", "J1_3", 6),
            ("j22", "J2_2", 4),
            ("j42", "J4_2", 6),
            ("jspin2", "JSpin2", 3),
            ("jspin9", "JSpin9", 10),
            ("real", "R", 1),
        ],
    )
    def test_alias_resolves(self, capsys, alias, label, dim):
        code, rep = report(capsys, "algebra", "check", "--algebra", alias)
        assert code == 0
        assert rep["results"]["label"] == label
        assert rep["results"]["dim"] == dim

    def test_unknown_alias_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "algebra", "check", "--algebra", "j99")
        assert code == 2
        assert err.strip()


class TestBuildCommands:
    def test_algebra_build_emits_wire_object(self, capsys):
        code, out, _ = run_cli(
            capsys, "algebra", "build", "--type", "herm", "--n", "3", "--level", "1"
        )
        assert code == 0
        d = json.loads(out)
        assert d["label"] == "J2_3"
        assert d["dim"] == 9
        assert "structure" in d

    def test_build_then_check_pipeline(self, capsys, tmp_path):
        _, out, _ = run_cli(
            capsys, "algebra", "build", "--type", "herm", "--n", "2", "--level", "2"
        )
        f = tmp_path / "algebra.json"
        f.write_text(out)
        code, rep = report(capsys, "algebra", "check", "--algebra", str(f))
        assert code == 0
        assert rep["results"]["label"] == "J4_2"
        assert rep["results"]["jordan"] is True

    def test_sum_build(self, capsys):
        code, out, _ = run_cli(
            capsys, "algebra", "build", "--type", "sum", "--parts", "j12", "j12"
        )
        assert code == 0
        d = json.loads(out)
        assert d["dim"] == 6

    def test_module_build_and_check(self, capsys, tmp_path):
        _, out, _ = run_cli(
            capsys, "module", "build", "--type", "clifford", "--n", "2"
        )
        f = tmp_path / "cl2.json"
        f.write_text(out)
        code, rep = report(capsys, "module", "check", "--module", str(f))
        assert code == 0
        assert rep["results"]["passed"] is True

    def test_module_build_free_needs_rank(self, capsys):
        code, _, err = run_cli(
            capsys, "module", "build", "--type", "free", "--algebra", "jspin2"
        )
        assert code == 2
        assert "rank" in err


class TestDerivationCommands:
    def test_basis_dim(self, capsys):
        code, rep = report(capsys, "der", "basis", "--algebra", "j23")
        assert code == 0
        assert rep["results"]["dim"] == 8

    def test_inner_span(self, capsys):
        code, rep = report(capsys, "der", "inner", "--algebra", "j13")
        assert code == 0
        assert rep["results"]["spans_derivations"] is True

    def test_d4_on_small_algebra_reports_dim(self, capsys):
        code, rep = report(capsys, "der", "d4", "--algebra", "j13")
        assert code == 0
        assert "dim" in rep["results"]

    def test_triality_samples(self, capsys):
        code, rep = report(capsys, "der", "triality", "--seed", "3", "--count", "2")
        assert code == 0
        assert rep["results"]["residual_zero"] is True


class TestFormsCommand:
    def test_d2check_passes(self, capsys):
        code, rep = report(capsys, "forms", "d2check", "--algebra", "jspin3")
        assert code == 0
        assert rep["results"]["all_zero"] is True

    def test_maxdeg_capped(self, capsys):
        code, _, err = run_cli(
            capsys, "forms", "d2check", "--algebra", "jspin3", "--maxdeg", "2"
        )
        assert code == 2
        assert err.strip()


class TestConnectionCommands:
    @staticmethod
    def _write_scalar_potential(tmp_path, vals):
        der = derivation_basis(build_spin(3))
        a = gauge_potential(der, 1, [Mat.from_rows([[v]]) for v in vals])
        d = potential_to_dict(a)
        d["algebra"] = "jspin3"
        f = tmp_path / "pot.json"
        f.write_text(json.dumps(d))
        return f

    def test_zero_potential_is_flat(self, capsys, tmp_path):
        f = self._write_scalar_potential(tmp_path, [Fraction(0)] * 3)
        code, rep = report(capsys, "conn", "flat", "--potential", str(f))
        assert code == 0
        assert rep["results"]["flat"] is True

    def test_curved_potential_fails_flat(self, capsys, tmp_path):
        f = self._write_scalar_potential(
            tmp_path, [Fraction(1), Fraction(2), Fraction(3)]
        )
        code, rep = report(capsys, "conn", "flat", "--potential", str(f))
        assert code == 1
        assert rep["results"]["flat"] is False

    def test_curvature_report_is_informational(self, capsys, tmp_path):
        # same curved input, but the report command succeeds and shows matrices
        f = self._write_scalar_potential(
            tmp_path, [Fraction(1), Fraction(2), Fraction(3)]
        )
        code, rep = report(capsys, "conn", "curvature", "--potential", str(f), "--full")
        assert code == 0
        assert rep["results"]["flat"] is False
        assert any("matrix" in p for p in rep["results"]["pairs"])

    def test_adjoint_potential_flat(self, capsys, tmp_path):
        der = derivation_basis(build_spin(3))
        b = structure_constants(der)
        mats = [
            Mat.from_rows(
                [[b[mu][i][j] for i in range(der.dim)] for j in range(der.dim)]
            )
            for mu in range(der.dim)
        ]
        d = potential_to_dict(gauge_potential(der, der.dim, mats))
        d["algebra"] = "jspin3"
        f = tmp_path / "adj.json"
        f.write_text(json.dumps(d))
        code, rep = report(capsys, "conn", "flat", "--potential", str(f))
        assert code == 0
        assert rep["results"]["flat"] is True

    def test_innerflat_from_built_module(self, capsys, tmp_path):
        _, out, _ = run_cli(
            capsys, "module", "build", "--type", "antiherm", "--n", "2", "--level", "1"
        )
        f = tmp_path / "a22.json"
        f.write_text(out)
        code, rep = report(capsys, "conn", "innerflat", "--module", str(f))
        assert code == 0
        assert rep["results"]["flat"] is True

    def test_malformed_potential_is_usage_error(self, capsys, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text("{not json")
        code, _, err = run_cli(capsys, "conn", "flat", "--potential", str(f))
        assert code == 2
        assert "malformed" in err


class TestErrorPaths:
    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run_cli(
            capsys, "algebra", "check", "--algebra", str(tmp_path / "nope.json")
        )
        assert code == 2
        assert err.strip()

    def test_corrupt_algebra_fails_check(self, capsys, tmp_path):
        # a wire file that parses but is not a Jordan algebra: exit 1
        _, out, _ = run_cli(
            capsys, "algebra", "build", "--type", "herm", "--n", "3", "--level", "0"
        )
        d = json.loads(out)
        bad = []
        for i, j, k, v in d["structure"]:
            if (i, j) in ((3, 4), (4, 3)):
                num, _, den = v.partition("/")
                v = "%d/%d" % (int(num) * 3 + 1, 3 * int(den or 1))
            bad.append([i, j, k, v])
        f = tmp_path / "corrupt.json"
        f.write_text(json.dumps(dict(d, structure=bad)))
        code, rep = report(capsys, "algebra", "check", "--algebra", str(f))
        assert code == 1
        assert rep["results"]["jordan"] is False


def _canonical_run(cmd, threads):
    env = dict(os.environ, JORDANIUM_THREADS=str(threads))
    proc = subprocess.run(
        [sys.executable, "-m", "jordanium.cli"] + cmd,
        capture_output=True,
        text=True,
        env=env,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    d = json.loads(proc.stdout)
    d.pop("timing_ms")
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


class TestDeterminism:
    @pytest.mark.parametrize(
        "cmd",
        [
            ["der", "basis", "--algebra", "j23"],
            ["algebra", "check", "--algebra", "jspin4"],
            ["der", "inner", "--algebra", "j13"],
        ],
    )
    def test_reports_stable_across_runs_and_threads(self, cmd):
        first = _canonical_run(cmd, 1)
        assert _canonical_run(cmd, 1) == first
        assert _canonical_run(cmd, 8) == first
