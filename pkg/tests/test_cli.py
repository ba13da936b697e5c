import json

import pytest

from ncpredict.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def machine(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "machine")
    return code, json.loads(out)


class TestScenario:
    def test_epr(self, capsys):
        code, rep = machine(capsys, "scenario", "epr", "--a2", "0.3")
        assert code == 0
        assert rep["analytic"]["observed_probabilities"][1] == pytest.approx(0.3, abs=1e-12)
        assert rep["analytic"]["conditional_table"][1][0] == 1.0

    def test_destructive_double_slit(self, capsys):
        s = str(2 ** -0.5)
        code, rep = machine(capsys, "scenario", "double-slit", "--mode", "particle", "--t", "1",
                            "--a-re", s, "--b-re", "-" + s)
        assert code == 0
        assert rep["analytic"]["unconditional_intensity"] == pytest.approx(0.0, abs=1e-15)

    def test_unnormalized_amplitudes(self, capsys):
        code, _, err = run(capsys, "scenario", "cat", "--a-re", "0.5", "--b-re", "0.5")
        assert code == 2
        assert "|a|^2 + |b|^2" in err

    def test_bad_observe(self, capsys):
        assert run(capsys, "scenario", "cat", "--observe", "plus")[0] == 2

    def test_null_observed_branch(self, capsys):
        assert run(capsys, "scenario", "cat", "--a2", "1", "--observe", "photon")[0] == 2

    def test_table_output(self, capsys):
        code, out, _ = run(capsys, "scenario", "cat", "--a2", "0.6", "--observe", "photon")
        assert code == 0
        assert "check: P(ground | photon) == 1" in out
        assert "0.4" in out

    def test_config_round_trip(self, capsys, tmp_path):
        code, rep = machine(capsys, "scenario", "double-slit", "--mode", "wave", "--energy", "2",
                            "--x-minus", "0", "0", "-2", "--a2", "0.37", "--observe", "minus")
        assert code == 0
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(rep["config"]))
        code, again = machine(capsys, "scenario", "--config", str(path))
        assert code == 0
        assert again["config"] == rep["config"]
        assert again["analytic"]["branch_probabilities"] == pytest.approx(rep["analytic"]["branch_probabilities"], abs=1e-11)
        assert again["analytic"]["observed"]["posterior_intensity"] == pytest.approx(rep["analytic"]["observed"]["posterior_intensity"], abs=1e-11)
        assert rep["analytic"]["conditioned_coefficients"] == pytest.approx([1.0, 0.25], abs=1e-12)

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        assert main(["scenario", "epr", "--out", str(out)]) == 0
        capsys.readouterr()
        assert json.loads(out.read_text())["config"]["kind"] == "epr"

    def test_missing_kind(self, capsys):
        assert run(capsys, "scenario")[0] == 2

    def test_wave_singularity(self, capsys):
        assert run(capsys, "scenario", "double-slit", "--mode", "wave", "--x-detect", "0", "0", "1")[0] == 2


class TestSample:
    def test_cat(self, capsys):
        code, rep = machine(capsys, "sample", "cat", "--a2", "0.6", "--shots", "100000", "--seed", "4")
        assert code == 0
        assert rep["sample"]["within_bound"] is True

    def test_single_shot(self, capsys):
        code, rep = machine(capsys, "sample", "epr", "--shots", "1", "--seed", "1")
        assert code == 0
        assert sum(rep["sample"]["counts"]) == 1

    def test_repeatable_bytes(self, capsys):
        first = run(capsys, "sample", "epr", "--a2", "0.3", "--seed", "8", "--shots", "20000")
        second = run(capsys, "sample", "epr", "--a2", "0.3", "--seed", "8", "--shots", "20000")
        assert first == second

    def test_bad_shots(self, capsys):
        assert run(capsys, "sample", "cat", "--shots", "0")[0] == 2


class TestVerify:
    def test_default_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--trials", "20")
        assert code == 0
        assert "FAIL" not in out

    def test_zero_tolerance_fails(self, capsys):
        code, _, err = run(capsys, "verify", "--trials", "5", "--tol", "0")
        assert code == 1
        assert "property failed" in err

    def test_deterministic_transcript(self, capsys):
        assert run(capsys, "verify", "--trials", "5", "--seed", "3") == run(capsys, "verify", "--trials", "5", "--seed", "3")

    def test_dims_range(self, capsys):
        assert run(capsys, "verify", "--dims", "1")[0] == 2
