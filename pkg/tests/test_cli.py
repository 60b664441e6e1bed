"""
Tests for the experiment runner: exit codes, output headers, config files and determinism
"""

import json
import math

import pytest

import run_experiments
from app.data_provider import create_data_provider
from app.data_writer import read_csv_body
from app.report_generator import CheckResult, K4_EDGES, pairing_from_edges


def _header(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("# ")
    return json.loads(first[2:])


class TestExitCodes:

    def test_thresholds(self, tmp_path):
        out = tmp_path / "thresholds.csv"
        assert run_experiments.main(["thresholds", "--d", "10", "--beta", "0.32", "--out", str(out)]) == 0
        row = read_csv_body(out).iloc[0]
        assert row["beta_c"] == pytest.approx(math.log(1.25), abs=1e-10)
        assert row["beta_r"] == pytest.approx(math.log(2.0), abs=1e-10)
        assert 0.0 < row["eta_s"] < row["eta_star"] < 1.0
        assert row["m_star"] == pytest.approx(row["eta_star"], abs=1e-6)

    def test_unknown_flag(self):
        assert run_experiments.main(["thresholds", "--bogus", "1"]) == 2

    def test_unknown_subcommand(self):
        assert run_experiments.main(["anneal"]) == 2

    def test_out_of_range_parameter(self):
        assert run_experiments.main(["thresholds", "--d", "2"]) == 2
        assert run_experiments.main(["bp", "--beta", "-1"]) == 2

    def test_odd_clone_count(self):
        assert run_experiments.main(["run-dynamics", "--n", "5", "--d", "3"]) == 2

    def test_graph_subcommand_needs_size(self):
        assert run_experiments.main(["sample-planted", "--d", "3"]) == 2

    def test_missing_config_file(self, tmp_path):
        assert run_experiments.main(["thresholds", "--config", str(tmp_path / "absent.cfg")]) == 2

    def test_failed_validation_exits_one(self, tmp_path, monkeypatch):
        def failing_suite():
            return [CheckResult(name="always_fails", passed=False, max_error=1.0, detail="")]

        monkeypatch.setattr(run_experiments, "run_validation_suite", failing_suite)
        out = tmp_path / "oracle.csv"
        assert run_experiments.main(["oracle-validate", "--out", str(out)]) == 1
        assert read_csv_body(out)["passed"].tolist() == [False]


class TestOutputs:

    def test_metadata_header(self, tmp_path):
        out = tmp_path / "bp.csv"
        assert run_experiments.main(["bp", "--d", "3", "--beta", "2.0", "--seed", "5", "--out", str(out)]) == 0
        header = _header(out)
        assert header["params"]["d"] == 3
        assert header["params"]["beta"] == 2.0
        assert header["seed"] == 5
        assert header["rng"] == "philox4x64"
        assert "version" in header
        assert header["results"]["num_fixed_points"] == 3
        frame = read_csv_body(out)
        assert len(frame) == 3
        assert frame["stable"].tolist() == [True, False, True]

    def test_free_energy_curve(self, tmp_path):
        out = tmp_path / "curve.csv"
        assert run_experiments.main(["free-energy-curve", "--d", "10", "--beta", "0.32",
                                     "--points", "2001", "--out", str(out)]) == 0
        frame = read_csv_body(out)
        assert len(frame) == 2001
        assert list(frame.columns) == ["eta", "f", "rho_eta", "F", "rate_function"]

    def test_reconstruction(self, tmp_path):
        out = tmp_path / "recon.csv"
        assert run_experiments.main(["reconstruction", "--d", "3", "--beta", "0.5", "--depth", "3",
                                     "--samples", "200", "--out", str(out)]) == 0
        frame = read_csv_body(out)
        assert frame["depth"].tolist() == [1, 2, 3]

    def test_sample_planted_writes_sample(self, tmp_path):
        out = tmp_path / "planted.csv"
        code = run_experiments.main(["sample-planted", "--n", "40", "--d", "3", "--beta", "0.5",
                                     "--replicas", "3", "--out", str(out)])
        assert code == 0
        frame = read_csv_body(out)
        assert len(frame) == 3
        sample = create_data_provider("planted", str(tmp_path / "planted.planted.txt")).load()
        assert sample.pairing.n == 40
        assert sample.config.k_plus == 20
        assert sample.bichromatic_count == frame["bichromatic"].iloc[0]

    def test_projection_on_pairing_file(self, tmp_path):
        pairing_path = tmp_path / "k4.txt"
        pairing_path.write_text(pairing_from_edges(4, 3, K4_EDGES).to_text())
        out = tmp_path / "projection.csv"
        code = run_experiments.main(["projection", "--pairing", str(pairing_path), "--d", "3",
                                     "--beta", "0.5", "--sweeps", "20", "--burn-in", "2", "--out", str(out)])
        assert code == 0
        frame = read_csv_body(out)
        assert frame["k"].tolist() == [2, 3]
        assert "annealed_F" in frame.columns

    def test_pairing_file_degree_mismatch(self, tmp_path):
        pairing_path = tmp_path / "k4.txt"
        pairing_path.write_text(pairing_from_edges(4, 3, K4_EDGES).to_text())
        assert run_experiments.main(["run-dynamics", "--pairing", str(pairing_path), "--d", "4"]) == 2

    def test_zb_check_runs(self, tmp_path):
        out = tmp_path / "zb.csv"
        code = run_experiments.main(["zb-check", "--n", "20", "--d", "3", "--beta", "0.5",
                                     "--sweeps", "20", "--burn-in", "5", "--out", str(out)])
        assert code in (0, 1)
        assert read_csv_body(out)["n"].tolist() == [20]

    @pytest.mark.parametrize("variant", ["glauber_plus", "hybrid_plus"])
    def test_restricted_dynamics_from_uniform_start(self, tmp_path, variant):
        for seed in range(6):
            out = tmp_path / f"{variant}_{seed}.csv"
            assert run_experiments.main(["run-dynamics", "--n", "20", "--d", "3", "--beta", "0.5",
                                         "--variant", variant, "--seed", str(seed),
                                         "--sweeps", "5", "--out", str(out)]) == 0
            assert (2 * read_csv_body(out)["k_plus"] >= 20).all()


class TestConfigFiles:

    CONFIG = "# dynamics run\nn = 30\nd = 3\nbeta = 0.6\nseed = 7\nreplicas = 2\nsweeps = 5\nburn-in = 1\n"

    def test_same_config_same_body(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(self.CONFIG)
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_experiments.main(["run-dynamics", "--config", str(config), "--out", str(first)]) == 0
        assert run_experiments.main(["run-dynamics", "--config", str(config), "--workers", "2",
                                     "--out", str(second)]) == 0
        lines_a, lines_b = first.read_text().splitlines(), second.read_text().splitlines()
        assert lines_a[0] == lines_b[0]
        assert lines_a[2:] == lines_b[2:]
        frame = read_csv_body(first)
        assert sorted(frame["replica"].unique()) == [0, 1]
        assert len(frame) == 2 * 6

    def test_flags_override_file(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(self.CONFIG)
        out = tmp_path / "c.csv"
        assert run_experiments.main(["run-dynamics", "--config", str(config), "--beta", "0.1", "--out", str(out)]) == 0
        assert _header(out)["params"]["beta"] == 0.1

    def test_unknown_key(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("temperature = 3\n")
        assert run_experiments.main(["thresholds", "--config", str(config)]) == 2

    def test_malformed_line(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("d 3\n")
        assert run_experiments.main(["thresholds", "--config", str(config)]) == 2
