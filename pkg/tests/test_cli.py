import json

import numpy as np

from dickesim import cli


def write_config(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


SINGLE_N1 = """
[cloud]
n_atoms = 1
r0_k0 = 3.0
gamma1 = 1.0
seed = 7

[time_grid]
t_start_gamma1 = 0.05
t_stop_gamma1 = 2.0
points = 12
spacing = "linear"
"""

SINGLE_SMALL = """
[cloud]
n_atoms = 24
r0_k0 = 4.0
gamma1 = 1.0
seed = 11

[time_grid]
t_start_gamma1 = 0.01
t_stop_gamma1 = 3.0
points = 16
spacing = "log"

[single]
export_positions = true
export_amplitudes = true
"""

SWEEP_SMALL = """
[cloud]
gamma1 = 1.0
seed = 5

[sweep]
n_atoms = [8, 16, 32]
k0r0 = [3.0]
realizations = 50
record_forward = false
fit_exponents = true
"""


class TestSingle:
    def test_n1_survival_matches_single_atom_decay(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE_N1)
        assert cli.main(["single", "--config", str(cfg), "--out", str(tmp_path / "o"),
                         "--quiet"]) == 0
        rows = (tmp_path / "o" / "survival.csv").read_text().strip().splitlines()[1:]
        t = np.array([float(r.split(",")[0]) for r in rows])
        s = np.array([float(r.split(",")[1]) for r in rows])
        np.testing.assert_allclose(s, np.exp(-2.0 * t), atol=1e-12)

    def test_outputs_and_reproducibility(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE_SMALL)
        for d in ("a", "b"):
            assert cli.main(["single", "--config", str(cfg), "--out",
                             str(tmp_path / d), "--quiet"]) == 0
        for name in ("results.json", "survival.csv", "positions.csv", "amplitudes.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        results = json.loads((tmp_path / "a" / "results.json").read_text())
        assert results["gamma_col"] > 0
        assert "optical_depth" in results["diagnostics"]

    def test_validity_warning_recorded(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE_N1.replace("r0_k0 = 3.0", "r0_k0 = 0.5"))
        out = tmp_path / "w"
        assert cli.main(["single", "--config", str(cfg), "--out", str(out),
                         "--quiet"]) == 0
        results = json.loads((out / "results.json").read_text())
        assert any("k0*R0" in w for w in results["warnings"])
        assert "WARNING" in (out / "summary.txt").read_text()

    def test_seed_override_changes_positions(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE_SMALL)
        cli.main(["single", "--config", str(cfg), "--out", str(tmp_path / "s1"), "--quiet"])
        cli.main(["single", "--config", str(cfg), "--out", str(tmp_path / "s2"),
                  "--seed", "999", "--quiet"])
        a = (tmp_path / "s1" / "positions.csv").read_text()
        b = (tmp_path / "s2" / "positions.csv").read_text()
        assert a != b


class TestSweep:
    def test_sweep_outputs(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_SMALL)
        out = tmp_path / "sw"
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(out),
                         "--quiet"]) == 0
        results = json.loads((out / "results.json").read_text())
        assert len(results["points"]) == 3
        assert results["exponents"]
        header = (out / "sweep_summary.csv").read_text().splitlines()[0]
        assert "slope:" in header
        n_lines = len((out / "records.jsonl").read_text().strip().splitlines())
        assert n_lines == 150

    def test_sweep_reproducible_bytes(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_SMALL)
        for d in ("r1", "r2"):
            assert cli.main(["sweep", "--config", str(cfg), "--out",
                             str(tmp_path / d), "--quiet"]) == 0
        for name in ("results.json", "sweep_summary.csv", "records.jsonl"):
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()

    def test_insufficient_realizations_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, SWEEP_SMALL.replace("realizations = 50",
                                                         "realizations = 5"))
        assert cli.main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "x"),
                         "--quiet"]) == cli.EXIT_CONFIG


class TestErrors:
    def test_missing_config(self, tmp_path):
        assert cli.main(["single", "--config", str(tmp_path / "nope.toml"),
                         "--out", str(tmp_path / "o"), "--quiet"]) == cli.EXIT_CONFIG

    def test_config_required_for_single(self, tmp_path):
        assert cli.main(["single", "--out", str(tmp_path / "o"), "--quiet"]) == cli.EXIT_CONFIG

    def test_parse_error(self, tmp_path):
        cfg = write_config(tmp_path, "[cloud\nbroken")
        assert cli.main(["single", "--config", str(cfg), "--out", str(tmp_path / "o"),
                         "--quiet"]) == cli.EXIT_CONFIG

    def test_invalid_parameters(self, tmp_path):
        cfg = write_config(tmp_path, SINGLE_N1.replace("n_atoms = 1", "n_atoms = 0"))
        assert cli.main(["single", "--config", str(cfg), "--out", str(tmp_path / "o"),
                         "--quiet"]) == cli.EXIT_CONFIG

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        from dickesim.errors import NumericalDecompositionError

        def boom(*a, **k):
            raise NumericalDecompositionError("synthetic failure", details={})

        monkeypatch.setattr(cli, "build_decay_matrix", boom)
        cfg = write_config(tmp_path, SINGLE_SMALL)
        assert cli.main(["single", "--config", str(cfg), "--out", str(tmp_path / "o"),
                         "--quiet"]) == cli.EXIT_NUMERICAL
