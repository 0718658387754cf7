import glob
import json
import os

import numpy as np
import pytest

from poscomm.cli import function_from_config, load_config, main, run
from poscomm.errors import ConfigError, SectionAbsentError
from poscomm.reporting import emit_plot_data, stable_bytes

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs", "paper")
ALL_CONFIGS = sorted(glob.glob(os.path.join(CONFIG_DIR, "*.json")))

FAST_CONFIGS = [p for p in ALL_CONFIGS
                if json.load(open(p)).get("grid", {}).get("N", 512) <= 1024]


def test_corpus_exists():
    assert len(ALL_CONFIGS) >= 20


class TestFunctionDescriptors:
    def test_catalog_names(self):
        fn = function_from_config(
            {"catalog": "tanh-affine", "params": {"rate": 2.0}})
        assert fn(0.0) == 0.0
        s = function_from_config(
            {"catalog": "sum", "params": {"terms": [
                {"catalog": "tanh-affine", "params": {"rate": 1.0}},
                {"catalog": "constant", "params": {"value": 0.5}}]}})
        assert s(50.0) == pytest.approx(1.5, abs=1e-12)

    def test_unknown_name_rejected(self):
        with pytest.raises(ConfigError):
            function_from_config({"catalog": "nope"})

    def test_bad_params_rejected(self):
        with pytest.raises(ConfigError):
            function_from_config(
                {"catalog": "tanh-affine", "params": {"slope": 2}})

    def test_sample_file(self, tmp_path):
        t = np.linspace(-20, 20, 801)
        path = tmp_path / "samples.txt"
        np.savetxt(path, np.column_stack([t, np.tanh(t)]))
        fn = function_from_config({"samples": str(path)})
        assert fn(0.5) == pytest.approx(np.tanh(0.5), abs=1e-4)


class TestValidation:
    def test_power_of_two_enforced(self, tmp_path):
        cfg = {"schema_version": 1, "kind": "verify-pair",
               "f": {"catalog": "tanh-affine", "params": {"rate": 1.0}},
               "g": {"catalog": "tanh-affine", "params": {"rate": 1.0}},
               "grid": {"L": 24.0, "N": 1000}}
        p = tmp_path / "bad.json"
        p.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(p)]) == 2

    def test_unknown_kind(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"schema_version": 1, "kind": "nope"}))
        assert main(["run", "--config", str(p)]) == 2

    def test_missing_config_file(self):
        assert main(["run", "--config", "/does/not/exist.json"]) == 2

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["run", "--config", str(p)]) == 2

    def test_bad_tolerance(self):
        cfg = load_config(os.path.join(CONFIG_DIR, "verify-pair-two-atom.json"))
        cfg["tolerances"] = {"trace": -1.0}
        with pytest.raises(ConfigError):
            run(cfg)


class TestRunCorpus:
    @pytest.mark.parametrize("path", FAST_CONFIGS,
                             ids=[os.path.basename(p) for p in FAST_CONFIGS])
    def test_config_passes(self, path, tmp_path):
        cfg = load_config(path)
        report = run(cfg, out=str(tmp_path / "report.json"))
        assert report["verdict"] == "pass", [
            c for c in report["checks"] if c["verdict"] != "pass"]
        assert (tmp_path / "report.json").exists()

    def test_exit_codes(self, tmp_path):
        ok = os.path.join(CONFIG_DIR, "loewner-square-falsify.json")
        assert main(["run", "--config", ok,
                     "--out", str(tmp_path / "r.json")]) == 0
        # flip the expectation -> checks fail -> exit 1
        cfg = json.load(open(ok))
        cfg["params"]["expect"] = "pass"
        bad = tmp_path / "flipped.json"
        bad.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(bad),
                     "--out", str(tmp_path / "r2.json")]) == 1


def test_report_byte_stability_spot_check():
    # full-corpus determinism runs in the acceptance suite; keep one
    # cheap spot check here
    cfg = load_config(os.path.join(CONFIG_DIR, "deriv-avg-tanh.json"))
    assert stable_bytes(run(cfg)) == stable_bytes(run(cfg))


class TestPlotData:
    def test_eigenvalues_table(self, tmp_path):
        cfg = load_config(os.path.join(CONFIG_DIR, "rank1-shifted.json"))
        report = run(cfg)
        out = tmp_path / "eig.csv"
        emit_plot_data(report, "eigenvalues", str(out))
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "index,eigenvalue"
        assert len(lines) == 1 + 1024

    def test_measure_atoms_table(self, tmp_path):
        cfg = load_config(os.path.join(CONFIG_DIR, "fit-measure-two-atom.json"))
        report = run(cfg)
        out = tmp_path / "atoms.csv"
        emit_plot_data(report, "measure-atoms", str(out))
        rows = [l.split(",") for l in out.read_text().strip().splitlines()[1:]]
        locs = sorted(float(r[0]) for r in rows)
        assert locs[0] == pytest.approx(-1.0, abs=0.05)
        assert locs[-1] == pytest.approx(1.0, abs=0.05)

    def test_convergence_table(self, tmp_path):
        cfg = load_config(os.path.join(CONFIG_DIR, "deriv-avg-tanh.json"))
        report = run(cfg)
        out = tmp_path / "conv.csv"
        emit_plot_data(report, "convergence", str(out))
        assert len(out.read_text().strip().splitlines()) == 5

    def test_absent_section(self):
        cfg = load_config(os.path.join(CONFIG_DIR, "fit-measure-two-atom.json"))
        report = run(cfg)
        with pytest.raises(SectionAbsentError):
            emit_plot_data(report, "eigenvalues", "/tmp/never.csv")

    def test_kernel_slice_table(self, tmp_path):
        cfg = load_config(os.path.join(CONFIG_DIR,
                                       "direct-kato-trace-zero.json"))
        report = run(cfg)
        out = tmp_path / "slice.csv"
        emit_plot_data(report, "kernel-slice", str(out))
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "coordinate,value"
        assert len(lines) == 1 + 1024
        # no non-standard JSON tokens in the serialized report
        from poscomm.reporting import stable_bytes
        blob = stable_bytes(report).decode()
        assert "Infinity" not in blob and "NaN" not in blob

    def test_cli_plot_data_roundtrip(self, tmp_path):
        cfgp = os.path.join(CONFIG_DIR, "deriv-avg-tanh.json")
        rp = tmp_path / "rep.json"
        assert main(["run", "--config", cfgp, "--out", str(rp)]) == 0
        assert main(["plot-data", "--report", str(rp),
                     "--what", "convergence",
                     "--out", str(tmp_path / "c.csv")]) == 0
        assert (tmp_path / "c.csv").exists()
