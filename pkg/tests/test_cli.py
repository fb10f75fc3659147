"""
Command-line entry point: exit codes, artifacts and reports.
"""

import numpy as np
import pandas as pd
import pytest

from cli import build_parser, main
from executor.commands import EXIT_ERROR, EXIT_NOT_IDENTIFIABLE, EXIT_OK, standardize, subsample_rows
from executor.formatter import ReportFormatter
from analytics.identifiability import identifiability_report
from model.types import Dataset, DesignMatrix
from registry.scenarios import registry
from simulation.generator import gen_data
from storage.artifacts import read_json
from storage.csv_io import write_dataset, write_design

FAST_SETTINGS = "[fit.optim]\nmax_iters = 5\n"


@pytest.fixture
def fast_settings(tmp_path):
    path = tmp_path / "settings.toml"
    path.write_text(FAST_SETTINGS)
    return str(path)


@pytest.fixture
def scenario_files(tmp_path):
    spec = registry.get("k2-scenario1")
    q = spec.design(4)
    data = gen_data(q, 20, spec, seed=21)
    return (
        str(write_dataset(data.dataset, tmp_path / "y.csv")),
        str(write_design(q, tmp_path / "q.csv")),
    )


# ── check-q ──

class TestCheckQ:
    def test_identifiable_design(self, tmp_path, capsys):
        path = tmp_path / "q1.csv"
        path.write_text("1,0\n1,0\n0,1\n0,1\n")
        assert main(["check-q", str(path)]) == EXIT_OK
        assert "All factors are structurally identifiable." in capsys.readouterr().out

    def test_non_identifiable_design(self, tmp_path, capsys):
        path = tmp_path / "q2.csv"
        path.write_text("1,0\n1,0\n1,1\n1,1\n")
        assert main(["check-q", str(path)]) == EXIT_NOT_IDENTIFIABLE
        assert "factor(s) 2" in capsys.readouterr().out

    def test_malformed_design(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n0,1\n")
        assert main(["check-q", str(path)]) == EXIT_ERROR
        assert "check-q" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["check-q", str(tmp_path / "absent.csv")]) == EXIT_ERROR


# ── fit ──

class TestFit:
    def test_writes_fit_document(self, tmp_path, scenario_files, fast_settings):
        data, design = scenario_files
        out = tmp_path / "fit"
        code = main(["--config", fast_settings, "fit", data, design, "--k", "2",
                     "--seed", "3", "--links", "10", "--out", str(out)])
        assert code == EXIT_OK

        doc = read_json(out / "fit.json")
        assert doc["method"] == "joint-map"
        assert (doc["N"], doc["J"], doc["K"]) == (20, 4, 2)
        assert doc["seed"] == 3
        assert doc["manifest"] == "manifest.json"
        assert np.isfinite(doc["marginal_loglik"])

        links = pd.read_csv(out / "links.csv")
        assert len(links) == 4 * 10
        assert (out / "scores.csv").exists()

        manifest = read_json(out / "manifest.json")
        assert manifest["command"] == "fit"
        assert set(manifest["inputs"]) == {data, design}

    def test_iterative_method(self, tmp_path, scenario_files, fast_settings):
        data, design = scenario_files
        settings = tmp_path / "iter.toml"
        settings.write_text(FAST_SETTINGS + "\n[fit]\nouter_max = 1\nstep2_max_iters = 3\nstep2_restarts = 0\n")
        out = tmp_path / "iter"
        code = main(["--config", str(settings), "fit", data, design, "--method", "iterative", "--out", str(out)])
        assert code == EXIT_OK
        assert read_json(out / "fit.json")["method"] == "iterative"

    def test_dimension_mismatch(self, tmp_path, scenario_files):
        data, _ = scenario_files
        design = tmp_path / "q3.csv"
        design.write_text("1,0\n0,1\n1,1\n")
        assert main(["fit", data, str(design), "--out", str(tmp_path / "x")]) == EXIT_ERROR

    def test_k_mismatch(self, tmp_path, scenario_files):
        data, design = scenario_files
        assert main(["fit", data, design, "--k", "3", "--out", str(tmp_path / "x")]) == EXIT_ERROR

    def test_bad_settings_file(self, tmp_path, scenario_files):
        data, design = scenario_files
        settings = tmp_path / "bad.toml"
        settings.write_text("[plots]\nwidth = 3\n")
        assert main(["--config", str(settings), "fit", data, design]) == EXIT_ERROR


# ── simulate ──

class TestSimulate:
    def test_zero_replications(self, tmp_path):
        out = tmp_path / "sim"
        assert main(["simulate", "k2-scenario1", "--reps", "0", "--out", str(out)]) == EXIT_OK
        assert (out / "table.csv").exists()
        assert (out / "replications.jsonl").read_text() == ""
        assert "no replications run" in (out / "report.txt").read_text()

    def test_unknown_scenario(self, tmp_path, capsys):
        assert main(["simulate", "k2-scenaro1", "--reps", "0", "--out", str(tmp_path)]) == EXIT_ERROR
        assert "k2-scenario1" in capsys.readouterr().err

    def test_negative_reps(self, tmp_path):
        assert main(["simulate", "k2-scenario1", "--reps", "-1", "--out", str(tmp_path)]) == EXIT_ERROR

    def test_small_run(self, tmp_path, fast_settings):
        out = tmp_path / "sim"
        code = main(["--config", fast_settings, "simulate", "k2-scenario1", "--J", "4", "--reps", "1",
                     "--methods", "nslfa,lfa", "--seed", "5", "--out", str(out)])
        assert code == EXIT_OK
        table = pd.read_csv(out / "table.csv")
        assert list(table["method"]) == ["nslfa-joint", "linear-fa"]
        assert len((out / "replications.jsonl").read_text().splitlines()) == 2


# ── oil ──

class TestOil:
    def test_pipeline(self, tmp_path, fast_settings):
        rng = np.random.default_rng(8)
        z = rng.normal(size=(40, 2))
        loadings = np.zeros((12, 2))
        loadings[:6, 0] = rng.uniform(0.8, 1.2, size=6)
        loadings[6:, 1] = rng.uniform(0.8, 1.2, size=6)
        y = z @ loadings.T + 0.1 * rng.normal(size=(40, 12))
        labels = np.where(z[:, 0] > 0, "A", "B")
        data = write_dataset(Dataset(y, labels=labels), tmp_path / "oil.csv")

        out = tmp_path / "oil"
        code = main(["--config", fast_settings, "oil", str(data), "--subsample", "30",
                     "--seed", "2", "--out", str(out)])
        assert code == EXIT_OK
        doc = read_json(out / "oil.json")
        assert doc["N"] == 30
        assert set(doc["nn_errors"]) == {"linear-fa", "nslfa"}
        assert len(pd.read_csv(out / "nslfa_embedding.csv")) == 30

    def test_missing_labels(self, tmp_path):
        path = tmp_path / "oil.csv"
        pd.DataFrame(np.ones((5, 12))).to_csv(path, header=False, index=False)
        assert main(["oil", str(path), "--out", str(tmp_path / "o")]) == EXIT_ERROR

    def test_standardize(self):
        ds = standardize(Dataset(np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])))
        np.testing.assert_allclose(ds.y[:, 0], [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(ds.y[:, 1], 0.0)

    def test_subsample_sorted_and_seeded(self):
        ds = Dataset(np.arange(40.0).reshape(20, 2))
        first, second = subsample_rows(ds, 5, seed=1), subsample_rows(ds, 5, seed=1)
        np.testing.assert_array_equal(first.y, second.y)
        assert np.all(np.diff(first.y[:, 0]) > 0)


# ── Parser and formatting ──

class TestParser:
    def test_usage_error_exits_one(self):
        assert main(["fit"]) == EXIT_ERROR

    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert "nslfa" in capsys.readouterr().out

    def test_list_arguments(self):
        args = build_parser().parse_args(["simulate", "k2-scenario1", "--J", "6,10", "--methods", "nslfa, lfa"])
        assert args.j_values == [6, 10]
        assert args.methods == ["nslfa", "lfa"]

    def test_report_prints_one_based(self):
        report = identifiability_report(DesignMatrix(np.array([[1, 0], [1, 1]])))
        content = ReportFormatter().format("identifiability", report).content
        assert "factor(s) 2" in content
        assert "{1, 2}" in content
