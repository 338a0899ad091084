#!/usr/bin/env python3
"""End-to-end tests for the evidencia command line."""

import json
import os
import sys

import numpy as np
import pandas as pd
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import evidencia
from services.dataset_io import read_dataset
from services.simlab import ReplicateStream, SimConfig, generate_draw, sample_points


@pytest.fixture(autouse=True)
def pinned_clock(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    monkeypatch.delenv("EVIDENCIA_CONFIG", raising=False)
    monkeypatch.delenv("EVIDENCIA_THREADS", raising=False)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def _read_table(path):
    return pd.read_csv(path, comment="#")


# ---- select --------------------------------------------------------------

def test_select_writes_table_and_manifest(tmp_path):
    data = _write(tmp_path / "data.csv",
                  "x,y,sigma\n0.1,1.2,0.5\n0.5,0.7,0.5\n0.9,-0.3,0.5\n1.3,-1.1,0.5\n1.7,-0.2,0.5\n")
    out = tmp_path / "select.csv"
    assert evidencia.main(["select", data, "--output", str(out)]) == 0

    text = out.read_text()
    assert text.startswith("# selected_K[AIC]: ")
    table = _read_table(out)
    assert table["K"].tolist() == [1, 2, 3, 4, 5]
    assert list(table.columns[:3]) == ["K", "chi_sq", "F_sq"]
    assert table["RobustExact"].iloc[-1] == 0.0

    manifest = json.loads((tmp_path / "select.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "select"
    assert manifest["timestamp"] == "2023-11-14T22:13:20Z"
    assert list(manifest["input_digests"]) == [data]


def test_select_missing_sigma_column(tmp_path, capsys):
    data = _write(tmp_path / "data.csv", "x,y\n0.0,1.0\n1.0,2.0\n")
    assert evidencia.main(["select", data]) == 2
    assert "column 'sigma' not found" in capsys.readouterr().err


def test_select_rejects_nonpositive_sigma(tmp_path, capsys):
    data = _write(tmp_path / "data.csv", "x,y,sigma\n0.0,1.0,1.0\n1.0,2.0,0.0\n")
    assert evidencia.main(["select", data]) == 2
    assert "row 2" in capsys.readouterr().err


def test_select_two_points(tmp_path, capsys):
    data = _write(tmp_path / "data.csv", "x,y,sigma\n0.0,1.0,1.0\n1.0,3.0,1.0\n")
    assert evidencia.main(["select", data]) == 0
    out = capsys.readouterr().out
    assert "# selected_K[AICc]: 1" in out
    assert out.count("\n") == 9


def test_select_table_basis(tmp_path, capsys):
    data = _write(tmp_path / "data.csv", "x,y,sigma\n0.0,1.0,1.0\n1.0,2.1,1.0\n2.0,2.9,1.0\n")
    basis = _write(tmp_path / "basis.csv", "one,slope,square\n1,0,0\n1,1,1\n1,2,4\n")
    assert evidencia.main(["--format", "json", "select", data, "--basis", "table", "--basis-csv", basis]) == 0
    document = json.loads(capsys.readouterr().out)
    assert [row["K"] for row in document["rows"]] == [1, 2, 3]
    assert set(document["manifest"]["input_digests"]) == {data, basis}


def test_select_table_basis_errors(tmp_path, capsys):
    data = _write(tmp_path / "data.csv", "x,y,sigma\n0.0,1.0,1.0\n1.0,2.0,1.0\n2.0,3.0,1.0\n")
    duplicate = _write(tmp_path / "dup.csv", "f,g\n1,1\n2,2\n3,3\n")
    assert evidencia.main(["select", data, "--basis", "table"]) == 2
    assert evidencia.main(["select", data, "--basis", "table", "--basis-csv", duplicate]) == 2
    assert evidencia.main(["select", data, "--basis", "table", "--basis-csv", duplicate, "--max-k", "2"]) == 3
    err = capsys.readouterr().err
    assert err.count("evidencia: error:") == 3


def test_select_missing_file(tmp_path):
    assert evidencia.main(["select", str(tmp_path / "nope.csv")]) == 2


# ---- simulate ------------------------------------------------------------

def _simulate(tmp_path, name, *extra):
    out = tmp_path / name
    args = ["simulate", "--a", "3", "--b", "1", "--n", "8", "--replicates", "64", "--output", str(out)]
    assert evidencia.main(args + list(extra)) == 0
    return out


def test_simulate_is_reproducible(tmp_path):
    first = _simulate(tmp_path, "one.csv", "--threads", "1")
    second = _simulate(tmp_path, "two.csv", "--threads", "3")
    assert first.read_bytes() == second.read_bytes()
    assert (tmp_path / "one.csv.manifest.json").read_bytes() == (tmp_path / "two.csv.manifest.json").read_bytes()


def test_simulate_table_layout(tmp_path):
    out = _simulate(tmp_path, "sim.csv", "--criteria", "bic,nic", "--exact")
    assert out.read_text().startswith("# replicates: 64\n")
    table = _read_table(out)
    assert list(table.columns) == ["criterion", "Ksim", "rate", "std_error", "replicates"]
    assert table["replicates"].unique().tolist() == [64]
    assert table["criterion"].unique().tolist() == ["BIC", "RobustLargeK", "RobustExact"]
    assert len(table) == 3 * 8
    manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
    assert manifest["seed"] == 0xD1CE
    assert manifest["config"]["N"] == 8


def test_simulate_runs_exact_criterion_on_subsample(tmp_path):
    out = tmp_path / "exact.csv"
    args = ["simulate", "--a", "3", "--b", "1", "--n", "4", "--replicates", "300",
            "--criteria", "aic", "--exact", "--output", str(out)]
    assert evidencia.main(args) == 0
    text = out.read_text()
    assert text.startswith("# replicates: 300\n# exact_replicates: 256\n")
    table = _read_table(out)
    counts = dict(zip(table["criterion"], table["replicates"]))
    assert counts == {"AIC": 300, "RobustExact": 256}
    exact = table[table["criterion"] == "RobustExact"]
    rates = exact["rate"].to_numpy()
    np.testing.assert_allclose(exact["std_error"].to_numpy(), np.sqrt(rates * (1 - rates) / 256))
    manifest = json.loads((tmp_path / "exact.csv.manifest.json").read_text())
    assert manifest["config"]["exact_replicates"] == 256


def test_simulate_emits_dataset(tmp_path):
    data = tmp_path / "draw.csv"
    _simulate(tmp_path, "sim.csv", "--seed", "42", "--emit-data", str(data), "--emit-ksim", "3")
    loaded = read_dataset(data)
    draw = generate_draw(SimConfig(N=8, a=3.0, b=1.0, replicates=64, seed=42), ReplicateStream(42, 0))
    np.testing.assert_array_equal(loaded.y, draw.D[:, 2])
    np.testing.assert_array_equal(loaded.x, sample_points(8))
    assert np.all(loaded.sigma == 1.0)
    assert evidencia.main(["select", str(data), "--output", str(tmp_path / "sel.csv")]) == 0


def test_simulate_rejects_bad_settings(capsys):
    assert evidencia.main(["simulate", "--replicates", "0"]) == 2
    assert "replicates" in capsys.readouterr().err
    assert evidencia.main(["simulate", "--criteria", "HQIC", "--replicates", "1"]) == 2
    assert evidencia.main(["simulate", "--n", "8", "--replicates", "1", "--threads", "-2"]) == 2


def test_simulate_reads_config_file(tmp_path):
    config = _write(tmp_path / "cfg.json", json.dumps({"simulation": {"n": 6, "replicates": 10, "seed": 7}}))
    out = tmp_path / "sim.csv"
    assert evidencia.main(["--config", config, "simulate", "--output", str(out)]) == 0
    table = _read_table(out)
    assert table["Ksim"].max() == 6
    manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["config"]["replicates"] == 10


def test_bad_config_file(tmp_path, capsys):
    config = _write(tmp_path / "cfg.json", "{not json")
    assert evidencia.main(["--config", config, "selfcheck"]) == 2
    assert "not valid JSON" in capsys.readouterr().err


# ---- curves --------------------------------------------------------------

def test_curves_json(capsys):
    assert evidencia.main(["--format", "json", "curves", "--a", "3"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["summary"]["minimum_K[BIC]"] == 8
    assert document["summary"]["minimum_K[RobustLargeK]"] == 8
    rows = document["rows"]
    assert len(rows) == 32
    assert rows[3]["E_chi_sq"] == 64
    assert rows[-1]["AICc"] is None
    assert rows[-1]["RobustExact"] == 0.0


def test_curves_csv_has_minima_summary(tmp_path):
    out = tmp_path / "curves.csv"
    assert evidencia.main(["curves", "--a", "1", "--k-max", "12", "--output", str(out)]) == 0
    text = out.read_text()
    assert "# minimum_K[RobustLargeK]: 8\n" in text
    assert len(_read_table(out)) == 12


def test_curves_rejects_true_dimension_beyond_n(capsys):
    assert evidencia.main(["curves", "--a", "1", "--s", "40"]) == 2
    assert "exceeds" in capsys.readouterr().err


# ---- selfcheck -----------------------------------------------------------

def test_selfcheck_passes(capsys):
    assert evidencia.main(["selfcheck"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.rstrip().endswith("10/10 checks passed")


def test_selfcheck_with_zero_tolerance_fails(capsys):
    assert evidencia.main(["selfcheck", "--tolerance-scale", "0"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_selfcheck_rejects_negative_scale():
    assert evidencia.main(["selfcheck", "--tolerance-scale", "-1"]) == 2
