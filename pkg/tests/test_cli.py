import json

import numpy as np
import pytest

from conftest import blobs
from volclust.cli import main
from volclust.data_pipeline import FeatureMatrix, write_feature_csv


@pytest.fixture(scope="module")
def ingested(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["fixture", str(root / "data")]) == 0
    assert main(["ingest", "--config", str(root / "data" / "catalog.yaml"), "--out", str(root / "out")]) == 0
    return root


@pytest.fixture
def planted(tmp_path):
    x, _ = blobs(0, per=50)
    m = FeatureMatrix(np.datetime64("2013-01-01") + np.arange(len(x)), ("a", "b"), x)
    write_feature_csv(m, tmp_path / "features.csv")
    return tmp_path


def test_ingest_writes_nine_columns(ingested, capsys):
    header = (ingested / "out" / "features.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "date" and len(header) == 10


def test_ingest_raw_and_window(ingested, tmp_path, capsys):
    cfg = str(ingested / "data" / "catalog.yaml")
    assert main(["ingest", "--config", cfg, "--out", str(tmp_path), "--raw", "--window", "20"]) == 0
    out = capsys.readouterr().out
    assert "window=20" in out and "standardized=false" in out


def test_ingest_missing_file(ingested, tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("series:\n  - {name: A, file: missing.csv, kind: level}\n")
    assert main(["ingest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "missing.csv" in capsys.readouterr().err


def test_ingest_requires_catalog(tmp_path):
    assert main(["ingest", "--out", str(tmp_path)]) == 1


def test_cluster_planted_gmm(planted, capsys):
    assert main(["cluster", "--algorithm", "gmm", "--k", "3", "--out", str(planted), "--restarts", "3"]) == 0
    doc = json.loads((planted / "validity.json").read_text())
    assert doc["silhouette"] >= 0.7
    assert (planted / "gmm_model.json").exists()
    lines = (planted / "assignments.csv").read_text().splitlines()
    assert lines[0] == "date,label" and len(lines) == 151


def test_cluster_outputs_deterministic(planted):
    outputs = []
    for _ in range(2):
        assert main(["cluster", "--algorithm", "som", "--k", "3", "--out", str(planted), "--restarts", "2"]) == 0
        outputs.append({p: (planted / p).read_bytes() for p in ("assignments.csv", "validity.json", "som_grid.csv")})
    assert outputs[0] == outputs[1]


def test_cluster_kernel_flags(planted):
    assert main(["cluster", "--algorithm", "kernel_kmeans", "--k", "3", "--out", str(planted),
                 "--kernel", "polynomial", "--gamma", "1", "--degree", "2", "--restarts", "2"]) == 0
    doc = json.loads((planted / "validity.json").read_text())
    assert doc["kernel"] == {"kind": "polynomial", "gamma": 1.0, "degree": 2}


def test_cluster_k1_is_usage_error(planted, capsys):
    assert main(["cluster", "--algorithm", "gmm", "--k", "1", "--out", str(planted)]) == 1
    assert "k >= 2" in capsys.readouterr().err


def test_cluster_without_features(tmp_path, capsys):
    assert main(["cluster", "--algorithm", "gmm", "--k", "2", "--out", str(tmp_path)]) == 2
    assert "features.csv" in capsys.readouterr().err


def test_bad_usage_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cluster", "--algorithm", "dbscan", "--k", "2"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_sweep_and_report_small(planted, capsys):
    args = ["--out", str(planted), "--restarts", "2", "--clusters", "2:4", "--features", "2:2"]
    assert main(["sweep"] + args) == 0
    names = sorted(p.name for p in planted.glob("*_*.csv"))
    assert names == sorted(f"{a}_{i}.csv" for a in ("kernel_kmeans", "som", "gmm") for i in ("dunn", "silhouette"))
    summary = json.loads((planted / "summary.json").read_text())
    assert all(t["best"] is not None for t in summary["tables"].values()) and len(summary["tables"]) == 6
    assert main(["report", "--out", str(planted)]) == 0
    assert len(list(planted.glob("*.svg"))) == 12
    first = {p.name: p.read_bytes() for p in planted.glob("*.svg")}
    assert main(["report", "--out", str(planted)]) == 0
    assert first == {p.name: p.read_bytes() for p in planted.glob("*.svg")}


def test_report_corrupt_table(planted, capsys):
    assert main(["sweep", "--out", str(planted), "--restarts", "1", "--clusters", "2:3", "--features", "2:2"]) == 0
    (planted / "som_dunn.csv").write_text("clusters\\features,2\n2,oops\n")
    assert main(["report", "--out", str(planted)]) == 2
    assert "som_dunn.csv" in capsys.readouterr().err


def test_report_missing_table(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 2
    assert "kernel_kmeans_dunn.csv" in capsys.readouterr().err


def test_numerical_failure_exit_code(planted, monkeypatch, capsys):
    import volclust.sweep as sw
    from volclust.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("all restarts degenerate")

    monkeypatch.setattr(sw, "fit_gmm", boom)
    assert main(["cluster", "--algorithm", "gmm", "--k", "2", "--out", str(planted)]) == 3
