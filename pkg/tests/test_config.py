from pathlib import Path

import pytest

from volclust.config import load_config, parse_config, with_window
from volclust.errors import ConfigError


def test_fixture_catalog(fixture_path):
    cfg = load_config(fixture_path / "catalog.yaml")
    assert cfg.window == 10 and cfg.seed == 42 and cfg.standardize
    assert len(cfg.catalog.entries) == 9
    assert all(e.path.is_absolute() or e.path.exists() for e in cfg.catalog.entries)
    assert all(e.path.exists() for e in cfg.catalog.entries)


def test_sections_parsed(tmp_path):
    doc = {
        "seed": 7,
        "sweep": {"clusters": [2, 4], "features": 3, "restarts": 2, "algorithms": ["gmm"]},
        "kernel": {"kind": "polynomial", "gamma": 1.0, "degree": 2},
        "gmm": {"max_iter": 50, "tol": 1e-4},
        "som": {"epochs": 5},
        "out": "results",
    }
    cfg = parse_config(doc, tmp_path)
    sw = cfg.sweep
    assert (sw.seed, sw.clusters, sw.features, sw.restarts, sw.algorithms) == (7, (2, 4), (3, 3), 2, ("gmm",))
    assert sw.kernel.kind == "polynomial" and sw.kernel.degree == 2
    assert sw.gmm_max_iter == 50 and sw.som_schedule.epochs == 5
    assert cfg.out == tmp_path / "results"


@pytest.mark.parametrize("doc,msg", [
    ({"colour": 1}, "colour"),
    ({"sweep": {"k": 2}}, "k"),
    ({"series": []}, "series"),
    ({"series": [{"name": "A"}]}, "file"),
    ({"series": [{"name": "A", "file": "a.csv", "kind": "price"}]}, "kind"),
    ({"sweep": {"clusters": "2-11"}}, "clusters"),
    ({"kernel": {"kind": "cosine"}}, "cosine"),
])
def test_bad_configs(doc, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(doc, Path("."))


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "none.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("a: [1,\n")
    with pytest.raises(ConfigError, match="YAML"):
        load_config(bad)


def test_with_window(fixture_path):
    cfg = with_window(load_config(fixture_path / "catalog.yaml"), 20)
    assert cfg.window == 20
