"""Run configuration: a YAML file plus command-line overrides.

Example::

    window: 10
    standardize: true
    seed: 42
    series:
      - {name: INDIAVIX, file: INDIAVIX.csv, kind: level}
      - {name: NIFTYSDR, file: NIFTY.csv, kind: volatility}
    sweep: {clusters: [2, 11], features: [2, 9], restarts: 10}
    kernel: {kind: rbf, sigma: null}

Relative file paths resolve against the config file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .data_pipeline import DEFAULT_WINDOW, CatalogEntry, FeatureCatalog, FeatureKind
from .errors import ConfigError
from .kernels import KernelSpec
from .som import SomSchedule
from .sweep import SweepConfig

_TOP_KEYS = {"window", "standardize", "seed", "out", "jobs", "series", "feature_order",
             "sweep", "kernel", "gmm", "kmeans", "som"}
_SWEEP_KEYS = {"algorithms", "indices", "clusters", "features", "restarts"}
_KERNEL_KEYS = {"kind", "sigma", "gamma", "degree", "theta"}
_GMM_KEYS = {"max_iter", "tol", "regularization"}
_KMEANS_KEYS = {"max_iter"}
_SOM_KEYS = {"epochs", "lr0", "lr_final", "sigma0", "sigma_final"}


@dataclass(frozen=True)
class RunConfig:
    catalog: FeatureCatalog | None = None
    standardize: bool = True
    out: Path = Path("out")
    jobs: int | None = None
    sweep: SweepConfig = field(default_factory=SweepConfig)

    @property
    def seed(self) -> int:
        return self.sweep.seed

    @property
    def window(self) -> int:
        return self.catalog.window if self.catalog else DEFAULT_WINDOW


def _check_keys(section, doc, allowed):
    if not isinstance(doc, dict):
        raise ConfigError(f"config section {section!r} must be a mapping")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {', '.join(unknown)}")


def _range(name, value):
    if isinstance(value, int):
        return (value, value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, int) for v in value):
        return (value[0], value[1])
    raise ConfigError(f"{name} must be an integer or a [low, high] pair")


def _catalog(series, window, base: Path):
    if not isinstance(series, list) or not series:
        raise ConfigError("'series' must be a non-empty list")
    entries = []
    for i, item in enumerate(series):
        _check_keys(f"series[{i}]", item, {"name", "file", "kind"})
        try:
            name, file, kind = item["name"], item["file"], item.get("kind", "volatility")
        except KeyError as exc:
            raise ConfigError(f"series[{i}] is missing {exc.args[0]!r}") from None
        try:
            kind = FeatureKind(kind)
        except ValueError:
            raise ConfigError(f"series[{i}] kind must be 'level' or 'volatility', got {kind!r}") from None
        path = Path(file)
        entries.append(CatalogEntry(str(name), kind, path if path.is_absolute() else base / path))
    return FeatureCatalog(tuple(entries), window)


def parse_config(doc: dict, base: Path = Path(".")) -> RunConfig:
    doc = doc or {}
    _check_keys("config", doc, _TOP_KEYS)
    window = int(doc.get("window", DEFAULT_WINDOW))
    catalog = _catalog(doc["series"], window, base) if "series" in doc else None

    sw = doc.get("sweep", {}) or {}
    _check_keys("sweep", sw, _SWEEP_KEYS)
    kw = {}
    if "algorithms" in sw:
        kw["algorithms"] = tuple(sw["algorithms"])
    if "indices" in sw:
        kw["indices"] = tuple(sw["indices"])
    if "clusters" in sw:
        kw["clusters"] = _range("sweep.clusters", sw["clusters"])
    if "features" in sw:
        kw["features"] = _range("sweep.features", sw["features"])
    if "restarts" in sw:
        kw["restarts"] = int(sw["restarts"])
    if "feature_order" in doc:
        kw["feature_order"] = tuple(str(n) for n in doc["feature_order"])
    if "seed" in doc:
        kw["seed"] = int(doc["seed"])

    kern = doc.get("kernel", {}) or {}
    _check_keys("kernel", kern, _KERNEL_KEYS)
    kw["kernel"] = KernelSpec(**kern)

    gm = doc.get("gmm", {}) or {}
    _check_keys("gmm", gm, _GMM_KEYS)
    if "max_iter" in gm:
        kw["gmm_max_iter"] = int(gm["max_iter"])
    if "tol" in gm:
        kw["gmm_tol"] = float(gm["tol"])
    if "regularization" in gm:
        kw["gmm_reg"] = float(gm["regularization"])

    km = doc.get("kmeans", {}) or {}
    _check_keys("kmeans", km, _KMEANS_KEYS)
    if "max_iter" in km:
        kw["kkm_max_iter"] = int(km["max_iter"])

    so = doc.get("som", {}) or {}
    _check_keys("som", so, _SOM_KEYS)
    kw["som_schedule"] = SomSchedule(**so)

    try:
        sweep = SweepConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(doc.get("out", "out"))
    return RunConfig(
        catalog=catalog,
        standardize=bool(doc.get("standardize", True)),
        out=out if out.is_absolute() else base / out,
        jobs=doc.get("jobs"),
        sweep=sweep,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    try:
        return parse_config(doc, path.parent)
    except (ConfigError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def with_window(cfg: RunConfig, window: int) -> RunConfig:
    if cfg.catalog is None:
        raise ConfigError("no series catalog configured")
    return replace(cfg, catalog=FeatureCatalog(cfg.catalog.entries, window))
