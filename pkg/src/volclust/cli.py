"""Command-line entry point: ingest -> cluster / sweep -> report.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config, with_window
from .data_pipeline import build_features, date_span, read_feature_csv, standardize, write_feature_csv
from .errors import ConfigError, DataError, NumericalError
from .kernels import KernelSpec
from .report import figure_filenames, render_heatmap, render_profiles
from .sweep import (
    ALGORITHMS,
    INDICES,
    SweepGrid,
    best_cell,
    emit_table,
    fit_cell,
    parse_table,
    run_sweep,
    summary_json,
    table_filename,
)
from .synthetic import fixture_dir
from .validity import validity_report

log = logging.getLogger("volclust")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
FEATURES_FILE = "features.csv"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range_arg(text):
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        v = int(text)
        return v, v
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO:HI, got {text!r}") from None


def _common(p):
    p.add_argument("--config", type=Path, help="YAML run configuration")
    p.add_argument("--seed", type=int, help="master seed (default 42)")
    p.add_argument("--out", type=Path, help="output directory (default ./out)")
    p.add_argument("--jobs", type=int, help="parallel worker processes for the sweep")
    p.add_argument("-v", "--verbose", action="store_true")


def _kernel_flags(p):
    p.add_argument("--kernel", choices=("rbf", "polynomial", "sigmoid"))
    p.add_argument("--sigma", type=float, help="rbf width (default: median pairwise distance)")
    p.add_argument("--gamma", type=float)
    p.add_argument("--degree", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--restarts", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="volclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="build features.csv from price files")
    _common(p)
    p.add_argument("--window", type=int, help="volatility window in trading days (default 10)")
    p.add_argument("--raw", action="store_true", help="skip standardization")

    p = sub.add_parser("cluster", help="cluster once and score it")
    _common(p)
    p.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--features", type=int, help="use the first N features of the order (default all)")
    p.add_argument("--input", type=Path, help="feature matrix (default <out>/features.csv)")
    _kernel_flags(p)

    p = sub.add_parser("sweep", help="cluster-count x feature-count grids")
    _common(p)
    p.add_argument("--algorithms", nargs="+", choices=ALGORITHMS)
    p.add_argument("--indices", nargs="+", choices=INDICES)
    p.add_argument("--clusters", type=_range_arg, help="cluster range LO:HI (default 2:11)")
    p.add_argument("--features", type=_range_arg, help="feature-count range LO:HI (default 2:9)")
    p.add_argument("--input", type=Path, help="feature matrix (default <out>/features.csv)")
    _kernel_flags(p)

    p = sub.add_parser("report", help="SVG heatmaps and profiles from sweep tables")
    _common(p)

    p = sub.add_parser("fixture", help="copy the bundled synthetic market data to a directory")
    p.add_argument("directory", type=Path)
    return parser


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    sw = cfg.sweep
    if getattr(args, "seed", None) is not None:
        sw = replace(sw, seed=args.seed)
    if getattr(args, "restarts", None) is not None:
        sw = replace(sw, restarts=args.restarts)
    if getattr(args, "kernel", None) or getattr(args, "sigma", None) is not None:
        kind = args.kernel or sw.kernel.kind
        base = sw.kernel if kind == sw.kernel.kind else KernelSpec(kind)
        kw = {k: getattr(args, k) for k in ("sigma", "gamma", "degree", "theta") if getattr(args, k) is not None}
        sw = replace(sw, kernel=replace(base, kind=kind, **kw))
    elif any(getattr(args, k, None) is not None for k in ("gamma", "degree", "theta")):
        kw = {k: getattr(args, k) for k in ("gamma", "degree", "theta") if getattr(args, k) is not None}
        sw = replace(sw, kernel=replace(sw.kernel, **kw))
    if args.command == "sweep":
        for flag in ("algorithms", "indices"):
            if getattr(args, flag):
                sw = replace(sw, **{flag: tuple(getattr(args, flag))})
        if args.clusters:
            sw = replace(sw, clusters=args.clusters)
        if args.features:
            sw = replace(sw, features=args.features)
    cfg = replace(cfg, sweep=sw)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, out=args.out)
    if getattr(args, "jobs", None) is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = replace(cfg, jobs=args.jobs)
    return cfg


def _features(args, cfg):
    path = args.input or cfg.out / FEATURES_FILE
    if not path.exists():
        raise DataError("feature matrix not found; run 'volclust ingest' first", source=path)
    return read_feature_csv(path)


def cmd_ingest(args, cfg: RunConfig) -> int:
    if cfg.catalog is None:
        raise ConfigError("ingest needs --config with a 'series' list")
    if args.window is not None:
        cfg = with_window(cfg, args.window)
    m = build_features(cfg.catalog)
    standardized = cfg.standardize and not args.raw
    if standardized:
        m = standardize(m)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / FEATURES_FILE
    write_feature_csv(m, path)
    first, last = date_span(m)
    print(f"wrote {path}: n={m.n} p={m.p} dates {first}..{last} "
          f"window={cfg.window} standardized={str(standardized).lower()}")
    return EXIT_OK


def cmd_cluster(args, cfg: RunConfig) -> int:
    if args.k < 2:
        raise ConfigError(f"validity indices require k >= 2, got --k {args.k}")
    data = _features(args, cfg)
    sw = cfg.sweep
    order = sw.order_for(data)
    f = args.features or len(order)
    if not 1 <= f <= len(order):
        raise ConfigError(f"--features must lie in [1, {len(order)}]")
    if args.k > data.n:
        raise ConfigError(f"--k {args.k} exceeds the {data.n} rows of the feature matrix")
    clustering, meta, fit = fit_cell(data, sw, args.algorithm, args.k, f)
    x = data.select(order[:f])
    report = validity_report(x, clustering)
    cfg.out.mkdir(parents=True, exist_ok=True)
    lines = ["date,label"] + [f"{d},{lab}" for d, lab in zip(data.dates, clustering.labels)]
    (cfg.out / "assignments.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    doc = {
        "algorithm": args.algorithm,
        "k_requested": args.k,
        "features": list(order[:f]),
        **report.to_dict(),
        "cluster_sizes": clustering.sizes().tolist(),
        "fit": meta,
    }
    if args.algorithm == "kernel_kmeans":
        doc["kernel"] = fit.kernel.as_dict()
    (cfg.out / "validity.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if args.algorithm == "gmm":
        (cfg.out / "gmm_model.json").write_text(fit.dump() + "\n", encoding="utf-8")
    elif args.algorithm == "som":
        (cfg.out / "som_grid.csv").write_text(fit.grid.to_csv(), encoding="utf-8")
    dunn = "NA" if report.dunn is None else f"{report.dunn:.4f}"
    print(f"{args.algorithm} k={clustering.k} f={f}: SI={report.silhouette:.4f} DI={dunn}")
    for flag in report.flags:
        print(f"  note: {flag}")
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    data = _features(args, cfg)
    grid = run_sweep(data, cfg.sweep, jobs=cfg.jobs)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for (a, i) in grid.tables:
        (cfg.out / table_filename(a, i)).write_text(emit_table(grid, a, i), encoding="utf-8")
    (cfg.out / "summary.json").write_text(summary_json(grid, cfg.sweep, data), encoding="utf-8")
    for (a, i), t in grid.tables.items():
        try:
            f, k, s = best_cell(grid, a, i)
            print(f"{a:>13} {i:<10} best: {f} features, {k} clusters ({s:.4f})")
        except NumericalError:
            print(f"{a:>13} {i:<10} every cell failed")
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    tables = []
    for a in cfg.sweep.algorithms:
        for i in cfg.sweep.indices:
            path = cfg.out / table_filename(a, i)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError:
                raise DataError("sweep table missing; run 'volclust sweep' first", source=path) from None
            tables.append(parse_table(text, a, i, source=path))
    grid = SweepGrid.from_tables(*tables)
    for t in tables:
        heat, prof = figure_filenames(t.algorithm, t.index)
        (cfg.out / heat).write_text(render_heatmap(grid, t.algorithm, t.index), encoding="utf-8")
        (cfg.out / prof).write_text(render_profiles(grid, t.algorithm, t.index), encoding="utf-8")
    print(f"wrote {2 * len(tables)} figures to {cfg.out}")
    return EXIT_OK


def cmd_fixture(args) -> int:
    args.directory.mkdir(parents=True, exist_ok=True)
    for src in sorted(fixture_dir().iterdir()):
        if src.is_file():
            shutil.copy2(src, args.directory / src.name)
    print(f"fixture written to {args.directory} (catalog: {args.directory / 'catalog.yaml'})")
    return EXIT_OK


COMMANDS = {"ingest": cmd_ingest, "cluster": cmd_cluster, "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fixture":
            return cmd_fixture(args)
        return COMMANDS[args.command](args, _load(args))
    except ConfigError as exc:
        print(f"volclust: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"volclust: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"volclust: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
