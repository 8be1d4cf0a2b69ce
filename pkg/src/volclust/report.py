"""SVG heatmaps and index-vs-cluster-count profiles for sweep tables."""

from __future__ import annotations

import re
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .errors import ConfigError, DataError

_HEX = re.compile(r"^#[0-9a-fA-F]{6}$")
_INDEX_LABEL = {"dunn": "DI", "silhouette": "SI"}
_ALGO_LABEL = {"kernel_kmeans": "Kernel K-Means", "som": "Self-Organizing Map", "gmm": "Gaussian Mixture Model"}
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
_DASHES = ("", "6 3", "2 2", "8 3 2 3", "4 4", "1 3")


@dataclass(frozen=True)
class HeatmapSpec:
    low_color: str = "#fff5eb"
    high_color: str = "#7f2704"
    cell_size: int = 56
    x_label: str = "No. of Features"
    y_label: str = "No. of Clusters"
    title: str | None = None

    def __post_init__(self):
        for c in (self.low_color, self.high_color):
            if not _HEX.match(c):
                raise ConfigError(f"color {c!r} is not a #RRGGBB value")
        if not self.cell_size > 0:
            raise ConfigError("cell size must be > 0")


def _rgb(color):
    return np.array([int(color[i:i + 2], 16) for i in (1, 3, 5)], dtype=float)


def ramp_color(t: float, low: str, high: str) -> str:
    """Linear interpolation between two #RRGGBB colors, t in [0, 1]."""
    lo, hi = _rgb(low), _rgb(high)
    rgb = np.rint(lo + min(max(t, 0.0), 1.0) * (hi - lo)).astype(int)
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def normalize(scores) -> np.ndarray:
    """Min-max scale ignoring NaN; a constant grid maps to 0.5."""
    s = np.asarray(scores, dtype=float)
    finite = s[~np.isnan(s)]
    if finite.size == 0:
        raise DataError("every cell of the grid failed; nothing to plot")
    lo, hi = finite.min(), finite.max()
    if hi == lo:
        return np.where(np.isnan(s), np.nan, 0.5)
    return (s - lo) / (hi - lo)


def _table(grid, algorithm, index):
    return grid.table(algorithm, index) if hasattr(grid, "table") else grid


def _default_title(algorithm, index):
    return f"{_INDEX_LABEL.get(index, index)} values of clustering by {_ALGO_LABEL.get(algorithm, algorithm)}"


def render_heatmap(grid, algorithm: str, index: str, spec: HeatmapSpec | None = None) -> str:
    spec = spec or HeatmapSpec()
    t = _table(grid, algorithm, index)
    norm = normalize(t.scores)
    finite = t.scores[~np.isnan(t.scores)]
    cs = spec.cell_size
    left, top, right, bottom = 90, 70, 130, 70
    nr, nc = len(t.cluster_counts), len(t.feature_counts)
    width, height = left + nc * cs + right, top + nr * cs + bottom
    title = spec.title or _default_title(t.algorithm, t.index)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        "<defs>",
        '<pattern id="na-hatch" width="8" height="8" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">',
        '<rect width="8" height="8" fill="#d9d9d9"/><line x1="0" y1="0" x2="0" y2="8" stroke="#8c8c8c" stroke-width="3"/>',
        "</pattern>",
        f'<linearGradient id="ramp" x1="0" y1="1" x2="0" y2="0">'
        f'<stop offset="0" stop-color="{spec.low_color}"/><stop offset="1" stop-color="{spec.high_color}"/></linearGradient>',
        "</defs>",
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-size="15" font-weight="bold">{escape(title)}</text>',
        f'<text x="{left + nc * cs / 2:.1f}" y="{top - 30}" text-anchor="middle">{escape(spec.x_label)}</text>',
        f'<text x="24" y="{top + nr * cs / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 24 {top + nr * cs / 2:.1f})">{escape(spec.y_label)}</text>',
    ]
    for c, f in enumerate(t.feature_counts):
        out.append(f'<text x="{left + c * cs + cs / 2:.1f}" y="{top - 8}" text-anchor="middle">{f}</text>')
    for r, k in enumerate(t.cluster_counts):
        out.append(f'<text x="{left - 8}" y="{top + r * cs + cs / 2 + 4:.1f}" text-anchor="end">{k}</text>')
    for r, k in enumerate(t.cluster_counts):
        for c, f in enumerate(t.feature_counts):
            x, y = left + c * cs, top + r * cs
            v = t.scores[r, c]
            if np.isnan(v):
                out.append(
                    f'<rect class="cell na" data-k="{k}" data-f="{f}" x="{x}" y="{y}" width="{cs}" height="{cs}" '
                    f'fill="url(#na-hatch)" stroke="#ffffff"><title>k={k}, f={f}: NA</title></rect>'
                )
                continue
            fill = ramp_color(norm[r, c], spec.low_color, spec.high_color)
            ink = "#ffffff" if norm[r, c] > 0.55 else "#000000"
            out.append(
                f'<rect class="cell" data-k="{k}" data-f="{f}" x="{x}" y="{y}" width="{cs}" height="{cs}" '
                f'fill="{fill}" stroke="#ffffff"><title>k={k}, f={f}: {v:.4f}</title></rect>'
            )
            if cs >= 36:
                out.append(
                    f'<text x="{x + cs / 2:.1f}" y="{y + cs / 2 + 4:.1f}" text-anchor="middle" '
                    f'font-size="{min(11, cs // 4)}" fill="{ink}">{v:.4f}</text>'
                )
    bx, by, bh = left + nc * cs + 30, top, nr * cs
    out += [
        f'<rect x="{bx}" y="{by}" width="16" height="{bh}" fill="url(#ramp)" stroke="#000000" stroke-width="0.5"/>',
        f'<text x="{bx + 22}" y="{by + 10}">{finite.max():.4f}</text>',
        f'<text x="{bx + 22}" y="{by + bh}">{finite.min():.4f}</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def _runs(values):
    """Maximal runs of consecutive non-NaN indices."""
    runs, cur = [], []
    for i, v in enumerate(values):
        if np.isnan(v):
            if cur:
                runs.append(cur)
            cur = []
        else:
            cur.append(i)
    if cur:
        runs.append(cur)
    return runs


def render_profiles(grid, algorithm: str, index: str, title: str | None = None) -> str:
    """One polyline per feature count: x = cluster count, y = score; NA leaves a gap."""
    t = _table(grid, algorithm, index)
    normalize(t.scores)
    finite = t.scores[~np.isnan(t.scores)]
    lo, hi = float(finite.min()), float(finite.max())
    pad = 0.05 * (hi - lo) if hi > lo else max(abs(hi) * 0.05, 0.05)
    lo, hi = lo - pad, hi + pad
    left, top, pw, ph = 80, 60, 520, 320
    legend_w = 150
    width, height = left + pw + legend_w, top + ph + 70
    ks = t.cluster_counts
    kmin, kmax = ks[0], ks[-1]

    def px(k):
        return left + (pw / 2 if kmax == kmin else (k - kmin) / (kmax - kmin) * pw)

    def py(v):
        return top + ph - (v - lo) / (hi - lo) * ph

    title = title or _default_title(t.algorithm, t.index).replace("values of clustering by", "index obtained by")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<text x="{(left + pw / 2):.1f}" y="28" text-anchor="middle" font-size="15" font-weight="bold">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>',
        f'<text x="{left + pw / 2:.1f}" y="{top + ph + 45}" text-anchor="middle">No. of Clusters</text>',
        f'<text x="22" y="{top + ph / 2:.1f}" text-anchor="middle" transform="rotate(-90 22 {top + ph / 2:.1f})">'
        f'{escape(_INDEX_LABEL.get(t.index, t.index))}</text>',
    ]
    for k in ks:
        out.append(f'<line x1="{px(k):.2f}" y1="{top + ph}" x2="{px(k):.2f}" y2="{top + ph + 5}" stroke="#000000"/>')
        out.append(f'<text x="{px(k):.2f}" y="{top + ph + 20}" text-anchor="middle">{k}</text>')
    for v in np.linspace(lo, hi, 5):
        out.append(f'<line x1="{left - 5}" y1="{py(v):.2f}" x2="{left}" y2="{py(v):.2f}" stroke="#000000"/>')
        out.append(f'<text x="{left - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{v:.3f}</text>')
    for c, f in enumerate(t.feature_counts):
        color = _PALETTE[c % len(_PALETTE)]
        dash = _DASHES[c % len(_DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        col = t.scores[:, c]
        out.append(f'<g class="series" data-f="{f}">')
        for run in _runs(col):
            pts = " ".join(f"{px(ks[i]):.2f},{py(col[i]):.2f}" for i in run)
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"{dash_attr}/>')
            for i in run:
                out.append(f'<circle cx="{px(ks[i]):.2f}" cy="{py(col[i]):.2f}" r="2.5" fill="{color}"/>')
        out.append("</g>")
        ly = top + 10 + c * 18
        lx = left + pw + 20
        out.append(
            f'<line class="legend" x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="{color}" stroke-width="1.8"{dash_attr}/>'
        )
        label = f"{f} feature" + ("" if f == 1 else "s")
        out.append(f'<text x="{lx + 36}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def figure_filenames(algorithm: str, index: str) -> tuple[str, str]:
    return f"{algorithm}_{index}_heatmap.svg", f"{algorithm}_{index}_profiles.svg"
