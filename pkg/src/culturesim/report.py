"""Self-contained SVG figures and the regression report.

Everything renders to plain SVG 1.1 strings with no third-party plotting
stack, so outputs are diffable and a pure function of the input data: no
timestamps, no environment leakage. Four figure kinds cover the standard
analysis: two scatters with a fitted line, a histogram of mean culture and
a yield-by-spoilage heatmap of mean culture.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from culturesim.stats import Design, OlsFit, design_from_results, ols_fit, summarize

POINT_COLOR = "#1f6fb2"
FIT_COLOR = "#d62728"
BAR_COLOR = "#1f6fb2"
EMPTY_CELL_COLOR = "#c8c8c8"
_RAMP_LOW = (48, 18, 59)  # dark violet
_RAMP_HIGH = (245, 230, 38)  # yellow

REPORT_FILENAME = "report.txt"
REGRESSION_CSV_FILENAME = "regression.csv"
FIGURE_FILENAMES = (
    "culture_vs_spoilage.svg",
    "culture_vs_yield.svg",
    "culture_distribution.svg",
    "culture_heatmap.svg",
)


@dataclass(frozen=True)
class FigureSpec:
    kind: str  # "scatter" | "histogram" | "heatmap"
    x_label: str = ""
    y_label: str = ""
    title: str = ""
    width: int = 640
    height: int = 480
    x_bounds: tuple[float, float] | None = None
    y_bounds: tuple[float, float] | None = None
    bins: int = 20
    grid: tuple[int, int] = (20, 20)
    path: str | None = None

    def __post_init__(self):
        if self.bins < 1:
            raise ValueError("bins must be at least 1")
        if self.grid[0] < 1 or self.grid[1] < 1:
            raise ValueError("heatmap grid must be at least 1x1")
        if self.x_bounds is not None and not (
            np.isfinite(self.x_bounds).all() and self.x_bounds[0] <= self.x_bounds[1]
        ):
            raise ValueError("x_bounds must be finite and ordered")
        if self.y_bounds is not None and not (
            np.isfinite(self.y_bounds).all() and self.y_bounds[0] <= self.y_bounds[1]
        ):
            raise ValueError("y_bounds must be finite and ordered")


# Plot geometry: fixed margins around the data area.
_MARGIN_LEFT = 70
_MARGIN_RIGHT = 30
_MARGIN_TOP = 40
_MARGIN_BOTTOM = 60
_LEGEND_WIDTH = 70  # extra right margin for the heatmap color scale


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _fmt_tick(v: float) -> str:
    return f"{v:.4g}"


def _expand(lo: float, hi: float) -> tuple[float, float]:
    if lo == hi:
        pad = 0.5 if lo == 0.0 else abs(lo) * 0.05
        return lo - pad, hi + pad
    return lo, hi


class _Canvas:
    """Linear data-to-pixel mapping plus shared chrome (axes, ticks, labels)."""

    def __init__(self, spec: FigureSpec, x_range, y_range, right_margin=_MARGIN_RIGHT):
        self.spec = spec
        self.x0, self.x1 = _expand(*x_range)
        self.y0, self.y1 = _expand(*y_range)
        self.left = _MARGIN_LEFT
        self.top = _MARGIN_TOP
        self.right = spec.width - right_margin
        self.bottom = spec.height - _MARGIN_BOTTOM
        self.parts: list[str] = []

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y: float) -> float:
        return self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def add(self, fragment: str) -> None:
        self.parts.append(fragment)

    def chrome(self) -> None:
        s = self.spec
        self.add(
            f'<rect x="{self.left}" y="{self.top}" width="{self.right - self.left}" '
            f'height="{self.bottom - self.top}" fill="none" stroke="#444" stroke-width="1"/>'
        )
        for x in np.linspace(self.x0, self.x1, 5):
            px = self.px(x)
            self.add(
                f'<line x1="{_fmt(px)}" y1="{self.bottom}" x2="{_fmt(px)}" '
                f'y2="{self.bottom + 5}" stroke="#444"/>'
            )
            self.add(
                f'<text x="{_fmt(px)}" y="{self.bottom + 20}" font-size="11" '
                f'text-anchor="middle">{escape(_fmt_tick(x))}</text>'
            )
        for y in np.linspace(self.y0, self.y1, 5):
            py = self.py(y)
            self.add(
                f'<line x1="{self.left - 5}" y1="{_fmt(py)}" x2="{self.left}" '
                f'y2="{_fmt(py)}" stroke="#444"/>'
            )
            self.add(
                f'<text x="{self.left - 8}" y="{_fmt(py + 4)}" font-size="11" '
                f'text-anchor="end">{escape(_fmt_tick(y))}</text>'
            )
        mid_x = (self.left + self.right) / 2
        mid_y = (self.top + self.bottom) / 2
        if s.x_label:
            self.add(
                f'<text x="{_fmt(mid_x)}" y="{s.height - 15}" font-size="13" '
                f'text-anchor="middle">{escape(s.x_label)}</text>'
            )
        if s.y_label:
            self.add(
                f'<text x="18" y="{_fmt(mid_y)}" font-size="13" text-anchor="middle" '
                f'transform="rotate(-90 18 {_fmt(mid_y)})">{escape(s.y_label)}</text>'
            )
        if s.title:
            self.add(
                f'<text x="{_fmt(mid_x)}" y="24" font-size="15" '
                f'text-anchor="middle">{escape(s.title)}</text>'
            )

    def document(self) -> str:
        s = self.spec
        body = "\n".join(self.parts)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{s.width}" height="{s.height}" '
            f'viewBox="0 0 {s.width} {s.height}">\n'
            f'<rect width="{s.width}" height="{s.height}" fill="white"/>\n'
            f"{body}\n</svg>\n"
        )


def _clip_segment(x1, y1, x2, y2, box):
    """Liang-Barsky clip of a segment to (x_lo, y_lo, x_hi, y_hi); returns
    endpoints or None when fully outside."""
    x_lo, y_lo, x_hi, y_hi = box
    dx, dy = x2 - x1, y2 - y1
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x1 - x_lo),
        (dx, x_hi - x1),
        (-dy, y1 - y_lo),
        (dy, y_hi - y1),
    ):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    return (x1 + t0 * dx, y1 + t0 * dy, x1 + t1 * dx, y1 + t1 * dy)


def render_scatter(points, fit: tuple[float, float] | None, spec: FigureSpec) -> str:
    """Scatter of (x, y) points with an optional fitted line, clipped to the
    data bounds."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        raise ValueError("cannot render an empty scatter")
    xs, ys = pts[:, 0], pts[:, 1]
    x_range = spec.x_bounds or (float(xs.min()), float(xs.max()))
    y_range = spec.y_bounds or (float(ys.min()), float(ys.max()))
    canvas = _Canvas(spec, x_range, y_range)
    canvas.chrome()
    for x, y in pts:
        canvas.add(
            f'<circle cx="{_fmt(canvas.px(x))}" cy="{_fmt(canvas.py(y))}" r="2.5" '
            f'fill="{POINT_COLOR}" fill-opacity="0.65"/>'
        )
    if fit is not None:
        slope, intercept = fit
        seg = _clip_segment(
            canvas.x0,
            slope * canvas.x0 + intercept,
            canvas.x1,
            slope * canvas.x1 + intercept,
            (canvas.x0, canvas.y0, canvas.x1, canvas.y1),
        )
        if seg is not None:
            canvas.add(
                f'<line x1="{_fmt(canvas.px(seg[0]))}" y1="{_fmt(canvas.py(seg[1]))}" '
                f'x2="{_fmt(canvas.px(seg[2]))}" y2="{_fmt(canvas.py(seg[3]))}" '
                f'stroke="{FIT_COLOR}" stroke-width="2"/>'
            )
    return canvas.document()


def render_histogram(values, bins: int, spec: FigureSpec) -> str:
    """Histogram with equal-width bins over the data (or configured) range."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot render an empty histogram")
    if bins < 1:
        raise ValueError("bins must be at least 1")
    lo, hi = spec.x_bounds or (float(vals.min()), float(vals.max()))
    if lo == hi:
        lo, hi = _expand(lo, hi)
    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    canvas = _Canvas(spec, (lo, hi), (0.0, float(counts.max())))
    canvas.chrome()
    for count, left, right in zip(counts, edges[:-1], edges[1:]):
        if count == 0:
            continue
        x = canvas.px(left)
        w = canvas.px(right) - x
        y = canvas.py(float(count))
        canvas.add(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(canvas.bottom - y)}" fill="{BAR_COLOR}" '
            f'stroke="white" stroke-width="0.5"/>'
        )
    return canvas.document()


def ramp_color(t: float) -> str:
    """Monotone two-stop color ramp (dark violet to yellow), linear in t."""
    t = min(max(t, 0.0), 1.0)
    rgb = tuple(round(lo + t * (hi - lo)) for lo, hi in zip(_RAMP_LOW, _RAMP_HIGH))
    return "#%02x%02x%02x" % rgb


def render_heatmap(results, nx: int, ny: int, spec: FigureSpec) -> str:
    """Mean culture binned on an nx-by-ny (yield, spoilage) grid. Empty
    cells render neutral gray; a legend shows the color scale."""
    if nx < 1 or ny < 1:
        raise ValueError("heatmap grid must be at least 1x1")
    rows = list(results)
    xs = np.array([r.y for r in rows]) if rows else np.empty(0)
    ys = np.array([r.p for r in rows]) if rows else np.empty(0)
    cs = np.array([r.mean_c for r in rows]) if rows else np.empty(0)
    x_range = spec.x_bounds or (
        (float(xs.min()), float(xs.max())) if rows else (0.0, 1.0)
    )
    y_range = spec.y_bounds or (
        (float(ys.min()), float(ys.max())) if rows else (0.0, 1.0)
    )
    x_lo, x_hi = _expand(*x_range)
    y_lo, y_hi = _expand(*y_range)
    sums = np.zeros((nx, ny))
    counts = np.zeros((nx, ny), dtype=np.int64)
    for x, y, c in zip(xs, ys, cs):
        ix = min(int((x - x_lo) / (x_hi - x_lo) * nx), nx - 1)
        iy = min(int((y - y_lo) / (y_hi - y_lo) * ny), ny - 1)
        if ix < 0 or iy < 0:
            continue
        sums[ix, iy] += c
        counts[ix, iy] += 1
    occupied = counts > 0
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=occupied)
    if occupied.any():
        c_lo = float(means[occupied].min())
        c_hi = float(means[occupied].max())
    else:
        c_lo = c_hi = 0.0

    canvas = _Canvas(spec, (x_lo, x_hi), (y_lo, y_hi), right_margin=_MARGIN_RIGHT + _LEGEND_WIDTH)
    canvas.chrome()
    for ix in range(nx):
        for iy in range(ny):
            cell_x = canvas.px(x_lo + ix * (x_hi - x_lo) / nx)
            cell_x2 = canvas.px(x_lo + (ix + 1) * (x_hi - x_lo) / nx)
            cell_y = canvas.py(y_lo + (iy + 1) * (y_hi - y_lo) / ny)
            cell_y2 = canvas.py(y_lo + iy * (y_hi - y_lo) / ny)
            if occupied[ix, iy]:
                span = c_hi - c_lo
                t = 0.5 if span == 0.0 else (means[ix, iy] - c_lo) / span
                fill = ramp_color(t)
            else:
                fill = EMPTY_CELL_COLOR
            canvas.add(
                f'<rect x="{_fmt(cell_x)}" y="{_fmt(cell_y)}" '
                f'width="{_fmt(cell_x2 - cell_x)}" height="{_fmt(cell_y2 - cell_y)}" '
                f'fill="{fill}" stroke="none"/>'
            )
    # Color-scale legend.
    legend_x = canvas.right + 20
    legend_top, legend_bottom = canvas.top, canvas.bottom
    steps = 24
    for i in range(steps):
        t_hi = 1.0 - i / steps
        y_top = legend_top + i * (legend_bottom - legend_top) / steps
        y_bot = legend_top + (i + 1) * (legend_bottom - legend_top) / steps
        canvas.add(
            f'<rect x="{legend_x}" y="{_fmt(y_top)}" width="14" '
            f'height="{_fmt(y_bot - y_top)}" fill="{ramp_color(t_hi - 0.5 / steps)}"/>'
        )
    canvas.add(
        f'<text x="{legend_x + 18}" y="{legend_top + 10}" font-size="11">'
        f"{escape(_fmt_tick(c_hi))}</text>"
    )
    canvas.add(
        f'<text x="{legend_x + 18}" y="{legend_bottom}" font-size="11">'
        f"{escape(_fmt_tick(c_lo))}</text>"
    )
    return canvas.document()


def format_regression_table(fit: OlsFit) -> str:
    """Fixed-width regression table (4 significant digits) with a short
    footer carrying the fit diagnostics."""
    header = f"{'Parameter':<12}{'Coefficient':>14}{'p-value':>14}{'StdErr':>14}"
    lines = [header, "-" * len(header)]
    for name, coef, pval, se in zip(
        fit.column_names, fit.coefficients, fit.p_values, fit.standard_errors
    ):
        lines.append(f"{name:<12}{coef:>14.4g}{pval:>14.4g}{se:>14.4g}")
    lines.append("-" * len(header))
    lines.append(f"n_observations: {fit.n_observations}")
    lines.append(f"r_squared: {fit.r_squared:.4g}")
    lines.append(f"residual_variance: {fit.residual_variance:.4g}")
    return "\n".join(lines) + "\n"


def write_regression_csv(fit: OlsFit, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("parameter,coefficient,std_err,t_stat,p_value\n")
        for name, coef, se, t, pval in zip(
            fit.column_names, fit.coefficients, fit.standard_errors, fit.t_stats, fit.p_values
        ):
            fh.write(f"{name},{coef!r},{se!r},{t!r},{pval!r}\n")


def _single_regressor_fit(x, y) -> tuple[float, float]:
    """(slope, intercept) of the one-regressor least-squares line drawn on
    the scatter figures."""
    design = Design(
        np.column_stack([np.ones(len(x)), np.asarray(x, dtype=np.float64)]),
        np.asarray(y, dtype=np.float64),
        ("const", "x"),
    )
    fit = ols_fit(design)
    return float(fit.coefficients[1]), float(fit.coefficients[0])


def analyze_results(results, out_dir, hist_bins: int = 20, heat_grid=(20, 20)) -> dict:
    """Full analysis pipeline on sweep rows: the bivariate regression report
    (text and CSV) plus the four standard figures. Returns output paths."""
    if not results:
        raise ValueError("no results to analyze")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fit = ols_fit(design_from_results(results))
    summary = summarize(results, hist_bins=hist_bins)

    report_path = out / REPORT_FILENAME
    with open(report_path, "w") as fh:
        fh.write(format_regression_table(fit))
        fh.write(f"corr(p, mean_C): {summary.corr_spoilage_culture:.4g}\n")
        fh.write(f"corr(Y, mean_C): {summary.corr_yield_culture:.4g}\n")
    csv_path = out / REGRESSION_CSV_FILENAME
    write_regression_csv(fit, csv_path)

    ps = [r.p for r in results]
    ys = [r.y for r in results]
    cs = [r.mean_c for r in results]
    figures = {}

    spec = FigureSpec(
        kind="scatter",
        x_label="spoilage p",
        y_label="mean culture C",
        title="Culture vs spoilage",
    )
    figures[FIGURE_FILENAMES[0]] = render_scatter(
        list(zip(ps, cs)), _single_regressor_fit(ps, cs), spec
    )
    spec = replace(spec, x_label="yield Y", title="Culture vs yield")
    figures[FIGURE_FILENAMES[1]] = render_scatter(
        list(zip(ys, cs)), _single_regressor_fit(ys, cs), spec
    )
    spec = FigureSpec(
        kind="histogram",
        x_label="mean culture C",
        y_label="agents",
        title="Culture distribution",
        bins=hist_bins,
    )
    figures[FIGURE_FILENAMES[2]] = render_histogram(cs, hist_bins, spec)
    spec = FigureSpec(
        kind="heatmap",
        x_label="yield Y",
        y_label="spoilage p",
        title="Mean culture by environment",
        grid=heat_grid,
    )
    figures[FIGURE_FILENAMES[3]] = render_heatmap(results, heat_grid[0], heat_grid[1], spec)

    paths = {"report": report_path, "regression_csv": csv_path}
    for name, svg_text in figures.items():
        fig_path = out / name
        with open(fig_path, "w") as fh:
            fh.write(svg_text)
        paths[name] = fig_path
    return paths
