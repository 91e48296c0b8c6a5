"""Specification curves: configurations sorted by estimate, with a decision panel."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

from .grid import DEMOGRAPHICS_LEVELS, STRATEGIES, config_sort_key, parse_config_id
from .metrics import BaselineBand, ConfigScores, CorrelationEstimate

DIMENSIONS = ("model", "setting", "demographics", "strategy")
METRICS = {
    "f1_bjw": ("f1_bjw", "Human-silicon correlation (BJW)"),
    "f1_gf": ("f1_gf", "Human-silicon correlation (Gut Feelings)"),
    "f2_bjw": ("f2_bjw", "Wasserstein distance (BJW)"),
    "f2_gf": ("f2_gf", "Wasserstein distance (Gut Feelings)"),
    "f3": ("f3_r_hat", "Estimated BJW-Gut Feelings correlation"),
    "f3_abs_error": ("f3_abs_error", "Absolute error of BJW-Gut Feelings correlation"),
}
FIGURE_METRICS = ("f1_bjw", "f1_gf", "f2_bjw", "f2_gf", "f3")

FONT = "DejaVu Sans, Arial, Helvetica, sans-serif"


class NoEligibleConfigurations(ValueError):
    pass


class UnsupportedFormat(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceBand:
    low: float
    high: float
    point: float


@dataclass(frozen=True)
class CurveColumn:
    config_id: str
    estimate: float
    eligible: bool = True


@dataclass
class CurveModel:
    metric_id: str
    columns: list[CurveColumn]
    # dimension -> one decision value per column
    decision_panel: dict[str, list[str]]
    reference_band: ReferenceBand | None = None
    label: str = ""
    highlight_in_band: bool = False

    def __post_init__(self):
        for dim, values in self.decision_panel.items():
            if len(values) != len(self.columns):
                raise ValueError(f"decision panel row {dim!r} has {len(values)} entries, "
                                 f"expected {len(self.columns)}")

    def panel_values(self, dimension: str) -> list[str]:
        """Distinct values of one dimension, in a stable display order."""
        present = set(self.decision_panel[dimension])
        if dimension == "demographics":
            return [v for v in DEMOGRAPHICS_LEVELS if v in present]
        if dimension == "strategy":
            return [v for v in STRATEGIES if v in present]
        if dimension == "setting":
            return sorted(present, key=lambda v: (not v.startswith("temperature"),
                                                  _setting_order(v)))
        return sorted(present)


def _setting_order(label: str):
    kind, _, value = label.partition(" ")
    if kind == "temperature":
        return (0.0, float(value))
    return (1.0, ("low", "high").index(value) if value in ("low", "high") else 2.0)


def _reference(reference) -> ReferenceBand | None:
    if reference is None or isinstance(reference, ReferenceBand):
        return reference
    if isinstance(reference, BaselineBand):
        return ReferenceBand(reference.ci_low, reference.ci_high, reference.point)
    if isinstance(reference, CorrelationEstimate):
        return ReferenceBand(reference.ci_low, reference.ci_high, reference.r)
    raise TypeError(f"unsupported reference {type(reference).__name__}")


def build_curve(scores: Sequence[ConfigScores], metric_id: str, reference=None,
                highlight_in_band: bool = False) -> CurveModel:
    """One column per configuration with a value for ``metric_id``, ascending.

    Ties keep the canonical configuration order.
    """
    try:
        attr, label = METRICS[metric_id]
    except KeyError:
        raise ValueError(f"unknown metric {metric_id!r}") from None
    eligible = [(s.config_id, s.value(attr)) for s in scores if s.value(attr) is not None]
    if not eligible:
        raise NoEligibleConfigurations(metric_id)
    eligible.sort(key=lambda pair: (pair[1], config_sort_key(pair[0])))
    columns = [CurveColumn(cid, float(est)) for cid, est in eligible]
    decisions = [parse_config_id(c.config_id).decisions() for c in columns]
    panel = {dim: [d[dim] for d in decisions] for dim in DIMENSIONS}
    return CurveModel(metric_id, columns, panel, _reference(reference), label, highlight_in_band)


# -- rendering ---------------------------------------------------------------

COL_W = 6.0
MIN_PLOT_W = 240.0
LEFT = 190.0
RIGHT = 20.0
TOP = 40.0
PLOT_H = 220.0
GAP = 24.0
ROW_H = 12.0
GROUP_GAP = 10.0


def _n(x: float) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_svg(model: CurveModel, provenance: str = "") -> str:
    n = len(model.columns)
    plot_w = max(MIN_PLOT_W, COL_W * n)
    col_w = plot_w / n
    rows = [(dim, value) for dim in DIMENSIONS for value in model.panel_values(dim)]
    panel_h = ROW_H * len(rows) + GROUP_GAP * (len(DIMENSIONS) - 1)
    width = LEFT + plot_w + RIGHT
    height = TOP + PLOT_H + GAP + panel_h + 20.0

    values = [c.estimate for c in model.columns]
    band = model.reference_band
    lo = min(values + ([band.low, band.point] if band else []))
    hi = max(values + ([band.high, band.point] if band else []))
    pad = (hi - lo) * 0.05 or 0.05
    lo, hi = lo - pad, hi + pad

    def y(v: float) -> float:
        return TOP + PLOT_H - (v - lo) / (hi - lo) * PLOT_H

    def x(i: int) -> float:
        return LEFT + col_w * (i + 0.5)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_n(width)}" '
        f'height="{_n(height)}" viewBox="0 0 {_n(width)} {_n(height)}" '
        f'font-family="{FONT}" font-size="10">',
        f"<title>{escape(model.label or model.metric_id)}</title>",
    ]
    if provenance:
        out.append(f"<desc>{escape(provenance)}</desc>")
    out.append(f'<text x="{_n(LEFT)}" y="{_n(TOP - 16)}" font-size="12">'
               f"{escape(model.label or model.metric_id)} (n = {n})</text>")
    out.append(f'<rect class="frame" x="{_n(LEFT)}" y="{_n(TOP)}" width="{_n(plot_w)}" '
               f'height="{_n(PLOT_H)}" fill="none" stroke="#444444"/>')
    if band:
        top, bottom = y(max(band.low, band.high)), y(min(band.low, band.high))
        out.append(f'<rect class="reference-band" x="{_n(LEFT)}" y="{_n(top)}" '
                   f'width="{_n(plot_w)}" height="{_n(bottom - top)}" fill="#9ecae1" '
                   f'fill-opacity="0.5" data-low="{band.low!r}" data-high="{band.high!r}"/>')
        out.append(f'<line class="reference-point" x1="{_n(LEFT)}" x2="{_n(LEFT + plot_w)}" '
                   f'y1="{_n(y(band.point))}" y2="{_n(y(band.point))}" stroke="#2171b5"/>')
    for tick in _nice_ticks(lo + pad, hi - pad):
        out.append(f'<line class="tick" x1="{_n(LEFT - 4)}" x2="{_n(LEFT)}" '
                   f'y1="{_n(y(tick))}" y2="{_n(y(tick))}" stroke="#444444"/>')
        out.append(f'<text x="{_n(LEFT - 6)}" y="{_n(y(tick) + 3)}" text-anchor="end">{tick:.2f}</text>')
    for i, col in enumerate(model.columns):
        inside = band is not None and band.low <= col.estimate <= band.high
        fill = "#e6550d" if (model.highlight_in_band and inside) else "#222222"
        out.append(f'<circle class="estimate" cx="{_n(x(i))}" cy="{_n(y(col.estimate))}" '
                   f'r="{_n(min(2.5, col_w / 2))}" fill="{fill}"><title>'
                   f"{escape(col.config_id)}: {col.estimate:.4f}</title></circle>")

    row_y = TOP + PLOT_H + GAP
    for g, dim in enumerate(DIMENSIONS):
        if g:
            row_y += GROUP_GAP
        values_in_dim = model.panel_values(dim)
        for value in values_in_dim:
            out.append(f'<text x="{_n(LEFT - 6)}" y="{_n(row_y + ROW_H - 3)}" text-anchor="end">'
                       f"{escape(dim)}: {escape(value)}</text>")
            for i, col_value in enumerate(model.decision_panel[dim]):
                if col_value == value:
                    out.append(f'<rect class="decision-tick" data-dimension="{escape(dim)}" '
                               f'x="{_n(x(i) - col_w * 0.35)}" y="{_n(row_y + 2)}" '
                               f'width="{_n(col_w * 0.7)}" height="{_n(ROW_H - 4)}" fill="#555555"/>')
            row_y += ROW_H
    out.append("</svg>")
    return "\n".join(out) + "\n"


def curve_to_csv(model: CurveModel) -> str:
    buf = io.StringIO()
    buf.write(f"# metric_id={model.metric_id}\n")
    buf.write(f"# label={model.label}\n")
    if model.reference_band:
        b = model.reference_band
        buf.write(f"# reference_band={b.low!r},{b.high!r},{b.point!r}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "config_id", "estimate", "eligible", *DIMENSIONS])
    for i, col in enumerate(model.columns):
        writer.writerow([i + 1, col.config_id, repr(col.estimate), int(col.eligible)]
                        + [model.decision_panel[d][i] for d in DIMENSIONS])
    return buf.getvalue()


def curve_from_csv(text: str) -> CurveModel:
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line and not body:
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    band = None
    if "reference_band" in meta:
        band = ReferenceBand(*(float(v) for v in meta["reference_band"].split(",")))
    columns, panel = [], {d: [] for d in DIMENSIONS}
    for rec in csv.DictReader(body):
        columns.append(CurveColumn(rec["config_id"], float(rec["estimate"]), rec["eligible"] == "1"))
        for d in DIMENSIONS:
            panel[d].append(rec[d])
    return CurveModel(meta["metric_id"], columns, panel, band, meta.get("label", ""))


def render_curve(model: CurveModel, fmt: str = "svg", provenance: str = "") -> bytes:
    if fmt == "svg":
        return render_svg(model, provenance).encode("utf-8")
    if fmt == "csv":
        return curve_to_csv(model).encode("utf-8")
    raise UnsupportedFormat(fmt)
