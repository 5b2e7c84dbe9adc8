"""Deterministic SVG scatter plots of principal-component scores."""

import math
from xml.sax.saxutils import escape

CATEGORICAL = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
               "#7f7f7f", "#bcbd22", "#17becf")
MISSING_COLOR = "#b0b0b0"
# Endpoints of the sequential (decade) palette.
SEQ_LO = (254, 224, 139)
SEQ_HI = (49, 54, 149)

WIDTH, HEIGHT = 640, 480
MARGIN = dict(left=60, right=140, top=20, bottom=50)


def _category_order(values):
    preferred = ["female", "male"]
    present = sorted({v for v in values if v not in (None, "", "unknown")}, key=str)
    ordered = [p for p in preferred if p in present] + [v for v in present if v not in preferred]
    if any(v in (None, "", "unknown") for v in values):
        ordered.append("unknown")
    return ordered


def decade_label(age):
    if age is None or (isinstance(age, float) and math.isnan(age)):
        return "unknown"
    return f"{int(age // 10) * 10}s"


def _sequential(i, n):
    t = 0.0 if n <= 1 else i / (n - 1)
    rgb = [round(a + (b - a) * t) for a, b in zip(SEQ_LO, SEQ_HI)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def legend_for(values, mode):
    """Ordered ``(label, color)`` pairs and the per-point labels."""
    if mode == "decade":
        labels = [decade_label(a) for a in values]
        bins = sorted({lab for lab in labels if lab != "unknown"}, key=lambda s: int(s[:-1]))
        legend = [(b, _sequential(i, len(bins))) for i, b in enumerate(bins)]
        if "unknown" in labels:
            legend.append(("unknown", MISSING_COLOR))
    else:
        labels = [("unknown" if v in (None, "") else str(v)) for v in values]
        cats = _category_order(labels)
        legend = [(c, MISSING_COLOR if c == "unknown" else CATEGORICAL[i % len(CATEGORICAL)])
                  for i, c in enumerate(cats)]
    return legend, labels


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def scatter_svg(x, y, color_values, mode="categorical", xlabel="PC 1", ylabel="PC 2",
                title=None):
    """SVG text for a scatter with one ``circle.point`` per row and a legend."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    legend, labels = legend_for(list(color_values), mode)
    colors = dict(legend)

    x0, x1 = min(x), max(x)
    y0, y1 = min(y), max(y)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(v):
        return MARGIN["left"] + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN["top"] + ph - (v - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out.append(f'<rect class="frame" x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" '
               f'height="{ph}" fill="none" stroke="#444"/>')
    for v in _ticks(x0, x1):
        out.append(f'<text class="tick" x="{sx(v):.2f}" y="{MARGIN["top"] + ph + 16}" '
                   f'font-size="10" text-anchor="middle">{v:.2f}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<text class="tick" x="{MARGIN["left"] - 6}" y="{sy(v) + 3:.2f}" '
                   f'font-size="10" text-anchor="end">{v:.2f}</text>')
    out.append(f'<text class="axis-label" x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 12}" '
               f'font-size="13" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text class="axis-label" x="16" y="{MARGIN["top"] + ph / 2:.2f}" font-size="13" '
               f'text-anchor="middle" transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.2f})">'
               f'{escape(ylabel)}</text>')
    out.append('<g class="points">')
    for xi, yi, lab in zip(x, y, labels):
        out.append(f'<circle class="point" cx="{sx(xi):.2f}" cy="{sy(yi):.2f}" r="2.5" '
                   f'fill="{colors[lab]}" fill-opacity="0.7"/>')
    out.append('</g>')
    out.append('<g class="legend">')
    lx = WIDTH - MARGIN["right"] + 16
    for i, (lab, col) in enumerate(legend):
        ly = MARGIN["top"] + 10 + 18 * i
        out.append(f'<g class="legend-entry"><rect x="{lx}" y="{ly}" width="10" height="10" '
                   f'fill="{col}"/><text x="{lx + 16}" y="{ly + 9}" font-size="11">'
                   f'{escape(lab)}</text></g>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
