"""Dependency-free deterministic SVG emission.

Byte-stable output: fixed float formatting, no timestamps, input-ordered
elements.  Three dataset kinds are supported:

* ``curve``   - line plots, dataset: xlabel/ylabel/series[{label,x,y}]
* ``scatter`` - constant-life style scatter with a threshold polyline
* ``heat``    - colored point map (e.g. unrolled strain amplitude)
"""
import math

from .errors import ValidationError

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 24, 34, 52
_COLORS = ("#1f6fb4", "#d95f02", "#2a9d54", "#7d3fb0", "#c02f4f", "#6b6b6b")


def _fmt(x):
    if not math.isfinite(x):
        raise ValidationError("non-finite value in plot data")
    return f"{x:.4f}"


def _esc(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


class _Axes:
    def __init__(self, x_range, y_range):
        x0, x1 = x_range
        y0, y1 = y_range
        if not (x1 > x0) or not (y1 > y0):
            raise ValidationError("degenerate axis range")
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1

    def px(self, x):
        return _ML + (x - self.x0) / (self.x1 - self.x0) * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - (y - self.y0) / (self.y1 - self.y0) * (_H - _MT - _MB)

    def ticks(self, n=5):
        xs = [self.x0 + i * (self.x1 - self.x0) / (n - 1) for i in range(n)]
        ys = [self.y0 + i * (self.y1 - self.y0) / (n - 1) for i in range(n)]
        return xs, ys


def _frame_elems(ax, title, xlabel, ylabel):
    parts = [f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
             f'height="{_H - _MT - _MB}" fill="none" stroke="#222" stroke-width="1"/>']
    xs, ys = ax.ticks()
    for x in xs:
        px = ax.px(x)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_H - _MB}" x2="{_fmt(px)}" '
                     f'y2="{_H - _MB + 4}" stroke="#222"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{_H - _MB + 16}" font-size="10" '
                     f'text-anchor="middle">{_fmt(x)}</text>')
    for y in ys:
        py = ax.py(y)
        parts.append(f'<line x1="{_ML - 4}" y1="{_fmt(py)}" x2="{_ML}" '
                     f'y2="{_fmt(py)}" stroke="#222"/>')
        parts.append(f'<text x="{_ML - 6}" y="{_fmt(py + 3)}" font-size="10" '
                     f'text-anchor="end">{_fmt(y)}</text>')
    parts.append(f'<text x="{_W // 2}" y="{_H - 12}" font-size="12" '
                 f'text-anchor="middle">{_esc(xlabel)}</text>')
    parts.append(f'<text x="16" y="{_H // 2}" font-size="12" text-anchor="middle" '
                 f'transform="rotate(-90 16 {_H // 2})">{_esc(ylabel)}</text>')
    if title:
        parts.append(f'<text x="{_W // 2}" y="20" font-size="13" '
                     f'text-anchor="middle">{_esc(title)}</text>')
    return parts


def _ranges_from_series(series):
    xs = [v for s in series for v in s["x"]]
    ys = [v for s in series for v in s["y"]]
    if not xs:
        raise ValidationError("empty plot data")
    pad = lambda lo, hi: (lo - 0.05 * max(hi - lo, 1e-9),
                          hi + 0.05 * max(hi - lo, 1e-9))
    return pad(min(xs), max(xs)), pad(min(ys), max(ys))


def _heat_color(frac):
    # blue -> yellow -> red ramp
    frac = min(max(frac, 0.0), 1.0)
    if frac < 0.5:
        u = frac / 0.5
        r, g, b = int(40 + u * (250 - 40)), int(80 + u * (210 - 80)), int(200 - u * 150)
    else:
        u = (frac - 0.5) / 0.5
        r, g, b = 250, int(210 - u * 170), int(50 - u * 10)
    return f"#{r:02x}{g:02x}{b:02x}"


def emit_svg(dataset: dict, kind: str, path) -> None:
    """Write a plot document; identical inputs yield identical bytes."""
    if kind == "curve":
        body = _curve_body(dataset)
    elif kind == "scatter":
        body = _scatter_body(dataset)
    elif kind == "heat":
        body = _heat_body(dataset)
    else:
        raise ValidationError(f"unknown plot kind {kind!r}")
    doc = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}">',
           f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>'] + body + ["</svg>"]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(doc))
        fh.write("\n")


def _curve_body(ds):
    series = ds["series"]
    xr = ds.get("x_range") or _ranges_from_series(series)[0]
    yr = ds.get("y_range") or _ranges_from_series(series)[1]
    ax = _Axes(xr, yr)
    parts = _frame_elems(ax, ds.get("title", ""), ds.get("xlabel", ""),
                         ds.get("ylabel", ""))
    for i, s in enumerate(series):
        color = s.get("color", _COLORS[i % len(_COLORS)])
        pts = " ".join(f"{_fmt(ax.px(x))},{_fmt(ax.py(y))}"
                       for x, y in zip(s["x"], s["y"]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{pts}"/>')
        if s.get("label"):
            ly = _MT + 14 + 14 * i
            parts.append(f'<line x1="{_W - _MR - 130}" y1="{ly}" x2="{_W - _MR - 106}" '
                         f'y2="{ly}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_W - _MR - 100}" y="{ly + 4}" font-size="10">'
                         f'{_esc(s["label"])}</text>')
    return parts


def _scatter_body(ds):
    regions = ds["regions"]
    ax = _Axes(ds["x_range"], ds["y_range"])
    parts = _frame_elems(ax, ds.get("title", ""), ds.get("xlabel", ""),
                         ds.get("ylabel", ""))
    for i, name in enumerate(sorted(regions)):
        slot = regions[name]
        color = _COLORS[i % len(_COLORS)]
        for m, a, bad in zip(slot["eps_mean"], slot["eps_amp"], slot["failed"]):
            if bad:
                parts.append(f'<circle cx="{_fmt(ax.px(m))}" cy="{_fmt(ax.py(a))}" '
                             f'r="2.4" fill="none" stroke="{color}" stroke-width="1.2"/>')
            else:
                parts.append(f'<circle cx="{_fmt(ax.px(m))}" cy="{_fmt(ax.py(a))}" '
                             f'r="1.8" fill="{color}"/>')
        ly = _MT + 14 + 14 * i
        parts.append(f'<circle cx="{_W - _MR - 124}" cy="{ly}" r="2.4" fill="{color}"/>')
        parts.append(f'<text x="{_W - _MR - 114}" y="{ly + 4}" font-size="10">'
                     f'{_esc(name)}</text>')
    pts = " ".join(f"{_fmt(ax.px(m))},{_fmt(ax.py(a))}" for m, a in ds["threshold"])
    parts.append(f'<polyline class="threshold" fill="none" stroke="#000000" '
                 f'stroke-width="1.5" stroke-dasharray="6 3" points="{pts}"/>')
    return parts


def _heat_body(ds):
    theta = ds["theta"]
    z = ds["z"]
    val = ds["eps_amp"]
    if len(theta) == 0:
        raise ValidationError("empty heat map")
    xr = (min(theta) - 0.2, max(theta) + 0.2)
    zr = (min(z) - 1.0, max(z) + 1.0)
    ax = _Axes(xr, zr)
    parts = _frame_elems(ax, ds.get("title", ""), ds.get("xlabel", ""),
                         ds.get("ylabel", ""))
    vmax = max(max(val), 1e-9)
    for th, zz, v in zip(theta, z, val):
        parts.append(f'<circle cx="{_fmt(ax.px(th))}" cy="{_fmt(ax.py(zz))}" r="2.6" '
                     f'fill="{_heat_color(v / vmax)}"/>')
    # color bar
    for i in range(24):
        y0 = _MT + (23 - i) * (_H - _MT - _MB) / 24.0
        parts.append(f'<rect x="{_W - _MR + 4}" y="{_fmt(y0)}" width="10" '
                     f'height="{_fmt((_H - _MT - _MB) / 24.0 + 0.5)}" '
                     f'fill="{_heat_color((i + 0.5) / 24.0)}"/>')
    parts.append(f'<text x="{_W - _MR + 2}" y="{_MT - 6}" font-size="9">'
                 f'{_fmt(vmax)}</text>')
    parts.append(f'<text x="{_W - _MR + 2}" y="{_H - _MB + 14}" font-size="9">0</text>')
    return parts
