"""Force field serialization and arrow-plot rendering (raster + SVG)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .ampere import ForceField, ForceParams
from .edges import DIRECTION_STEPS, DIRECTIONS, EdgeMap, quantize_direction

CSV_HEADER = "x,y,fx,fy,mag"
OVERLAY_GRAY = 128
ARROW_COLOR = 0


def format_real(v: float) -> str:
    """Shortest text that parses back to exactly ``v``; integral values
    print without a fractional part."""
    v = float(v)
    if v == 0.0:
        return "-0" if math.copysign(1.0, v) < 0 else "0"
    if v.is_integer() and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def serialize_field(field: ForceField, fmt: str = "csv") -> bytes:
    mag = field.magnitude
    if fmt == "csv":
        lines = [CSV_HEADER]
        for i in range(len(field)):
            lines.append(",".join((str(int(field.xs[i])), str(int(field.ys[i])),
                                   format_real(field.fx[i]), format_real(field.fy[i]),
                                   format_real(mag[i]))))
        return ("\n".join(lines) + "\n").encode("ascii")
    if fmt == "json":
        params = field.params
        doc = {
            "width": field.width,
            "height": field.height,
            "params": {
                "A": params.A if params else None,
                "cutoff": (params.cutoff if math.isfinite(params.cutoff) else None) if params else None,
            },
            "samples": [
                {"x": int(field.xs[i]), "y": int(field.ys[i]), "fx": float(field.fx[i]),
                 "fy": float(field.fy[i]), "mag": float(mag[i])}
                for i in range(len(field))
            ],
        }
        return (json.dumps(doc, indent=1) + "\n").encode("ascii")
    raise ValueError(f"unknown field format {fmt!r}; use csv or json")


def parse_field(data: bytes, width: Optional[int] = None, height: Optional[int] = None) -> ForceField:
    """Inverse of serialize_field; the format is sniffed from the content.

    CSV carries no frame size, so ``width``/``height`` default to the sample
    bounding box when not given.
    """
    text = data.decode("utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        p = doc.get("params") or {}
        params = None
        if p.get("A") is not None:
            cutoff = p.get("cutoff")
            params = ForceParams(p["A"], math.inf if cutoff is None else cutoff)
        s = doc["samples"]
        return ForceField([d["x"] for d in s], [d["y"] for d in s],
                          [d["fx"] for d in s], [d["fy"] for d in s],
                          width or doc.get("width"), height or doc.get("height"), params=params)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or ",".join(rows[0]).strip() != CSV_HEADER:
        raise ValueError(f"force field CSV must start with header {CSV_HEADER!r}")
    xs, ys, fx, fy = [], [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ValueError(f"line {lineno}: expected 5 columns, got {len(row)}")
        try:
            xs.append(int(row[0]))
            ys.append(int(row[1]))
            fx.append(float(row[2]))
            fy.append(float(row[3]))
        except ValueError:
            raise ValueError(f"line {lineno}: malformed number in {row}") from None
    if width is None:
        width = max(xs) + 1 if xs else 0
    if height is None:
        height = max(ys) + 1 if ys else 0
    return ForceField(xs, ys, fx, fy, width, height)


# ---------------------------------------------------------------------------
# arrow plots


@dataclass(frozen=True)
class ArrowPlotSpec:
    cell: int = 12
    quantized: bool = True
    scaled: bool = False
    overlay: Optional[EdgeMap] = None
    background: int = 255

    def __post_init__(self):
        if self.cell < 4:
            raise ValueError(f"cell size must be at least 4, got {self.cell}")
        if not 0 <= self.background <= 255:
            raise ValueError("background intensity must lie in [0, 255]")


@dataclass(frozen=True)
class Glyph:
    """One sample's mark in output-pixel coordinates.

    ``segments`` is empty for a dot glyph (zero force).
    """

    center: Tuple[float, float]
    angle: Optional[float]  # degrees, y-down
    direction: Optional[str]
    segments: Tuple[Tuple[float, float, float, float], ...]
    dot_radius: float


def arrow_glyphs(field: ForceField, spec: ArrowPlotSpec) -> List[Glyph]:
    cell = spec.cell
    mag = field.magnitude
    peak = float(mag.max()) if len(field) else 0.0
    glyphs = []
    for i in range(len(field)):
        cx = (int(field.xs[i]) + 0.5) * cell
        cy = (int(field.ys[i]) + 0.5) * cell
        fx, fy = float(field.fx[i]), float(field.fy[i])
        if fx == 0.0 and fy == 0.0:
            glyphs.append(Glyph((cx, cy), None, None, (), max(1.0, cell / 8)))
            continue
        if spec.quantized:
            direction = quantize_direction((fx, fy))
            k = DIRECTIONS.index(direction)
            angle = 45.0 * k
            sx, sy = DIRECTION_STEPS[k]
            norm = math.hypot(sx, sy)
            ux, uy = sx / norm, sy / norm
        else:
            direction = quantize_direction((fx, fy))
            angle = math.degrees(math.atan2(fy, fx))
            ux, uy = math.cos(math.radians(angle)), math.sin(math.radians(angle))
        length = 0.8 * cell
        if spec.scaled:
            length *= float(mag[i]) / peak
        half = length / 2
        x0, y0 = cx - ux * half, cy - uy * half
        x1, y1 = cx + ux * half, cy + uy * half
        head = min(0.3 * cell, 0.6 * length) if length > 0 else 0.0
        segs = [(x0, y0, x1, y1)]
        for turn in (150.0, -150.0):
            t = math.radians(turn)
            hx = ux * math.cos(t) - uy * math.sin(t)
            hy = ux * math.sin(t) + uy * math.cos(t)
            segs.append((x1, y1, x1 + hx * head, y1 + hy * head))
        glyphs.append(Glyph((cx, cy), angle, direction, tuple(segs), 0.0))
    return glyphs


def _check_overlay(field: ForceField, overlay: Optional[EdgeMap]):
    if overlay is not None and (overlay.width, overlay.height) != (field.width, field.height):
        raise ValueError(
            f"overlay is {overlay.width}x{overlay.height} but the field frame is "
            f"{field.width}x{field.height}")


def _draw_segment(img: np.ndarray, x0, y0, x1, y1, value):
    h, w = img.shape[:2]
    n = int(math.ceil(2 * max(abs(x1 - x0), abs(y1 - y0)))) + 1
    t = np.linspace(0.0, 1.0, n)
    px = np.floor(x0 + t * (x1 - x0)).astype(int)
    py = np.floor(y0 + t * (y1 - y0)).astype(int)
    ok = (px >= 0) & (px < w) & (py >= 0) & (py < h)
    img[py[ok], px[ok]] = value


def render_raster(field: ForceField, spec: ArrowPlotSpec = ArrowPlotSpec(), glyphs=None) -> np.ndarray:
    _check_overlay(field, spec.overlay)
    cell = spec.cell
    img = np.full((field.height * cell, field.width * cell, 3), spec.background, dtype=np.uint8)
    if spec.overlay is not None:
        ys, xs = np.nonzero(spec.overlay.flags)
        for x, y in zip(xs.tolist(), ys.tolist()):
            img[y * cell:(y + 1) * cell, x * cell:(x + 1) * cell] = OVERLAY_GRAY
    if glyphs is None:
        glyphs = arrow_glyphs(field, spec)
    for g in glyphs:
        if g.segments:
            for seg in g.segments:
                _draw_segment(img, *seg, ARROW_COLOR)
        else:
            cx, cy = g.center
            r = g.dot_radius
            y0, y1 = int(math.floor(cy - r)), int(math.ceil(cy + r))
            x0, x1 = int(math.floor(cx - r)), int(math.ceil(cx + r))
            Y, X = np.mgrid[y0:y1 + 1, x0:x1 + 1]
            disk = (X + 0.5 - cx) ** 2 + (Y + 0.5 - cy) ** 2 <= r * r
            img[Y[disk], X[disk]] = ARROW_COLOR
    return img


def _f(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def render_svg(field: ForceField, spec: ArrowPlotSpec = ArrowPlotSpec(), glyphs=None) -> str:
    _check_overlay(field, spec.overlay)
    cell = spec.cell
    W, H = field.width * cell, field.height * cell
    bg = spec.background
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="rgb({bg},{bg},{bg})"/>',
    ]
    if spec.overlay is not None:
        out.append(f'<g class="overlay" fill="rgb({OVERLAY_GRAY},{OVERLAY_GRAY},{OVERLAY_GRAY})">')
        ys, xs = np.nonzero(spec.overlay.flags)
        for x, y in zip(xs.tolist(), ys.tolist()):
            out.append(f'<rect x="{x * cell}" y="{y * cell}" width="{cell}" height="{cell}"/>')
        out.append("</g>")
    if glyphs is None:
        glyphs = arrow_glyphs(field, spec)
    out.append('<g class="arrows" stroke="black" fill="black" stroke-width="1">')
    for g in glyphs:
        if not g.segments:
            out.append(f'<circle class="dot" cx="{_f(g.center[0])}" cy="{_f(g.center[1])}" '
                       f'r="{_f(g.dot_radius)}"/>')
            continue
        out.append(f'<g class="arrow" data-dir="{g.direction}" data-angle="{g.angle!r}">')
        for x0, y0, x1, y1 in g.segments:
            out.append(f'<line x1="{_f(x0)}" y1="{_f(y0)}" x2="{_f(x1)}" y2="{_f(y1)}"/>')
        out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_arrows(field: ForceField, spec: ArrowPlotSpec = ArrowPlotSpec()) -> Tuple[np.ndarray, str]:
    """Raster (H*cell, W*cell, 3) and SVG text drawn from one glyph list."""
    _check_overlay(field, spec.overlay)
    glyphs = arrow_glyphs(field, spec)
    return render_raster(field, spec, glyphs), render_svg(field, spec, glyphs)
