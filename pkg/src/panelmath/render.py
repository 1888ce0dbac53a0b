"""Deterministic SVG rendering of panels and three-panel sheets.

Digits are drawn as stroked segment paths from an embedded glyph set, so
output never depends on installed fonts and identical inputs produce
byte-identical documents. Rasterization to grayscale PNG is feature
gated behind Pillow and re-draws the same primitives; the vector output
is always available.
"""

from __future__ import annotations

import io
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional

from . import layout as layout_mod
from .errors import IncompatiblePanel, RasterBackendUnavailable
from .generator import Panel, Problem
from .grammar import ProblemSpec
from .layout import (
    CENTER,
    PARTITION_CUT_RADIAL,
    PARTITION_OUTLINE_SCALE,
    UNIT_OUTLINES,
    direction,
    partition_cap_angles,
    partition_wedge_angles,
    shape_support,
)

SHEET_GAP_FRAC = 0.04


@dataclass(frozen=True)
class RenderSpec:
    panel_px: int = 224
    stroke_width: float = 2.0
    font_size: Optional[float] = None  # default: 0.085 * panel_px
    margin: float = 0.02

    def __post_init__(self):
        if not 64 <= self.panel_px <= 1024:
            raise ValueError("panel_px must be in [64, 1024]")

    @property
    def font_px(self) -> float:
        return self.font_size if self.font_size is not None else 0.085 * self.panel_px


def _fmt(v: float) -> str:
    return f"{v:.2f}"


# ---------------------------------------------------------------------------
# glyph strokes on a unit box (width 1, height 1, y down)

_SEG = {
    "A": ((0.0, 0.0), (1.0, 0.0)),
    "B": ((1.0, 0.0), (1.0, 0.5)),
    "C": ((1.0, 0.5), (1.0, 1.0)),
    "D": ((0.0, 1.0), (1.0, 1.0)),
    "E": ((0.0, 0.5), (0.0, 1.0)),
    "F": ((0.0, 0.0), (0.0, 0.5)),
    "G": ((0.0, 0.5), (1.0, 0.5)),
}

_DIGIT_SEGS = {
    "0": "ABCDEF",
    "1": "BC",
    "2": "ABGED",
    "3": "ABGCD",
    "4": "FGBC",
    "5": "AFGCD",
    "6": "AFGEDC",
    "7": "ABC",
    "8": "ABCDEFG",
    "9": "ABCDFG",
}

GLYPHS = {ch: tuple(_SEG[s] for s in segs) for ch, segs in _DIGIT_SEGS.items()}
GLYPHS["?"] = (
    ((0.0, 0.22), (0.0, 0.08), (0.12, 0.0), (0.88, 0.0), (1.0, 0.08), (1.0, 0.42), (0.5, 0.58), (0.5, 0.72)),
    ((0.5, 0.92), (0.5, 1.0)),
)

GLYPH_ASPECT = 0.58  # glyph width as a fraction of glyph height
GLYPH_GAP = 0.22  # gap between glyphs as a fraction of glyph width


def _glyph_polylines(text: str, cx: float, cy: float, height: float):
    """Polylines (pixel coords) for `text` centered at (cx, cy)."""
    gw = GLYPH_ASPECT * height
    gap = GLYPH_GAP * gw
    total = len(text) * gw + (len(text) - 1) * gap
    x0 = cx - total / 2.0
    y0 = cy - height / 2.0
    out = []
    for i, ch in enumerate(text):
        gx = x0 + i * (gw + gap)
        for stroke in GLYPHS[ch]:
            out.append(tuple((gx + px * gw, y0 + py * height) for px, py in stroke))
    return out


# ---------------------------------------------------------------------------
# shape outlines and cut lines (normalized panel coordinates)


def _outline_elements(shape: str, cx: float, cy: float, scale: float):
    """(kind, data) primitives for one shape outline."""
    if shape == "circle":
        return [("circle", (cx, cy, scale))]
    pts = tuple((cx + vx * scale, cy + vy * scale) for vx, vy in UNIT_OUTLINES[shape])
    return [("polygon", pts)]


def _polygon_line_hits(pts, u, d):
    """Intersections of the line {p: dot(p, u) = d} with a polygon boundary."""
    hits = []
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        fa = ax * u[0] + ay * u[1] - d
        fb = bx * u[0] + by * u[1] - d
        if fa == fb:
            continue
        t = fa / (fa - fb)
        if 0.0 <= t <= 1.0:
            hits.append((ax + t * (bx - ax), ay + t * (by - ay)))
    hits.sort()
    dedup = []
    for h in hits:
        if not dedup or abs(h[0] - dedup[-1][0]) + abs(h[1] - dedup[-1][1]) > 1e-9:
            dedup.append(h)
    return dedup


def _partition_cut_lines(shape: str, part_count: int):
    """Cut segments for a partition layout, in normalized coordinates."""
    S = PARTITION_OUTLINE_SCALE
    cx, cy = CENTER
    lines = []
    if part_count <= 4:
        for theta in partition_cap_angles(part_count):
            ux, uy = direction(theta)
            d = PARTITION_CUT_RADIAL * shape_support(shape, theta) * S
            if shape == "circle":
                half = math.sqrt(max(S * S - d * d, 0.0))
                px, py = cx + d * ux, cy + d * uy
                vx, vy = -uy, ux
                lines.append(((px - half * vx, py - half * vy), (px + half * vx, py + half * vy)))
            else:
                pts = tuple((cx + vx * S, cy + vy * S) for vx, vy in UNIT_OUTLINES[shape])
                hits = _polygon_line_hits(pts, (ux, uy), cx * ux + cy * uy + d)
                if len(hits) >= 2:
                    lines.append((hits[0], hits[-1]))
        return lines
    half_step = 180.0 / part_count
    for theta in partition_wedge_angles(part_count):
        cut = theta - half_step
        ux, uy = direction(cut)
        r = shape_support(shape, cut) * S
        lines.append(((cx, cy), (cx + r * ux, cy + r * uy)))
    return lines


def _panel_shape_elements(spec: ProblemSpec):
    """All outline/cut primitives for the spec's layout, normalized coords."""
    shape = spec.layout.shape
    ptype = spec.problem_type
    elements = []
    if ptype == "combination":
        rel = spec.layout.relation
        if rel == "overlap":
            elements += _outline_elements(shape, 0.38, 0.50, 0.27)
            elements += _outline_elements(shape, 0.62, 0.50, 0.27)
        elif rel == "include":
            elements += _outline_elements(shape, 0.50, 0.50, 0.42)
            elements += _outline_elements(shape, 0.50, 0.60, 0.14)
        else:  # tangent_triple
            for slot in layout_mod.slots_for(ptype, spec.layout):
                elements += _outline_elements(shape, slot.x, slot.y, 0.17)
    elif ptype == "composition":
        for slot in layout_mod.slots_for(ptype, spec.layout):
            elements += _outline_elements(shape, slot.x, slot.y, 0.095)
    else:
        elements += _outline_elements(shape, *CENTER, PARTITION_OUTLINE_SCALE)
        for seg in _partition_cut_lines(shape, spec.layout.part_count):
            elements.append(("line", seg))
    return elements


# ---------------------------------------------------------------------------
# SVG emission


def _emit(kind, data, px: float, dx: float = 0.0) -> str:
    if kind == "circle":
        cx, cy, r = data
        return f'<circle cx="{_fmt(cx * px + dx)}" cy="{_fmt(cy * px)}" r="{_fmt(r * px)}"/>'
    if kind == "polygon":
        pts = " ".join(f"{_fmt(x * px + dx)},{_fmt(y * px)}" for x, y in data)
        return f'<polygon points="{pts}"/>'
    if kind == "line":
        (x1, y1), (x2, y2) = data
        return (
            f'<line x1="{_fmt(x1 * px + dx)}" y1="{_fmt(y1 * px)}" '
            f'x2="{_fmt(x2 * px + dx)}" y2="{_fmt(y2 * px)}"/>'
        )
    raise ValueError(kind)


def _emit_polyline(pts) -> str:
    body = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
    return f'<polyline points="{body}"/>'


def _number_font_px(spec: ProblemSpec, rs: RenderSpec) -> float:
    # composition digits live inside small shapes; shrink accordingly
    if spec.problem_type == "composition":
        return rs.font_px * 0.62
    if spec.problem_type == "partition" and spec.layout.part_count > 4:
        return rs.font_px * 0.78
    return rs.font_px


def _panel_body(spec: ProblemSpec, panel: Panel, rs: RenderSpec, dx: float = 0.0) -> list:
    px = float(rs.panel_px)
    slots = layout_mod.slots_for(spec.problem_type, spec.layout)
    non_center = {s.id for s in slots if not s.is_center}
    if set(panel.values.keys()) != non_center:
        raise IncompatiblePanel(
            f"panel slots {sorted(panel.values)} do not match layout slots {sorted(non_center)}"
        )
    parts = [f'<rect x="{_fmt(dx)}" y="0.00" width="{_fmt(px)}" height="{_fmt(px)}" fill="#ffffff" stroke="none"/>']
    parts.append(
        f'<g fill="none" stroke="#000000" stroke-width="{_fmt(rs.stroke_width)}" '
        'stroke-linecap="round" stroke-linejoin="round">'
    )
    inset = rs.stroke_width / 2.0
    parts.append(
        f'<rect x="{_fmt(dx + inset)}" y="{_fmt(inset)}" '
        f'width="{_fmt(px - 2 * inset)}" height="{_fmt(px - 2 * inset)}"/>'
    )
    for kind, data in _panel_shape_elements(spec):
        parts.append(_emit(kind, data, px, dx))
    font = _number_font_px(spec, rs)
    for slot in slots:
        if slot.is_center:
            value = panel.shown_constant
            if value is None:
                continue
            text = str(value)
        else:
            v = panel.values[slot.id]
            text = "?" if v is None else str(v)
        parts.append(f'<g class="number" data-slot="{slot.id}">')
        for stroke in _glyph_polylines(text, slot.x * px + dx, slot.y * px, font):
            parts.append(_emit_polyline(stroke))
        parts.append("</g>")
    parts.append("</g>")
    return parts


def _svg_document(width: float, height: float, body: list) -> str:
    head = (
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">'
    )
    return "\n".join([head] + body + ["</svg>"]) + "\n"


def render_panel(spec: ProblemSpec, panel: Panel, rs: Optional[RenderSpec] = None) -> str:
    """One panel as an SVG document (byte-deterministic)."""
    rs = rs or RenderSpec()
    px = float(rs.panel_px)
    return _svg_document(px, px, _panel_body(spec, panel, rs))


def render_problem_sheet(problem: Problem, rs: Optional[RenderSpec] = None) -> str:
    """All three panels side by side, in panel order."""
    rs = rs or RenderSpec()
    px = float(rs.panel_px)
    gap = SHEET_GAP_FRAC * px
    body = []
    for i, panel in enumerate(problem.panels):
        body += _panel_body(problem.spec, panel, rs, dx=i * (px + gap))
    return _svg_document(3 * px + 2 * gap, px, body)


# ---------------------------------------------------------------------------
# rasterization (feature-gated on Pillow)


def _parse_points(text: str):
    pts = []
    for token in text.replace(",", " ").split():
        pts.append(float(token))
    return list(zip(pts[0::2], pts[1::2]))


def rasterize(svg_text: str, rs: Optional[RenderSpec] = None) -> bytes:
    """Grayscale PNG bytes for one of this module's SVG documents."""
    rs = rs or RenderSpec()
    try:
        from PIL import Image, ImageDraw
    except ImportError as exc:  # pragma: no cover - environment dependent
        raise RasterBackendUnavailable(str(exc))
    root = ET.fromstring(svg_text)
    vb = root.get("viewBox")
    if vb:
        _, _, vw, vh = (float(t) for t in vb.split())
    else:
        vw = float(root.get("width", rs.panel_px))
        vh = float(root.get("height", rs.panel_px))
    scale = rs.panel_px / vh
    size = (int(round(vw * scale)), int(round(vh * scale)))
    img = Image.new("L", size, 255)
    draw = ImageDraw.Draw(img)

    def walk(el, stroke_width):
        tag = el.tag.split("}")[-1]
        sw = el.get("stroke-width")
        if sw is not None:
            stroke_width = float(sw)
        w = max(1, int(round(stroke_width * scale)))
        if tag == "rect":
            x, y = float(el.get("x", 0)), float(el.get("y", 0))
            ww, hh = float(el.get("width")), float(el.get("height"))
            box = [x * scale, y * scale, (x + ww) * scale, (y + hh) * scale]
            fill = el.get("fill")
            if fill not in (None, "none"):
                draw.rectangle(box, fill=255 if fill.lower() in ("#ffffff", "#fff", "white") else 0)
            elif el.get("stroke") != "none":
                draw.rectangle(box, outline=0, width=w)
        elif tag == "circle":
            cx, cy, r = float(el.get("cx")), float(el.get("cy")), float(el.get("r"))
            box = [(cx - r) * scale, (cy - r) * scale, (cx + r) * scale, (cy + r) * scale]
            draw.ellipse(box, outline=0, width=w)
        elif tag == "polygon":
            pts = [(x * scale, y * scale) for x, y in _parse_points(el.get("points"))]
            draw.line(pts + [pts[0]], fill=0, width=w, joint="curve")
        elif tag == "polyline":
            pts = [(x * scale, y * scale) for x, y in _parse_points(el.get("points"))]
            if len(pts) == 1:
                draw.point(pts, fill=0)
            else:
                draw.line(pts, fill=0, width=w, joint="curve")
        elif tag == "line":
            pts = [
                (float(el.get("x1")) * scale, float(el.get("y1")) * scale),
                (float(el.get("x2")) * scale, float(el.get("y2")) * scale),
            ]
            draw.line(pts, fill=0, width=w)
        for child in el:
            walk(child, stroke_width)

    for child in root:
        walk(child, rs.stroke_width)
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False)
    return buf.getvalue()
