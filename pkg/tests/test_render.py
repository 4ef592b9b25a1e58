import json
import math
import re

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emflow import (ArrowPlotSpec, EdgeMap, ForceParams, Rectangle, force_field, make_shape,
                    parse_field, quantize_direction, render_arrows, serialize_field,
                    significant_edges, sobel)
from emflow.ampere import ForceField
from emflow.render import arrow_glyphs, format_real

from conftest import currents_of


@pytest.fixture(scope="module")
def rect_field():
    a = currents_of(make_shape(Rectangle(5, 14, 18, 23).translated(5, -4)))
    b = currents_of(make_shape(Rectangle(5, 14, 18, 23)))
    return force_field(a, b, ForceParams(1.0, 20.0))


def one(fx, fy, x=0, y=0, size=3):
    return ForceField([x], [y], [fx], [fy], size, size)


def test_empty_csv_is_header_only():
    assert serialize_field(ForceField([], [], [], [], 4, 4)) == b"x,y,fx,fy,mag\n"


def test_hand_sample_row():
    data = serialize_field(one(0.0, 0.04)).decode()
    assert data.splitlines()[1] == "0,0,0,0.04,0.04"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_real_round_trips(v):
    assert float(format_real(v)) == v
    assert math.copysign(1, float(format_real(v))) == math.copysign(1, v)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(rect_field, fmt):
    back = parse_field(serialize_field(rect_field, fmt), rect_field.width, rect_field.height)
    assert back.identical(rect_field)
    assert (back.magnitude == rect_field.magnitude).all()


def test_json_echoes_params(rect_field):
    doc = json.loads(serialize_field(rect_field, "json"))
    assert doc["params"] == {"A": 1.0, "cutoff": 20.0}
    assert doc["width"] == 32 and len(doc["samples"]) == len(rect_field)
    assert set(doc["samples"][0]) == {"x", "y", "fx", "fy", "mag"}
    inf = ForceField([], [], [], [], 3, 3, params=ForceParams())
    assert json.loads(serialize_field(inf, "json"))["params"]["cutoff"] is None
    assert parse_field(serialize_field(inf, "json")).params == ForceParams()


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_field(b"a,b,c\n")
    with pytest.raises(ValueError):
        parse_field(b"x,y,fx,fy,mag\n1,2,3\n")
    with pytest.raises(ValueError):
        serialize_field(one(1, 1), "xml")


def test_single_south_glyph():
    raster, svg = render_arrows(one(0.0, 0.04))
    assert 'data-dir="S"' in svg
    (g,) = arrow_glyphs(one(0.0, 0.04), ArrowPlotSpec())
    (x0, y0, x1, y1) = g.segments[0]
    assert x0 == x1 and y1 > y0
    dark = np.argwhere(raster[:, :, 0] == 0)
    shaft = dark[dark[:, 1] == 6]
    head = dark[dark[:, 1] != 6]
    assert shaft[:, 0].min() < 6 < shaft[:, 0].max()
    # arrowhead pixels sit below the cell center, on both sides of the shaft
    assert len(head) and (head[:, 0] > 6).all()
    assert (head[:, 1] < 6).any() and (head[:, 1] > 6).any()


def test_zero_force_is_dot():
    raster, svg = render_arrows(one(0.0, 0.0))
    assert '<circle class="dot"' in svg and 'class="arrow"' not in svg
    assert raster[6, 6, 0] == 0


def test_empty_field_with_overlay_draws_outline_only():
    edges = significant_edges(sobel(make_shape(Rectangle(8, 8, 20, 18))))
    empty = ForceField([], [], [], [], 32, 32)
    raster, svg = render_arrows(empty, ArrowPlotSpec(cell=4, overlay=edges))
    gray = (raster == 128).all(axis=2)
    expected = np.kron(edges.flags, np.ones((4, 4), bool))
    np.testing.assert_array_equal(gray, expected)
    assert set(np.unique(raster)) == {128, 255}
    assert svg.count("<rect") == 1 + len(edges) and "<line" not in svg


def test_glyph_directions_match_quantizer(rect_field):
    glyphs = arrow_glyphs(rect_field, ArrowPlotSpec())
    for g, fx, fy in zip(glyphs, rect_field.fx, rect_field.fy):
        assert g.direction == quantize_direction((fx, fy))
        x0, y0, x1, y1 = g.segments[0]
        assert quantize_direction((x1 - x0, y1 - y0)) == g.direction


def test_continuous_angles(rect_field):
    _, svg = render_arrows(rect_field, ArrowPlotSpec(quantized=False))
    angles = [float(a) for a in re.findall(r'data-angle="([^"]+)"', svg)]
    want = [math.degrees(math.atan2(fy, fx)) for fx, fy in zip(rect_field.fx, rect_field.fy)]
    assert angles == want
    for g, a in zip(arrow_glyphs(rect_field, ArrowPlotSpec(quantized=False)), want):
        x0, y0, x1, y1 = g.segments[0]
        assert math.degrees(math.atan2(y1 - y0, x1 - x0)) == pytest.approx(a, abs=1e-9)


def test_svg_and_raster_share_geometry(rect_field):
    spec = ArrowPlotSpec(cell=8)
    raster, svg = render_arrows(rect_field, spec)
    tips = re.findall(r'<line x1="[^"]+" y1="[^"]+" x2="([^"]+)" y2="([^"]+)"/>', svg)
    for x, y in tips[::3]:
        px, py = min(int(float(x)), raster.shape[1] - 1), min(int(float(y)), raster.shape[0] - 1)
        assert raster[py, px, 0] == 0


def test_scaled_mode_shortens_weak_arrows(rect_field):
    glyphs = arrow_glyphs(rect_field, ArrowPlotSpec(scaled=True))
    lengths = [math.hypot(g.segments[0][2] - g.segments[0][0], g.segments[0][3] - g.segments[0][1])
               for g in glyphs]
    assert max(lengths) == pytest.approx(0.8 * 12)
    assert min(lengths) < max(lengths)


def test_rendering_is_pure(rect_field):
    a = render_arrows(rect_field)
    b = render_arrows(rect_field)
    assert a[0].tobytes() == b[0].tobytes() and a[1] == b[1]


def test_spec_validation_and_overlay_mismatch(rect_field):
    with pytest.raises(ValueError):
        ArrowPlotSpec(cell=3)
    with pytest.raises(ValueError):
        render_arrows(rect_field, ArrowPlotSpec(overlay=EdgeMap(np.zeros((8, 8), bool))))


def test_matplotlib_figure(tmp_path, rect_field):
    from emflow.report import save_force_figure
    edges = significant_edges(sobel(make_shape(Rectangle(5, 14, 18, 23))))
    p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
    save_force_figure(rect_field, p1, overlay=edges)
    save_force_figure(rect_field, p2, overlay=edges)
    assert p1.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert p1.read_bytes() == p2.read_bytes()
