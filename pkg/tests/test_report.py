import json
import math
import xml.etree.ElementTree as ET

import pytest

from kslab.report import csv_text, dumps_json, emit_plot, fmt_float, residuals_csv, svg_plot

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.mark.parametrize("x", [0.1, 1 / 3, 2.0**-1074, 1e300, -7.25, math.pi])
def test_fmt_float_round_trips(x):
    assert float(fmt_float(x)) == x


def test_json_is_stable_and_valid():
    obj = {"b": 1.0 / 3, "a": [1, 2.5, float("nan")], "flag": True, "nested": {"z": None}}
    text = dumps_json(obj)
    assert text == dumps_json(obj)
    back = json.loads(text)
    assert list(back) == ["b", "a", "flag", "nested"]
    assert back["b"] == 1.0 / 3
    assert back["a"][2] is None


def test_csv_layout():
    text = csv_text(("name", "value"), [("x", 0.1), ("y", 2)])
    assert text == "name,value\nx,0.10000000000000001\ny,2\n"
    rc = residuals_csv({"r": 1e-12, "s": 1.0}, 1e-10)
    assert rc.splitlines()[1:] == ["r,9.9999999999999998e-13,1e-10,pass", "s,1,1e-10,fail"]


def test_svg_single_point():
    svg = svg_plot([("one", [(1.0, 2.0)])])
    root = ET.fromstring(svg)
    assert root.tag == SVG_NS + "svg"
    assert len(root.findall(SVG_NS + "circle")) == 1
    assert "href" not in svg


def test_svg_log_log_descending():
    pts = [(2, 0.35), (4, 0.25), (8, 0.18), (16, 0.125), (32, 0.088)]
    root = ET.fromstring(svg_plot([("sweep", pts)], log_log=True))
    line = root.find(SVG_NS + "polyline")
    ys = [float(p.split(",")[1]) for p in line.get("points").split()]
    # SVG y grows downward, so a falling curve has increasing y
    assert all(b > a for a, b in zip(ys, ys[1:]))


def test_svg_errors():
    with pytest.raises(ValueError, match="empty"):
        svg_plot([])
    with pytest.raises(ValueError, match="empty"):
        svg_plot([("x", [])])
    with pytest.raises(ValueError, match="positive"):
        svg_plot([("x", [(1, 0.0)])], log_log=True)


def test_emit_plot_bytes_repeat(tmp_path):
    series = [("a", [(1, 1), (2, 4)]), ("b", [(1, 2), (2, 3)])]
    p1 = emit_plot(series, tmp_path / "a.svg", title="t")
    p2 = emit_plot(series, tmp_path / "b.svg", title="t")
    assert p1.read_bytes() == p2.read_bytes()
