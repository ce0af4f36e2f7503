import re

import pytest

from artx.harness import AGG_HEADER
from artx.plots import PlotParseError, band_series, emit_plots, line_chart, load_aggregate


def write_agg(path, variants=("art", "none"), n=10):
    lines = [",".join(AGG_HEADER)]
    for v in variants:
        for i in range(1, n + 1):
            vals = [v, str(i), str(i * 128), "3"]
            for j, _ in enumerate(("extrinsic", "intrinsic", "length", "categories")):
                vals += [repr(0.1 * i + j), repr(0.05 * i)]
            vals.append("")
            lines.append(",".join(vals))
    path.write_text("\n".join(lines) + "\n")
    return path


def points(svg, tag):
    out = []
    for m in re.finditer(rf'<{tag} class="[a-z]+"[^>]*points="([^"]*)"', svg):
        out.append([tuple(map(float, p.split(","))) for p in m.group(1).split()])
    return out


class TestCharts:
    def test_empty_input_gives_axes_only(self, tmp_path):
        path = tmp_path / "agg.csv"
        path.write_text(",".join(AGG_HEADER) + "\n")
        for p in emit_plots(path, tmp_path / "out"):
            svg = p.read_text()
            assert svg.count('class="axis"') == 2
            assert "<polyline" not in svg and "<polygon" not in svg

    def test_one_line_per_variant(self, tmp_path):
        paths = emit_plots(write_agg(tmp_path / "agg.csv"), tmp_path / "out")
        assert sorted(p.name for p in paths) == ["categories.svg", "extrinsic.svg", "intrinsic.svg", "length.svg"]
        for p in paths:
            lines = points(p.read_text(), "polyline")
            assert len(lines) == 2
            assert all(len(line) == 10 for line in lines)

    def test_band_contains_mean(self, tmp_path):
        series = load_aggregate(write_agg(tmp_path / "agg.csv"))
        x, lo, mid, hi = band_series(series["art"])
        assert len(x) == 10
        assert all(a <= b <= c for a, b, c in zip(lo, mid, hi))
        svg = line_chart(series, "extrinsic", "t", band=True)
        bands, means = points(svg, "polygon"), points(svg, "polyline")
        for band, mean in zip(bands, means):
            upper, lower = band[:10], band[10:][::-1]
            for (_, yu), (_, ym), (_, yl) in zip(upper, mean, lower):
                # svg y grows downward
                assert yu <= ym <= yl

    def test_note_rows_skipped(self, tmp_path):
        path = write_agg(tmp_path / "agg.csv", variants=("none",), n=2)
        with open(path, "a") as f:
            f.write("none,,,0" + "," * 8 + ",seed 3 failed: boom\n")
        assert len(load_aggregate(path)["none"]) == 2


class TestParseErrors:
    def test_names_line(self, tmp_path):
        path = write_agg(tmp_path / "agg.csv", variants=("none",), n=3)
        text = path.read_text().splitlines()
        text[2] = text[2].replace("0.2", "oops", 1)
        path.write_text("\n".join(text) + "\n")
        with pytest.raises(PlotParseError, match="line 3"):
            load_aggregate(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "agg.csv"
        path.write_text("a,b\n")
        with pytest.raises(PlotParseError, match="line 1"):
            load_aggregate(path)

    def test_short_row(self, tmp_path):
        path = tmp_path / "agg.csv"
        path.write_text(",".join(AGG_HEADER) + "\nnone,1\n")
        with pytest.raises(PlotParseError, match="line 2"):
            load_aggregate(path)
