from pathlib import Path

import pytest

from plotviz import PlotSpec, SchemaError, load_series, render
from plotviz.cli import main

DATA = Path(__file__).parent / "data"


class TestLoadSeries:
    def test_fig3_has_one_series_per_n(self):
        series = load_series("fig3", DATA / "fig3.csv")
        assert sorted(series) == ["N=4", "N=6", "N=8"]
        assert all(len(points) == 4 for points in series.values())

    def test_fig4_includes_reference_series(self):
        series = load_series("fig4", DATA / "fig4.csv")
        assert sorted(series) == ["N=4", "N=6", "N=8", "PUM"]
        assert {y for _, y in series["PUM"]} == {6.0}

    def test_points_sorted_by_x(self):
        series = load_series("fig3", DATA / "fig3.csv")
        for points in series.values():
            xs = [x for x, _ in points]
            assert xs == sorted(xs)

    def test_reload_is_identical(self):
        first = load_series("fig4", DATA / "fig4.csv")
        second = load_series("fig4", DATA / "fig4.csv")
        assert first == second

    def test_schema_mismatch(self):
        with pytest.raises(SchemaError, match="does not match"):
            load_series("fig4", DATA / "fig3.csv")

    def test_empty_csv(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(SchemaError, match="no header"):
            load_series("fig3", empty)

    def test_header_only_csv(self, tmp_path):
        bare = tmp_path / "bare.csv"
        bare.write_text("n_observables,series,kappa_sq\n")
        with pytest.raises(SchemaError, match="no data"):
            load_series("fig3", bare)

    def test_unknown_kind(self):
        with pytest.raises(SchemaError, match="unknown figure kind"):
            load_series("fig5", DATA / "fig3.csv")


class TestRender:
    def test_fig3_renders_three_series(self, tmp_path):
        out = tmp_path / "fig3.png"
        series = render(PlotSpec(kind="fig3", csv_path=DATA / "fig3.csv",
                                 out_path=out))
        assert out.exists() and out.stat().st_size > 0
        assert len(series) == 3

    def test_fig4_renders_with_reference(self, tmp_path):
        out = tmp_path / "fig4.png"
        series = render(PlotSpec(kind="fig4", csv_path=DATA / "fig4.csv",
                                 out_path=out))
        assert out.exists()
        assert "PUM" in series

    def test_rerender_same_series_and_bytes(self, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        sa = render(PlotSpec(kind="fig4", csv_path=DATA / "fig4.csv", out_path=a))
        sb = render(PlotSpec(kind="fig4", csv_path=DATA / "fig4.csv", out_path=b))
        assert sa == sb
        assert a.read_bytes() == b.read_bytes()


class TestCli:
    def test_success(self, tmp_path):
        out = tmp_path / "fig3.png"
        code = main(["fig3", "--in", str(DATA / "fig3.csv"), "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_schema_mismatch_exits_nonzero(self, tmp_path):
        code = main(["fig4", "--in", str(DATA / "fig3.csv"),
                     "--out", str(tmp_path / "x.png")])
        assert code != 0

    def test_empty_input_exits_nonzero(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        code = main(["fig3", "--in", str(empty),
                     "--out", str(tmp_path / "x.png")])
        assert code != 0

    def test_missing_input_is_io_error(self, tmp_path):
        code = main(["fig3", "--in", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "x.png")])
        assert code == 3
