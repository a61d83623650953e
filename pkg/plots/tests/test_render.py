import json
from pathlib import Path

import pytest

from topoproj_plots import FigureSpec, SchemaMismatch, isotonic, render
from topoproj_plots.cli import main_breakeven, main_succprob, main_timing

SAMPLES = Path(__file__).resolve().parents[1] / "sample_reports"


class TestIsotonic:
    def test_sorted_input_unchanged(self):
        assert isotonic([0.0, 0.1, 0.5, 1.0]) == [0.0, 0.1, 0.5, 1.0]

    def test_pooling(self):
        out = isotonic([0.5, 0.3, 1.0])
        assert out == [0.4, 0.4, 1.0]
        assert all(b >= a for a, b in zip(out, out[1:]))


class TestRenderFromCommittedSamples:
    def test_succprob_figure(self, tmp_path):
        out = tmp_path / "succ.png"
        res = render(FigureSpec(SAMPLES / "succprob.json", "succprob", out))
        assert out.exists() and out.stat().st_size > 2000
        # monotone after smoothing, and the subsampled-isometry curve hits
        # 1.0 exactly at m = d
        for op in ("gaussian", "sors"):
            smooth = res.series[op]["smooth"]
            assert all(b >= a - 1e-12 for a, b in zip(smooth, smooth[1:]))
        doc = json.loads((SAMPLES / "succprob.json").read_text())
        d = doc["config"]["generator"]["d"]
        sors = res.series["sors"]
        assert sors["m"][-1] == d
        assert sors["smooth"][-1] == 1.0

    def test_timing_figure(self, tmp_path):
        out = tmp_path / "timing.png"
        res = render(FigureSpec(SAMPLES / "timing.json", "timing", out))
        assert out.exists() and out.stat().st_size > 2000
        assert res.series["d"] == sorted(res.series["d"])
        assert all(v > 0 for v in res.series["fht_us"])

    def test_breakeven_figure(self, tmp_path):
        out = tmp_path / "breakeven.png"
        res = render(FigureSpec(SAMPLES / "timing.json", "breakeven", out))
        assert out.exists() and out.stat().st_size > 2000
        assert len(res.series["n0_model"]) == len(res.series["d"])

    def test_render_is_pure(self, tmp_path):
        a = render(FigureSpec(SAMPLES / "succprob.json", "succprob", tmp_path / "a.png"))
        b = render(FigureSpec(SAMPLES / "succprob.json", "succprob", tmp_path / "b.png"))
        assert a.series == b.series


class TestDegenerateAndMismatch:
    def test_empty_report_renders_warning_axes(self, tmp_path):
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({"experiment": "success_probability", "records": []}))
        out = tmp_path / "empty.png"
        res = render(FigureSpec(empty, "succprob", out))
        assert out.exists()
        assert res.series == {}

    def test_schema_mismatch(self, tmp_path):
        with pytest.raises(SchemaMismatch):
            render(FigureSpec(SAMPLES / "timing.json", "succprob", tmp_path / "x.png"))
        with pytest.raises(SchemaMismatch):
            render(FigureSpec(SAMPLES / "succprob.json", "timing", tmp_path / "x.png"))
        with pytest.raises(SchemaMismatch):
            FigureSpec(SAMPLES / "succprob.json", "scatter", tmp_path / "x.png")


class TestScripts:
    def test_all_three_entry_points(self, tmp_path, capsys):
        assert main_timing([str(SAMPLES / "timing.json"), str(tmp_path / "t.png")]) == 0
        assert main_breakeven([str(SAMPLES / "timing.json"), str(tmp_path / "b.png")]) == 0
        assert main_succprob([str(SAMPLES / "succprob.json"), str(tmp_path / "s.png")]) == 0
        for name in ("t.png", "b.png", "s.png"):
            assert (tmp_path / name).exists()
