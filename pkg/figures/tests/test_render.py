import json
import os

import pytest

from figrender import (
    FigureSpec,
    SchemaError,
    load_grid,
    load_thresholds,
    render,
    render_directory,
)

SAMPLES = os.path.join(os.path.dirname(__file__), "..", "sample_data")

GRID_HEADER = ("model,n,eps,trials,failures,p_fail,ci_low,ci_high,"
               "bound_name,bound_value\n")
THRESH_HEADER = "model,n,mean_eps_bar,ci_low,ci_high,bound_lower\n"


class TestSpec:
    def test_panel_type_validated(self):
        with pytest.raises(ValueError):
            FigureSpec(("x.csv",), "pie_chart")

    def test_overlays_restricted_to_known_names(self):
        FigureSpec(("x.csv",), "heatmap",
                   overlays=(("bound", "birkhoff_failure_upper"),))
        with pytest.raises(ValueError):
            FigureSpec(("x.csv",), "heatmap", overlays=(("x", "mystery_curve"),))


class TestSchema:
    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "grid.csv"
        bad.write_text("model,n,eps\nhypercube,4,0.1\n")
        with pytest.raises(SchemaError, match="p_fail"):
            load_grid(str(bad))

    def test_missing_threshold_column_named(self, tmp_path):
        bad = tmp_path / "thresholds.csv"
        bad.write_text("model,n\nhypercube,4\n")
        with pytest.raises(SchemaError, match="mean_eps_bar"):
            load_thresholds(str(bad))

    def test_empty_file_rejected(self, tmp_path):
        bad = tmp_path / "grid.csv"
        bad.write_text("")
        with pytest.raises(SchemaError, match="header"):
            load_grid(str(bad))


class TestEmptyData:
    def test_header_only_grid_renders_blank_axes_with_warning(self, tmp_path):
        (tmp_path / "grid.csv").write_text(GRID_HEADER)
        spec = FigureSpec((str(tmp_path / "grid.csv"),), "heatmap")
        with pytest.warns(UserWarning, match="no data rows"):
            files = render(spec, str(tmp_path / "fig"))
        assert all(os.path.exists(f) for f in files)
        sidecar = json.load(open(files[2], encoding="utf-8"))
        assert sidecar["data"]["n_values"] == []

    def test_header_only_thresholds(self, tmp_path):
        (tmp_path / "thresholds.csv").write_text(THRESH_HEADER)
        spec = FigureSpec((str(tmp_path / "thresholds.csv"),), "threshold_curve")
        with pytest.warns(UserWarning, match="no data rows"):
            render(spec, str(tmp_path / "fig"))


class TestDiscovery:
    def test_missing_inputs_raise(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            render_directory(str(tmp_path))


@pytest.mark.parametrize("dataset", ["birkhoff", "binf"])
class TestSampleData:
    def test_renders_both_panels(self, dataset, tmp_path):
        src = os.path.join(SAMPLES, dataset)
        for name in ("grid.csv", "thresholds.csv", "meta.json"):
            (tmp_path / name).write_bytes(
                open(os.path.join(src, name), "rb").read())
        files = render_directory(str(tmp_path))
        names = sorted(os.path.basename(f) for f in files)
        assert names == ["failure_heatmap.json", "failure_heatmap.png",
                         "failure_heatmap.svg", "threshold_curve.json",
                         "threshold_curve.png", "threshold_curve.svg"]

    def test_sidecars_byte_stable_on_rerun(self, dataset, tmp_path):
        src = os.path.join(SAMPLES, dataset)
        for name in ("grid.csv", "thresholds.csv", "meta.json"):
            (tmp_path / name).write_bytes(
                open(os.path.join(src, name), "rb").read())
        render_directory(str(tmp_path))
        first = {n: open(tmp_path / n, "rb").read()
                 for n in ("failure_heatmap.json", "threshold_curve.json")}
        render_directory(str(tmp_path))
        second = {n: open(tmp_path / n, "rb").read()
                  for n in ("failure_heatmap.json", "threshold_curve.json")}
        assert first == second

    def test_bound_line_below_ci_edges(self, dataset, tmp_path):
        src = os.path.join(SAMPLES, dataset)
        (tmp_path / "thresholds.csv").write_bytes(
            open(os.path.join(src, "thresholds.csv"), "rb").read())
        spec = FigureSpec((str(tmp_path / "thresholds.csv"),), "threshold_curve")
        files = render(spec, str(tmp_path / "fig"))
        sidecar = json.load(open(files[2], encoding="utf-8"))
        assert sidecar["data"]["bound_below_ci"] is True

    def test_heatmap_sidecar_has_probabilities_in_unit_interval(self, dataset):
        src = os.path.join(SAMPLES, dataset)
        rows = load_grid(os.path.join(src, "grid.csv"))
        assert rows
        assert all(0.0 <= r["p_fail"] <= 1.0 for r in rows)
        assert all(r["bound_name"] == "" or r["bound_name"] in
                   {"lower_prop", "sphere_upper", "margin_upper",
                    "linear_representer_upper", "linear_margin_upper",
                    "membership_failure_upper", "birkhoff_failure_upper"}
                   for r in rows)
