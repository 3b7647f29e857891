import json

import numpy as np
import pandas as pd
import pytest

from app.exceptions import MetricsError, MissingPlotsError
from app.schemas.plots import GroundTruthGrid, PlotRecord
from app.services.metrics import iou, iou_report, load_plots, mean_iou, per_plot_iou
from tests import oracles


def record(row, rng, rect):
    x_left, y_top, x_right, y_bot = rect
    return PlotRecord(row=row, range=rng, x_left=x_left, y_top=y_top, x_right=x_right, y_bot=y_bot)


def grid(*plots):
    return GroundTruthGrid(plots=[record(*p) for p in plots])


class TestIou:
    """Rectangle intersection over union"""

    def setup_method(self):
        np.random.seed(42)

    def test_identical(self):
        assert iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1.0

    def test_half_overlap(self):
        assert iou((0, 0, 2, 2), (1, 0, 3, 2)) == 1 / 3

    def test_disjoint_and_touching(self):
        assert iou((0, 0, 2, 2), (5, 5, 7, 7)) == 0.0
        assert iou((0, 0, 2, 2), (2, 0, 4, 2)) == 0.0

    def test_zero_area_rejected(self):
        with pytest.raises(MetricsError):
            iou((0, 0, 0, 5), (0, 0, 2, 2))
        with pytest.raises(MetricsError):
            iou((0, 0, 2, 2), (1, 3, 4, 3))

    def test_symmetric_and_exact(self):
        for _ in range(100):
            a = sorted(np.random.randint(0, 50, size=2).tolist())
            b = sorted(np.random.randint(0, 50, size=2).tolist())
            c = sorted(np.random.randint(0, 50, size=2).tolist())
            d = sorted(np.random.randint(0, 50, size=2).tolist())
            if a[0] == a[1] or b[0] == b[1] or c[0] == c[1] or d[0] == d[1]:
                continue
            r1 = (a[0], b[0], a[1], b[1])
            r2 = (c[0], d[0], c[1], d[1])
            value = iou(r1, r2)
            assert value == iou(r2, r1)
            assert value == float(oracles.rect_iou(r1, r2))
            assert 0.0 <= value <= 1.0


class TestGridIou:
    """Per-plot pairing by (row, range)"""

    def setup_method(self):
        self.truth = grid((0, 0, (0, 0, 2, 2)), (1, 0, (2, 0, 4, 2)))
        self.extracted = grid((0, 0, (0, 0, 2, 2)), (1, 0, (2, 0, 4, 1)))

    def test_mean(self):
        assert mean_iou(self.extracted, self.truth) == 0.75
        scores = per_plot_iou(self.extracted, self.truth)
        assert [(s.row, s.range, s.iou) for s in scores] == [(0, 0, 1.0), (1, 0, 0.5)]

    def test_subset(self):
        assert mean_iou(self.extracted, self.truth, keys=[(1, 0)]) == 0.5

    def test_unknown_key(self):
        with pytest.raises(MetricsError):
            mean_iou(self.extracted, self.truth, keys=[(5, 5)])

    def test_missing_plots(self):
        partial = grid((0, 0, (0, 0, 2, 2)))
        with pytest.raises(MissingPlotsError) as exc:
            mean_iou(partial, self.truth)
        assert exc.value.missing == [(1, 0)]
        assert "row=1, range=0" in str(exc.value)

    def test_order_by_range_then_row(self):
        truth = grid((1, 0, (2, 0, 4, 2)), (0, 1, (0, 2, 2, 4)), (0, 0, (0, 0, 2, 2)))
        scores = per_plot_iou(truth, truth)
        assert [(s.row, s.range) for s in scores] == [(0, 0), (1, 0), (0, 1)]

    def test_report(self):
        report = iou_report(self.extracted, self.truth)
        assert report.count == 2 and report.mean_iou == 0.75
        assert report.below_half == 0
        assert report.histogram == [0, 0, 0, 0, 0, 1, 0, 0, 0, 1]
        assert len(report.bin_edges) == 11

    def test_empty_truth(self):
        with pytest.raises(MetricsError):
            mean_iou(self.extracted, GroundTruthGrid(plots=[]))


class TestLoadPlots:
    """Reading reference plot documents"""

    def setup_method(self):
        self.rows = [
            {"row": 0, "range": 0, "x_left": 0, "x_right": 10, "y_top": 0, "y_bot": 5},
            {"row": 1, "range": 0, "x_left": 10, "x_right": 20, "y_top": 0, "y_bot": 5},
        ]

    def test_json_document(self, tmp_path):
        path = tmp_path / "plots.json"
        path.write_text(json.dumps({"roi": None, "plots": self.rows}))
        loaded = load_plots(path)
        assert [p.key for p in loaded.plots] == [(0, 0), (1, 0)]
        assert loaded.by_key()[(1, 0)].rectangle() == (10, 0, 20, 5)

    def test_bare_json_array(self, tmp_path):
        path = tmp_path / "plots.json"
        path.write_text(json.dumps(self.rows))
        assert len(load_plots(path).plots) == 2

    def test_csv(self, tmp_path):
        path = tmp_path / "plots.csv"
        frame = pd.DataFrame(self.rows)
        frame["flagged"] = False
        frame.to_csv(path, index=False)
        loaded = load_plots(path)
        assert mean_iou(loaded, loaded) == 1.0

    def test_csv_missing_columns(self, tmp_path):
        path = tmp_path / "plots.csv"
        pd.DataFrame(self.rows).drop(columns=["y_bot"]).to_csv(path, index=False)
        with pytest.raises(MetricsError):
            load_plots(path)

    def test_schema_mismatch(self, tmp_path):
        path = tmp_path / "plots.json"
        path.write_text(json.dumps({"plots": [{"row": 0, "range": 0, "x_left": 0}]}))
        with pytest.raises(MetricsError):
            load_plots(path)

    def test_inverted_rectangle(self, tmp_path):
        path = tmp_path / "plots.json"
        bad = dict(self.rows[0], x_right=0)
        path.write_text(json.dumps([bad]))
        with pytest.raises(MetricsError):
            load_plots(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "plots.json"
        path.write_text("{not json")
        with pytest.raises(MetricsError):
            load_plots(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MetricsError):
            load_plots(tmp_path / "absent.json")
