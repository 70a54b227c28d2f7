from spheremax.harness.fitting import FitReport, fit_loglog
from spheremax.gui.loglog_plot import LogLogPlot


def test_save_svg(qapp, tmp_path, sample_fit):
    plot = LogLogPlot(title="decay")
    plot.add_fit("sample", sample_fit)
    plot.add_fit("square", fit_loglog([(x, x ** 2) for x in (2.0, 4.0, 8.0, 16.0)]))
    assert len(plot.series) == 2
    path = tmp_path / "decay.svg"
    assert plot.save_svg(path)
    text = path.read_text()
    assert "<svg" in text
    assert "decay" in text


def test_bounds_cover_points(sample_fit):
    plot = LogLogPlot()
    plot.add_fit("sample", sample_fit)
    x0, x1, y0, y1 = plot.bounds()
    assert (x0, x1) == (5, 7)
    assert y0 <= -8.5 and y1 >= -5.5


def test_empty_fit_is_skipped(qapp, tmp_path):
    plot = LogLogPlot(title="empty")
    plot.add_fit("nothing", FitReport(0.0, 0.0, 1.0))
    assert plot.series == []
    assert plot.save_svg(tmp_path / "empty.svg")
    assert (tmp_path / "empty.svg").exists()


def test_plot_rect_inside_canvas():
    plot = LogLogPlot(width=300, height=200)
    rect = plot.plot_rect()
    assert rect.left() > 0 and rect.top() > 0
    assert rect.right() < 300 and rect.bottom() < 200
