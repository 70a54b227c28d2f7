import logging
import math
import os

# rendering never needs a display
os.environ.setdefault("QT_QPA_PLATFORM", "offscreen")

from PySide6.QtCore import QPointF, QRect, QRectF, QSize, Qt
from PySide6.QtGui import QColor, QFont, QGuiApplication, QPainter, QPen
from PySide6.QtSvg import QSvgGenerator

logger = logging.getLogger(__name__)

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"]


def ensure_gui_app():
    """A QGuiApplication is required before any QPainter work."""
    app = QGuiApplication.instance()
    if app is None:
        app = QGuiApplication([])
    return app


class LogLogPlot:
    """Points and fitted lines of FitReports on log2-log2 axes, painted to SVG."""

    def __init__(self, title="", width=640, height=480):
        self.title = title
        self.width = width
        self.height = height
        self.margin_left = 70
        self.margin_right = 20
        self.margin_top = 40
        self.margin_bottom = 50
        self.series = []

    def add_fit(self, label, fit):
        if not fit.points:
            logger.debug("add_fit: %s has no points, skipped", label)
            return
        self.series.append((label, fit))

    def bounds(self):
        xs = [x for _, fit in self.series for x, _ in fit.points]
        ys = [y for _, fit in self.series for _, y in fit.points]
        x0, x1 = math.floor(min(xs)), math.ceil(max(xs))
        y0, y1 = math.floor(min(ys)), math.ceil(max(ys))
        if x1 == x0:
            x1 = x0 + 1
        if y1 == y0:
            y1 = y0 + 1
        return x0, x1, y0, y1

    def plot_rect(self):
        return QRectF(self.margin_left, self.margin_top,
                      self.width - self.margin_left - self.margin_right,
                      self.height - self.margin_top - self.margin_bottom)

    def paint(self, painter):
        painter.setRenderHint(QPainter.Antialiasing)
        painter.fillRect(QRect(0, 0, self.width, self.height), QColor("#ffffff"))
        painter.setFont(QFont("Sans", 9))
        painter.setPen(QColor("#000000"))
        painter.drawText(QRectF(0, 5, self.width, self.margin_top - 10), Qt.AlignCenter, self.title)
        if not self.series:
            painter.drawText(self.plot_rect(), Qt.AlignCenter, "no data")
            return

        x0, x1, y0, y1 = self.bounds()
        area = self.plot_rect()

        def to_screen(x, y):
            sx = area.left() + (x - x0) / (x1 - x0) * area.width()
            sy = area.bottom() - (y - y0) / (y1 - y0) * area.height()
            return QPointF(sx, sy)

        self._paint_axes(painter, area, x0, x1, y0, y1, to_screen)

        for index, (label, fit) in enumerate(self.series):
            color = QColor(PALETTE[index % len(PALETTE)])
            painter.setPen(QPen(color, 1.5))
            xs = [x for x, _ in fit.points]
            lo, hi = min(xs), max(xs)
            painter.drawLine(to_screen(lo, fit.intercept + fit.slope * lo),
                             to_screen(hi, fit.intercept + fit.slope * hi))
            painter.setBrush(color)
            for x, y in fit.points:
                painter.drawEllipse(to_screen(x, y), 3.0, 3.0)
            painter.setBrush(Qt.NoBrush)

            # legend
            ly = area.top() + 8 + 16 * index
            painter.drawLine(QPointF(area.right() - 200, ly), QPointF(area.right() - 180, ly))
            painter.setPen(QColor("#000000"))
            painter.drawText(QPointF(area.right() - 175, ly + 4),
                             f"{label}: slope {fit.slope:.3f}, r2 {fit.r_squared:.4f}")

    def _paint_axes(self, painter, area, x0, x1, y0, y1, to_screen):
        painter.setPen(QPen(QColor("#000000"), 1))
        painter.drawRect(area)
        grid_pen = QPen(QColor("#dddddd"), 0.5)
        x_step = max(1, (x1 - x0) // 10)
        y_step = max(1, (y1 - y0) // 10)
        for x in range(x0, x1 + 1, x_step):
            p = to_screen(x, y0)
            painter.setPen(grid_pen)
            painter.drawLine(p, to_screen(x, y1))
            painter.setPen(QColor("#000000"))
            painter.drawText(QRectF(p.x() - 20, p.y() + 4, 40, 14), Qt.AlignCenter, str(x))
        for y in range(y0, y1 + 1, y_step):
            p = to_screen(x0, y)
            painter.setPen(grid_pen)
            painter.drawLine(p, to_screen(x1, y))
            painter.setPen(QColor("#000000"))
            painter.drawText(QRectF(p.x() - 45, p.y() - 7, 40, 14), Qt.AlignRight | Qt.AlignVCenter, str(y))
        painter.drawText(QRectF(area.left(), self.height - 22, area.width(), 16), Qt.AlignCenter, "log2 x")
        painter.save()
        painter.translate(14, area.center().y())
        painter.rotate(-90)
        painter.drawText(QRectF(-60, -8, 120, 16), Qt.AlignCenter, "log2 y")
        painter.restore()

    def save_svg(self, path):
        ensure_gui_app()
        generator = QSvgGenerator()
        generator.setFileName(os.fspath(path))
        generator.setSize(QSize(self.width, self.height))
        generator.setViewBox(QRect(0, 0, self.width, self.height))
        generator.setTitle(self.title)
        generator.setDescription("log-log fit")
        painter = QPainter()
        if not painter.begin(generator):
            logger.error("save_svg: could not open %s", path)
            return False
        try:
            self.paint(painter)
        finally:
            painter.end()
        logger.debug("save_svg: %d series -> %s", len(self.series), path)
        return True
