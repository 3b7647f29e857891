# Metrics services exports
from app.services.metrics.iou import (
    IouReport,
    PlotIou,
    iou,
    per_plot_iou,
    mean_iou,
    iou_report,
    load_plots,
)

__all__ = [
    "IouReport",
    "PlotIou",
    "iou",
    "per_plot_iou",
    "mean_iou",
    "iou_report",
    "load_plots",
]
