# Pipeline services exports
from app.services.pipeline.extractor import ExtractionResult, PlotExtractor

__all__ = ["ExtractionResult", "PlotExtractor"]
