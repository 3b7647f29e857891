"""Error hierarchy shared by every pipeline stage and the CLI."""
from typing import Any, Dict, Iterable, Optional, Tuple

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROCESSING = 2


class PlotExtractionError(Exception):
    """Base error; carries the pipeline stage and a context mapping"""

    exit_code = EXIT_PROCESSING

    def __init__(
        self,
        message: str,
        stage: Optional[str] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.context = dict(context or {})

    def __str__(self) -> str:
        prefix = f"[{self.stage}] " if self.stage else ""
        if self.context:
            details = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
            return f"{prefix}{self.message} ({details})"
        return f"{prefix}{self.message}"


class ConfigValidationError(PlotExtractionError):
    exit_code = EXIT_VALIDATION

    def __init__(self, message: str, field: Optional[str] = None, **kwargs):
        context = kwargs.pop("context", {}) or {}
        if field is not None:
            context["field"] = field
        super().__init__(message, context=context, **kwargs)
        self.field = field


class RasterError(PlotExtractionError):
    pass


class MissingFileError(RasterError):
    pass


class UnsupportedFormatError(RasterError):
    pass


class TruncatedDataError(RasterError):
    pass


class MultiChannelMaskError(RasterError):
    pass


class RegionBoundsError(RasterError):
    exit_code = EXIT_VALIDATION


class ProfileError(PlotExtractionError):
    pass


class RangeSeparationError(PlotExtractionError):
    def __init__(self, message: str, range_index: Optional[int] = None, **kwargs):
        context = kwargs.pop("context", {}) or {}
        if range_index is not None:
            context["range"] = range_index
        super().__init__(message, context=context, **kwargs)
        self.range_index = range_index


class CombSpecError(PlotExtractionError):
    exit_code = EXIT_VALIDATION


class RowSeparationError(PlotExtractionError):
    def __init__(self, message: str, range_index: Optional[int] = None, **kwargs):
        context = kwargs.pop("context", {}) or {}
        if range_index is not None:
            context["range"] = range_index
        super().__init__(message, context=context, **kwargs)
        self.range_index = range_index


class FineTuneError(PlotExtractionError):
    pass


class MetricsError(PlotExtractionError):
    exit_code = EXIT_VALIDATION


class MissingPlotsError(MetricsError):
    def __init__(self, missing: Iterable[Tuple[int, int]], **kwargs):
        self.missing = sorted(missing)
        shown = ", ".join(f"(row={r}, range={z})" for r, z in self.missing[:20])
        if len(self.missing) > 20:
            shown += f", ... {len(self.missing) - 20} more"
        super().__init__(f"{len(self.missing)} ground-truth plots missing from grid: {shown}", **kwargs)


class SynthGeometryError(PlotExtractionError):
    exit_code = EXIT_VALIDATION


class ProcessingError(PlotExtractionError):
    exit_code = EXIT_PROCESSING
