"""
Command-line entry point.

    python -m app.main extract --config run.toml [--input ...] [--output-dir ...]
    python -m app.main evaluate plots.json truth.json [--json report.json]
    python -m app.main synth --output-dir synthetic [--config synth.toml] [--set seed=7]
    python -m app.main render-overlay --plots plots.json --input field.png --output overlay.png
    python -m app.main dump-profiles --config run.toml

Exit codes: 0 success, 1 validation error, 2 processing error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.config.run_config import apply_overrides, load_run_config, parse_override, read_toml, validate_model
from app.config.settings import settings
from app.exceptions import EXIT_OK, EXIT_PROCESSING, PlotExtractionError
from app.schemas.plots import PlotDocument, RegionOfInterest
from app.schemas.run import SynthConfig
from app.services.metrics.iou import iou_report, load_plots
from app.services.pipeline import exporters
from app.services.pipeline.extractor import PlotExtractor
from app.services.raster.io import load_image, load_mask, save_mask
from app.services.raster.segmentation import crop
from app.services.synth.generator import FieldGenerator, extract_config_toml

logger = logging.getLogger(__name__)


def configure_logging(verbose: int = 0, quiet: bool = False) -> None:
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format=settings.log_format, force=True)


def _run_overrides(args: argparse.Namespace) -> dict:
    return {
        "input.path": getattr(args, "input", None),
        "output.directory": getattr(args, "output_dir", None),
        "runtime.workers": getattr(args, "workers", None),
        "output.overlay": getattr(args, "overlay", None),
        "output.chips": True if getattr(args, "chips", False) else None,
    }


def cmd_extract(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, _run_overrides(args), args.set)
    extractor = PlotExtractor(config)
    result = extractor.run()
    written = extractor.write_outputs(result)
    print(f"{len(result.grid.plots)} plots written to {written['plots_json']}")
    if result.grid.flagged:
        print(f"{len(result.grid.flagged)} plots flagged during fine-tuning")
    return EXIT_OK


def cmd_dump_profiles(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, _run_overrides(args), args.set)
    extractor = PlotExtractor(config)
    mask, _ = extractor.load_mask()
    written = extractor.write_profiles(mask, Path(config.output.directory) / "profiles")
    for name, path in written.items():
        print(f"{name}: {path}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    report = iou_report(load_plots(args.plots), load_plots(args.truth))
    print(f"mean IoU: {report.mean_iou:.4f} over {report.count} plots")
    print("IoU histogram:")
    for lo, hi, count in zip(report.bin_edges[:-1], report.bin_edges[1:], report.histogram):
        print(f"  [{lo:.1f}, {hi:.1f}{']' if hi >= 1.0 else ')'}: {count}")
    print(f"plots below 0.5: {report.below_half}")
    if args.json:
        exporters.write_json(report.model_dump(), args.json)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    data = read_toml(Path(args.config)) if args.config else {}
    data = apply_overrides(data, dict(parse_override(a) for a in args.set))
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = validate_model(SynthConfig, data)

    synthetic = FieldGenerator(cfg).build()
    out = Path(args.output_dir)
    mask_path = save_mask(synthetic.mask, out / f"mask.{args.format}")
    document = PlotDocument(plots=synthetic.truth.plots)
    exporters.write_plots_json(document, out / "truth.json")
    exporters.write_frame(exporters.plots_frame(document.plots), out / "truth.csv")
    (out / "extract.toml").write_text(extract_config_toml(cfg, mask_path.name, "extracted"))
    print(f"synthetic field {synthetic.mask.shape[1]}x{synthetic.mask.shape[0]} written to {out}")
    return EXIT_OK


def cmd_render_overlay(args: argparse.Namespace) -> int:
    document = PlotDocument.model_validate(load_plots(args.plots).model_dump())
    base = load_mask(args.input) if args.kind == "mask" else load_image(args.input)
    roi = _document_roi(args.plots) if args.roi_from_plots else None
    if roi is not None and (base.shape[1], base.shape[0]) != (roi.width, roi.height):
        base = crop(base, roi)
    exporters.write_overlay(exporters.render_overlay(base, document.plots), args.output)
    print(f"overlay written to {args.output}")
    return EXIT_OK


def _document_roi(path: Path) -> Optional[RegionOfInterest]:
    try:
        return PlotDocument.model_validate_json(Path(path).read_text()).roi
    except ValueError:
        return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cope", description="Plot extraction from grid-planted field images")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="TOML run file")
        p.add_argument("--input", type=Path, help="input raster (overrides input.path)")
        p.add_argument("--output-dir", type=Path, help="output directory (overrides output.directory)")
        p.add_argument("--workers", type=int, help="worker threads (default: all cores)")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override any run-file value")

    p = sub.add_parser("extract", help="extract plots from a field raster")
    run_flags(p)
    p.add_argument("--overlay", action=argparse.BooleanOptionalAction, default=None, help="write overlay.png")
    p.add_argument("--chips", action="store_true", help="write one PNG per plot (RGB input)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("dump-profiles", help="write energy profiles and comb tables")
    run_flags(p)
    p.set_defaults(func=cmd_dump_profiles)

    p = sub.add_parser("evaluate", help="IoU of extracted plots against ground truth")
    p.add_argument("plots", type=Path)
    p.add_argument("truth", type=Path)
    p.add_argument("--json", type=Path, help="write the IoU report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic field mask with ground truth")
    p.add_argument("--config", type=Path, help="TOML file of synthetic field parameters")
    p.add_argument("--output-dir", type=Path, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["png", "pgm"], default="png")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render-overlay", help="draw a plot document over a raster")
    p.add_argument("--plots", type=Path, required=True)
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--kind", choices=["rgb", "mask"], default="rgb")
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--no-roi", dest="roi_from_plots", action="store_false",
                   help="draw on the raster as given, ignoring the document ROI")
    p.set_defaults(func=cmd_render_overlay)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except PlotExtractionError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return EXIT_PROCESSING


if __name__ == "__main__":
    sys.exit(main())
