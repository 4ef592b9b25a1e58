"""Command line front end: edges -> currents -> force -> render."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .ampere import WORKERS_ENV, ForceParams, force_field
from .edges import EdgeMap, direction_grid, extract_currents, quantize_direction, significant_edges
from .gradient import sobel
from .raster_io import (GrayImage, RegionMask, edge_pgm, load_pgm, make_shape, parse_pair,
                        parse_rect, parse_shape, rescale_to_gray, save_pnm)
from .render import ArrowPlotSpec, parse_field, render_arrows, serialize_field

PROG = "emflow"


class CliError(Exception):
    pass


def _read_pgm(path: str) -> GrayImage:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return load_pgm(data)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}") from None


def _write(path: Optional[str], data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _percent(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 100.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 100], got {v}")
    return v


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or math.isnan(v):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _rect(text: str):
    try:
        return parse_rect(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _pair(cast):
    def parse(text):
        try:
            return parse_pair(text, cast)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected two values like 5,-4 or 32x32, got {text!r}") from None
    return parse


def _currents(image: GrayImage, percent: float):
    field = sobel(image)
    edges = significant_edges(field, percent)
    return field, edges, extract_currents(field, edges)


# ---------------------------------------------------------------------------
# subcommands


def cmd_edges(args) -> None:
    field, edges, _ = _currents(_read_pgm(args.image), args.threshold_percent)
    _write(args.output, save_pnm(edge_pgm(edges.flags)))
    if args.magnitude:
        _write(args.magnitude, save_pnm(rescale_to_gray(field.magnitude)))


def cmd_currents(args) -> None:
    _, _, currents = _currents(_read_pgm(args.image), args.threshold_percent)
    grid = direction_grid(currents).encode("utf-8")
    if args.json:
        doc = {
            "width": currents.width,
            "height": currents.height,
            "elements": [{"x": e.x, "y": e.y, "cx": e.cx, "cy": e.cy,
                          "direction": quantize_direction(e.vector)} for e in currents],
        }
        _write(args.json, (json.dumps(doc, indent=1) + "\n").encode("ascii"))
    if args.grid or not args.json:
        _write(args.grid, grid)


def _roi(args, width, height) -> Optional[RegionMask]:
    if args.roi is not None:
        roi = RegionMask(rect=args.roi)
    elif args.mask is not None:
        roi = RegionMask.from_image(_read_pgm(args.mask))
    else:
        return None
    try:
        roi.check_frame(width, height)
    except ValueError as exc:
        raise CliError(f"region of interest: {exc}") from None
    return roi


def _compute_force(args):
    frame1 = _read_pgm(args.frame1)
    frame2 = _read_pgm(args.frame2)
    if (frame1.width, frame1.height) != (frame2.width, frame2.height):
        raise CliError(f"frames differ in size: {frame1.width}x{frame1.height} "
                       f"vs {frame2.width}x{frame2.height}")
    if args.swap:
        frame1, frame2 = frame2, frame1
    _, _, targets = _currents(frame1, args.threshold_percent)
    _, source_edges, sources = _currents(frame2, args.threshold_percent)
    params = ForceParams(args.constant, args.cutoff)
    roi = _roi(args, frame1.width, frame1.height)
    field = force_field(targets, sources, params, roi=roi, workers=args.workers)
    return field, source_edges


def cmd_force(args) -> None:
    field, _ = _compute_force(args)
    _write(args.output, serialize_field(field, args.format))


def _plot_spec(args, overlay: Optional[EdgeMap]) -> ArrowPlotSpec:
    try:
        return ArrowPlotSpec(cell=args.cell_size, quantized=args.quantized,
                             scaled=args.arrow_scale, overlay=overlay, background=args.background)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit_render(args, field, overlay: Optional[EdgeMap]) -> None:
    spec = _plot_spec(args, overlay)
    try:
        raster, svg = render_arrows(field, spec)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.svg:
        _write(args.svg, svg.encode("utf-8"))
    if args.ppm:
        _write(args.ppm, save_pnm(raster))
    if args.figure:
        from .report import save_force_figure
        save_force_figure(field, args.figure, overlay, quantized=args.quantized)


def _render_from_bytes(args, data: bytes, overlay: Optional[EdgeMap], size=None) -> None:
    width = height = None
    if overlay is not None:
        width, height = overlay.width, overlay.height
    if size is not None:
        width, height = size
    try:
        field = parse_field(data, width, height)
    except (ValueError, KeyError) as exc:
        raise CliError(f"malformed force field: {exc}") from None
    _emit_render(args, field, overlay)


def cmd_render(args) -> None:
    if not (args.svg or args.ppm or args.figure):
        raise CliError("render needs at least one of --svg, --ppm, --figure")
    try:
        data = Path(args.field).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {args.field}: {exc.strerror}") from None
    overlay = None
    if args.overlay:
        overlay = EdgeMap(_read_pgm(args.overlay).pixels != 0)
    _render_from_bytes(args, data, overlay, args.size)


def cmd_pipeline(args) -> None:
    field, source_edges = _compute_force(args)
    data = serialize_field(field, args.format)
    if args.output:
        _write(args.output, data)
    overlay = None if args.no_overlay else source_edges
    # render from the serialized bytes so the result matches `force | render`
    _render_from_bytes(args, data, overlay, (field.width, field.height))


def cmd_make_shape(args) -> None:
    try:
        shape = parse_shape(args.shape)
        if args.shift:
            shape = shape.translated(*args.shift)
        w, h = args.size
        image = make_shape(shape, w, h, args.foreground, args.background)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    _write(args.output, save_pnm(image))


# ---------------------------------------------------------------------------
# parser


def _add_threshold(p):
    p.add_argument("--threshold-percent", type=_percent, default=20.0, metavar="P",
                   help="edge threshold as a percent of the maximum gradient magnitude (default 20)")


def _add_force_options(p):
    p.add_argument("frame1", help="PGM frame supplying the target elements")
    p.add_argument("frame2", help="PGM frame supplying the source elements")
    _add_threshold(p)
    p.add_argument("--constant", "-A", type=_positive, default=1.0, help="scale constant A (default 1)")
    p.add_argument("--cutoff", type=_positive, default=math.inf,
                   help="ignore sources farther than this many pixels (default inf)")
    roi = p.add_mutually_exclusive_group()
    roi.add_argument("--roi", type=_rect, metavar="X0,Y0,X1,Y1",
                     help="report only targets inside this inclusive rectangle")
    roi.add_argument("--mask", metavar="PGM", help="report only targets where this mask is nonzero")
    p.add_argument("--swap", action="store_true", help="frame2 supplies targets, frame1 sources")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker threads (default: ${WORKERS_ENV} or min(4, cpus))")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_render_options(p):
    p.add_argument("--svg", metavar="PATH", help="write an SVG arrow plot")
    p.add_argument("--ppm", metavar="PATH", help="write a P6 arrow plot")
    p.add_argument("--figure", metavar="PATH", help="write a matplotlib summary figure (png/svg/pdf)")
    p.add_argument("--cell-size", type=int, default=12, help="output pixels per image pixel (>= 4)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--quantized", dest="quantized", action="store_true", default=True,
                      help="8-direction arrows (default)")
    mode.add_argument("--continuous", dest="quantized", action="store_false",
                      help="arrows at the exact force angle")
    p.add_argument("--arrow-scale", action="store_true", help="scale arrow length by force magnitude")
    p.add_argument("--background", type=int, default=255, help="background intensity (default 255)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG, description="Virtual edge-current interaction between two grayscale frames.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("edges", help="significant edge map as a black/white PGM")
    p.add_argument("image")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--magnitude", metavar="PGM", help="also dump the rescaled gradient magnitude")
    _add_threshold(p)
    p.set_defaults(func=cmd_edges)

    p = sub.add_parser("currents", help="current elements as a direction grid and/or JSON")
    p.add_argument("image")
    p.add_argument("--grid", metavar="PATH", help="direction grid output (default stdout)")
    p.add_argument("--json", metavar="PATH", help="element list output")
    _add_threshold(p)
    p.set_defaults(func=cmd_currents)

    p = sub.add_parser("force", help="force on frame1 elements from frame2 elements")
    _add_force_options(p)
    p.add_argument("-o", "--output", help="field output (default stdout)")
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("render", help="arrow plots from a serialized force field")
    p.add_argument("field", help="CSV or JSON force field")
    p.add_argument("--overlay", metavar="PGM", help="edge map drawn in gray beneath the arrows")
    p.add_argument("--size", type=_pair(int), metavar="WxH",
                   help="frame size; CSV fields carry none (default: overlay size or bounding box)")
    _add_render_options(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="force and render in one step")
    _add_force_options(p)
    p.add_argument("-o", "--output", help="field output path")
    p.add_argument("--no-overlay", action="store_true", help="omit the source-frame edge overlay")
    _add_render_options(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("make-shape", help="synthetic test raster")
    p.add_argument("shape", help="rect:x0,y0,x1,y1 | ellipse:cx,cy,a,b | circle:cx,cy,r | "
                                 "line:x0,y0,x1,y1[,w] | polygon:x,y;x,y;...")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--size", type=_pair(int), default=(32, 32), metavar="WxH")
    p.add_argument("--shift", type=_pair(float), metavar="DX,DY")
    p.add_argument("--foreground", type=int, default=255)
    p.add_argument("--background", type=int, default=0)
    p.set_defaults(func=cmd_make_shape)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
