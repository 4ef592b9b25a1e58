"""Local motion and deformation analysis from virtual edge-current forces."""

__version__ = "0.1.0"

from .raster_io import (Circle, Ellipse, GrayImage, Line, PnmError, Polygon, Rectangle,
                        RegionMask, ShapeError, load_pgm, make_shape, save_pnm)
from .gradient import GradientField, sobel
from .edges import (CurrentElement, CurrentField, EdgeMap, direction_grid, extract_currents,
                    nonmax_suppress, quantize_direction, significant_edges, threshold_mask)
from .ampere import (ForceField, ForceParams, ForceSample, InductionMap, element_force,
                     field_total, force_field, force_via_induction, induction_map, pair_force,
                     total_force)
from .render import ArrowPlotSpec, parse_field, render_arrows, serialize_field

__all__ = [
    "Circle", "Ellipse", "GrayImage", "Line", "PnmError", "Polygon", "Rectangle", "RegionMask",
    "ShapeError", "load_pgm", "make_shape", "save_pnm", "GradientField", "sobel",
    "CurrentElement", "CurrentField", "EdgeMap", "direction_grid", "extract_currents",
    "nonmax_suppress", "quantize_direction", "significant_edges", "threshold_mask",
    "ForceField", "ForceParams", "ForceSample", "InductionMap", "element_force", "field_total",
    "force_field", "force_via_induction", "induction_map", "pair_force", "total_force",
    "ArrowPlotSpec", "parse_field", "render_arrows", "serialize_field",
]
