"""Sobel gradient estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster_io import GrayImage


@dataclass(frozen=True, eq=False)
class GradientField:
    """Per-pixel (gx, gy), arrays of shape (height, width).

    Border pixels carry (0, 0). The vector points toward brighter pixels;
    gy > 0 means intensity increases downward.
    """

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.gx, dtype=np.float64)
        gy = np.asarray(self.gy, dtype=np.float64)
        if gx.shape != gy.shape or gx.ndim != 2:
            raise ValueError("gx and gy must be 2D arrays of equal shape")
        object.__setattr__(self, "gx", gx)
        object.__setattr__(self, "gy", gy)

    @property
    def width(self) -> int:
        return self.gx.shape[1]

    @property
    def height(self) -> int:
        return self.gx.shape[0]

    @property
    def magnitude(self) -> np.ndarray:
        return np.sqrt(self.gx * self.gx + self.gy * self.gy)


def sobel(image: GrayImage) -> GradientField:
    """3x3 Sobel correlation on interior pixels; the one-pixel border is zero."""
    p = image.pixels.astype(np.int64)
    h, w = p.shape
    gx = np.zeros((h, w), dtype=np.int64)
    gy = np.zeros((h, w), dtype=np.int64)

    tl, tc, tr = p[:-2, :-2], p[:-2, 1:-1], p[:-2, 2:]
    ml, mr = p[1:-1, :-2], p[1:-1, 2:]
    bl, bc, br = p[2:, :-2], p[2:, 1:-1], p[2:, 2:]

    gx[1:-1, 1:-1] = (tr + 2 * mr + br) - (tl + 2 * ml + bl)
    gy[1:-1, 1:-1] = (bl + 2 * bc + br) - (tl + 2 * tc + tr)
    return GradientField(gx.astype(np.float64), gy.astype(np.float64))
