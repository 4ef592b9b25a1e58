"""Significant edge points and virtual current elements.

An edge point survives a percent-of-max magnitude threshold followed by a
four-pair non-maximum suppression. Its current element is the gradient
rotated by a quarter turn, R(gx, gy) = (gy, -gx), which is counterclockwise
as displayed on a y-down raster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple

import numpy as np

from .gradient import GradientField

DIRECTIONS = ("E", "SE", "S", "SW", "W", "NW", "N", "NE")
# unit steps matching DIRECTIONS under the y-down convention
DIRECTION_STEPS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
NO_ELEMENT = "·"

# opposing neighbor pairs (dx, dy): W/E, N/S, NW/SE, NE/SW
_PAIRS = (
    ((-1, 0), (1, 0)),
    ((0, -1), (0, 1)),
    ((-1, -1), (1, 1)),
    ((1, -1), (-1, 1)),
)


@dataclass(frozen=True, eq=False)
class EdgeMap:
    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=bool)
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)

    @property
    def width(self) -> int:
        return self.flags.shape[1]

    @property
    def height(self) -> int:
        return self.flags.shape[0]

    def __len__(self):
        return int(self.flags.sum())


class CurrentElement(NamedTuple):
    x: int
    y: int
    cx: float
    cy: float

    @property
    def position(self):
        return (self.x, self.y)

    @property
    def vector(self):
        return (self.cx, self.cy)


class CurrentField:
    """Current elements of one frame in canonical (y, x) order.

    Stored column-wise: integer positions ``xs``, ``ys`` and real vector
    components ``vx``, ``vy``.
    """

    def __init__(self, xs, ys, vx, vy, width: int, height: int):
        xs = np.asarray(xs, dtype=np.int64).ravel()
        ys = np.asarray(ys, dtype=np.int64).ravel()
        vx = np.asarray(vx, dtype=np.float64).ravel()
        vy = np.asarray(vy, dtype=np.float64).ravel()
        if not (len(xs) == len(ys) == len(vx) == len(vy)):
            raise ValueError("position and vector arrays differ in length")
        order = np.lexsort((xs, ys))
        xs, ys, vx, vy = xs[order], ys[order], vx[order], vy[order]
        if len(xs) > 1:
            dup = (np.diff(xs) == 0) & (np.diff(ys) == 0)
            if dup.any():
                i = int(np.argmax(dup))
                raise ValueError(f"two elements at pixel ({xs[i]}, {ys[i]})")
        for a in (xs, ys, vx, vy):
            a.setflags(write=False)
        self.xs, self.ys, self.vx, self.vy = xs, ys, vx, vy
        self.width = int(width)
        self.height = int(height)

    @classmethod
    def from_elements(cls, elements, width: int, height: int) -> "CurrentField":
        elements = list(elements)
        return cls([e[0] for e in elements], [e[1] for e in elements],
                   [e[2] for e in elements], [e[3] for e in elements], width, height)

    def __len__(self):
        return len(self.xs)

    def __iter__(self):
        for i in range(len(self.xs)):
            yield CurrentElement(int(self.xs[i]), int(self.ys[i]),
                                 float(self.vx[i]), float(self.vy[i]))

    @property
    def elements(self) -> List[CurrentElement]:
        return list(self)

    def reversed(self) -> "CurrentField":
        """Same positions with every vector negated (opposite rotation sense)."""
        return CurrentField(self.xs, self.ys, -self.vx, -self.vy, self.width, self.height)

    def subset(self, keep) -> "CurrentField":
        keep = np.asarray(keep, dtype=bool)
        return CurrentField(self.xs[keep], self.ys[keep], self.vx[keep], self.vy[keep],
                            self.width, self.height)

    def __repr__(self):
        return f"CurrentField({len(self)} elements, {self.width}x{self.height})"


def threshold_mask(field: GradientField, percent: float = 20.0) -> np.ndarray:
    """Keep pixels whose magnitude strictly exceeds percent% of the maximum."""
    if not 0.0 <= percent <= 100.0:
        raise ValueError(f"threshold percent must lie in [0, 100], got {percent}")
    mag = field.magnitude
    t = percent * float(mag.max()) / 100.0
    return mag > t


def nonmax_suppress(field: GradientField, mask) -> EdgeMap:
    """Four-pair non-maximum suppression restricted to ``mask``.

    A pixel beats a neighbor when its magnitude is larger. Pixels beyond the
    raster count as magnitude 0. A masked pixel is kept when it beats both
    neighbors of at least two of the pairs W/E, N/S, NW/SE, NE/SW.

    Equal magnitudes are resolved toward the downhill side: a pixel beats an
    equal neighbor only when that neighbor lies ahead along the pixel's own
    gradient. An ideal step edge produces two equal columns of magnitude,
    and without this rule straight edges would vanish entirely. Opposite
    neighbors can never both be beaten through a tie, so flat plateaus are
    still suppressed.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != field.gx.shape:
        raise ValueError("mask and gradient field differ in size")
    mag = field.magnitude
    h, w = mag.shape
    padded = np.zeros((h + 2, w + 2))
    padded[1:-1, 1:-1] = mag
    gx, gy = field.gx, field.gy

    def beats(dx, dy):
        other = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        return (mag > other) | ((mag == other) & (dx * gx + dy * gy > 0))

    count = np.zeros((h, w), dtype=np.int8)
    for p, q in _PAIRS:
        count += beats(*p) & beats(*q)
    return EdgeMap(mask & (count >= 2))


def significant_edges(field: GradientField, percent: float = 20.0) -> EdgeMap:
    return nonmax_suppress(field, threshold_mask(field, percent))


def extract_currents(field: GradientField, edges: EdgeMap) -> CurrentField:
    if edges.flags.shape != field.gx.shape:
        raise ValueError("edge map and gradient field differ in size")
    ys, xs = np.nonzero(edges.flags)
    gx = field.gx[ys, xs]
    gy = field.gy[ys, xs]
    return CurrentField(xs, ys, gy, -gx, field.width, field.height)


def quantize_angle(theta_deg: float) -> str:
    """Compass sector of an angle in degrees, measured y-down from +x."""
    theta = math.fmod(theta_deg, 360.0)
    if theta < 0:
        theta += 360.0
    k = int(math.floor((theta + 22.5) / 45.0)) % 8
    return DIRECTIONS[k]


def quantize_direction(vector) -> str:
    cx, cy = float(vector[0]), float(vector[1])
    if cx == 0.0 and cy == 0.0:
        raise ValueError("cannot quantize the direction of a zero vector")
    return quantize_angle(math.degrees(math.atan2(cy, cx)))


def direction_grid(currents: CurrentField) -> str:
    """Text grid of quantized current directions, one row per image row."""
    cells = [[NO_ELEMENT] * currents.width for _ in range(currents.height)]
    for e in currents:
        cells[e.y][e.x] = quantize_direction(e.vector)
    return "\n".join(" ".join(f"{c:<2}" for c in row).rstrip() for row in cells) + "\n"
