"""Netpbm I/O, region masks and synthetic shape rasters.

Coordinates: x is the column index (rightward), y the row index (downward),
origin at the top-left pixel. Pixel (x, y) has its center at (x, y).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

MIN_SIZE = 3


class PnmError(ValueError):
    """Malformed Netpbm data; ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ShapeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single-channel raster stored as a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError("pixels must be a 2D array")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        h, w = px.shape
        if w < MIN_SIZE or h < MIN_SIZE:
            raise ValueError(f"image must be at least {MIN_SIZE}x{MIN_SIZE}, got {w}x{h}")
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Target restriction: an inclusive rectangle or a boolean bitmap."""

    rect: Union[Tuple[int, int, int, int], None] = None
    bitmap: Union[np.ndarray, None] = None

    def __post_init__(self):
        if (self.rect is None) == (self.bitmap is None):
            raise ValueError("RegionMask needs exactly one of rect or bitmap")
        if self.rect is not None:
            x0, y0, x1, y1 = (int(v) for v in self.rect)
            if x0 > x1 or y0 > y1 or x0 < 0 or y0 < 0:
                raise ValueError(f"invalid rectangle {self.rect}")
            object.__setattr__(self, "rect", (x0, y0, x1, y1))
        else:
            bm = np.asarray(self.bitmap).astype(bool)
            if bm.ndim != 2:
                raise ValueError("bitmap mask must be 2D")
            bm.setflags(write=False)
            object.__setattr__(self, "bitmap", bm)

    @classmethod
    def from_image(cls, image: GrayImage) -> "RegionMask":
        return cls(bitmap=image.pixels != 0)

    def check_frame(self, width: int, height: int) -> None:
        if self.rect is not None:
            x0, y0, x1, y1 = self.rect
            if x1 >= width or y1 >= height:
                raise ValueError(
                    f"rectangle {self.rect} exceeds the {width}x{height} frame")
        elif self.bitmap.shape != (height, width):
            bh, bw = self.bitmap.shape
            raise ValueError(
                f"mask is {bw}x{bh} but the frame is {width}x{height}")

    def contains(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if self.rect is not None:
            x0, y0, x1, y1 = self.rect
            return (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
        return self.bitmap[ys, xs]


# ---------------------------------------------------------------------------
# PNM

_WHITESPACE = b" \t\r\n\v\f"


def _read_token(data: bytes, pos: int) -> Tuple[bytes, int, int]:
    """Return (token, start, end) skipping whitespace and # comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c in (b"",):
            break
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PnmError("unexpected end of header", start)
    return data[start:pos], start, pos


def _read_int(data: bytes, pos: int, what: str) -> Tuple[int, int]:
    tok, start, end = _read_token(data, pos)
    if not tok.isdigit():
        raise PnmError(f"bad {what} {tok!r}", start)
    return int(tok), end


def load_pgm(data: bytes) -> GrayImage:
    """Decode a P2 (ASCII) or P5 (binary) graymap with maxval <= 255."""
    data = bytes(data)
    if len(data) < 2:
        raise PnmError("file too short for a PGM magic number", 0)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PnmError(f"bad magic {magic!r}, expected P2 or P5", 0)
    pos = 2
    width, pos = _read_int(data, pos, "width")
    height, pos = _read_int(data, pos, "height")
    _, maxval_pos, _ = _read_token(data, pos)
    maxval, pos = _read_int(data, pos, "maxval")
    if width < MIN_SIZE or height < MIN_SIZE:
        raise PnmError(
            f"dimensions {width}x{height} below the {MIN_SIZE}x{MIN_SIZE} minimum", 2)
    if maxval < 1 or maxval > 255:
        raise PnmError(f"maxval {maxval} outside 1..255", maxval_pos)
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
            raise PnmError("missing whitespace before raster", pos)
        pos += 1
        raw = data[pos:pos + count]
        if len(raw) < count:
            raise PnmError(
                f"truncated raster: expected {count} bytes, found {len(raw)}", pos + len(raw))
        px = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
        if int(px.max()) > maxval:
            bad = int(np.argmax(px.ravel() > maxval))
            raise PnmError(f"sample exceeds maxval {maxval}", pos + bad)
    else:
        values = np.empty(count, dtype=np.int64)
        for i in range(count):
            try:
                tok, start, pos = _read_token(data, pos)
            except PnmError as exc:
                raise PnmError(
                    f"truncated raster: expected {count} samples, found {i}",
                    exc.offset) from None
            if not tok.isdigit():
                raise PnmError(f"bad sample {tok!r}", start)
            v = int(tok)
            if v > maxval:
                raise PnmError(f"sample {v} exceeds maxval {maxval}", start)
            values[i] = v
        px = values.reshape(height, width)
    return GrayImage(px.astype(np.uint8))


def save_pnm(image) -> bytes:
    """Encode a GrayImage as P5, or an (H, W, 3) uint8 array as P6."""
    if isinstance(image, GrayImage):
        h, w = image.height, image.width
        return f"P5\n{w} {h}\n255\n".encode("ascii") + image.pixels.tobytes()
    rgb = np.asarray(image)
    if rgb.ndim == 3 and rgb.shape[2] == 3:
        h, w = rgb.shape[:2]
        return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.astype(np.uint8).tobytes()
    if rgb.ndim == 2:
        return save_pnm(GrayImage(rgb))
    raise ValueError(f"cannot encode array of shape {rgb.shape} as PNM")


def load_ppm(data: bytes) -> np.ndarray:
    """Decode a binary P6 pixmap into an (H, W, 3) uint8 array."""
    data = bytes(data)
    if data[:2] != b"P6":
        raise PnmError(f"bad magic {data[:2]!r}, expected P6", 0)
    width, pos = _read_int(data, 2, "width")
    height, pos = _read_int(data, pos, "height")
    maxval, pos = _read_int(data, pos, "maxval")
    if maxval != 255:
        raise PnmError("only maxval 255 pixmaps are supported", pos)
    pos += 1
    count = width * height * 3
    raw = data[pos:pos + count]
    if len(raw) < count:
        raise PnmError("truncated raster", pos + len(raw))
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3).copy()


# ---------------------------------------------------------------------------
# synthetic shapes


@dataclass(frozen=True)
class Rectangle:
    x0: int
    y0: int
    x1: int
    y1: int

    def bounds(self):
        return self.x0, self.y0, self.x1, self.y1

    def translated(self, dx, dy):
        return Rectangle(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)

    def _inside(self, X, Y):
        return (X >= self.x0) & (X <= self.x1) & (Y >= self.y0) & (Y <= self.y1)


@dataclass(frozen=True)
class Ellipse:
    cx: float
    cy: float
    a: float
    b: float

    def bounds(self):
        return self.cx - self.a, self.cy - self.b, self.cx + self.a, self.cy + self.b

    def translated(self, dx, dy):
        return Ellipse(self.cx + dx, self.cy + dy, self.a, self.b)

    def _inside(self, X, Y):
        if self.a < 0 or self.b < 0:
            raise ShapeError("ellipse semi-axes must be non-negative")
        dx = X - self.cx
        dy = Y - self.cy
        # zero semi-axis degenerates to a segment (or a point)
        if self.a == 0:
            inx = dx == 0
        else:
            inx = None
        if self.b == 0:
            iny = dy == 0
        else:
            iny = None
        if inx is not None and iny is not None:
            return inx & iny
        if inx is not None:
            return inx & ((dy / self.b) ** 2 <= 1)
        if iny is not None:
            return iny & ((dx / self.a) ** 2 <= 1)
        return (dx / self.a) ** 2 + (dy / self.b) ** 2 <= 1


def Circle(cx: float, cy: float, r: float) -> Ellipse:
    return Ellipse(cx, cy, r, r)


@dataclass(frozen=True)
class Line:
    """Segment of the given thickness; pixels whose centers lie within
    thickness/2 of the segment are set."""

    x0: float
    y0: float
    x1: float
    y1: float
    thickness: float = 1.0

    def bounds(self):
        return min(self.x0, self.x1), min(self.y0, self.y1), max(self.x0, self.x1), max(self.y0, self.y1)

    def translated(self, dx, dy):
        return Line(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy, self.thickness)

    def _inside(self, X, Y):
        px, py = X - self.x0, Y - self.y0
        vx, vy = self.x1 - self.x0, self.y1 - self.y0
        L2 = vx * vx + vy * vy
        if L2 == 0:
            t = np.zeros_like(px, dtype=float)
        else:
            t = np.clip((px * vx + py * vy) / L2, 0.0, 1.0)
        ex, ey = px - t * vx, py - t * vy
        return ex * ex + ey * ey <= (self.thickness / 2.0) ** 2


@dataclass(frozen=True)
class Polygon:
    """Simple polygon filled by the even-odd rule at pixel centers."""

    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ShapeError("a polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", verts)

    def bounds(self):
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def translated(self, dx, dy):
        return Polygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def _inside(self, X, Y):
        inside = np.zeros(X.shape, dtype=bool)
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            xa, ya = verts[i]
            xb, yb = verts[(i + 1) % n]
            if ya == yb:
                continue
            crosses = (ya > Y) != (yb > Y)
            xint = xa + (Y - ya) * (xb - xa) / (yb - ya)
            inside ^= crosses & (X < xint)
        return inside


Shape = Union[Rectangle, Ellipse, Line, Polygon]


def make_shape(shape: Shape, width: int = 32, height: int = 32,
               foreground: int = 255, background: int = 0) -> GrayImage:
    """Rasterize one shape on a uniform canvas.

    Raises ShapeError if the shape's extent leaves the canvas.
    """
    for v in (foreground, background):
        if not 0 <= v <= 255:
            raise ShapeError(f"intensity {v} outside [0, 255]")
    x0, y0, x1, y1 = shape.bounds()
    if x0 < 0 or y0 < 0 or x1 > width - 1 or y1 > height - 1:
        raise ShapeError(
            f"{shape} extends beyond the {width}x{height} canvas")
    Y, X = np.mgrid[0:height, 0:width]
    inside = shape._inside(X.astype(float), Y.astype(float))
    px = np.where(inside, foreground, background).astype(np.uint8)
    return GrayImage(px)


def parse_shape(text: str) -> Shape:
    """Parse ``kind:params`` descriptors used by the command line.

    rect:x0,y0,x1,y1   ellipse:cx,cy,a,b   circle:cx,cy,r
    line:x0,y0,x1,y1[,thickness]   polygon:x,y;x,y;x,y...
    """
    kind, _, params = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "polygon":
            pts = [tuple(float(v) for v in p.split(",")) for p in params.split(";") if p.strip()]
            if any(len(p) != 2 for p in pts):
                raise ValueError
            return Polygon(tuple(pts))
        nums = [float(v) for v in params.split(",")]
    except ValueError:
        raise ShapeError(f"cannot parse shape parameters in {text!r}") from None
    arity = {"rect": (4,), "rectangle": (4,), "ellipse": (4,), "circle": (3,), "line": (4, 5)}
    if kind not in arity:
        raise ShapeError(f"unknown shape kind {kind!r}")
    if len(nums) not in arity[kind]:
        raise ShapeError(f"{kind} takes {arity[kind][0]} parameters, got {len(nums)}")
    if kind in ("rect", "rectangle"):
        if any(v != int(v) for v in nums):
            raise ShapeError("rectangle bounds must be integers")
        return Rectangle(*(int(v) for v in nums))
    if kind == "ellipse":
        return Ellipse(*nums)
    if kind == "circle":
        return Circle(*nums)
    return Line(*nums)


def edge_pgm(flags: np.ndarray) -> GrayImage:
    """Black/white graymap of a boolean map (True -> 255)."""
    return GrayImage(np.where(flags, 255, 0).astype(np.uint8))


def rescale_to_gray(values: np.ndarray) -> GrayImage:
    vmax = float(np.max(values)) if values.size else 0.0
    if vmax <= 0:
        return GrayImage(np.zeros(values.shape, dtype=np.uint8))
    return GrayImage(np.rint(values * (255.0 / vmax)).astype(np.uint8))


def parse_rect(text: str) -> Tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValueError(f"rectangle must be x0,y0,x1,y1, got {text!r}")
    try:
        return tuple(int(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise ValueError(f"rectangle must be four integers, got {text!r}") from None


def parse_pair(text: str, cast=int) -> Tuple:
    parts: Sequence[str] = text.replace("x", ",").split(",")
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated values, got {text!r}")
    return cast(parts[0]), cast(parts[1])
